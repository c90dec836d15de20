#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rsp/builtins.h"
#include "rsp/errors.h"
#include "rsp/io.h"
#include "test_util.h"

namespace rsp {
namespace {

namespace fs = std::filesystem;

fs::path data(const std::string& name) { return fs::path(RSP_TEST_DATA_DIR) / name; }

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rsp_io_test";
  fs::create_directories(dir);
  return dir / name;
}

void expect_same_protocol(const Protocol& a, const Protocol& b) {
  EXPECT_EQ(a.name, b.name);
  EXPECT_EQ(a.resource_state.amplitudes(), b.resource_state.amplitudes());
  EXPECT_EQ(a.measurement_kind, b.measurement_kind);
  ASSERT_EQ(a.outcomes.size(), b.outcomes.size());
  for (std::size_t m = 0; m < a.outcomes.size(); ++m) {
    EXPECT_EQ(a.outcomes[m].unitary, b.outcomes[m].unitary);
    EXPECT_EQ(a.outcomes[m].probability, b.outcomes[m].probability);
    EXPECT_EQ(a.outcomes[m].failure, b.outcomes[m].failure);
    EXPECT_EQ(a.outcomes[m].label, b.outcomes[m].label);
  }
  const auto sa = a.ensemble.samples(), sb = b.ensemble.samples();
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t s = 0; s < sa.size(); ++s) EXPECT_EQ(sa[s], sb[s]);
  EXPECT_EQ(a.sample_probabilities, b.sample_probabilities);
}

TEST(RoundTrip, BuiltinsAreBitExact) {
  for (Builtin b : {Builtin::teleportation_qubit, Builtin::equatorial_qubit, Builtin::trivial_1d,
                    Builtin::qutrit_block}) {
    Protocol p = builtin_protocol(b);
    fs::path f = scratch(std::string(builtin_name(b)) + ".json");
    save_protocol(p, f);
    expect_same_protocol(p, load_protocol(f));
  }
}

TEST(RoundTrip, RandomFramesUseStatevectors) {
  testing::Rng rng(1);
  Protocol base = builtin_protocol(Builtin::qutrit_block);
  Protocol p = testing::rotate_protocol(base, testing::random_unitary(3, rng), "rotated");
  Json j = protocol_to_json(p);
  EXPECT_TRUE(j["resource"].contains("statevector"));
  expect_same_protocol(p, protocol_from_json(Json::parse(j.dump())));
}

TEST(RoundTrip, PerSampleProbabilitiesAndFailures) {
  Protocol p = testing::retuned_teleportation(CMat::Identity(2, 2), {0, 1, 2}, {0.5, 0.0, 0.5}, {0.5, 0.0, 0.0});
  expect_same_protocol(p, protocol_from_json(Json::parse(protocol_to_json(p).dump())));

  Protocol base = builtin_protocol(Builtin::equatorial_qubit);
  std::vector<Outcome> outcomes = base.outcomes;
  for (Outcome& o : outcomes) o.probability = 0.25;
  Outcome f;
  f.failure = true;
  outcomes.push_back(f);
  outcomes.push_back(f);
  Protocol q("with-failures", base.resource_state, MeasurementKind::povm, outcomes, base.ensemble);
  Json j = protocol_to_json(q);
  EXPECT_FALSE(j["outcomes"][2].contains("unitary"));
  expect_same_protocol(q, protocol_from_json(Json::parse(j.dump())));
}

TEST(RoundTrip, EnsembleKinds) {
  ComposedProtocol c = qutrit_block(0.3, 0.4, 4);
  Json j = ensemble_to_json(c.protocol.ensemble);
  EXPECT_EQ(j["kind"], "block-product");
  Ensemble e = ensemble_from_json(Json::parse(j.dump()));
  EXPECT_EQ(e.samples(), c.protocol.ensemble.samples());
  EXPECT_EQ(e.real_dimension(), c.protocol.ensemble.real_dimension());
}

std::string schema_error_path(const Json& j) {
  try {
    protocol_from_json(j);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

TEST(Schema, MissingResourceNamesTheField) {
  Json j = protocol_to_json(builtin_protocol(Builtin::equatorial_qubit));
  j.erase("resource");
  EXPECT_EQ(schema_error_path(j), "resource");
}

TEST(Schema, ErrorsCarryFieldPaths) {
  const Json base = protocol_to_json(builtin_protocol(Builtin::equatorial_qubit));
  Json j = base;
  j["outcomes"][1]["unitary"][0][0] = Json::array({2.0, 0.0});
  EXPECT_EQ(schema_error_path(j), "outcomes[1].unitary");

  j = base;
  j["outcomes"][0]["unitary"][1][0] = "zero";
  EXPECT_EQ(schema_error_path(j), "outcomes[0].unitary[1][0]");

  j = base;
  j["measurement_kind"] = "weak";
  EXPECT_EQ(schema_error_path(j), "measurement_kind");

  j = base;
  j["ensemble"]["kind"] = "cloud";
  EXPECT_EQ(schema_error_path(j), "ensemble.kind");

  j = base;
  j["resource"] = {{"schmidt", {0.5, 0.5}}};
  EXPECT_EQ(schema_error_path(j), "resource");

  j = base;
  j["dim_b"] = "two";
  EXPECT_EQ(schema_error_path(j), "dim_b");
}

TEST(Schema, UnreadableAndMalformedFiles) {
  EXPECT_THROW(load_protocol(scratch("does-not-exist.json")), SchemaError);
  fs::path f = scratch("malformed.json");
  std::ofstream(f) << "{\"name\": ";
  EXPECT_THROW(load_protocol(f), SchemaError);
}

TEST(HandWritten, QutritFilePassesVerifier) {
  Protocol p = load_protocol(data("qutrit.json"));
  EXPECT_EQ(p.dim(), 3);
  VerificationReport v = verify_rsp_condition(p);
  EXPECT_TRUE(v.pass);
  EXPECT_LT(v.max_rsp_residual, 1e-9);
}

TEST(Config, QutritConfigReproducesBuiltin) {
  ComposedProtocol c = build_from_config(construction_config_from_json(read_json_file(data("qutrit_config.json"))));
  ComposedProtocol ref = qutrit_block(0.3, 0.4, 8);
  ASSERT_EQ(c.protocol.outcomes.size(), 4u);
  // Same unitary set, independent of enumeration order.
  for (const Outcome& o : ref.protocol.outcomes) {
    bool found = false;
    for (const Outcome& q : c.protocol.outcomes) found = found || (q.unitary - o.unitary).norm() < 1e-15;
    EXPECT_TRUE(found) << o.label;
  }
  EXPECT_TRUE(c.verification->pass);
}

TEST(Config, MaskFollowsSpectrumListingOrder) {
  ComposedProtocol c = build_from_config(construction_config_from_json(read_json_file(data("klein_masked.json"))));
  EXPECT_TRUE(c.verification->pass);
  // Two tuples times four group elements.
  EXPECT_EQ(c.protocol.outcomes.size(), 8u);
  EXPECT_EQ(c.protocol.dim(), 6);
}

TEST(Config, SchemaErrors) {
  Json j = read_json_file(data("qutrit_config.json"));
  j["blocks"][0]["sub"] = "teleportation-qubit";
  try {
    construction_config_from_json(j);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "blocks[0].sub");
  }
  j = read_json_file(data("qutrit_config.json"));
  j["blocks"].erase(1);
  EXPECT_THROW(construction_config_from_json(j), SchemaError);
}

TEST(Reports, SerializeKeyFields) {
  Protocol p = builtin_protocol(Builtin::equatorial_qubit);
  Json v = to_json(verify_rsp_condition(p), true);
  EXPECT_TRUE(v["pass"].get<bool>());
  EXPECT_EQ(v["per_sample_fidelities"].size(), 48u);
  Json o = to_json(obliviousness_test(p));
  EXPECT_EQ(o["status"], "oblivious");
  SimConfig c;
  c.runs = 10;
  Json s = to_json(simulate(p, c));
  EXPECT_EQ(s["runs"], 10);
  EXPECT_EQ(s["target_index"], 0);
}

}  // namespace
}  // namespace rsp
