#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rsp/builtins.h"
#include "rsp/cli.h"
#include "rsp/io.h"

namespace rsp {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "rsp");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "rsp_cli_test";
  fs::create_directories(dir);
  return (dir / name).string();
}

std::string data(const std::string& name) { return (fs::path(RSP_TEST_DATA_DIR) / name).string(); }

std::string saved_builtin(Builtin b) {
  std::string path = scratch(std::string(builtin_name(b)) + ".json");
  save_protocol(builtin_protocol(b), path);
  return path;
}

TEST(Cli, DemoQutritPrintsBlockUnitaries) {
  CliRun r = run({"demo", "qutrit", "--lambda1", "0.3", "--lambda2", "0.4"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  for (const char* d : {"diag(-1, -1, 1)", "diag(1, 1, 1)", "diag(-1, 1, 1)", "diag(1, -1, 1)"}) {
    EXPECT_NE(r.err.find(d), std::string::npos) << d;
  }
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["unitaries"].size(), 4u);
  EXPECT_EQ(j["obliviousness"]["status"], "oblivious");
  EXPECT_TRUE(j["verification"]["pass"].get<bool>());
}

TEST(Cli, DemoRejectsInvalidSpectrum) {
  EXPECT_EQ(run({"demo", "qutrit", "--lambda1", "0.3", "--lambda2", "0.5"}).code, kExitPrecondition);
  EXPECT_EQ(run({"demo", "ququart"}).code, kExitIoOrSchema);
}

TEST(Cli, VerifyPassesAndFails) {
  CliRun ok = run({"verify", saved_builtin(Builtin::teleportation_qubit)});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_TRUE(Json::parse(ok.out)["verification"]["pass"].get<bool>());

  Protocol bad = builtin_protocol(Builtin::equatorial_qubit);
  bad.outcomes[1].unitary = pauli::x();
  const std::string path = scratch("corrupted.json");
  save_protocol(bad, path);
  CliRun fail = run({"verify", path});
  EXPECT_EQ(fail.code, kExitVerificationFailed);
  EXPECT_FALSE(Json::parse(fail.out)["verification"]["pass"].get<bool>());
}

TEST(Cli, IoAndSchemaErrors) {
  EXPECT_EQ(run({"verify", scratch("missing.json")}).code, kExitIoOrSchema);
  Json j = protocol_to_json(builtin_protocol(Builtin::equatorial_qubit));
  j.erase("resource");
  const std::string path = scratch("no-resource.json");
  write_json_file(j, path);
  CliRun r = run({"verify", path});
  EXPECT_EQ(r.code, kExitIoOrSchema);
  EXPECT_NE(r.err.find("resource"), std::string::npos);
  EXPECT_EQ(run({"verify"}).code, kExitIoOrSchema);
  EXPECT_EQ(run({"frobnicate"}).code, kExitIoOrSchema);
  EXPECT_EQ(run({"builtin", "nothing", "-o", scratch("x.json")}).code, kExitIoOrSchema);
}

TEST(Cli, AnalyzeReportsVerdict) {
  CliRun r = run({"analyze", saved_builtin(Builtin::equatorial_qubit)});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_EQ(j["obliviousness"]["status"], "oblivious");
  EXPECT_TRUE(j["commutation"]["commutation_holds"].get<bool>());

  Protocol bad = builtin_protocol(Builtin::equatorial_qubit);
  bad.outcomes[1].unitary = pauli::x();
  const std::string path = scratch("inexact.json");
  save_protocol(bad, path);
  EXPECT_EQ(run({"analyze", path}).code, kExitPrecondition);
}

TEST(Cli, SimulateIsDeterministic) {
  const std::string path = saved_builtin(Builtin::teleportation_qubit);
  CliRun a = run({"simulate", path, "--runs", "2000", "--seed", "42"});
  CliRun b = run({"simulate", path, "--runs", "2000", "--seed", "42"});
  EXPECT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out, b.out);
  CliRun c = run({"simulate", path, "--runs", "2000", "--seed", "42", "--target", "3", "--batches", "4"});
  EXPECT_EQ(Json::parse(c.out)["target_index"], 3);
  EXPECT_EQ(run({"simulate", path, "--runs", "0"}).code, kExitIoOrSchema);
}

TEST(Cli, SimulateRefusesUnverifiedWithoutFlag) {
  Protocol bad = builtin_protocol(Builtin::equatorial_qubit);
  bad.outcomes[1].unitary = pauli::x();
  const std::string path = scratch("unverified.json");
  save_protocol(bad, path);
  EXPECT_EQ(run({"simulate", path, "--runs", "10"}).code, kExitPrecondition);
  EXPECT_EQ(run({"simulate", path, "--runs", "10", "--skip-verify"}).code, kExitOk);
}

TEST(Cli, ReduceThenLift) {
  const std::string in = saved_builtin(Builtin::qutrit_block);
  const std::string reduced = scratch("reduced.json");
  CliRun r = run({"reduce", in, "-o", reduced});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  Protocol rp = load_protocol(reduced);
  EXPECT_LT((rp.rho_b() - CMat::Identity(3, 3) / 3.0).norm(), 1e-12);

  const std::string rho = scratch("rho.json");
  std::ofstream(rho) << "[0.3, 0.3, 0.4]\n";
  const std::string lifted = scratch("lifted.json");
  CliRun l = run({"reduce", reduced, "-o", lifted, "--rho", rho});
  EXPECT_EQ(l.code, kExitOk) << l.err;
  Protocol lp = load_protocol(lifted);
  const auto a = load_protocol(in).ensemble.samples(), b = lp.ensemble.samples();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t s = 0; s < a.size(); ++s) EXPECT_GE(fidelity(a[s], b[s]), 1.0 - 1e-9);
}

TEST(Cli, ReduceRefusesCommutationViolation) {
  RVec coeffs(2);
  coeffs << std::sqrt(0.7), std::sqrt(0.3);
  std::vector<Outcome> outcomes(2);
  outcomes[0].unitary = pauli::identity();
  outcomes[0].probability = 0.5;
  outcomes[1].unitary = pauli::x();
  outcomes[1].probability = 0.5;
  Protocol p("sigma-x", BipartiteState::from_schmidt(coeffs), MeasurementKind::projective, outcomes,
             Ensemble::equatorial(8));
  const std::string path = scratch("sigma-x.json");
  save_protocol(p, path);
  CliRun r = run({"reduce", path, "-o", scratch("never.json")});
  EXPECT_EQ(r.code, kExitPrecondition);
  EXPECT_NE(r.err.find("0.56"), std::string::npos) << r.err;
}

TEST(Cli, ConstructRunsAudit) {
  const std::string out = scratch("constructed.json");
  CliRun r = run({"construct", data("qutrit_config.json"), "-o", out});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  Json j = Json::parse(r.out);
  EXPECT_TRUE(j["audit"]["pass"].get<bool>());
  EXPECT_TRUE(verify_rsp_condition(load_protocol(out)).pass);
}

TEST(Cli, BuiltinWritesLoadableFile) {
  const std::string out = scratch("builtin-eq.json");
  EXPECT_EQ(run({"builtin", "equatorial-qubit", "-o", out}).code, kExitOk);
  EXPECT_EQ(run({"verify", out}).code, kExitOk);
}

}  // namespace
}  // namespace rsp
