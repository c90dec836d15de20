#include "rsp/io.h"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "rsp/builtins.h"

namespace rsp {

namespace {

std::string at(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const Json& require(const Json& obj, std::string_view key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(at(path, key), "missing required field");
  return *it;
}

const Json* optional_field(const Json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<long long>();
}

const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

std::vector<int> int_list(const Json& j, const std::string& path) {
  std::vector<int> out;
  const Json& arr = array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(static_cast<int>(integer(arr[i], index(path, i))));
  return out;
}

std::vector<double> number_list(const Json& j, const std::string& path) {
  std::vector<double> out;
  const Json& arr = array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(number(arr[i], index(path, i)));
  return out;
}

bool is_real_diagonal(const CMat& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const Complex z = m(i, j);
      if (i != j && z != Complex(0.0, 0.0)) return false;
      if (i == j && (z.imag() != 0.0 || z.real() < 0.0)) return false;
    }
  }
  return true;
}

SubProtocol sub_from_json(const Json& j, const std::string& path, int sub_grid) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "equatorial-qubit") return equatorial_sub(sub_grid);
    if (name == "trivial-1d") return trivial_sub();
    throw SchemaError(path, "unknown builtin sub-protocol '" + name + "'");
  }
  if (!j.is_object()) throw SchemaError(path, "expected a builtin name or an inline sub-protocol");
  SubProtocol sub;
  sub.name = j.value("name", std::string("inline"));
  const std::string upath = at(path, "unitaries");
  const Json& us = array(require(j, "unitaries", path), upath);
  for (std::size_t i = 0; i < us.size(); ++i) sub.unitaries.push_back(matrix_from_json(us[i], index(upath, i)));
  sub.probabilities = number_list(require(j, "probabilities", path), at(path, "probabilities"));
  sub.ensemble = ensemble_from_json(require(j, "ensemble", path), at(path, "ensemble"));
  if (sub.probabilities.size() != sub.unitaries.size()) {
    throw SchemaError(at(path, "probabilities"), "one probability per unitary is required");
  }
  return sub;
}

}  // namespace

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Json vector_to_json(const CVec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

Json matrix_to_json(const CMat& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

Complex complex_from_json(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw SchemaError(path, "expected a [re, im] pair");
  return {number(j[0], index(path, 0)), number(j[1], index(path, 1))};
}

CVec vector_from_json(const Json& j, const std::string& path) {
  const Json& arr = array(j, path);
  if (arr.empty()) throw SchemaError(path, "vector must not be empty");
  CVec v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(arr[i], index(path, i));
  return v;
}

CMat matrix_from_json(const Json& j, const std::string& path) {
  const Json& rows = array(j, path);
  if (rows.empty()) throw SchemaError(path, "matrix must not be empty");
  const std::size_t cols = array(rows[0], index(path, 0)).size();
  CMat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string rpath = index(path, i);
    const Json& row = array(rows[i], rpath);
    if (row.size() != cols) throw SchemaError(rpath, "matrix rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = complex_from_json(row[c], index(rpath, c));
    }
  }
  return m;
}

Json ensemble_to_json(const Ensemble& e) {
  if (const auto* s = e.as_sample_list()) {
    Json samples = Json::array();
    for (const CVec& v : s->states) samples.push_back(vector_to_json(v));
    return {{"kind", "sample-list"}, {"samples", samples}, {"declared_dim", s->declared_dim}};
  }
  if (const auto* q = e.as_equatorial()) {
    return {{"kind", "equatorial"}, {"grid", q->grid}, {"phase_offset", q->phase_offset}};
  }
  const auto* bp = e.as_block_product();
  Json blocks = Json::array();
  for (const EnsembleBlock& b : bp->blocks) {
    blocks.push_back({{"weight", b.weight}, {"basis", matrix_to_json(b.basis)}, {"sub", ensemble_to_json(*b.sub)}});
  }
  return {{"kind", "block-product"}, {"phase_grid", bp->phase_grid}, {"cap", bp->cap}, {"blocks", blocks}};
}

Ensemble ensemble_from_json(const Json& j, const std::string& path) {
  const Json& kind_j = require(j, "kind", path);
  if (!kind_j.is_string()) throw SchemaError(at(path, "kind"), "expected a string");
  const std::string kind = kind_j.get<std::string>();
  try {
    if (kind == "sample-list") {
      const std::string spath = at(path, "samples");
      const Json& arr = array(require(j, "samples", path), spath);
      std::vector<CVec> states;
      for (std::size_t i = 0; i < arr.size(); ++i) states.push_back(vector_from_json(arr[i], index(spath, i)));
      int declared = 0;
      if (const Json* d = optional_field(j, "declared_dim")) declared = static_cast<int>(integer(*d, at(path, "declared_dim")));
      return Ensemble::sample_list(std::move(states), declared);
    }
    if (kind == "equatorial") {
      int grid = 24;
      double offset = 0.0;
      if (const Json* g = optional_field(j, "grid")) grid = static_cast<int>(integer(*g, at(path, "grid")));
      if (const Json* o = optional_field(j, "phase_offset")) offset = number(*o, at(path, "phase_offset"));
      return Ensemble::equatorial(grid, offset);
    }
    if (kind == "block-product") {
      const std::string bpath = at(path, "blocks");
      const Json& arr = array(require(j, "blocks", path), bpath);
      std::vector<EnsembleBlock> blocks;
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = index(bpath, i);
        EnsembleBlock b;
        b.weight = number(require(arr[i], "weight", p), at(p, "weight"));
        b.basis = matrix_from_json(require(arr[i], "basis", p), at(p, "basis"));
        b.sub = std::make_shared<const Ensemble>(ensemble_from_json(require(arr[i], "sub", p), at(p, "sub")));
        blocks.push_back(std::move(b));
      }
      int grid = 8;
      std::size_t cap = 4096;
      if (const Json* g = optional_field(j, "phase_grid")) grid = static_cast<int>(integer(*g, at(path, "phase_grid")));
      if (const Json* c = optional_field(j, "cap")) cap = static_cast<std::size_t>(integer(*c, at(path, "cap")));
      return Ensemble::block_product(std::move(blocks), grid, cap);
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
  throw SchemaError(at(path, "kind"), "unknown ensemble kind '" + kind + "'");
}

Json protocol_to_json(const Protocol& p) {
  Json j;
  j["name"] = p.name;
  j["dim_a"] = p.resource_state.dim_a();
  j["dim_b"] = p.resource_state.dim_b();
  const CMat& amps = p.resource_state.amplitudes();
  if (is_real_diagonal(amps)) {
    Json coeffs = Json::array();
    for (Eigen::Index i = 0; i < amps.rows(); ++i) coeffs.push_back(amps(i, i).real());
    j["resource"] = {{"schmidt", coeffs}};
  } else {
    Json flat = Json::array();
    for (Eigen::Index i = 0; i < amps.rows(); ++i) {
      for (Eigen::Index c = 0; c < amps.cols(); ++c) flat.push_back(complex_to_json(amps(i, c)));
    }
    j["resource"] = {{"statevector", flat}};
  }
  j["measurement_kind"] = to_string(p.measurement_kind);
  Json outcomes = Json::array();
  for (const Outcome& o : p.outcomes) {
    Json oj;
    if (!o.failure || o.unitary.size() > 0) oj["unitary"] = matrix_to_json(o.unitary);
    if (o.probability) oj["probability"] = *o.probability;
    oj["failure"] = o.failure;
    if (!o.label.empty()) oj["label"] = o.label;
    outcomes.push_back(std::move(oj));
  }
  j["outcomes"] = outcomes;
  j["ensemble"] = ensemble_to_json(p.ensemble);
  if (!p.sample_probabilities.empty()) j["sample_probabilities"] = p.sample_probabilities;
  return j;
}

Protocol protocol_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("", "protocol must be a JSON object");
  const long long dim_a = integer(require(j, "dim_a", ""), "dim_a");
  const long long dim_b = integer(require(j, "dim_b", ""), "dim_b");
  if (dim_a < 1 || dim_b < 1) throw SchemaError("dim_a", "dimensions must be positive");

  const Json& res = require(j, "resource", "");
  CMat amps;
  if (const Json* s = optional_field(res, "schmidt")) {
    std::vector<double> coeffs = number_list(*s, "resource.schmidt");
    if (static_cast<long long>(coeffs.size()) != dim_a || dim_a != dim_b) {
      throw SchemaError("resource.schmidt", "expected dim_a == dim_b coefficients");
    }
    amps = CMat::Zero(dim_a, dim_b);
    for (std::size_t i = 0; i < coeffs.size(); ++i) amps(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = coeffs[i];
  } else if (const Json* sv = optional_field(res, "statevector")) {
    CVec flat = vector_from_json(*sv, "resource.statevector");
    if (flat.size() != dim_a * dim_b) throw SchemaError("resource.statevector", "expected dim_a * dim_b amplitudes");
    amps.resize(dim_a, dim_b);
    for (Eigen::Index i = 0; i < dim_a; ++i) {
      for (Eigen::Index c = 0; c < dim_b; ++c) amps(i, c) = flat(i * dim_b + c);
    }
  } else {
    throw SchemaError("resource", "expected either 'schmidt' or 'statevector'");
  }
  BipartiteState state;
  try {
    state = BipartiteState::from_amplitudes(amps);
  } catch (const Error& e) {
    throw SchemaError("resource", e.what());
  }

  const Json& kind_j = require(j, "measurement_kind", "");
  if (!kind_j.is_string()) throw SchemaError("measurement_kind", "expected a string");
  MeasurementKind kind;
  if (kind_j == "projective") {
    kind = MeasurementKind::projective;
  } else if (kind_j == "povm") {
    kind = MeasurementKind::povm;
  } else {
    throw SchemaError("measurement_kind", "expected 'projective' or 'povm'");
  }

  const Json& outs = array(require(j, "outcomes", ""), "outcomes");
  if (outs.empty()) throw SchemaError("outcomes", "at least one outcome is required");
  std::vector<Outcome> outcomes;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    const std::string p = index("outcomes", i);
    if (!outs[i].is_object()) throw SchemaError(p, "expected an object");
    Outcome o;
    if (const Json* f = optional_field(outs[i], "failure")) {
      if (!f->is_boolean()) throw SchemaError(at(p, "failure"), "expected a boolean");
      o.failure = f->get<bool>();
    }
    if (const Json* pr = optional_field(outs[i], "probability")) o.probability = number(*pr, at(p, "probability"));
    if (const Json* l = optional_field(outs[i], "label")) o.label = l->get<std::string>();
    if (!o.failure) {
      o.unitary = matrix_from_json(require(outs[i], "unitary", p), at(p, "unitary"));
      if (o.unitary.rows() != dim_b || o.unitary.cols() != dim_b) {
        throw SchemaError(at(p, "unitary"), "expected a dim_b x dim_b matrix");
      }
      if (!is_unitary(o.unitary, 1e-8)) throw SchemaError(at(p, "unitary"), "matrix is not unitary");
    } else if (const Json* u = optional_field(outs[i], "unitary")) {
      o.unitary = matrix_from_json(*u, at(p, "unitary"));
    }
    outcomes.push_back(std::move(o));
  }

  Ensemble ensemble = ensemble_from_json(require(j, "ensemble", ""), "ensemble");
  std::vector<std::vector<double>> table;
  if (const Json* t = optional_field(j, "sample_probabilities")) {
    const Json& rows = array(*t, "sample_probabilities");
    for (std::size_t i = 0; i < rows.size(); ++i) table.push_back(number_list(rows[i], index("sample_probabilities", i)));
  }

  std::string name = j.value("name", std::string());
  Protocol protocol(std::move(name), std::move(state), kind, std::move(outcomes), std::move(ensemble), std::move(table));
  try {
    protocol.validate();
  } catch (const Error& e) {
    throw SchemaError("", e.what());
  }
  return protocol;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string(), "cannot open file");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw SchemaError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError(path.string(), "cannot open file for writing");
  out << j.dump(2) << '\n';
  if (!out) throw SchemaError(path.string(), "write failed");
}

Protocol load_protocol(const std::filesystem::path& path) { return protocol_from_json(read_json_file(path)); }

void save_protocol(const Protocol& protocol, const std::filesystem::path& path) {
  write_json_file(protocol_to_json(protocol), path);
}

ConstructionConfig construction_config_from_json(const Json& j) {
  ConstructionConfig config;
  if (!j.is_object()) throw SchemaError("", "construction config must be a JSON object");
  if (const Json* n = optional_field(j, "name")) config.name = n->get<std::string>();
  if (const Json* g = optional_field(j, "phase_grid")) config.phase_grid = static_cast<int>(integer(*g, "phase_grid"));
  if (const Json* c = optional_field(j, "cap")) config.cap = static_cast<std::size_t>(integer(*c, "cap"));
  int sub_grid = 8;
  if (const Json* g = optional_field(j, "sub_grid")) sub_grid = static_cast<int>(integer(*g, "sub_grid"));

  const Json& spectrum = array(require(require(j, "rho_b", ""), "spectrum", "rho_b"), "rho_b.spectrum");
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const std::string p = index("rho_b.spectrum", i);
    SpectrumEntry e;
    e.eigenvalue = number(require(spectrum[i], "eigenvalue", p), at(p, "eigenvalue"));
    e.dim = static_cast<int>(integer(require(spectrum[i], "dim", p), at(p, "dim")));
    config.spectrum.push_back(e);
  }
  config.orders = int_list(require(require(j, "group", ""), "orders", "group"), "group.orders");

  const Json& blocks = array(require(j, "blocks", ""), "blocks");
  if (blocks.size() != config.spectrum.size()) throw SchemaError("blocks", "one block entry per spectrum entry is required");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::string p = index("blocks", i);
    config.subs.push_back(sub_from_json(require(blocks[i], "sub", p), at(p, "sub"), sub_grid));
    if (const Json* e = optional_field(blocks[i], "element")) {
      config.elements.push_back(e->is_array() ? int_list(*e, at(p, "element"))
                                              : std::vector<int>{static_cast<int>(integer(*e, at(p, "element")))});
    } else {
      config.elements.push_back(std::nullopt);
    }
  }
  if (const Json* mask = optional_field(j, "outcome_mask")) {
    std::vector<std::vector<int>> tuples;
    const Json& arr = array(*mask, "outcome_mask");
    for (std::size_t i = 0; i < arr.size(); ++i) tuples.push_back(int_list(arr[i], index("outcome_mask", i)));
    config.outcome_mask = std::move(tuples);
  }
  if (const Json* probs = optional_field(j, "probabilities")) config.probabilities = number_list(*probs, "probabilities");
  return config;
}

ComposedProtocol build_from_config(const ConstructionConfig& config) {
  SpectralBlocks blocks = blocks_from_spectrum(config.spectrum);
  AbelianGroup group(config.orders);

  // Same ordering blocks_from_spectrum applies: decreasing eigenvalue, stable.
  std::vector<std::size_t> order(config.spectrum.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.spectrum[a].eigenvalue > config.spectrum[b].eigenvalue;
  });

  SubProtocolAssignment subs;
  const bool any_element = std::any_of(config.elements.begin(), config.elements.end(), [](const auto& e) { return e.has_value(); });
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    subs.subs.push_back(config.subs[order[pos]]);
    if (any_element) {
      const auto& e = config.elements[order[pos]];
      if (!e) throw ConstructionError("either every block or no block must name its group element");
      if (e->size() == 1 && group.orders().size() != 1) {
        subs.block_elements.push_back(static_cast<std::size_t>((*e)[0]));
      } else {
        subs.block_elements.push_back(group.index_of(*e));
      }
    }
  }

  BlockProbabilities probabilities;
  if (config.outcome_mask) {
    std::vector<std::vector<int>> mask;
    for (const auto& tuple : *config.outcome_mask) {
      if (tuple.size() != order.size()) throw ConstructionError("outcome mask tuple has the wrong length");
      std::vector<int> sorted(order.size());
      for (std::size_t pos = 0; pos < order.size(); ++pos) sorted[pos] = tuple[order[pos]];
      mask.push_back(std::move(sorted));
    }
    probabilities = masked_probability_assignment(subs, group, std::move(mask), config.probabilities);
  } else {
    if (config.probabilities) throw ConstructionError("explicit probabilities require an outcome mask");
    probabilities = default_probability_assignment(subs, group);
  }

  ComposeOptions options;
  options.name = config.name;
  options.phase_grid = config.phase_grid;
  options.cap = config.cap;
  return compose_block_protocol(blocks, group, subs, probabilities, options);
}

Json to_json(const VerificationReport& r, bool include_fidelities) {
  Json j = {{"pass", r.pass},
            {"tolerance", r.tolerance},
            {"samples", r.samples},
            {"max_rsp_residual", r.max_rsp_residual},
            {"completeness_residual", r.completeness_residual},
            {"probability_closure_residual", r.probability_closure_residual},
            {"probability_inconsistency", r.probability_inconsistency},
            {"min_fidelity", r.min_fidelity}};
  if (include_fidelities) {
    Json f = Json::array();
    for (const SampleFidelity& s : r.per_sample_fidelities) f.push_back({s.sample, s.outcome, s.fidelity});
    j["per_sample_fidelities"] = f;
  }
  return j;
}

Json to_json(const MeasurementValidityReport& r) {
  return {{"pass", r.pass},
          {"measurement_kind", to_string(r.kind)},
          {"completeness_residual", r.completeness_residual},
          {"orthonormality_residual", r.orthonormality_residual}};
}

Json to_json(const LargeEnsembleWitness& w) {
  Json j = {{"ok", w.ok}, {"rank", w.rank}, {"basis", w.basis}};
  j["superposition"] = w.superposition ? Json(*w.superposition) : Json(nullptr);
  return j;
}

Json to_json(const OblivVerdict& v) {
  Json fits = Json::array();
  for (const AntilinearFit& f : v.fits) {
    fits.push_back({{"outcome", f.outcome},
                    {"residual", f.residual},
                    {"condition_number", f.condition_number},
                    {"rank", f.rank},
                    {"matrix", matrix_to_json(f.op.matrix())}});
  }
  return {{"status", to_string(v.status)},
          {"probability_spread", v.probability_spread},
          {"probabilities_independent", v.probabilities_independent},
          {"fits_succeed", v.fits_succeed},
          {"consistency_alarm", v.consistency_alarm},
          {"witness", to_json(v.witness)},
          {"fits", fits},
          {"linear_fit_residuals", v.linear_fit_residuals},
          {"correction_identity_residual", v.correction_identity_residual}};
}

Json to_json(const CommutationResult& c) {
  return {{"pass", c.pass}, {"tolerance", c.tolerance}, {"norms", c.norms}};
}

Json to_json(const LOperatorSet& l) {
  Json ops = Json::array();
  for (const CMat& m : l.ops) ops.push_back(matrix_to_json(m));
  return {{"reference", l.reference},
          {"unitary_proportional", l.unitary_proportional},
          {"ratios", l.ratios},
          {"scales", l.scales},
          {"deviations", l.deviations},
          {"trace_identity_errors", l.trace_identity_errors},
          {"ops", ops}};
}

Json to_json(const ProportionalityReport& p) {
  return {{"l_unitary_proportional", p.l_unitary_proportional},
          {"commutation_holds", p.commutation_holds},
          {"consistent", p.consistent},
          {"max_l_deviation", p.max_l_deviation},
          {"max_commutation_norm", p.max_commutation_norm},
          {"rho_a_commutes", p.rho_a_commutes},
          {"rho_a_commutator_norms", p.rho_a_commutator_norms}};
}

Json to_json(const CancellationAudit& a) {
  return {{"pass", a.pass},
          {"tolerance", a.tolerance},
          {"max_offdiagonal_norm", a.max_offdiagonal_norm},
          {"pair_norms", a.pair_norms}};
}

Json to_json(const SimReport& r) {
  Json j = {{"runs", r.runs},
            {"seed", r.seed},
            {"probabilities", r.probabilities},
            {"counts", r.counts},
            {"frequencies", r.frequencies},
            {"failures", r.failures},
            {"min_fidelity", r.min_fidelity},
            {"mean_fidelity", r.mean_fidelity},
            {"chi_square", r.chi_square},
            {"degrees_of_freedom", r.degrees_of_freedom},
            {"p_value", r.p_value}};
  j["target_index"] = r.target_index ? Json(*r.target_index) : Json(nullptr);
  if (!r.sequence.empty()) j["sequence"] = r.sequence;
  return j;
}

}  // namespace rsp
