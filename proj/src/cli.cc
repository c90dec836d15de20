#include "rsp/cli.h"

#include <cmath>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "rsp/builtins.h"
#include "rsp/io.h"
#include "rsp/obliviousness.h"
#include "rsp/reduction.h"
#include "rsp/simulate.h"

namespace rsp {

namespace {

std::string format_real(double x) {
  if (std::abs(x) < 1e-12) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string format_complex(Complex z) {
  if (std::abs(z.imag()) < 1e-12) return format_real(z.real());
  return "(" + format_real(z.real()) + (z.imag() < 0 ? "-" : "+") + format_real(std::abs(z.imag())) + "i)";
}

bool is_diagonal(const CMat& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && std::abs(m(i, j)) > 1e-12) return false;
    }
  }
  return true;
}

std::string describe_matrix(const CMat& m) {
  std::string s;
  if (is_diagonal(m)) {
    s = "diag(";
    for (Eigen::Index i = 0; i < m.rows(); ++i) s += (i ? ", " : "") + format_complex(m(i, i));
    return s + ")";
  }
  s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    s += i ? "; " : "";
    for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + format_complex(m(i, j));
  }
  return s + "]";
}

// A density matrix file holds either a matrix of [re, im] pairs or a list of
// real diagonal entries.
CMat load_density(const std::string& path) {
  Json j = read_json_file(path);
  if (j.is_array() && !j.empty() && j[0].is_number()) {
    CMat rho = CMat::Zero(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) throw SchemaError(path + "[" + std::to_string(i) + "]", "expected a number");
      rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return rho;
  }
  return matrix_from_json(j, path);
}

void summarize_verification(const VerificationReport& v, const MeasurementValidityReport& m, std::ostream& err) {
  err << "exact-RSP condition: " << (v.pass ? "PASS" : "FAIL") << " (max residual " << v.max_rsp_residual
      << ", tolerance " << v.tolerance << ", " << v.samples << " samples)\n";
  err << "measurement (" << to_string(m.kind) << "): " << (m.pass ? "PASS" : "FAIL") << " (completeness residual "
      << m.completeness_residual << ")\n";
  err << "min fidelity: " << v.min_fidelity << "\n";
}

void summarize_verdict(const OblivVerdict& v, std::ostream& err) {
  err << "obliviousness: " << to_string(v.status) << "\n";
  double spread = 0.0;
  for (double s : v.probability_spread) spread = std::max(spread, s);
  double fit = 0.0;
  for (const AntilinearFit& f : v.fits) fit = std::max(fit, f.residual);
  err << "  max probability spread " << spread << ", max antilinear fit residual " << fit << "\n";
  if (v.consistency_alarm) err << "  warning: probability and fit criteria disagree\n";
}

int cmd_verify(const std::string& file, std::optional<double> tol, std::ostream& out, std::ostream& err) {
  Protocol p = load_protocol(file);
  VerifyOptions options;
  options.tolerance = tol;
  VerificationReport v = verify_rsp_condition(p, options);
  MeasurementValidityReport m = check_measurement_validity(p, options);
  out << Json{{"protocol", p.name}, {"verification", to_json(v)}, {"measurement", to_json(m)}}.dump(2) << "\n";
  summarize_verification(v, m, err);
  return v.pass && m.pass ? kExitOk : kExitVerificationFailed;
}

int cmd_analyze(const std::string& file, std::ostream& out, std::ostream& err) {
  Protocol p = load_protocol(file);
  OblivVerdict v = obliviousness_test(p);
  Json j = {{"protocol", p.name}, {"obliviousness", to_json(v)}};
  if (p.deterministic()) {
    try {
      ProportionalityReport prop = proportional_unitary_iff_commutation(p);
      j["commutation"] = to_json(prop);
      err << "commutation criterion: " << (prop.commutation_holds ? "holds" : "violated") << " (max norm "
          << prop.max_commutation_norm << ")\n";
    } catch (const PreconditionError& e) {
      j["commutation"] = {{"skipped", e.what()}};
    }
  }
  out << j.dump(2) << "\n";
  summarize_verdict(v, err);
  return kExitOk;
}

int cmd_reduce(const std::string& file, const std::string& output, const std::string& rho_path,
               const std::string& u0_path, std::size_t reference, std::ostream& out, std::ostream& err) {
  Protocol p = load_protocol(file);
  Json j = {{"input", p.name}};
  Protocol result = [&] {
    if (!rho_path.empty()) {
      CMat rho = load_density(rho_path);
      std::optional<CMat> u0;
      if (!u0_path.empty()) u0 = matrix_from_json(read_json_file(u0_path), u0_path);
      Protocol lifted = lift_to_partial(p, rho, u0, reference);
      j["direction"] = "lift";
      return lifted;
    }
    ReducedProtocol reduced = reduce_to_maximally_entangled(p, reference);
    j["direction"] = "reduce";
    j["forward"] = matrix_to_json(reduced.forward);
    j["backward"] = matrix_to_json(reduced.backward);
    return std::move(reduced.protocol);
  }();
  VerificationReport v = verify_rsp_condition(result);
  save_protocol(result, output);
  j["output"] = output;
  j["verification"] = to_json(v);
  out << j.dump(2) << "\n";
  err << j["direction"].get<std::string>() << ": wrote " << output << "; exact-RSP condition "
      << (v.pass ? "PASS" : "FAIL") << " (max residual " << v.max_rsp_residual << ")\n";
  return v.pass ? kExitOk : kExitVerificationFailed;
}

int cmd_construct(const std::string& file, const std::string& output, std::ostream& out, std::ostream& err) {
  ConstructionConfig config = construction_config_from_json(read_json_file(file));
  ComposedProtocol composed = build_from_config(config);
  CancellationAudit audit = offdiagonal_cancellation_audit(composed);
  save_protocol(composed.protocol, output);
  Json j = {{"protocol", composed.protocol.name},
            {"output", output},
            {"outcomes", composed.protocol.outcomes.size()},
            {"max_commutation_norm", composed.max_commutation_norm},
            {"audit", to_json(audit)}};
  if (composed.verification) j["verification"] = to_json(*composed.verification);
  out << j.dump(2) << "\n";
  err << "constructed " << composed.protocol.outcomes.size() << " outcomes on dimension " << composed.protocol.dim()
      << "; cancellation audit " << (audit.pass ? "PASS" : "FAIL") << " (max off-diagonal "
      << audit.max_offdiagonal_norm << ")\n";
  return audit.pass ? kExitOk : kExitVerificationFailed;
}

int cmd_simulate(const std::string& file, const SimConfig& config, std::ostream& out, std::ostream& err) {
  Protocol p = load_protocol(file);
  SimReport r = simulate(p, config);
  out << to_json(r).dump(2) << "\n";
  err << r.runs << " runs, " << r.failures << " failures, min fidelity " << r.min_fidelity << ", chi-square "
      << r.chi_square << " (p = " << r.p_value << ")\n";
  return kExitOk;
}

int cmd_demo(double lambda1, double lambda2, int grid, std::size_t runs, std::uint64_t seed, std::ostream& out,
             std::ostream& err) {
  ComposedProtocol composed = qutrit_block(lambda1, lambda2, grid);
  const Protocol& p = composed.protocol;
  Json unitaries = Json::array();
  err << "qutrit protocol, rho_B = diag(" << format_real(lambda1) << ", " << format_real(lambda1) << ", "
      << format_real(lambda2) << ")\n";
  for (const Outcome& o : p.outcomes) {
    unitaries.push_back({{"label", o.label},
                         {"probability", o.probability.value_or(0.0)},
                         {"unitary", matrix_to_json(o.unitary)}});
    err << "  U[" << o.label << "] = " << describe_matrix(o.unitary) << "  p = " << format_real(o.probability.value_or(0.0))
        << "\n";
  }
  VerificationReport v = verify_rsp_condition(p);
  MeasurementValidityReport m = check_measurement_validity(p);
  summarize_verification(v, m, err);
  OblivVerdict verdict = obliviousness_test(p);
  summarize_verdict(verdict, err);
  SimConfig config;
  config.runs = runs;
  config.seed = seed;
  SimReport sim = simulate(p, config);
  err << "simulation: " << runs << " runs, frequencies";
  for (double f : sim.frequencies) err << " " << format_real(f);
  err << ", min fidelity " << sim.min_fidelity << "\n";

  out << Json{{"lambda1", lambda1},
              {"lambda2", lambda2},
              {"unitaries", unitaries},
              {"verification", to_json(v)},
              {"measurement", to_json(m)},
              {"obliviousness", to_json(verdict)},
              {"simulation", to_json(sim)}}
             .dump(2)
      << "\n";
  const bool ok = v.pass && m.pass && verdict.status == OblivStatus::oblivious;
  return ok ? kExitOk : kExitVerificationFailed;
}

int cmd_builtin(const std::string& name, const std::string& output, std::ostream& out, std::ostream& err) {
  auto which = builtin_from_name(name);
  if (!which) {
    err << "error: unknown builtin '" << name << "'\n";
    return kExitIoOrSchema;
  }
  Protocol p = builtin_protocol(*which);
  save_protocol(p, output);
  out << Json{{"protocol", p.name}, {"output", output}}.dump(2) << "\n";
  err << "wrote " << name << " to " << output << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Remote state preparation toolkit"};
  app.require_subcommand(1);

  std::string file, output, rho_path, u0_path, demo_name, builtin;
  std::optional<double> tol;
  std::size_t reference = 0;

  auto* verify = app.add_subcommand("verify", "Check the exact-RSP condition and measurement validity");
  verify->add_option("protocol", file, "Protocol JSON file")->required();
  verify->add_option("--tol", tol, "Residual tolerance");

  auto* analyze = app.add_subcommand("analyze", "Classify a protocol as oblivious or not");
  analyze->add_option("protocol", file, "Protocol JSON file")->required();

  auto* reduce = app.add_subcommand("reduce", "Map to a maximally entangled resource, or lift back with --rho");
  reduce->add_option("protocol", file, "Protocol JSON file")->required();
  reduce->add_option("-o,--output", output, "Output protocol file")->required();
  reduce->add_option("--rho", rho_path, "Lift: target rho_B (matrix or diagonal list)");
  reduce->add_option("--u0", u0_path, "Lift: reference unitary (defaults to the reference outcome's)")->needs("--rho");
  reduce->add_option("--reference", reference, "Reference outcome index");

  auto* construct = app.add_subcommand("construct", "Assemble a block-constructed protocol from a config");
  construct->add_option("config", file, "Construction config JSON file")->required();
  construct->add_option("-o,--output", output, "Output protocol file")->required();

  SimConfig sim;
  std::optional<std::size_t> target;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo runs of a protocol");
  simulate_cmd->add_option("protocol", file, "Protocol JSON file")->required();
  simulate_cmd->add_option("--runs", sim.runs, "Number of runs")->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim.seed, "RNG seed");
  simulate_cmd->add_option("--target", target, "Ensemble sample index");
  simulate_cmd->add_option("--batches", sim.batches, "Parallel run batches")->check(CLI::PositiveNumber);
  simulate_cmd->add_flag("--skip-verify", sim.skip_verification, "Simulate without verifying first");

  double lambda1 = 0.3, lambda2 = 0.4;
  int grid = 8;
  std::size_t demo_runs = 10000;
  std::uint64_t demo_seed = 0;
  auto* demo = app.add_subcommand("demo", "Worked examples");
  demo->add_option("example", demo_name, "Example name")->required()->check(CLI::IsMember({"qutrit"}));
  demo->add_option("--lambda1", lambda1, "Doubly degenerate eigenvalue");
  demo->add_option("--lambda2", lambda2, "Non-degenerate eigenvalue");
  demo->add_option("--grid", grid, "Phase grid points per block phase")->check(CLI::PositiveNumber);
  demo->add_option("--runs", demo_runs, "Simulation runs")->check(CLI::PositiveNumber);
  demo->add_option("--seed", demo_seed, "RNG seed");

  auto* builtin_cmd = app.add_subcommand("builtin", "Write a reference protocol to a file");
  builtin_cmd->add_option("name", builtin, "teleportation-qubit | equatorial-qubit | trivial-1d | qutrit-block")
      ->required();
  builtin_cmd->add_option("-o,--output", output, "Output protocol file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoOrSchema;
  }

  try {
    if (*verify) return cmd_verify(file, tol, out, err);
    if (*analyze) return cmd_analyze(file, out, err);
    if (*reduce) return cmd_reduce(file, output, rho_path, u0_path, reference, out, err);
    if (*construct) return cmd_construct(file, output, out, err);
    if (*simulate_cmd) {
      if (target) sim.target = *target;
      return cmd_simulate(file, sim, out, err);
    }
    if (*demo) return cmd_demo(lambda1, lambda2, grid, demo_runs, demo_seed, out, err);
    if (*builtin_cmd) return cmd_builtin(builtin, output, out, err);
  } catch (const SchemaError& e) {
    err << "error: " << (e.path().empty() ? "" : e.path() + ": ") << e.what() << "\n";
    return kExitIoOrSchema;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoOrSchema;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitPrecondition;
  }
  return kExitIoOrSchema;
}

}  // namespace rsp
