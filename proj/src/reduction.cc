#include "rsp/reduction.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsp {

namespace {

std::string format_norms(const std::vector<double>& norms) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < norms.size(); ++i) out << (i ? ", " : "") << norms[i];
  out << "]";
  return out.str();
}

void require_deterministic(const Protocol& protocol) {
  if (!protocol.deterministic()) {
    throw PreconditionError("operation is defined for deterministic protocols only (failure outcomes present)");
  }
}

void require_reference(const Protocol& protocol, std::size_t reference) {
  if (reference >= protocol.outcomes.size()) throw PreconditionError("reference outcome index out of range");
}

// p_m / p_ref, required to be the same for every ensemble sample.
std::vector<double> probability_ratios(const Protocol& protocol, std::size_t reference) {
  const std::size_t n = protocol.outcomes.size();
  const std::size_t rows = protocol.sample_probabilities.empty() ? 1 : protocol.sample_probabilities.size();
  std::vector<double> ratios(n, 0.0);
  for (std::size_t s = 0; s < rows; ++s) {
    double p_ref = protocol.declared_probability(s, reference);
    if (p_ref <= 0.0) throw PreconditionError("reference outcome has zero probability");
    for (std::size_t m = 0; m < n; ++m) {
      double ratio = protocol.declared_probability(s, m) / p_ref;
      if (s == 0) {
        ratios[m] = ratio;
      } else if (std::abs(ratio - ratios[m]) > 1e-8) {
        throw PreconditionError("probability ratios depend on the target; the protocol is not oblivious");
      }
    }
  }
  return ratios;
}

CMat map_hermitian(const CMat& h) {
  if ((h - h.adjoint()).norm() > 1e-9) throw PreconditionError("reduced density operator is not Hermitian");
  return h;
}

Ensemble map_ensemble(const Ensemble& ensemble, const CMat& map) {
  std::vector<CVec> mapped;
  for (const CVec& s : ensemble.samples()) {
    CVec v = map * s;
    double n = v.norm();
    if (n == 0.0) throw SingularError("ensemble map sends a sample to zero");
    mapped.push_back(v / n);
  }
  return Ensemble::sample_list(std::move(mapped), ensemble.real_dimension());
}

}  // namespace

CommutationResult commutation_check(const CMat& rho_b, std::span<const CMat> unitaries, std::size_t reference,
                                    std::optional<double> tolerance) {
  CommutationResult out;
  out.tolerance = tolerance.value_or(default_tolerance());
  if (unitaries.empty()) {
    out.pass = true;
    return out;
  }
  if (reference >= unitaries.size()) throw PreconditionError("reference outcome index out of range");
  const CMat& u_ref = unitaries[reference];
  out.norms.reserve(unitaries.size());
  for (const CMat& u : unitaries) out.norms.push_back(commutator_norm(rho_b, u_ref.adjoint() * u));
  out.pass = std::all_of(out.norms.begin(), out.norms.end(), [&](double n) { return n <= out.tolerance; });
  return out;
}

LOperatorSet compute_L_operators(const Protocol& protocol, std::size_t reference, double tolerance) {
  require_deterministic(protocol);
  require_reference(protocol, reference);
  const AntilinearOp& r = protocol.resource;
  const AntilinearOp r_inv = invert_antilinear(r);
  const Eigen::Index d = protocol.dim();
  const CMat& u_ref = protocol.outcomes[reference].unitary;

  LOperatorSet out;
  out.reference = reference;
  out.tolerance = tolerance;
  out.ratios = probability_ratios(protocol, reference);
  for (std::size_t m = 0; m < protocol.outcomes.size(); ++m) {
    CMat v = protocol.outcomes[m].unitary.adjoint() * u_ref;
    CMat l = std::sqrt(out.ratios[m]) * compose_antilinear(r_inv, postcompose(v, r));
    CMat gram = l.adjoint() * l;
    out.scales.push_back(gram.trace().real() / static_cast<double>(d));
    out.deviations.push_back((gram - out.ratios[m] * CMat::Identity(d, d)).norm());
    AntilinearOp rl = precompose(r, l);
    out.trace_identity_errors.push_back(std::abs(rl.matrix().squaredNorm() - out.ratios[m]));
    out.ops.push_back(std::move(l));
  }
  out.unitary_proportional =
      std::all_of(out.deviations.begin(), out.deviations.end(), [&](double dev) { return dev <= tolerance; });
  return out;
}

ProportionalityReport proportional_unitary_iff_commutation(const Protocol& protocol, std::size_t reference,
                                                           double tolerance) {
  LOperatorSet l = compute_L_operators(protocol, reference, tolerance);
  std::vector<CMat> unitaries = protocol.unitaries();
  CommutationResult comm = commutation_check(protocol.rho_b(), unitaries, reference, tolerance);

  ProportionalityReport out;
  out.l_unitary_proportional = l.unitary_proportional;
  out.commutation_holds = comm.pass;
  out.consistent = out.l_unitary_proportional == out.commutation_holds;
  out.max_l_deviation = *std::max_element(l.deviations.begin(), l.deviations.end());
  out.max_commutation_norm = comm.norms.empty() ? 0.0 : *std::max_element(comm.norms.begin(), comm.norms.end());
  const CMat rho_a = protocol.rho_a();
  for (const CMat& op : l.ops) out.rho_a_commutator_norms.push_back(commutator_norm(rho_a, op));
  out.rho_a_commutes = std::all_of(out.rho_a_commutator_norms.begin(), out.rho_a_commutator_norms.end(),
                                   [&](double n) { return n <= tolerance; });
  return out;
}

ReducedProtocol reduce_to_maximally_entangled(const Protocol& protocol, std::size_t reference) {
  require_deterministic(protocol);
  require_reference(protocol, reference);
  const CMat rho_b = map_hermitian(protocol.rho_b());
  std::vector<CMat> unitaries = protocol.unitaries();
  CommutationResult comm = commutation_check(rho_b, unitaries, reference);
  if (!comm.pass) {
    throw PreconditionError("commutation criterion fails; commutator norms " + format_norms(comm.norms));
  }

  const auto d = static_cast<double>(protocol.dim());
  const CMat& u0 = protocol.outcomes[reference].unitary;
  const CMat inv_sqrt = hermitian_power(rho_b, -0.5);
  const CMat sqrt_rho = hermitian_power(rho_b, 0.5);

  ReducedProtocol out;
  out.forward = u0 * inv_sqrt * u0.adjoint() / std::sqrt(d);
  out.backward = u0 * sqrt_rho * u0.adjoint() * std::sqrt(d);

  // R' = (1/sqrt(D)) rho_B^{-1/2} R keeps Alice's eigenstates unchanged.
  AntilinearOp reduced_resource = postcompose(inv_sqrt / std::sqrt(d), protocol.resource);
  out.protocol = Protocol(protocol.name.empty() ? "reduced" : protocol.name + "-reduced",
                          state_from_resource(reduced_resource, 1e-8), protocol.measurement_kind, protocol.outcomes,
                          map_ensemble(protocol.ensemble, out.forward), protocol.sample_probabilities);
  return out;
}

Protocol lift_to_partial(const Protocol& maximal, const CMat& rho_b, std::optional<CMat> u0, std::size_t reference) {
  require_deterministic(maximal);
  require_reference(maximal, reference);
  const Eigen::Index dim = maximal.dim();
  const auto d = static_cast<double>(dim);
  if ((maximal.rho_b() - CMat::Identity(dim, dim) / d).norm() > 1e-8) {
    throw PreconditionError("lift_to_partial expects a maximally entangled resource");
  }
  if (rho_b.rows() != dim || rho_b.cols() != dim) throw DimensionError("rho_B has the wrong dimension");
  const CMat rho = map_hermitian(rho_b);
  if (std::abs(rho.trace().real() - 1.0) > 1e-9) throw PreconditionError("rho_B must have unit trace");

  std::vector<CMat> unitaries = maximal.unitaries();
  CommutationResult comm = commutation_check(rho, unitaries, reference);
  if (!comm.pass) {
    throw PreconditionError("commutation criterion fails for the target rho_B; commutator norms " +
                            format_norms(comm.norms));
  }
  const CMat u = u0.value_or(maximal.outcomes[reference].unitary);
  if (!is_unitary(u, 1e-8)) throw PreconditionError("u0 is not unitary");

  const CMat sqrt_rho = hermitian_power(rho, 0.5);
  const CMat backward = u * sqrt_rho * u.adjoint() * std::sqrt(d);
  AntilinearOp lifted = postcompose(sqrt_rho * std::sqrt(d), maximal.resource);
  std::string name = maximal.name;
  const std::string suffix = "-reduced";
  if (name.size() > suffix.size() && name.ends_with(suffix)) {
    name.erase(name.size() - suffix.size());
  } else {
    name = name.empty() ? "lifted" : name + "-lifted";
  }
  return Protocol(name, state_from_resource(lifted, 1e-8), maximal.measurement_kind, maximal.outcomes,
                  map_ensemble(maximal.ensemble, backward), maximal.sample_probabilities);
}

Protocol lift_to_partial(const ReducedProtocol& reduced, const CMat& rho_b, std::optional<CMat> u0,
                         std::size_t reference) {
  return lift_to_partial(reduced.protocol, rho_b, std::move(u0), reference);
}

}  // namespace rsp
