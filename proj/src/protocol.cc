#include "rsp/protocol.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rsp {

const char* to_string(MeasurementKind kind) {
  return kind == MeasurementKind::projective ? "projective" : "povm";
}

Protocol::Protocol(std::string name_, BipartiteState state, MeasurementKind kind, std::vector<Outcome> outcomes_,
                   Ensemble ensemble_, std::vector<std::vector<double>> sample_probabilities_)
    : name(std::move(name_)),
      resource_state(std::move(state)),
      resource(resource_from_state(resource_state)),
      measurement_kind(kind),
      outcomes(std::move(outcomes_)),
      ensemble(std::move(ensemble_)),
      sample_probabilities(std::move(sample_probabilities_)) {}

bool Protocol::deterministic() const {
  return std::none_of(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.failure; });
}

CMat Protocol::rho_b() const { return reduced_densities(resource).rho_b; }

CMat Protocol::rho_a() const { return reduced_densities(resource).rho_a; }

double Protocol::declared_probability(std::size_t sample, std::size_t outcome) const {
  if (!sample_probabilities.empty()) {
    if (sample >= sample_probabilities.size() || outcome >= sample_probabilities[sample].size()) {
      throw ProtocolError("per-sample probability table does not cover the requested entry");
    }
    return sample_probabilities[sample][outcome];
  }
  const Outcome& o = outcomes.at(outcome);
  if (!o.probability) {
    std::ostringstream msg;
    msg << "outcome " << outcome << " has no probability";
    throw ProtocolError(msg.str());
  }
  return *o.probability;
}

std::vector<CMat> Protocol::unitaries() const {
  std::vector<CMat> out;
  out.reserve(outcomes.size());
  for (const Outcome& o : outcomes) out.push_back(o.unitary);
  return out;
}

void Protocol::validate() const {
  if (!resource.is_square()) throw DimensionError("resource must map between spaces of equal dimension");
  if (!resource.invertible()) throw SingularError("resource has a Schmidt coefficient below the singularity threshold");
  const Eigen::Index d = dim();
  if (outcomes.empty()) throw ProtocolError("protocol has no outcomes");
  for (std::size_t m = 0; m < outcomes.size(); ++m) {
    const Outcome& o = outcomes[m];
    if (o.probability && (*o.probability < -1e-12 || *o.probability > 1.0 + 1e-12)) {
      throw ProtocolError("outcome " + std::to_string(m) + " probability outside [0, 1]");
    }
    if (o.failure) continue;
    if (o.unitary.rows() != d || o.unitary.cols() != d) {
      throw DimensionError("outcome " + std::to_string(m) + " unitary has the wrong shape");
    }
    if (!is_unitary(o.unitary, 1e-8)) throw ProtocolError("outcome " + std::to_string(m) + " correction is not unitary");
  }
  if (ensemble.dim() != d) throw DimensionError("ensemble dimension differs from the resource dimension");
  if (measurement_kind == MeasurementKind::projective && static_cast<Eigen::Index>(outcomes.size()) != d) {
    throw ProtocolError("a projective measurement needs exactly D outcomes");
  }
  if (!sample_probabilities.empty()) {
    if (sample_probabilities.size() != ensemble.sample_count()) {
      throw ProtocolError("per-sample probability table must have one row per ensemble sample");
    }
    for (const auto& row : sample_probabilities) {
      if (row.size() != outcomes.size()) throw ProtocolError("per-sample probability row has the wrong length");
    }
  }
}

std::vector<CVec> eigenstates_from_unitaries(const AntilinearOp& resource, std::span<const CMat> unitaries,
                                             std::span<const double> probabilities, const CVec& target) {
  if (unitaries.size() != probabilities.size()) throw DimensionError("one probability per unitary is required");
  AntilinearOp inverse = invert_antilinear(resource);
  std::vector<CVec> out;
  out.reserve(unitaries.size());
  for (std::size_t m = 0; m < unitaries.size(); ++m) {
    if (unitaries[m].cols() != target.size()) throw DimensionError("unitary and target dimensions differ");
    out.push_back(std::sqrt(std::max(probabilities[m], 0.0)) * inverse(unitaries[m].adjoint() * target));
  }
  return out;
}

ConditionalState conditional_state(const AntilinearOp& resource, const CVec& eigenstate, double zero_threshold) {
  CVec bob = resource(eigenstate);
  double p = bob.squaredNorm();
  if (p <= zero_threshold) return {std::nullopt, p};
  return {bob / std::sqrt(p), p};
}

namespace {

TargetMeasurement measure(const Protocol& protocol, const AntilinearOp& inverse, const CMat& rho_b,
                          const CVec& target, std::span<const double> declared) {
  const std::size_t n = protocol.outcomes.size();
  TargetMeasurement out;
  out.eigenstates.assign(n, CVec::Zero(protocol.dim()));
  out.probabilities.assign(n, 0.0);

  CMat sum = CMat::Zero(rho_b.rows(), rho_b.cols());
  std::vector<std::size_t> failures;
  for (std::size_t m = 0; m < n; ++m) {
    const Outcome& o = protocol.outcomes[m];
    if (o.failure) {
      failures.push_back(m);
      continue;
    }
    CVec rotated = o.unitary.adjoint() * target;
    double p = std::max(declared[m], 0.0);
    sum += p * rotated * rotated.adjoint();
    out.eigenstates[m] = std::sqrt(p) * inverse(rotated);
  }
  out.residual_matrix = rho_b - sum;

  // Failure outcomes absorb the positive part of the remainder, largest
  // eigencomponents first. Whatever cannot be absorbed counts as residual.
  HermitianEigen remainder = eig_hermitian(out.residual_matrix);
  double residual_sq = 0.0;
  std::size_t assigned = 0;
  for (Eigen::Index i = remainder.values.size() - 1; i >= 0; --i) {
    double lambda = remainder.values(i);
    if (lambda > 0.0 && assigned < failures.size()) {
      CVec chi = std::sqrt(lambda) * remainder.vectors.col(i);
      out.eigenstates[failures[assigned++]] = inverse(chi);
    } else {
      residual_sq += lambda * lambda;
    }
  }
  out.rsp_residual = std::sqrt(residual_sq);

  for (std::size_t m = 0; m < n; ++m) out.probabilities[m] = protocol.resource(out.eigenstates[m]).squaredNorm();
  return out;
}

std::vector<double> declared_row(const Protocol& protocol, std::size_t sample) {
  std::vector<double> row(protocol.outcomes.size(), 0.0);
  for (std::size_t m = 0; m < row.size(); ++m) {
    if (!protocol.outcomes[m].failure) row[m] = protocol.declared_probability(sample, m);
  }
  return row;
}

}  // namespace

TargetMeasurement measurement_for_target(const Protocol& protocol, const CVec& target,
                                         std::span<const double> declared) {
  if (declared.size() != protocol.outcomes.size()) throw DimensionError("one declared probability per outcome is required");
  if (target.size() != protocol.dim()) throw DimensionError("target dimension differs from the resource dimension");
  return measure(protocol, invert_antilinear(protocol.resource), protocol.rho_b(), target, declared);
}

TargetMeasurement measurement_for_sample(const Protocol& protocol, std::size_t sample, const CVec& target) {
  std::vector<double> row = declared_row(protocol, sample);
  return measurement_for_target(protocol, target, row);
}

double completeness_residual(std::span<const CVec> eigenstates) {
  if (eigenstates.empty()) return std::numeric_limits<double>::infinity();
  const Eigen::Index d = eigenstates.front().size();
  CMat sum = CMat::Zero(d, d);
  for (const CVec& phi : eigenstates) sum += phi * phi.adjoint();
  return (sum - CMat::Identity(d, d)).norm();
}

VerificationReport verify_rsp_condition(const Protocol& protocol, const VerifyOptions& options) {
  protocol.validate();
  VerificationReport report;
  report.tolerance = options.tolerance.value_or(default_tolerance());
  const double tol = report.tolerance;

  const AntilinearOp inverse = invert_antilinear(protocol.resource);
  const CMat rho_b = protocol.rho_b();
  const std::vector<CVec> samples = protocol.ensemble.samples();
  report.samples = samples.size();
  report.probabilities.reserve(samples.size());

  for (std::size_t s = 0; s < samples.size(); ++s) {
    const CVec& target = samples[s];
    std::vector<double> declared = declared_row(protocol, s);
    TargetMeasurement meas = measure(protocol, inverse, rho_b, target, declared);

    report.max_rsp_residual = std::max(report.max_rsp_residual, meas.rsp_residual);
    report.completeness_residual = std::max(report.completeness_residual, completeness_residual(meas.eigenstates));
    double total = 0.0;
    for (std::size_t m = 0; m < protocol.outcomes.size(); ++m) {
      total += meas.probabilities[m];
      const Outcome& o = protocol.outcomes[m];
      if (o.failure) continue;
      report.probability_inconsistency =
          std::max(report.probability_inconsistency, std::abs(meas.probabilities[m] - declared[m]));
      if (meas.probabilities[m] <= tol) continue;
      ConditionalState cond = conditional_state(protocol.resource, meas.eigenstates[m]);
      if (!cond.state) continue;
      double f = fidelity(o.unitary * *cond.state, target);
      report.per_sample_fidelities.push_back({s, m, f});
      report.min_fidelity = std::min(report.min_fidelity, f);
    }
    report.probability_closure_residual = std::max(report.probability_closure_residual, std::abs(total - 1.0));
    report.probabilities.push_back(std::move(meas.probabilities));
  }

  report.pass = report.max_rsp_residual <= tol && report.completeness_residual <= tol &&
                report.probability_closure_residual <= tol && report.probability_inconsistency <= tol &&
                report.min_fidelity >= 1.0 - tol;
  return report;
}

MeasurementValidityReport check_measurement_validity(const Protocol& protocol, const VerifyOptions& options) {
  protocol.validate();
  const double tol = options.tolerance.value_or(default_tolerance());
  MeasurementValidityReport report;
  report.kind = protocol.measurement_kind;
  const std::vector<CVec> samples = protocol.ensemble.samples();
  const AntilinearOp inverse = invert_antilinear(protocol.resource);
  const CMat rho_b = protocol.rho_b();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    std::vector<double> declared = declared_row(protocol, s);
    TargetMeasurement meas = measure(protocol, inverse, rho_b, samples[s], declared);
    report.completeness_residual = std::max(report.completeness_residual, completeness_residual(meas.eigenstates));
    if (protocol.measurement_kind == MeasurementKind::projective) {
      const auto n = static_cast<Eigen::Index>(meas.eigenstates.size());
      CMat basis(protocol.dim(), n);
      for (Eigen::Index m = 0; m < n; ++m) basis.col(m) = meas.eigenstates[m];
      double gram = (basis.adjoint() * basis - CMat::Identity(n, n)).norm();
      report.orthonormality_residual = std::max(report.orthonormality_residual, gram);
    }
  }
  report.pass = report.completeness_residual <= tol && report.orthonormality_residual <= tol;
  return report;
}

}  // namespace rsp
