#pragma once

// Obliviousness of exact protocols.
//
// Over a sufficiently large ensemble, an exact protocol has target-independent
// outcome probabilities exactly when each successful outcome's eigenstate is a
// fixed antilinear function of the target, phi_m = A_m psi. Both sides are
// measured here and cross-checked.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rsp/ensemble.h"
#include "rsp/linalg.h"
#include "rsp/protocol.h"

namespace rsp {

struct LargeEnsembleWitness {
  bool ok = false;
  std::size_t rank = 0;
  std::vector<std::size_t> basis;             // sample indices spanning the ensemble
  std::optional<std::size_t> superposition;   // sample with full support on `basis`
};

/// Looks for samples forming a basis of the ensemble's span plus another
/// sample whose expansion in that basis has every coefficient above
/// `coefficient_threshold` in modulus. Ensembles spanning one dimension never
/// qualify.
LargeEnsembleWitness sufficiently_large_check(std::span<const CVec> samples, double coefficient_threshold = 1e-6);
LargeEnsembleWitness sufficiently_large_check(const Ensemble& ensemble, double coefficient_threshold = 1e-6);

/// Coefficients of `v` in the (not necessarily orthogonal) basis given by
/// `samples[basis[i]]`.
CVec basis_coefficients(std::span<const CVec> samples, std::span<const std::size_t> basis, const CVec& v);

struct AntilinearFit {
  std::size_t outcome = 0;
  AntilinearOp op;
  double residual = 0.0;          // max_s ||A psi_s - phi_s||
  double condition_number = 1.0;  // of the conjugated Gram matrix
  Eigen::Index rank = 0;
};

inline constexpr double kFitConditionGuard = 1e10;

/// Least-squares M minimizing sum_s ||M conj(target_s) - eigenstate_s||^2 via
/// the normal equations. When the Gram matrix condition number exceeds
/// kFitConditionGuard the minimum-norm solution on the ensemble span is used.
AntilinearFit fit_antilinear_map(std::span<const std::pair<CVec, CVec>> pairs, std::size_t outcome = 0);

/// Same fit for a linear map M target_s = eigenstate_s; returns the max
/// per-sample residual.
double fit_linear_residual(std::span<const std::pair<CVec, CVec>> pairs);

enum class OblivStatus { oblivious, non_oblivious, inconclusive };

const char* to_string(OblivStatus status);

struct OblivOptions {
  double spread_tolerance = 1e-8;
  double fit_tolerance = 1e-7;
  double coefficient_threshold = 1e-6;
  std::optional<double> verify_tolerance;
};

struct OblivVerdict {
  OblivStatus status = OblivStatus::inconclusive;
  std::vector<double> probability_spread;  // per outcome, max - min over samples
  std::vector<AntilinearFit> fits;         // successful outcomes only
  bool probabilities_independent = false;  // every non-failure spread within tolerance
  bool fits_succeed = false;               // every fit residual within tolerance
  /// Probability independence and antilinear fits disagree on a sufficiently
  /// large ensemble.
  bool consistency_alarm = false;
  LargeEnsembleWitness witness;
  /// Residuals of linear (not antilinear) fits; informational only.
  std::vector<double> linear_fit_residuals;
  /// max_{m,s} ||U_m R A_m psi_s - sqrt(p_m(psi_s)) psi_s||
  double correction_identity_residual = 0.0;
};

/// Refuses (PreconditionError) protocols that fail verify_rsp_condition.
OblivVerdict obliviousness_test(const Protocol& protocol, const OblivOptions& options = {});

}  // namespace rsp
