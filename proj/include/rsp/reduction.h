#pragma once

// Deterministic exact protocols: the operators L_m relating Alice's
// eigenstates to the reference eigenstate, the commutation criterion
// [rho_B, U_ref^dag U_m] = 0, and the two-way map between partially and
// maximally entangled resources.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rsp/linalg.h"
#include "rsp/protocol.h"

namespace rsp {

/// Threshold on ||L_m^dag L_m - (p_m/p_ref) 1||_F below which L_m counts as
/// proportional to a unitary.
inline constexpr double kProportionalityTolerance = 1e-8;

struct CommutationResult {
  bool pass = false;
  std::vector<double> norms;  // ||[rho_B, U_ref^dag U_m]||_F
  double tolerance = 0.0;
};

CommutationResult commutation_check(const CMat& rho_b, std::span<const CMat> unitaries, std::size_t reference = 0,
                                    std::optional<double> tolerance = std::nullopt);

struct LOperatorSet {
  std::size_t reference = 0;
  std::vector<CMat> ops;
  std::vector<double> ratios;      // p_m / p_ref from the probabilities
  std::vector<double> scales;      // tr(L_m^dag L_m) / D
  std::vector<double> deviations;  // ||L_m^dag L_m - ratio_m 1||_F
  /// |tr((R L_m)(R L_m)^dag) - ratio_m|, zero when L_m is proportional to a
  /// unitary.
  std::vector<double> trace_identity_errors;
  bool unitary_proportional = false;
  double tolerance = kProportionalityTolerance;
};

/// L_m = sqrt(p_m/p_ref) R^{-1} U_m^dag U_ref R.
///
/// Requires a deterministic protocol with an invertible resource and
/// probability ratios that do not depend on the target. Throws
/// PreconditionError otherwise, SingularError for a singular resource.
LOperatorSet compute_L_operators(const Protocol& protocol, std::size_t reference = 0,
                                 double tolerance = kProportionalityTolerance);

struct ProportionalityReport {
  bool l_unitary_proportional = false;
  bool commutation_holds = false;
  bool consistent = false;  // both sides agree
  double max_l_deviation = 0.0;
  double max_commutation_norm = 0.0;
  /// ||[rho_A, L_m]||_F, meaningful when the biconditional holds
  std::vector<double> rho_a_commutator_norms;
  bool rho_a_commutes = false;
};

ProportionalityReport proportional_unitary_iff_commutation(const Protocol& protocol, std::size_t reference = 0,
                                                           double tolerance = kProportionalityTolerance);

struct ReducedProtocol {
  Protocol protocol;  // maximally entangled resource
  CMat forward;       // (1/sqrt(D)) U_ref rho_B^{-1/2} U_ref^dag
  CMat backward;      // U_ref sqrt(D rho_B) U_ref^dag
};

/// Same unitaries and probabilities on a maximally entangled resource, with
/// the ensemble pushed through the forward map and renormalized. Throws
/// PreconditionError listing the offending commutator norms when the
/// commutation criterion fails.
ReducedProtocol reduce_to_maximally_entangled(const Protocol& protocol, std::size_t reference = 0);

/// Inverse direction: a protocol for a maximally entangled resource reused on
/// a resource with reduced density `rho_b`. `u0` defaults to the reference
/// outcome's unitary.
Protocol lift_to_partial(const Protocol& maximal, const CMat& rho_b, std::optional<CMat> u0 = std::nullopt,
                         std::size_t reference = 0);
Protocol lift_to_partial(const ReducedProtocol& reduced, const CMat& rho_b, std::optional<CMat> u0 = std::nullopt,
                         std::size_t reference = 0);

}  // namespace rsp
