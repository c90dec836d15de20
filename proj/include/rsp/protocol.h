#pragma once

// Protocol data model and the exact-RSP verifier.
//
// A protocol is a shared resource R, a list of outcomes (Bob's correction
// U_m, the probability p_m, a failure flag) and a preparable ensemble. Alice's
// measurement eigenstates are never stored; for a target psi they are derived
// as phi_m = sqrt(p_m) R^{-1} U_m^dag psi. Failure outcomes take whatever is
// left of the identity.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsp/ensemble.h"
#include "rsp/linalg.h"

namespace rsp {

enum class MeasurementKind { projective, povm };

const char* to_string(MeasurementKind kind);

struct Outcome {
  CMat unitary;                       // Bob's correction, unused for failures
  std::optional<double> probability;  // p_m when state independent
  bool failure = false;
  std::string label;
};

struct Protocol {
  std::string name;
  BipartiteState resource_state;
  AntilinearOp resource;
  MeasurementKind measurement_kind = MeasurementKind::povm;
  std::vector<Outcome> outcomes;
  Ensemble ensemble;
  /// Optional state-dependent probabilities, indexed [sample][outcome].
  /// Entries for failure outcomes are ignored. Empty when every outcome
  /// declares a state-independent probability.
  std::vector<std::vector<double>> sample_probabilities;

  Protocol() = default;
  Protocol(std::string name, BipartiteState state, MeasurementKind kind, std::vector<Outcome> outcomes,
           Ensemble ensemble, std::vector<std::vector<double>> sample_probabilities = {});

  Eigen::Index dim() const { return resource.dim_out(); }
  std::size_t outcome_count() const { return outcomes.size(); }
  bool deterministic() const;
  CMat rho_b() const;
  CMat rho_a() const;

  /// Declared p_m for ensemble sample `sample`. Throws ProtocolError when
  /// neither the per-sample table nor the outcome carries a value.
  double declared_probability(std::size_t sample, std::size_t outcome) const;

  std::vector<CMat> unitaries() const;

  /// Structural checks: square invertible resource, unitary corrections,
  /// ensemble dimension, outcome counts per measurement kind, probability
  /// table shape. Throws ProtocolError/DimensionError/SingularError.
  void validate() const;
};

/// phi_m = sqrt(p_m) R^{-1} U_m^dag target for every m.
std::vector<CVec> eigenstates_from_unitaries(const AntilinearOp& resource, std::span<const CMat> unitaries,
                                             std::span<const double> probabilities, const CVec& target);

struct ConditionalState {
  std::optional<CVec> state;  // empty when the outcome has zero probability
  double probability = 0.0;
};

/// Bob's normalized state and the Born probability ||R phi||^2 after Alice
/// finds `eigenstate`. Probabilities below `zero_threshold` are reported as
/// zero-probability outcomes with no state.
ConditionalState conditional_state(const AntilinearOp& resource, const CVec& eigenstate,
                                   double zero_threshold = 1e-14);

/// Alice's full measurement for one target.
struct TargetMeasurement {
  std::vector<CVec> eigenstates;     // one per outcome, failures included
  std::vector<double> probabilities;  // recomputed as ||R phi_m||^2
  double rsp_residual = 0.0;          // deviation from the exact-RSP condition
  CMat residual_matrix;               // rho_B - sum_success p_m U_m^dag |psi><psi| U_m
};

TargetMeasurement measurement_for_target(const Protocol& protocol, const CVec& target,
                                         std::span<const double> declared);

/// Measurement for ensemble sample `sample`, using the declared probabilities.
TargetMeasurement measurement_for_sample(const Protocol& protocol, std::size_t sample, const CVec& target);

struct SampleFidelity {
  std::size_t sample;
  std::size_t outcome;
  double fidelity;
};

struct VerificationReport {
  double tolerance = 0.0;
  std::size_t samples = 0;
  double max_rsp_residual = 0.0;
  double completeness_residual = 0.0;
  double probability_closure_residual = 0.0;
  double probability_inconsistency = 0.0;
  double min_fidelity = 1.0;
  std::vector<SampleFidelity> per_sample_fidelities;
  /// recomputed probabilities, [sample][outcome]
  std::vector<std::vector<double>> probabilities;
  bool pass = false;
};

struct VerifyOptions {
  std::optional<double> tolerance;  // defaults to default_tolerance()
};

/// Checks sum_m p_m U_m^dag |psi><psi| U_m = rho_B for every ensemble sample
/// (with failure outcomes absorbing a positive remainder of rank at most
/// their count), completeness of the derived measurement, probability
/// closure and post-correction fidelities.
VerificationReport verify_rsp_condition(const Protocol& protocol, const VerifyOptions& options = {});

struct MeasurementValidityReport {
  MeasurementKind kind = MeasurementKind::povm;
  double completeness_residual = 0.0;  // max_s ||sum_m |phi_m><phi_m| - 1||_F
  double orthonormality_residual = 0.0;  // projective only: max_s ||Gram - 1||_F
  bool pass = false;
};

MeasurementValidityReport check_measurement_validity(const Protocol& protocol,
                                                     const VerifyOptions& options = {});

/// Completeness residual of an explicit set of (possibly unnormalized)
/// measurement eigenstates.
double completeness_residual(std::span<const CVec> eigenstates);

}  // namespace rsp
