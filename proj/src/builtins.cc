#include "rsp/builtins.h"

#include <array>
#include <cmath>
#include <numbers>

namespace rsp {

namespace {

constexpr std::array<std::pair<Builtin, std::string_view>, 4> kNames{{
    {Builtin::teleportation_qubit, "teleportation-qubit"},
    {Builtin::equatorial_qubit, "equatorial-qubit"},
    {Builtin::trivial_1d, "trivial-1d"},
    {Builtin::qutrit_block, "qutrit-block"},
}};

Outcome outcome(CMat unitary, double p, std::string label) {
  Outcome o;
  o.unitary = std::move(unitary);
  o.probability = p;
  o.label = std::move(label);
  return o;
}

Protocol teleportation(const BuiltinParams& params) {
  std::vector<Outcome> outcomes;
  outcomes.push_back(outcome(pauli::identity(), 0.25, "I"));
  outcomes.push_back(outcome(pauli::x(), 0.25, "X"));
  outcomes.push_back(outcome(pauli::y(), 0.25, "Y"));
  outcomes.push_back(outcome(pauli::z(), 0.25, "Z"));
  return Protocol("teleportation-qubit", BipartiteState::maximally_entangled(2), MeasurementKind::povm,
                  std::move(outcomes),
                  Ensemble::sample_list(bloch_sphere_points(params.teleportation_samples), 2));
}

Protocol equatorial(const BuiltinParams& params) {
  std::vector<Outcome> outcomes;
  outcomes.push_back(outcome(pauli::identity(), 0.5, "I"));
  outcomes.push_back(outcome(pauli::z(), 0.5, "Z"));
  return Protocol("equatorial-qubit", BipartiteState::maximally_entangled(2), MeasurementKind::projective,
                  std::move(outcomes), Ensemble::equatorial(params.equatorial_grid));
}

Protocol trivial() {
  std::vector<Outcome> outcomes;
  outcomes.push_back(outcome(CMat::Identity(1, 1), 1.0, "I"));
  return Protocol("trivial-1d", BipartiteState::maximally_entangled(1), MeasurementKind::projective,
                  std::move(outcomes), Ensemble::sample_list({CVec::Ones(1)}));
}

}  // namespace

std::string_view builtin_name(Builtin b) {
  for (const auto& [value, name] : kNames) {
    if (value == b) return name;
  }
  return "unknown";
}

std::optional<Builtin> builtin_from_name(std::string_view name) {
  for (const auto& [value, n] : kNames) {
    if (n == name) return value;
  }
  return std::nullopt;
}

std::vector<CVec> bloch_sphere_points(int count) {
  if (count < 1) throw DimensionError("need at least one Bloch sphere point");
  std::vector<CVec> out;
  out.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    double z = count == 1 ? 1.0 : 1.0 - 2.0 * (i + 0.5) / count;
    double theta = std::acos(z);
    double phi = golden * i;
    CVec v(2);
    v << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
    out.push_back(v);
  }
  return out;
}

ComposedProtocol qutrit_block(double lambda1, double lambda2, int grid) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) throw PreconditionError("qutrit spectrum needs lambda1, lambda2 > 0");
  if (std::abs(2.0 * lambda1 + lambda2 - 1.0) > 1e-9) {
    throw PreconditionError("qutrit spectrum needs 2 lambda1 + lambda2 = 1");
  }
  if (std::abs(lambda1 - lambda2) <= kDefaultClusterGap) {
    throw PreconditionError("qutrit construction needs two distinct eigenvalues (lambda1 != lambda2)");
  }
  const std::array<SpectrumEntry, 2> spectrum{{{lambda1, 2}, {lambda2, 1}}};
  SpectralBlocks blocks = blocks_from_spectrum(spectrum);

  // H_1 (the lambda1 eigenspace) carries the equatorial protocol and the
  // character of the generator; H_2 carries the trivial protocol.
  const std::size_t b1 = lambda1 > lambda2 ? 0 : 1;
  const std::size_t b2 = 1 - b1;
  SubProtocolAssignment subs;
  subs.subs.resize(2);
  subs.subs[b1] = equatorial_sub(grid);
  subs.subs[b2] = trivial_sub();
  subs.block_elements.resize(2);
  subs.block_elements[b1] = 1;
  subs.block_elements[b2] = 0;

  AbelianGroup group = AbelianGroup::cyclic(2);
  ComposeOptions options;
  options.name = "qutrit-block";
  options.phase_grid = grid;
  options.verify = false;
  ComposedProtocol composed =
      compose_block_protocol(blocks, group, subs, default_probability_assignment(subs, group), options);

  std::vector<Outcome> ordered;
  std::vector<ComposedOutcome> index;
  for (int m1 = 0; m1 < 2; ++m1) {
    for (int k = 1; k <= 2; ++k) {
      const std::size_t element = static_cast<std::size_t>(k % 2);
      for (std::size_t i = 0; i < composed.outcome_index.size(); ++i) {
        const ComposedOutcome& co = composed.outcome_index[i];
        if (co.element == element && co.tuple[b1] == m1) {
          Outcome o = composed.protocol.outcomes[i];
          o.label = "k=" + std::to_string(k) + ",m=(" + std::to_string(m1) + ",0)";
          ordered.push_back(std::move(o));
          index.push_back(co);
        }
      }
    }
  }
  composed.protocol.outcomes = std::move(ordered);
  composed.outcome_index = std::move(index);
  composed.verification = verify_rsp_condition(composed.protocol);
  return composed;
}

Protocol builtin_protocol(Builtin which, const BuiltinParams& params) {
  switch (which) {
    case Builtin::teleportation_qubit: return teleportation(params);
    case Builtin::equatorial_qubit: return equatorial(params);
    case Builtin::trivial_1d: return trivial();
    case Builtin::qutrit_block: return qutrit_block(params.lambda1, params.lambda2, params.qutrit_grid).protocol;
  }
  throw PreconditionError("unknown builtin protocol");
}

}  // namespace rsp
