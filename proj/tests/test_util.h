#pragma once

// Random generators, independent oracles and protocol factories shared by the
// test binaries.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "rsp/builtins.h"
#include "rsp/group.h"
#include "rsp/linalg.h"
#include "rsp/protocol.h"

namespace rsp::testing {

using Rng = std::mt19937_64;

inline CMat random_gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

// Haar unitary: QR of a Ginibre matrix with the phases of R's diagonal
// folded back into Q.
inline CMat random_unitary(Eigen::Index d, Rng& rng) {
  CMat g = random_gaussian(d, d, rng);
  Eigen::HouseholderQR<CMat> qr(g);
  CMat q = qr.householderQ() * CMat::Identity(d, d);
  CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < d; ++i) {
    Complex ph = r(i, i) / std::abs(r(i, i));
    q.col(i) *= ph;
  }
  return q;
}

inline CVec random_state(Eigen::Index d, Rng& rng) {
  CVec v = random_gaussian(d, 1, rng).col(0);
  return v / v.norm();
}

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Probability vector with entries bounded away from zero.
inline RVec random_spectrum(Eigen::Index d, Rng& rng, double floor = 0.05) {
  RVec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = floor + uniform(rng);
  return v / v.sum();
}

// Partial traces by explicit index summation over the joint amplitude
// vector |Psi> = sum_ij a_ij |i>_A |j>_B.
inline CMat partial_trace_a(const CMat& amplitudes) {
  const Eigen::Index da = amplitudes.rows(), db = amplitudes.cols();
  CMat rho = CMat::Zero(db, db);
  for (Eigen::Index j = 0; j < db; ++j) {
    for (Eigen::Index k = 0; k < db; ++k) {
      for (Eigen::Index i = 0; i < da; ++i) rho(j, k) += amplitudes(i, j) * std::conj(amplitudes(i, k));
    }
  }
  return rho;
}

inline CMat partial_trace_b(const CMat& amplitudes) {
  const Eigen::Index da = amplitudes.rows(), db = amplitudes.cols();
  CMat rho = CMat::Zero(da, da);
  for (Eigen::Index i = 0; i < da; ++i) {
    for (Eigen::Index k = 0; k < da; ++k) {
      for (Eigen::Index j = 0; j < db; ++j) rho(i, k) += amplitudes(i, j) * std::conj(amplitudes(k, j));
    }
  }
  return rho;
}

// Direct evaluation of sum_m p_m U_m^dag |psi><psi| U_m - rho_B.
inline double rsp_condition_residual(const std::vector<CMat>& unitaries, const std::vector<double>& probabilities,
                                     const CVec& psi, const CMat& rho_b) {
  CMat sum = CMat::Zero(psi.size(), psi.size());
  for (std::size_t m = 0; m < unitaries.size(); ++m) {
    CVec v = unitaries[m].adjoint() * psi;
    sum += probabilities[m] * v * v.adjoint();
  }
  return (sum - rho_b).norm();
}

inline CMat sqrt_psd(const CMat& rho) {
  Eigen::SelfAdjointEigenSolver<CMat> es(rho);
  RVec s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

// Pure resource with reduced density rho_b on Bob's side: amplitudes
// sqrt(rho_b)^T.
inline BipartiteState resource_for(const CMat& rho_b) {
  return BipartiteState::from_amplitudes(CMat(sqrt_psd(rho_b).transpose()));
}

// Conjugates every ingredient of a protocol with a state-independent
// probability assignment by the unitary v on Bob's space.
inline Protocol rotate_protocol(const Protocol& p, const CMat& v, const std::string& name) {
  const CMat rho = v * p.rho_b() * v.adjoint();
  std::vector<Outcome> outcomes = p.outcomes;
  for (Outcome& o : outcomes) {
    if (!o.failure) o.unitary = v * o.unitary * v.adjoint();
  }
  std::vector<CVec> samples;
  for (const CVec& s : p.ensemble.samples()) samples.push_back(v * s);
  return Protocol(name, resource_for(rho), p.measurement_kind, std::move(outcomes),
                  Ensemble::sample_list(std::move(samples), p.ensemble.real_dimension()), p.sample_probabilities);
}

// Clock-shift style qutrit sub-protocol: corrections diag(1, w, w^2)^k with
// p = 1/3 and equal-magnitude phase states.
inline SubProtocol clock_sub(int grid = 3) {
  SubProtocol sub;
  sub.name = "clock-qutrit";
  const double tau = 2.0 * std::numbers::pi;
  for (int k = 0; k < 3; ++k) {
    CMat u = CMat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) u(i, i) = std::polar(1.0, tau * k * i / 3.0);
    sub.unitaries.push_back(u);
    sub.probabilities.push_back(1.0 / 3.0);
  }
  std::vector<CVec> states;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      CVec v(3);
      v << 1.0, std::polar(1.0, tau * (a + 0.25) / grid), std::polar(1.0, tau * (b + 0.6) / grid);
      states.push_back(v / std::sqrt(3.0));
    }
  }
  sub.ensemble = Ensemble::sample_list(std::move(states), 2);
  return sub;
}

// Maximally-entangled qubit sub-protocol in a random frame.
inline SubProtocol rotated_equatorial_sub(Rng& rng, int grid = 6) {
  SubProtocol sub = equatorial_sub(grid);
  const CMat w = random_unitary(2, rng);
  for (CMat& u : sub.unitaries) u = w * u * w.adjoint();
  std::vector<CVec> states;
  for (const CVec& s : sub.ensemble.samples()) states.push_back(w * s);
  sub.ensemble = Ensemble::sample_list(std::move(states), 1);
  sub.name = "rotated-equatorial";
  return sub;
}

inline SubProtocol random_sub(int dim, Rng& rng) {
  if (dim == 1) return trivial_sub();
  if (dim == 2) return rotated_equatorial_sub(rng);
  return clock_sub();
}

// Block construction over `orders` with r = |G| blocks of random dimension
// in {1, 2, 3} (at most `max_total_dim` in total) and distinct random
// eigenvalues.
inline ComposedProtocol random_composed(const std::vector<int>& orders, Rng& rng, int max_total_dim = 6,
                                        int phase_grid = 3, std::size_t cap = 256) {
  AbelianGroup group(orders);
  const std::size_t r = group.order();
  std::vector<int> dims(r, 1);
  int total = static_cast<int>(r);
  for (std::size_t j = 0; j < r; ++j) {
    int grow = static_cast<int>(std::uniform_int_distribution<int>(0, 2)(rng));
    while (grow > 0 && total + 1 <= max_total_dim) {
      ++dims[j];
      ++total;
      --grow;
    }
  }
  // Distinct eigenvalues with gaps well above the clustering threshold.
  std::vector<double> raw(r);
  for (std::size_t j = 0; j < r; ++j) raw[j] = 1.0 + static_cast<double>(j) + uniform(rng, 0.0, 0.5);
  std::shuffle(raw.begin(), raw.end(), rng);
  double norm = 0.0;
  for (std::size_t j = 0; j < r; ++j) norm += raw[j] * dims[j];
  std::vector<SpectrumEntry> spectrum;
  for (std::size_t j = 0; j < r; ++j) spectrum.push_back({raw[j] / norm, dims[j]});
  SpectralBlocks blocks = blocks_from_spectrum(spectrum);

  SubProtocolAssignment subs;
  for (const SpectralBlock& b : blocks.blocks) subs.subs.push_back(random_sub(static_cast<int>(b.dim), rng));
  std::vector<std::size_t> elements(r);
  std::iota(elements.begin(), elements.end(), 0);
  std::shuffle(elements.begin(), elements.end(), rng);
  subs.block_elements = elements;

  ComposeOptions options;
  options.phase_grid = phase_grid;
  options.cap = cap;
  return compose_block_protocol(blocks, group, subs, default_probability_assignment(subs, group), options);
}

// Deterministic protocol with equal probabilities and Haar-random
// corrections on a resource with a random non-degenerate spectrum. The
// commutation criterion fails for all practical draws.
inline Protocol random_violating_protocol(Eigen::Index d, std::size_t n, Rng& rng) {
  RVec spec(d);
  for (Eigen::Index i = 0; i < d; ++i) spec(i) = 1.0 + static_cast<double>(i) + uniform(rng, 0.0, 0.5);
  spec /= spec.sum();
  const CMat v = random_unitary(d, rng);
  const CMat rho = v * spec.cast<Complex>().asDiagonal() * v.adjoint();
  std::vector<Outcome> outcomes;
  for (std::size_t m = 0; m < n; ++m) {
    Outcome o;
    o.unitary = m == 0 ? CMat(CMat::Identity(d, d)) : random_unitary(d, rng);
    o.probability = 1.0 / static_cast<double>(n);
    outcomes.push_back(std::move(o));
  }
  std::vector<CVec> samples;
  for (int s = 0; s < 4; ++s) samples.push_back(random_state(d, rng));
  const auto kind = n == static_cast<std::size_t>(d) ? MeasurementKind::projective : MeasurementKind::povm;
  return Protocol("violating", resource_for(rho), kind, std::move(outcomes), Ensemble::sample_list(std::move(samples)));
}

// Teleportation corrections in a random frame w with per-state probabilities.
// Eigenbasis states of the rotated sigma_z, sigma_x and sigma_y admit
// independent splits of the probability mass:
//   z-states: p_I + p_Z = p_X + p_Y = 1/2
//   x-states: p_I + p_X = p_Z + p_Y = 1/2
//   y-states: p_I + p_Y = p_X + p_Z = 1/2
// With one superposition sample and unequal splits the protocol is exact and
// not oblivious.
inline Protocol retuned_teleportation(const CMat& w, std::vector<int> axes, std::vector<double> splits,
                                      std::vector<double> second_splits) {
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  std::vector<CMat> paulis = {pauli::identity(), pauli::x(), pauli::y(), pauli::z()};
  std::vector<Outcome> outcomes;
  for (const CMat& p : paulis) {
    Outcome o;
    o.unitary = w * p * w.adjoint();
    outcomes.push_back(std::move(o));
  }
  std::vector<CVec> samples;
  std::vector<std::vector<double>> table;
  for (std::size_t s = 0; s < axes.size(); ++s) {
    CVec v(2);
    const double a = splits[s], b = second_splits[s];
    std::vector<double> row(4);  // I, X, Y, Z
    switch (axes[s]) {
      case 0:  // |0>
        v << 1.0, 0.0;
        row = {a, b, 0.5 - b, 0.5 - a};
        break;
      case 1:  // |1>
        v << 0.0, 1.0;
        row = {a, b, 0.5 - b, 0.5 - a};
        break;
      case 2:  // |+>
        v << h, h;
        row = {a, 0.5 - a, 0.5 - b, b};
        break;
      case 3:  // |->
        v << h, -h;
        row = {a, 0.5 - a, 0.5 - b, b};
        break;
      default:  // |+i>
        v << h, h * i;
        row = {a, b, 0.5 - a, 0.5 - b};
        break;
    }
    samples.push_back(w * v);
    table.push_back(row);
  }
  return Protocol("retuned-teleportation", BipartiteState::maximally_entangled(2), MeasurementKind::povm,
                  std::move(outcomes), Ensemble::sample_list(std::move(samples)), std::move(table));
}

struct ObliviousnessCase {
  Protocol protocol;
  bool oblivious = false;
};

// Even trials: oblivious protocols (builtins in random frames, random block
// constructions). Odd trials: retuned teleportation with a random frame,
// random sample axes and random unequal splits.
inline ObliviousnessCase random_obliviousness_case(int trial, Rng& rng) {
  ObliviousnessCase c;
  c.oblivious = trial % 2 == 0;
  if (c.oblivious) {
    if (trial % 4 == 0) {
      Protocol base = builtin_protocol(trial % 8 == 0 ? Builtin::teleportation_qubit : Builtin::equatorial_qubit);
      c.protocol = rotate_protocol(base, random_unitary(2, rng), "rotated");
    } else {
      c.protocol = random_composed({2}, rng).protocol;
    }
    return c;
  }
  std::vector<int> axes = {0, 1, 2};
  const int extra = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int e = 0; e < extra; ++e) axes.push_back(std::uniform_int_distribution<int>(0, 4)(rng));
  std::vector<double> a, b;
  for (std::size_t s = 0; s < axes.size(); ++s) {
    a.push_back(uniform(rng, 0.02, 0.48));
    b.push_back(uniform(rng, 0.02, 0.48));
  }
  c.protocol = retuned_teleportation(random_unitary(2, rng), axes, a, b);
  return c;
}

}  // namespace rsp::testing
