#include "rsp/obliviousness.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rsp {

namespace {

constexpr double kIndependenceThreshold = 1e-8;
constexpr std::size_t kExhaustiveLimit = 20000;

std::vector<std::size_t> greedy_basis(std::span<const CVec> samples, std::span<const std::size_t> order) {
  std::vector<std::size_t> basis;
  if (samples.empty()) return basis;
  const Eigen::Index d = samples.front().size();
  CMat q(d, 0);
  for (std::size_t idx : order) {
    const CVec& v = samples[idx];
    CVec r = v - q * (q.adjoint() * v);
    r -= q * (q.adjoint() * r);  // second pass keeps q orthonormal
    double n = r.norm();
    if (n > kIndependenceThreshold * std::max(1.0, v.norm())) {
      q.conservativeResize(Eigen::NoChange, q.cols() + 1);
      q.col(q.cols() - 1) = r / n;
      basis.push_back(idx);
      if (q.cols() == d) break;
    }
  }
  return basis;
}

std::optional<std::size_t> find_superposition(std::span<const CVec> samples, std::span<const std::size_t> basis,
                                              double threshold) {
  const Eigen::Index d = samples.front().size();
  CMat b(d, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = samples[basis[i]];
  Eigen::ColPivHouseholderQR<CMat> qr(b);
  std::vector<bool> in_basis(samples.size(), false);
  for (std::size_t i : basis) in_basis[i] = true;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (in_basis[s]) continue;
    CVec c = qr.solve(samples[s]);
    if ((b * c - samples[s]).norm() > 1e-7) continue;  // outside the span of this candidate basis
    bool full = true;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
      if (std::abs(c(k)) <= threshold) {
        full = false;
        break;
      }
    }
    if (full) return s;
  }
  return std::nullopt;
}

bool next_combination(std::vector<std::size_t>& comb, std::size_t n) {
  const std::size_t k = comb.size();
  for (std::size_t i = k; i-- > 0;) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  double value = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    value = value * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (value > static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(std::llround(value));
}

bool linearly_independent(std::span<const CVec> samples, std::span<const std::size_t> subset) {
  return greedy_basis(samples, subset).size() == subset.size();
}

struct FitResult {
  CMat matrix;
  double residual = 0.0;
  double condition = 1.0;
  Eigen::Index rank = 0;
};

// Least squares M X = Y through the normal equations M (X X^dag) = Y X^dag.
FitResult least_squares(const CMat& x, const CMat& y) {
  const CMat gram = x * x.adjoint();
  const CMat rhs = y * x.adjoint();
  HermitianEigen e = eig_hermitian(gram);
  const double top = e.values.size() ? e.values(e.values.size() - 1) : 0.0;
  const double bottom = e.values.size() ? e.values(0) : 0.0;

  FitResult out;
  out.condition = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();
  if (out.condition <= kFitConditionGuard) {
    out.matrix = gram.ldlt().solve(rhs.adjoint()).adjoint();
    out.rank = gram.rows();
  } else {
    RVec inv = RVec::Zero(e.values.size());
    const double cutoff = top / kFitConditionGuard;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) {
      if (e.values(i) > cutoff) {
        inv(i) = 1.0 / e.values(i);
        ++out.rank;
      }
    }
    out.matrix = rhs * (e.vectors * inv.asDiagonal() * e.vectors.adjoint());
  }
  const CMat err = out.matrix * x - y;
  for (Eigen::Index s = 0; s < err.cols(); ++s) out.residual = std::max(out.residual, err.col(s).norm());
  return out;
}

void stack_pairs(std::span<const std::pair<CVec, CVec>> pairs, bool conjugate, CMat& x, CMat& y) {
  if (pairs.empty()) throw PreconditionError("fitting needs at least one (target, eigenstate) pair");
  const Eigen::Index db = pairs.front().first.size();
  const Eigen::Index da = pairs.front().second.size();
  x.resize(db, static_cast<Eigen::Index>(pairs.size()));
  y.resize(da, static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t s = 0; s < pairs.size(); ++s) {
    if (pairs[s].first.size() != db || pairs[s].second.size() != da) {
      throw DimensionError("fit pairs have inconsistent dimensions");
    }
    const auto col = static_cast<Eigen::Index>(s);
    x.col(col) = conjugate ? CVec(pairs[s].first.conjugate()) : pairs[s].first;
    y.col(col) = pairs[s].second;
  }
}

}  // namespace

CVec basis_coefficients(std::span<const CVec> samples, std::span<const std::size_t> basis, const CVec& v) {
  CMat b(v.size(), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) b.col(static_cast<Eigen::Index>(i)) = samples[basis[i]];
  return b.colPivHouseholderQr().solve(v);
}

LargeEnsembleWitness sufficiently_large_check(std::span<const CVec> samples, double coefficient_threshold) {
  LargeEnsembleWitness out;
  if (samples.empty()) return out;
  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> basis = greedy_basis(samples, order);
  out.rank = basis.size();
  out.basis = basis;
  if (out.rank < 2 || n <= out.rank) return out;

  auto accept = [&](const std::vector<std::size_t>& candidate) {
    if (auto s = find_superposition(samples, candidate, coefficient_threshold)) {
      out.ok = true;
      out.basis = candidate;
      out.superposition = *s;
      return true;
    }
    return false;
  };

  if (accept(basis)) return out;

  // Greedy bases from rotated and reversed orderings.
  const std::size_t rotations = std::min<std::size_t>(n, 64);
  for (std::size_t start = 1; start < rotations; ++start) {
    std::rotate(order.begin(), order.begin() + 1, order.end());
    std::vector<std::size_t> candidate = greedy_basis(samples, order);
    std::sort(candidate.begin(), candidate.end());
    if (accept(candidate)) return out;
  }
  std::vector<std::size_t> reversed(n);
  std::iota(reversed.rbegin(), reversed.rend(), 0);
  {
    std::vector<std::size_t> candidate = greedy_basis(samples, reversed);
    std::sort(candidate.begin(), candidate.end());
    if (accept(candidate)) return out;
  }

  // Exhaustive search when the number of candidate bases is small.
  if (binomial_capped(n, out.rank, kExhaustiveLimit) <= kExhaustiveLimit) {
    std::vector<std::size_t> comb(out.rank);
    std::iota(comb.begin(), comb.end(), 0);
    do {
      if (linearly_independent(samples, comb) && accept(comb)) return out;
    } while (next_combination(comb, n));
  }
  out.basis = basis;
  return out;
}

LargeEnsembleWitness sufficiently_large_check(const Ensemble& ensemble, double coefficient_threshold) {
  std::vector<CVec> samples = ensemble.samples();
  return sufficiently_large_check(samples, coefficient_threshold);
}

AntilinearFit fit_antilinear_map(std::span<const std::pair<CVec, CVec>> pairs, std::size_t outcome) {
  CMat x, y;
  stack_pairs(pairs, true, x, y);
  FitResult fit = least_squares(x, y);
  AntilinearFit out;
  out.outcome = outcome;
  out.op = AntilinearOp(std::move(fit.matrix));
  out.residual = fit.residual;
  out.condition_number = fit.condition;
  out.rank = fit.rank;
  return out;
}

double fit_linear_residual(std::span<const std::pair<CVec, CVec>> pairs) {
  CMat x, y;
  stack_pairs(pairs, false, x, y);
  return least_squares(x, y).residual;
}

const char* to_string(OblivStatus status) {
  switch (status) {
    case OblivStatus::oblivious: return "oblivious";
    case OblivStatus::non_oblivious: return "non-oblivious";
    case OblivStatus::inconclusive: return "inconclusive-ensemble-too-small";
  }
  return "unknown";
}

OblivVerdict obliviousness_test(const Protocol& protocol, const OblivOptions& options) {
  VerifyOptions vopts;
  vopts.tolerance = options.verify_tolerance;
  VerificationReport verification = verify_rsp_condition(protocol, vopts);
  if (!verification.pass) {
    throw PreconditionError("protocol is not exact (residual " + std::to_string(verification.max_rsp_residual) +
                            "); refusing to classify");
  }

  const std::vector<CVec> samples = protocol.ensemble.samples();
  const std::size_t n_out = protocol.outcomes.size();
  OblivVerdict verdict;
  verdict.witness = sufficiently_large_check(samples, options.coefficient_threshold);

  verdict.probability_spread.assign(n_out, 0.0);
  for (std::size_t m = 0; m < n_out; ++m) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : verification.probabilities) {
      lo = std::min(lo, row[m]);
      hi = std::max(hi, row[m]);
    }
    verdict.probability_spread[m] = hi - lo;
  }

  std::vector<std::vector<std::pair<CVec, CVec>>> pairs(n_out);
  for (std::size_t s = 0; s < samples.size(); ++s) {
    TargetMeasurement meas = measurement_for_sample(protocol, s, samples[s]);
    for (std::size_t m = 0; m < n_out; ++m) {
      if (!protocol.outcomes[m].failure) pairs[m].emplace_back(samples[s], meas.eigenstates[m]);
    }
  }

  verdict.probabilities_independent = true;
  verdict.fits_succeed = true;
  for (std::size_t m = 0; m < n_out; ++m) {
    const Outcome& o = protocol.outcomes[m];
    if (o.failure) continue;
    if (verdict.probability_spread[m] > options.spread_tolerance) verdict.probabilities_independent = false;

    AntilinearFit fit = fit_antilinear_map(pairs[m], m);
    if (fit.residual > options.fit_tolerance) verdict.fits_succeed = false;
    verdict.linear_fit_residuals.push_back(fit_linear_residual(pairs[m]));

    const CMat correction = o.unitary * compose_antilinear(protocol.resource, fit.op);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const double p = verification.probabilities[s][m];
      const double err = (correction * samples[s] - std::sqrt(std::max(p, 0.0)) * samples[s]).norm();
      verdict.correction_identity_residual = std::max(verdict.correction_identity_residual, err);
    }
    verdict.fits.push_back(std::move(fit));
  }

  if (!verdict.witness.ok) {
    verdict.status = OblivStatus::inconclusive;
  } else {
    verdict.consistency_alarm = verdict.probabilities_independent != verdict.fits_succeed;
    verdict.status = verdict.probabilities_independent && verdict.fits_succeed ? OblivStatus::oblivious
                                                                              : OblivStatus::non_oblivious;
  }
  return verdict;
}

}  // namespace rsp
