#include "rsp/simulate.h"

#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/special_functions/gamma.hpp>

namespace rsp {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct BatchTally {
  std::vector<std::size_t> counts;
  std::vector<std::uint32_t> sequence;
};

}  // namespace

std::uint64_t CounterRng::derive_key(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + kGoldenGamma));
}

std::uint64_t CounterRng::at(std::uint64_t counter) const { return splitmix64(key_ + (counter + 1) * kGoldenGamma); }

double CounterRng::uniform_at(std::uint64_t counter) const {
  return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
}

double chi_square_upper_tail(double statistic, std::size_t degrees_of_freedom) {
  if (degrees_of_freedom == 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * static_cast<double>(degrees_of_freedom), 0.5 * statistic);
}

ContingencyResult homogeneity_test(std::span<const std::vector<std::size_t>> rows) {
  ContingencyResult out;
  if (rows.size() < 2) return out;
  const std::size_t cols = rows.front().size();
  std::vector<double> col_totals(cols, 0.0);
  std::vector<double> row_totals(rows.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw DimensionError("contingency rows differ in length");
    for (std::size_t j = 0; j < cols; ++j) {
      col_totals[j] += static_cast<double>(rows[i][j]);
      row_totals[i] += static_cast<double>(rows[i][j]);
    }
    total += row_totals[i];
  }
  std::size_t used_cols = 0;
  for (std::size_t j = 0; j < cols; ++j) {
    if (col_totals[j] == 0.0) continue;
    ++used_cols;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double expected = row_totals[i] * col_totals[j] / total;
      double diff = static_cast<double>(rows[i][j]) - expected;
      out.statistic += diff * diff / expected;
    }
  }
  if (used_cols < 2) return out;
  out.degrees_of_freedom = (rows.size() - 1) * (used_cols - 1);
  out.p_value = chi_square_upper_tail(out.statistic, out.degrees_of_freedom);
  return out;
}

SimReport simulate(const Protocol& protocol, const SimConfig& config) {
  if (config.runs < 1) throw PreconditionError("simulation needs at least one run");
  if (!config.skip_verification) {
    VerificationReport verification = verify_rsp_condition(protocol);
    if (!verification.pass) {
      throw PreconditionError("protocol fails verification; pass skip_verification to simulate anyway");
    }
  } else {
    protocol.validate();
  }

  SimReport report;
  report.runs = config.runs;
  report.seed = config.seed;
  const std::size_t n_out = protocol.outcomes.size();

  CVec target;
  std::vector<double> declared(n_out, 0.0);
  if (const auto* index = std::get_if<std::size_t>(&config.target)) {
    if (*index >= protocol.ensemble.sample_count()) throw PreconditionError("target index outside the ensemble");
    target = protocol.ensemble.samples()[*index];
    report.target_index = *index;
    for (std::size_t m = 0; m < n_out; ++m) {
      if (!protocol.outcomes[m].failure) declared[m] = protocol.declared_probability(*index, m);
    }
  } else {
    target = std::get<CVec>(config.target);
    if (target.size() != protocol.dim()) throw DimensionError("explicit target has the wrong dimension");
    if (std::abs(target.norm() - 1.0) > 1e-9) throw NormalizationError("explicit target is not normalized");
    if (!protocol.sample_probabilities.empty()) {
      throw PreconditionError("explicit targets need state-independent outcome probabilities");
    }
    for (std::size_t m = 0; m < n_out; ++m) {
      if (!protocol.outcomes[m].failure) declared[m] = protocol.declared_probability(0, m);
    }
  }

  TargetMeasurement meas = measurement_for_target(protocol, target, declared);
  report.probabilities = meas.probabilities;

  // Post-correction fidelity for each outcome; the collapse is deterministic
  // once the outcome is known.
  std::vector<double> outcome_fidelity(n_out, 0.0);
  for (std::size_t m = 0; m < n_out; ++m) {
    if (protocol.outcomes[m].failure) continue;
    ConditionalState cond = conditional_state(protocol.resource, meas.eigenstates[m]);
    if (cond.state) outcome_fidelity[m] = fidelity(protocol.outcomes[m].unitary * *cond.state, target);
  }

  std::vector<double> cdf(n_out);
  double acc = 0.0;
  for (std::size_t m = 0; m < n_out; ++m) {
    acc += std::max(meas.probabilities[m], 0.0);
    cdf[m] = acc;
  }
  for (double& c : cdf) c /= acc;

  const CounterRng rng(CounterRng::derive_key(config.seed, 0));
  const std::size_t batches = std::clamp<std::size_t>(config.batches, 1, config.runs);
  std::vector<BatchTally> tallies(batches);
  auto run_batch = [&](std::size_t b) {
    const std::size_t begin = config.runs * b / batches;
    const std::size_t end = config.runs * (b + 1) / batches;
    BatchTally& tally = tallies[b];
    tally.counts.assign(n_out, 0);
    if (config.keep_sequence) tally.sequence.reserve(end - begin);
    for (std::size_t run = begin; run < end; ++run) {
      const double u = rng.uniform_at(run);
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t m = it == cdf.end() ? n_out - 1 : static_cast<std::size_t>(it - cdf.begin());
      ++tally.counts[m];
      if (config.keep_sequence) tally.sequence.push_back(static_cast<std::uint32_t>(m));
    }
  };
  if (batches == 1) {
    run_batch(0);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(batches);
    for (std::size_t b = 0; b < batches; ++b) workers.emplace_back(run_batch, b);
    for (std::thread& w : workers) w.join();
  }

  report.counts.assign(n_out, 0);
  for (const BatchTally& t : tallies) {
    for (std::size_t m = 0; m < n_out; ++m) report.counts[m] += t.counts[m];
    report.sequence.insert(report.sequence.end(), t.sequence.begin(), t.sequence.end());
  }

  double fidelity_sum = 0.0;
  std::size_t successes = 0;
  report.frequencies.resize(n_out);
  for (std::size_t m = 0; m < n_out; ++m) {
    report.frequencies[m] = static_cast<double>(report.counts[m]) / static_cast<double>(config.runs);
    if (report.counts[m] == 0) continue;
    if (protocol.outcomes[m].failure) {
      report.failures += report.counts[m];
      continue;
    }
    successes += report.counts[m];
    fidelity_sum += outcome_fidelity[m] * static_cast<double>(report.counts[m]);
    report.min_fidelity = std::min(report.min_fidelity, outcome_fidelity[m]);
  }
  report.mean_fidelity = successes ? fidelity_sum / static_cast<double>(successes) : 0.0;
  if (!successes) report.min_fidelity = 0.0;

  std::size_t cells = 0;
  for (std::size_t m = 0; m < n_out; ++m) {
    const double expected = static_cast<double>(config.runs) * meas.probabilities[m];
    if (meas.probabilities[m] <= 1e-15) continue;
    ++cells;
    const double diff = static_cast<double>(report.counts[m]) - expected;
    report.chi_square += diff * diff / expected;
  }
  report.degrees_of_freedom = cells > 0 ? cells - 1 : 0;
  report.p_value = chi_square_upper_tail(report.chi_square, report.degrees_of_freedom);
  return report;
}

}  // namespace rsp
