#pragma once

// Monte Carlo runs of a protocol: Born-rule sampling of Alice's outcome,
// collapse of Bob's half, correction, and fidelity bookkeeping.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "rsp/protocol.h"

namespace rsp {

/// Counter-based generator: the i-th draw of stream `key` is
/// splitmix64(key + i * golden_gamma). Draws can be addressed directly, so
/// runs split across batches replay identically.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  /// Stream key for (seed, stream index).
  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t at(std::uint64_t counter) const;
  /// Uniform double in [0, 1) from 53 bits of at(counter).
  double uniform_at(std::uint64_t counter) const;

  std::uint64_t next() { return at(counter_++); }
  double uniform() { return uniform_at(counter_++); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct SimConfig {
  std::size_t runs = 1000;
  std::uint64_t seed = 0;
  /// Ensemble sample index or an explicit target state.
  std::variant<std::size_t, CVec> target = std::size_t{0};
  bool skip_verification = false;
  std::size_t batches = 1;  // run batches executed on separate threads
  bool keep_sequence = false;
};

struct SimReport {
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  std::optional<std::size_t> target_index;
  std::vector<double> probabilities;  // recomputed Born probabilities for the target
  std::vector<std::size_t> counts;
  std::vector<double> frequencies;
  std::size_t failures = 0;
  double min_fidelity = 1.0;   // over successful runs
  double mean_fidelity = 1.0;  // over successful runs
  double chi_square = 0.0;     // against `probabilities`
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
  std::vector<std::uint32_t> sequence;  // filled when keep_sequence is set
};

/// Throws PreconditionError when the protocol fails verification and
/// `skip_verification` is not set.
SimReport simulate(const Protocol& protocol, const SimConfig& config);

/// Upper tail P[X >= statistic] of a chi-square distribution.
double chi_square_upper_tail(double statistic, std::size_t degrees_of_freedom);

struct ContingencyResult {
  double statistic = 0.0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1.0;
};

/// Pearson test of homogeneity for rows of outcome counts (one row per
/// target). Columns that are empty in every row are dropped.
ContingencyResult homogeneity_test(std::span<const std::vector<std::size_t>> rows);

}  // namespace rsp
