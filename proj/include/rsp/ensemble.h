#pragma once

#include <cstddef>
#include <memory>
#include <variant>
#include <vector>

#include "rsp/linalg.h"

namespace rsp {

class Ensemble;

/// One block of a block-product ensemble: the embedded states are
/// sqrt(weight) * e^{i phi} * basis * psi_sub with psi_sub from `sub`.
struct EnsembleBlock {
  double weight = 0.0;  // lambda_j * D_j
  CMat basis;           // D x D_j, orthonormal columns
  std::shared_ptr<const Ensemble> sub;
};

/// A preparable ensemble: a finite, deterministically enumerated set of
/// normalized target states.
class Ensemble {
 public:
  enum class Kind { sample_list, equatorial, block_product };

  struct SampleList {
    std::vector<CVec> states;
    int declared_dim = 0;  // real dimension of the family the samples stand for
  };
  struct Equatorial {
    int grid = 24;
    double phase_offset = 0.0;
  };
  struct BlockProduct {
    std::vector<EnsembleBlock> blocks;
    int phase_grid = 8;
    std::size_t cap = 4096;
  };

  Ensemble() = default;

  /// Throws NormalizationError when a state is not unit norm within 1e-9
  /// or DimensionError when dimensions disagree.
  static Ensemble sample_list(std::vector<CVec> states, int declared_dim = 0);

  /// (|0> + e^{i phi}|1>)/sqrt(2) at phi = offset + 2 pi k / grid.
  static Ensemble equatorial(int grid = 24, double phase_offset = 0.0);

  /// Direct-sum family sum_j sqrt(w_j) e^{i phi_j} B_j psi_j. The first
  /// block's phase is fixed to zero; the other r-1 phases run over a grid of
  /// `phase_grid` points each. When the number of combinations exceeds `cap`
  /// an evenly strided subset of size `cap` is enumerated.
  static Ensemble block_product(std::vector<EnsembleBlock> blocks, int phase_grid = 8,
                                std::size_t cap = 4096);

  Kind kind() const;
  Eigen::Index dim() const;
  std::size_t sample_count() const;
  std::vector<CVec> samples() const;

  /// Real dimension d of the family: 1 for equatorial, the declared value for
  /// sample lists, sum_j d_j + r - 1 for block products.
  int real_dimension() const;

  const SampleList* as_sample_list() const { return std::get_if<SampleList>(&spec_); }
  const Equatorial* as_equatorial() const { return std::get_if<Equatorial>(&spec_); }
  const BlockProduct* as_block_product() const { return std::get_if<BlockProduct>(&spec_); }

  /// Same kind and parameters, restricted to the listed sample indices
  /// (always returned as a sample list).
  Ensemble subset(const std::vector<std::size_t>& indices) const;

 private:
  std::size_t raw_combinations() const;
  std::variant<SampleList, Equatorial, BlockProduct> spec_{SampleList{}};
};

}  // namespace rsp
