#pragma once

// Block construction of deterministic exact protocols on partially entangled
// resources.
//
// rho_B is split into eigenspaces H_j. Each block carries a sub-protocol for a
// maximally entangled resource on H_j, and the blocks are glued together with
// phases u_j(k) taken from the characters of a finite Abelian group G with
// |G| equal to the number of blocks:
//
//   U_{k,m} = (+)_j u_j(k) U^{(j)}_{m_j},   p_{k,m} = p_m.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rsp/ensemble.h"
#include "rsp/linalg.h"
#include "rsp/protocol.h"

namespace rsp {

struct SpectralBlock {
  double eigenvalue = 0.0;
  int dim = 0;
  CMat basis;      // D x dim, orthonormal columns
  CMat projector;  // basis * basis^dag
};

struct SpectralBlocks {
  std::vector<SpectralBlock> blocks;  // strictly decreasing eigenvalues

  std::size_t count() const { return blocks.size(); }
  Eigen::Index dim() const { return blocks.empty() ? 0 : blocks.front().basis.rows(); }
  /// sum_j lambda_j P_j
  CMat rho() const;
};

inline constexpr double kDefaultClusterGap = 1e-6;

/// Eigenvalues closer than `cluster_gap` are merged into one block. Throws
/// SingularError when an eigenvalue lies below `floor` and PreconditionError
/// for non-Hermitian or non-unit-trace input.
SpectralBlocks spectral_blocks(const CMat& rho_b, double cluster_gap = kDefaultClusterGap,
                               double floor = kSingularityThreshold);

struct SpectrumEntry {
  double eigenvalue = 0.0;
  int dim = 0;
};

/// Blocks of the diagonal rho_B built from the listed spectrum, with
/// computational basis vectors assigned in listing order. Blocks come out
/// sorted by decreasing eigenvalue.
SpectralBlocks blocks_from_spectrum(std::span<const SpectrumEntry> spectrum);

/// Z_{r_1} x ... x Z_{r_p}. Elements are tuples enumerated lexicographically
/// (first factor most significant).
class AbelianGroup {
 public:
  explicit AbelianGroup(std::vector<int> orders);
  static AbelianGroup cyclic(int order) { return AbelianGroup({order}); }

  const std::vector<int>& orders() const noexcept { return orders_; }
  std::size_t order() const noexcept { return order_; }
  std::vector<int> element(std::size_t index) const;
  std::size_t index_of(std::span<const int> element) const;
  std::string element_label(std::size_t index) const;

 private:
  std::vector<int> orders_;
  std::size_t order_ = 1;
};

/// Table of u_j(k), indexed by element indices.
class CharacterTable {
 public:
  CharacterTable(std::size_t order, std::vector<Complex> values);

  /// Every entry equal to one. Not a valid character table for order > 1.
  static CharacterTable all_ones(std::size_t order);

  std::size_t order() const noexcept { return order_; }
  Complex operator()(std::size_t j, std::size_t k) const { return values_[j * order_ + k]; }

  /// max_{j,l} |(1/|G|) sum_k u_j(k) conj(u_l(k)) - delta_jl|
  double orthogonality_residual() const;

 private:
  std::size_t order_;
  std::vector<Complex> values_;
};

/// u_j(k) = prod_i exp(2 pi i j_i k_i / r_i). Quarter-turn phases are
/// returned exactly.
CharacterTable characters(const AbelianGroup& group);

/// A protocol for a maximally entangled resource on one block.
struct SubProtocol {
  std::string name;
  std::vector<CMat> unitaries;
  std::vector<double> probabilities;
  Ensemble ensemble;

  Eigen::Index dim() const { return ensemble.dim(); }
};

SubProtocol equatorial_sub(int grid = 8);
SubProtocol trivial_sub();

/// Extracts a sub-protocol from a deterministic protocol with a maximally
/// entangled resource and state-independent probabilities.
SubProtocol sub_from_protocol(const Protocol& protocol);

/// max over the sub-ensemble of ||sum_m p_m U_m^dag |psi><psi| U_m - 1/D_j||_F
double sub_protocol_residual(const SubProtocol& sub);

/// Throws ConstructionError when the sub-protocol is not usable as a block:
/// more outcomes than its dimension (POVM building blocks are not supported),
/// invalid probabilities, non-unitary corrections, or a residual above `tol`.
void validate_sub_protocol(const SubProtocol& sub, double tol = 1e-9);

struct SubProtocolAssignment {
  std::vector<SubProtocol> subs;  // one per block, in block order
  /// Group element index for each block. Empty means block b -> element b
  /// (decreasing eigenvalue to lexicographic group order).
  std::vector<std::size_t> block_elements;
};

/// k-independent outcome probabilities p_m over outcome tuples m (one
/// sub-outcome per block).
struct BlockProbabilities {
  std::vector<std::vector<int>> tuples;
  std::vector<double> probabilities;
};

/// p_m = (1/r) prod_j p^{(j)}_{m_j} over the full Cartesian product.
BlockProbabilities default_probability_assignment(const SubProtocolAssignment& subs, const AbelianGroup& group);

/// Restriction to `mask` tuples. Without explicit values the product
/// probabilities are rescaled to total 1/r. The result is not checked here;
/// compose_block_protocol validates it.
BlockProbabilities masked_probability_assignment(const SubProtocolAssignment& subs, const AbelianGroup& group,
                                                 std::vector<std::vector<int>> mask,
                                                 std::optional<std::vector<double>> probabilities = std::nullopt);

/// max_{j,n} |r sum_m p_m delta_{n, m_j} - p^{(j)}_n|
double probability_constraint_residual(const BlockProbabilities& probabilities, const SubProtocolAssignment& subs,
                                       std::size_t group_order);

struct ComposeOptions {
  std::string name = "block-construction";
  int phase_grid = 8;
  std::size_t cap = 4096;
  /// Replaces the group's character table (used for negative controls).
  std::optional<CharacterTable> characters;
  /// Verify the exact-RSP condition and the commutation criterion on the
  /// output and throw ConstructionError when either fails.
  bool verify = true;
};

struct ComposedOutcome {
  std::size_t element = 0;  // k
  std::vector<int> tuple;   // m
};

struct ComposedProtocol {
  Protocol protocol;
  SpectralBlocks blocks;
  AbelianGroup group{{1}};
  std::vector<std::size_t> block_elements;
  std::vector<ComposedOutcome> outcome_index;  // parallel to protocol.outcomes
  std::optional<VerificationReport> verification;
  double max_commutation_norm = 0.0;
};

/// Outcomes are enumerated tuple-major, group element minor.
ComposedProtocol compose_block_protocol(const SpectralBlocks& blocks, const AbelianGroup& group,
                                        const SubProtocolAssignment& subs, const BlockProbabilities& probabilities,
                                        const ComposeOptions& options = {});

struct CancellationAudit {
  double tolerance = 1e-10;
  double max_offdiagonal_norm = 0.0;
  /// pair_norms[j][l]: max over samples of ||P_j S P_l||_F, S the assembled
  /// sum of the exact-RSP condition
  std::vector<std::vector<double>> pair_norms;
  bool pass = false;
};

CancellationAudit offdiagonal_cancellation_audit(const ComposedProtocol& composed, double tolerance = 1e-10);

}  // namespace rsp
