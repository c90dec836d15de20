#include "rsp/ensemble.h"

#include <cmath>
#include <numbers>

namespace rsp {

namespace {

Complex unit_phase(double angle) { return std::polar(1.0, angle); }

}  // namespace

Ensemble Ensemble::sample_list(std::vector<CVec> states, int declared_dim) {
  if (states.empty()) throw DimensionError("ensemble must contain at least one state");
  for (const CVec& s : states) {
    if (s.size() != states.front().size()) throw DimensionError("ensemble states differ in dimension");
    if (std::abs(s.norm() - 1.0) > 1e-9) throw NormalizationError("ensemble state is not normalized");
  }
  Ensemble e;
  e.spec_ = SampleList{std::move(states), declared_dim};
  return e;
}

Ensemble Ensemble::equatorial(int grid, double phase_offset) {
  if (grid < 1) throw DimensionError("equatorial grid must have at least one point");
  Ensemble e;
  e.spec_ = Equatorial{grid, phase_offset};
  return e;
}

Ensemble Ensemble::block_product(std::vector<EnsembleBlock> blocks, int phase_grid, std::size_t cap) {
  if (blocks.empty()) throw DimensionError("block-product ensemble needs at least one block");
  if (phase_grid < 1 || cap < 1) throw DimensionError("phase grid and cap must be positive");
  Eigen::Index dim = blocks.front().basis.rows();
  double total = 0.0;
  for (const EnsembleBlock& b : blocks) {
    if (!b.sub) throw DimensionError("block-product ensemble block has no sub-ensemble");
    if (b.basis.rows() != dim) throw DimensionError("block bases live in different spaces");
    if (b.basis.cols() != b.sub->dim()) throw DimensionError("block basis width differs from sub-ensemble dimension");
    if (b.weight <= 0.0) throw NormalizationError("block weight must be positive");
    total += b.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw NormalizationError("block weights must sum to one");
  Ensemble e;
  e.spec_ = BlockProduct{std::move(blocks), phase_grid, cap};
  return e;
}

Ensemble::Kind Ensemble::kind() const {
  return std::visit(
      [](const auto& s) -> Kind {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SampleList>) return Kind::sample_list;
        if constexpr (std::is_same_v<T, Equatorial>) return Kind::equatorial;
        return Kind::block_product;
      },
      spec_);
}

Eigen::Index Ensemble::dim() const {
  if (auto* s = as_sample_list()) return s->states.empty() ? 0 : s->states.front().size();
  if (as_equatorial()) return 2;
  return as_block_product()->blocks.front().basis.rows();
}

std::size_t Ensemble::raw_combinations() const {
  const BlockProduct& bp = *as_block_product();
  std::size_t n = 1;
  for (std::size_t j = 0; j < bp.blocks.size(); ++j) {
    n *= bp.blocks[j].sub->sample_count();
    if (j > 0) n *= static_cast<std::size_t>(bp.phase_grid);
  }
  return n;
}

std::size_t Ensemble::sample_count() const {
  if (auto* s = as_sample_list()) return s->states.size();
  if (auto* q = as_equatorial()) return static_cast<std::size_t>(q->grid);
  return std::min(raw_combinations(), as_block_product()->cap);
}

std::vector<CVec> Ensemble::samples() const {
  if (auto* s = as_sample_list()) return s->states;
  if (auto* q = as_equatorial()) {
    std::vector<CVec> out;
    out.reserve(q->grid);
    for (int k = 0; k < q->grid; ++k) {
      double phi = q->phase_offset + 2.0 * std::numbers::pi * k / q->grid;
      CVec v(2);
      v << 1.0, unit_phase(phi);
      out.push_back(v / std::sqrt(2.0));
    }
    return out;
  }

  const BlockProduct& bp = *as_block_product();
  const std::size_t r = bp.blocks.size();
  std::vector<std::vector<CVec>> subs;
  subs.reserve(r);
  for (const EnsembleBlock& b : bp.blocks) subs.push_back(b.sub->samples());

  // Mixed-radix index: digits for each block's sub-sample, then one phase
  // digit for every block after the first.
  std::vector<std::size_t> radix;
  for (std::size_t j = 0; j < r; ++j) radix.push_back(subs[j].size());
  for (std::size_t j = 1; j < r; ++j) radix.push_back(static_cast<std::size_t>(bp.phase_grid));

  const std::size_t total = raw_combinations();
  const std::size_t count = std::min(total, bp.cap);
  std::vector<CVec> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t index = count == total ? n : (n * total) / count;
    std::vector<std::size_t> digits(radix.size());
    for (std::size_t d = 0; d < radix.size(); ++d) {
      digits[d] = index % radix[d];
      index /= radix[d];
    }
    CVec v = CVec::Zero(dim());
    for (std::size_t j = 0; j < r; ++j) {
      double phi = j == 0 ? 0.0 : 2.0 * std::numbers::pi * digits[r + j - 1] / bp.phase_grid;
      v += std::sqrt(bp.blocks[j].weight) * unit_phase(phi) * (bp.blocks[j].basis * subs[j][digits[j]]);
    }
    out.push_back(std::move(v));
  }
  return out;
}

int Ensemble::real_dimension() const {
  if (auto* s = as_sample_list()) return s->declared_dim;
  if (as_equatorial()) return 1;
  const BlockProduct& bp = *as_block_product();
  int d = static_cast<int>(bp.blocks.size()) - 1;
  for (const EnsembleBlock& b : bp.blocks) d += b.sub->real_dimension();
  return d;
}

Ensemble Ensemble::subset(const std::vector<std::size_t>& indices) const {
  std::vector<CVec> all = samples();
  std::vector<CVec> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= all.size()) throw DimensionError("ensemble subset index out of range");
    picked.push_back(all[i]);
  }
  return sample_list(std::move(picked), real_dimension());
}

}  // namespace rsp
