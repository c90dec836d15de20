#include "rsp/group.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "rsp/reduction.h"

namespace rsp {

CMat SpectralBlocks::rho() const {
  CMat out = CMat::Zero(dim(), dim());
  for (const SpectralBlock& b : blocks) out += b.eigenvalue * b.projector;
  return out;
}

SpectralBlocks spectral_blocks(const CMat& rho_b, double cluster_gap, double floor) {
  if (rho_b.rows() != rho_b.cols() || rho_b.rows() == 0) throw DimensionError("rho_B must be square");
  if ((rho_b - rho_b.adjoint()).norm() > 1e-9) throw PreconditionError("rho_B is not Hermitian");
  if (std::abs(rho_b.trace().real() - 1.0) > 1e-9) throw PreconditionError("rho_B does not have unit trace");
  HermitianEigen e = eig_hermitian(rho_b);
  if (e.values(0) < floor) {
    std::ostringstream msg;
    msg << "rho_B eigenvalue " << e.values(0) << " is below " << floor << " (full Schmidt rank required)";
    throw SingularError(msg.str());
  }

  SpectralBlocks out;
  const Eigen::Index d = rho_b.rows();
  Eigen::Index i = d - 1;
  while (i >= 0) {
    Eigen::Index start = i;
    while (i - 1 >= 0 && e.values(i) - e.values(i - 1) <= cluster_gap) --i;
    const Eigen::Index width = start - i + 1;
    SpectralBlock block;
    block.eigenvalue = e.values.segment(i, width).mean();
    block.dim = static_cast<int>(width);
    block.basis = e.vectors.middleCols(i, width).rowwise().reverse();
    block.projector = block.basis * block.basis.adjoint();
    out.blocks.push_back(std::move(block));
    --i;
  }
  return out;
}

SpectralBlocks blocks_from_spectrum(std::span<const SpectrumEntry> spectrum) {
  if (spectrum.empty()) throw DimensionError("spectrum is empty");
  int d = 0;
  double trace = 0.0;
  for (const SpectrumEntry& entry : spectrum) {
    if (entry.dim < 1) throw DimensionError("spectrum block dimension must be positive");
    if (entry.eigenvalue < kSingularityThreshold) throw SingularError("spectrum eigenvalue below the full-rank floor");
    d += entry.dim;
    trace += entry.eigenvalue * entry.dim;
  }
  if (std::abs(trace - 1.0) > 1e-9) throw PreconditionError("spectrum must satisfy sum lambda_j D_j = 1");

  std::vector<std::size_t> order(spectrum.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return spectrum[a].eigenvalue > spectrum[b].eigenvalue; });

  std::vector<int> offsets(spectrum.size(), 0);
  for (std::size_t i = 1; i < spectrum.size(); ++i) offsets[i] = offsets[i - 1] + spectrum[i - 1].dim;

  SpectralBlocks out;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const SpectrumEntry& entry = spectrum[order[pos]];
    if (pos > 0 && out.blocks.back().eigenvalue - entry.eigenvalue <= kDefaultClusterGap) {
      throw PreconditionError("spectrum lists the same eigenvalue twice; merge the entries into one block");
    }
    SpectralBlock block;
    block.eigenvalue = entry.eigenvalue;
    block.dim = entry.dim;
    block.basis = CMat::Zero(d, entry.dim);
    for (int c = 0; c < entry.dim; ++c) block.basis(offsets[order[pos]] + c, c) = 1.0;
    block.projector = block.basis * block.basis.adjoint();
    out.blocks.push_back(std::move(block));
  }
  return out;
}

AbelianGroup::AbelianGroup(std::vector<int> orders) : orders_(std::move(orders)) {
  if (orders_.empty()) orders_.push_back(1);
  for (int r : orders_) {
    if (r < 1) throw PreconditionError("cyclic factor orders must be at least 1");
    order_ *= static_cast<std::size_t>(r);
  }
}

std::vector<int> AbelianGroup::element(std::size_t index) const {
  if (index >= order_) throw PreconditionError("group element index out of range");
  std::vector<int> out(orders_.size());
  for (std::size_t i = orders_.size(); i-- > 0;) {
    out[i] = static_cast<int>(index % orders_[i]);
    index /= orders_[i];
  }
  return out;
}

std::size_t AbelianGroup::index_of(std::span<const int> element) const {
  if (element.size() != orders_.size()) throw PreconditionError("group element has the wrong arity");
  std::size_t index = 0;
  for (std::size_t i = 0; i < orders_.size(); ++i) {
    int r = orders_[i];
    index = index * r + static_cast<std::size_t>(((element[i] % r) + r) % r);
  }
  return index;
}

std::string AbelianGroup::element_label(std::size_t index) const {
  std::vector<int> e = element(index);
  if (e.size() == 1) return std::to_string(e[0]);
  std::string out = "(";
  for (std::size_t i = 0; i < e.size(); ++i) out += (i ? "," : "") + std::to_string(e[i]);
  return out + ")";
}

CharacterTable::CharacterTable(std::size_t order, std::vector<Complex> values)
    : order_(order), values_(std::move(values)) {
  if (values_.size() != order_ * order_) throw DimensionError("character table must be |G| x |G|");
}

CharacterTable CharacterTable::all_ones(std::size_t order) {
  return CharacterTable(order, std::vector<Complex>(order * order, 1.0));
}

double CharacterTable::orthogonality_residual() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < order_; ++j) {
    for (std::size_t l = 0; l < order_; ++l) {
      Complex sum = 0.0;
      for (std::size_t k = 0; k < order_; ++k) sum += (*this)(j, k) * std::conj((*this)(l, k));
      sum /= static_cast<double>(order_);
      worst = std::max(worst, std::abs(sum - (j == l ? 1.0 : 0.0)));
    }
  }
  return worst;
}

namespace {

// exp(2 pi i num / den) with exact values at quarter turns.
Complex root_of_unity(long num, long den) {
  num = ((num % den) + den) % den;
  if ((4 * num) % den == 0) {
    switch ((4 * num) / den) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(num) / static_cast<double>(den));
}

}  // namespace

CharacterTable characters(const AbelianGroup& group) {
  const std::size_t r = group.order();
  const std::vector<int>& orders = group.orders();
  std::vector<Complex> values(r * r);
  for (std::size_t j = 0; j < r; ++j) {
    std::vector<int> ej = group.element(j);
    for (std::size_t k = 0; k < r; ++k) {
      std::vector<int> ek = group.element(k);
      Complex u = 1.0;
      for (std::size_t i = 0; i < orders.size(); ++i) {
        u *= root_of_unity(static_cast<long>(ej[i]) * ek[i], orders[i]);
      }
      values[j * r + k] = u;
    }
  }
  return CharacterTable(r, std::move(values));
}

SubProtocol equatorial_sub(int grid) {
  return {"equatorial-qubit", {pauli::identity(), pauli::z()}, {0.5, 0.5}, Ensemble::equatorial(grid)};
}

SubProtocol trivial_sub() {
  CVec one = CVec::Ones(1);
  return {"trivial-1d", {CMat::Identity(1, 1)}, {1.0}, Ensemble::sample_list({one})};
}

SubProtocol sub_from_protocol(const Protocol& protocol) {
  if (!protocol.deterministic()) throw ConstructionError("sub-protocols must be deterministic");
  if (!protocol.sample_probabilities.empty()) throw ConstructionError("sub-protocols need state-independent probabilities");
  const Eigen::Index d = protocol.dim();
  if ((protocol.rho_b() - CMat::Identity(d, d) / static_cast<double>(d)).norm() > 1e-9) {
    throw ConstructionError("sub-protocols must use a maximally entangled resource");
  }
  SubProtocol sub;
  sub.name = protocol.name;
  sub.unitaries = protocol.unitaries();
  for (std::size_t m = 0; m < protocol.outcomes.size(); ++m) sub.probabilities.push_back(protocol.declared_probability(0, m));
  sub.ensemble = protocol.ensemble;
  return sub;
}

double sub_protocol_residual(const SubProtocol& sub) {
  const Eigen::Index d = sub.dim();
  const CMat target = CMat::Identity(d, d) / static_cast<double>(d);
  double worst = 0.0;
  for (const CVec& psi : sub.ensemble.samples()) {
    CMat sum = CMat::Zero(d, d);
    for (std::size_t m = 0; m < sub.unitaries.size(); ++m) {
      CVec v = sub.unitaries[m].adjoint() * psi;
      sum += sub.probabilities[m] * v * v.adjoint();
    }
    worst = std::max(worst, (sum - target).norm());
  }
  return worst;
}

void validate_sub_protocol(const SubProtocol& sub, double tol) {
  const Eigen::Index d = sub.dim();
  if (sub.unitaries.empty() || sub.unitaries.size() != sub.probabilities.size()) {
    throw ConstructionError("sub-protocol '" + sub.name + "' needs one probability per unitary");
  }
  if (static_cast<Eigen::Index>(sub.unitaries.size()) > d) {
    throw ConstructionError("sub-protocol '" + sub.name +
                            "' has more outcomes than its dimension; POVM building blocks are not supported");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < sub.unitaries.size(); ++m) {
    const CMat& u = sub.unitaries[m];
    if (u.rows() != d || u.cols() != d || !is_unitary(u, 1e-8)) {
      throw ConstructionError("sub-protocol '" + sub.name + "' has a non-unitary correction");
    }
    if (sub.probabilities[m] < 0.0) throw ConstructionError("sub-protocol '" + sub.name + "' has a negative probability");
    total += sub.probabilities[m];
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConstructionError("sub-protocol '" + sub.name + "' probabilities do not sum to 1");
  double residual = sub_protocol_residual(sub);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "sub-protocol '" << sub.name << "' violates the maximally entangled RSP condition (residual " << residual
        << ")";
    throw ConstructionError(msg.str());
  }
}

BlockProbabilities default_probability_assignment(const SubProtocolAssignment& subs, const AbelianGroup& group) {
  BlockProbabilities out;
  const std::size_t blocks = subs.subs.size();
  std::vector<int> tuple(blocks, 0);
  const double inv_r = 1.0 / static_cast<double>(group.order());
  while (true) {
    double p = inv_r;
    for (std::size_t j = 0; j < blocks; ++j) p *= subs.subs[j].probabilities[tuple[j]];
    out.tuples.push_back(tuple);
    out.probabilities.push_back(p);
    // odometer, last block fastest
    std::size_t j = blocks;
    while (j > 0) {
      --j;
      if (++tuple[j] < static_cast<int>(subs.subs[j].unitaries.size())) break;
      tuple[j] = 0;
      if (j == 0) return out;
    }
    if (blocks == 0) return out;
  }
}

BlockProbabilities masked_probability_assignment(const SubProtocolAssignment& subs, const AbelianGroup& group,
                                                 std::vector<std::vector<int>> mask,
                                                 std::optional<std::vector<double>> probabilities) {
  BlockProbabilities out;
  for (const auto& tuple : mask) {
    if (tuple.size() != subs.subs.size()) throw ConstructionError("outcome mask tuple has the wrong length");
    for (std::size_t j = 0; j < tuple.size(); ++j) {
      if (tuple[j] < 0 || tuple[j] >= static_cast<int>(subs.subs[j].unitaries.size())) {
        throw ConstructionError("outcome mask refers to a nonexistent sub-outcome");
      }
    }
  }
  out.tuples = std::move(mask);
  if (probabilities) {
    if (probabilities->size() != out.tuples.size()) throw ConstructionError("one probability per mask tuple is required");
    out.probabilities = std::move(*probabilities);
    return out;
  }
  double total = 0.0;
  for (const auto& tuple : out.tuples) {
    double p = 1.0;
    for (std::size_t j = 0; j < tuple.size(); ++j) p *= subs.subs[j].probabilities[tuple[j]];
    out.probabilities.push_back(p);
    total += p;
  }
  if (total <= 0.0) throw ConstructionError("outcome mask selects only zero-probability tuples");
  for (double& p : out.probabilities) p /= total * static_cast<double>(group.order());
  return out;
}

double probability_constraint_residual(const BlockProbabilities& probabilities, const SubProtocolAssignment& subs,
                                       std::size_t group_order) {
  double worst = 0.0;
  for (std::size_t j = 0; j < subs.subs.size(); ++j) {
    for (std::size_t n = 0; n < subs.subs[j].probabilities.size(); ++n) {
      double sum = 0.0;
      for (std::size_t t = 0; t < probabilities.tuples.size(); ++t) {
        if (probabilities.tuples[t][j] == static_cast<int>(n)) sum += probabilities.probabilities[t];
      }
      worst = std::max(worst, std::abs(static_cast<double>(group_order) * sum - subs.subs[j].probabilities[n]));
    }
  }
  return worst;
}

namespace {

std::string tuple_label(const std::vector<int>& tuple) {
  std::string out = "(";
  for (std::size_t i = 0; i < tuple.size(); ++i) out += (i ? "," : "") + std::to_string(tuple[i]);
  return out + ")";
}

}  // namespace

ComposedProtocol compose_block_protocol(const SpectralBlocks& blocks, const AbelianGroup& group,
                                        const SubProtocolAssignment& subs, const BlockProbabilities& probabilities,
                                        const ComposeOptions& options) {
  const std::size_t r = blocks.count();
  if (r == 0) throw ConstructionError("no spectral blocks");
  if (group.order() != r) {
    throw ConstructionError("group order " + std::to_string(group.order()) + " differs from the number of blocks " +
                            std::to_string(r));
  }
  if (subs.subs.size() != r) throw ConstructionError("one sub-protocol per block is required");

  std::vector<std::size_t> elements = subs.block_elements;
  if (elements.empty()) {
    elements.resize(r);
    std::iota(elements.begin(), elements.end(), 0);
  }
  if (elements.size() != r) throw ConstructionError("block-to-element map has the wrong length");
  {
    std::vector<std::size_t> sorted = elements;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < r; ++i) {
      if (sorted[i] != i) throw ConstructionError("block-to-element map must be a bijection onto the group");
    }
  }

  for (std::size_t j = 0; j < r; ++j) {
    if (subs.subs[j].dim() != blocks.blocks[j].dim) {
      throw ConstructionError("sub-protocol '" + subs.subs[j].name + "' dimension differs from block " +
                              std::to_string(j));
    }
    validate_sub_protocol(subs.subs[j]);
  }

  if (probabilities.tuples.size() != probabilities.probabilities.size() || probabilities.tuples.empty()) {
    throw ConstructionError("outcome probabilities must list one value per tuple");
  }
  for (double p : probabilities.probabilities) {
    if (p < 0.0) throw ConstructionError("outcome probabilities must be nonnegative");
  }
  double constraint = probability_constraint_residual(probabilities, subs, r);
  if (constraint > 1e-9) {
    std::ostringstream msg;
    msg << "probabilities violate r * sum_m p_m delta(n, m_j) = p^(j)_n (residual " << constraint << ")";
    throw ConstructionError(msg.str());
  }

  const CharacterTable table = options.characters.value_or(characters(group));
  if (table.order() != r) throw ConstructionError("character table order differs from the group order");

  const Eigen::Index d = blocks.dim();
  const CMat rho = blocks.rho();

  ComposedProtocol out;
  out.blocks = blocks;
  out.group = group;
  out.block_elements = elements;

  std::vector<Outcome> outcomes;
  for (std::size_t t = 0; t < probabilities.tuples.size(); ++t) {
    const std::vector<int>& tuple = probabilities.tuples[t];
    for (std::size_t k = 0; k < r; ++k) {
      CMat u = CMat::Zero(d, d);
      for (std::size_t j = 0; j < r; ++j) {
        const CMat& basis = blocks.blocks[j].basis;
        u += table(elements[j], k) * (basis * subs.subs[j].unitaries[tuple[j]] * basis.adjoint());
      }
      Outcome o;
      o.unitary = std::move(u);
      o.probability = probabilities.probabilities[t];
      o.label = "k=" + group.element_label(k) + ",m=" + tuple_label(tuple);
      outcomes.push_back(std::move(o));
      out.outcome_index.push_back({k, tuple});
    }
  }

  std::vector<EnsembleBlock> ens_blocks;
  for (std::size_t j = 0; j < r; ++j) {
    const SpectralBlock& b = blocks.blocks[j];
    ens_blocks.push_back({b.eigenvalue * b.dim, b.basis, std::make_shared<const Ensemble>(subs.subs[j].ensemble)});
  }
  Ensemble ensemble = Ensemble::block_product(std::move(ens_blocks), options.phase_grid, options.cap);

  // Resource with Schmidt basis equal to the block basis: R = sqrt(rho_B) conj.
  CMat sqrt_rho = hermitian_power(rho, 0.5);
  BipartiteState state = BipartiteState::from_amplitudes(sqrt_rho.transpose(), 1e-8);
  const auto n = static_cast<Eigen::Index>(outcomes.size());
  MeasurementKind kind = n == d ? MeasurementKind::projective : MeasurementKind::povm;
  out.protocol = Protocol(options.name, std::move(state), kind, std::move(outcomes), std::move(ensemble));

  std::vector<CMat> unitaries = out.protocol.unitaries();
  CommutationResult comm = commutation_check(rho, unitaries);
  out.max_commutation_norm = *std::max_element(comm.norms.begin(), comm.norms.end());

  if (options.verify) {
    if (!comm.pass) throw ConstructionError("composed unitaries do not commute with rho_B");
    VerificationReport report = verify_rsp_condition(out.protocol);
    if (!report.pass) {
      std::ostringstream msg;
      msg << "composed protocol fails verification (residual " << report.max_rsp_residual << ")";
      throw ConstructionError(msg.str());
    }
    out.verification = std::move(report);
  }
  return out;
}

CancellationAudit offdiagonal_cancellation_audit(const ComposedProtocol& composed, double tolerance) {
  CancellationAudit audit;
  audit.tolerance = tolerance;
  const std::size_t r = composed.blocks.count();
  audit.pair_norms.assign(r, std::vector<double>(r, 0.0));
  const Protocol& p = composed.protocol;
  const std::vector<CVec> samples = p.ensemble.samples();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    CMat sum = CMat::Zero(p.dim(), p.dim());
    for (std::size_t m = 0; m < p.outcomes.size(); ++m) {
      CVec v = p.outcomes[m].unitary.adjoint() * samples[s];
      sum += p.declared_probability(s, m) * v * v.adjoint();
    }
    for (std::size_t j = 0; j < r; ++j) {
      for (std::size_t l = 0; l < r; ++l) {
        if (j == l) continue;
        const CMat& bj = composed.blocks.blocks[j].basis;
        const CMat& bl = composed.blocks.blocks[l].basis;
        double norm = (bj.adjoint() * sum * bl).norm();
        audit.pair_norms[j][l] = std::max(audit.pair_norms[j][l], norm);
        audit.max_offdiagonal_norm = std::max(audit.max_offdiagonal_norm, norm);
      }
    }
  }
  audit.pass = audit.max_offdiagonal_norm <= tolerance;
  return audit;
}

}  // namespace rsp
