#include "rsp/linalg.h"

#include <atomic>
#include <cmath>
#include <sstream>

namespace rsp {

namespace {

std::atomic<double> g_tolerance{1e-9};

void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

double default_tolerance() { return g_tolerance.load(std::memory_order_relaxed); }

void set_default_tolerance(double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  g_tolerance.store(tol, std::memory_order_relaxed);
}

AntilinearOp::AntilinearOp(CMat linear_part) : mat_(std::move(linear_part)) {
  require_dims(mat_.rows() > 0 && mat_.cols() > 0, "antilinear operator must be non-empty");
}

AntilinearOp AntilinearOp::conjugation(Eigen::Index dim, Complex scale) {
  return AntilinearOp(CMat::Identity(dim, dim) * scale);
}

double AntilinearOp::smallest_singular_value() const {
  Eigen::JacobiSVD<CMat> svd(mat_);
  const RVec& s = svd.singularValues();
  if (mat_.rows() != mat_.cols()) return 0.0;
  return s(s.size() - 1);
}

bool AntilinearOp::invertible(double threshold) const {
  return is_square() && smallest_singular_value() >= threshold;
}

CVec AntilinearOp::operator()(const CVec& x) const {
  require_dims(x.size() == mat_.cols(), "apply: vector dimension does not match operator");
  return mat_ * x.conjugate();
}

CVec apply(const AntilinearOp& op, const CVec& x) { return op(x); }

CMat compose_antilinear(const AntilinearOp& a, const AntilinearOp& b) {
  require_dims(a.dim_in() == b.dim_out(), "compose_antilinear: inner dimensions differ");
  return a.matrix() * b.matrix().conjugate();
}

AntilinearOp precompose(const AntilinearOp& a, const CMat& linear) {
  require_dims(a.dim_in() == linear.rows(), "precompose: inner dimensions differ");
  return AntilinearOp(a.matrix() * linear.conjugate());
}

AntilinearOp postcompose(const CMat& linear, const AntilinearOp& a) {
  require_dims(linear.cols() == a.dim_out(), "postcompose: inner dimensions differ");
  return AntilinearOp(linear * a.matrix());
}

AntilinearOp adjoint_antilinear(const AntilinearOp& op) {
  return AntilinearOp(op.matrix().transpose());
}

AntilinearOp invert_antilinear(const AntilinearOp& op) {
  if (!op.is_square()) throw SingularError("invert_antilinear: operator is not square");
  double smin = op.smallest_singular_value();
  if (smin < kSingularityThreshold) {
    std::ostringstream msg;
    msg << "invert_antilinear: smallest singular value " << smin << " is below "
        << kSingularityThreshold;
    throw SingularError(msg.str());
  }
  // R^{-1}(R x) = x with R x = M conj(x) gives R^{-1} y = conj(M^{-1}) conj(y).
  return AntilinearOp(op.matrix().inverse().conjugate());
}

BipartiteState BipartiteState::from_amplitudes(CMat amplitudes, double tol) {
  require_dims(amplitudes.rows() > 0 && amplitudes.cols() > 0, "bipartite state must be non-empty");
  double norm = amplitudes.norm();
  if (std::abs(norm - 1.0) > tol) {
    std::ostringstream msg;
    msg << "bipartite state is not normalized (norm " << norm << ")";
    throw NormalizationError(msg.str());
  }
  return BipartiteState(std::move(amplitudes));
}

BipartiteState BipartiteState::from_schmidt(const RVec& coeffs, double tol) {
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (coeffs(i) < 0.0) throw NormalizationError("Schmidt coefficients must be nonnegative");
  }
  CMat amps = CMat::Zero(coeffs.size(), coeffs.size());
  amps.diagonal() = coeffs.cast<Complex>();
  return from_amplitudes(std::move(amps), tol);
}

BipartiteState BipartiteState::maximally_entangled(Eigen::Index dim) {
  return from_schmidt(RVec::Constant(dim, 1.0 / std::sqrt(static_cast<double>(dim))));
}

SchmidtForm schmidt_decompose(const BipartiteState& state) {
  const CMat& psi = state.amplitudes();
  if (std::abs(psi.norm() - 1.0) > 1e-9) throw NormalizationError("schmidt_decompose: state is not normalized");
  Eigen::JacobiSVD<CMat> svd(psi, Eigen::ComputeFullU | Eigen::ComputeFullV);
  // psi = U S V^dag = U S conj(V)^T
  SchmidtForm out;
  out.coeffs = svd.singularValues();
  out.basis_a = svd.matrixU();
  out.basis_b = svd.matrixV().conjugate();
  return out;
}

AntilinearOp resource_from_state(const BipartiteState& state) {
  return AntilinearOp(state.amplitudes().transpose());
}

BipartiteState state_from_resource(const AntilinearOp& op, double tol) {
  return BipartiteState::from_amplitudes(op.matrix().transpose(), tol);
}

ReducedDensities reduced_densities(const AntilinearOp& op) {
  const CMat& m = op.matrix();
  // R^dag R x = M^T conj(M conj(x)) = M^T conj(M) x
  return {m.transpose() * m.conjugate(), m * m.adjoint()};
}

HermitianEigen eig_hermitian(const CMat& h) {
  require_dims(h.rows() == h.cols(), "eig_hermitian: matrix is not square");
  CMat sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("eig_hermitian: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

CMat hermitian_power(const CMat& h, double power, double floor) {
  HermitianEigen e = eig_hermitian(h);
  if (e.values.size() > 0 && e.values(0) < floor) {
    std::ostringstream msg;
    msg << "hermitian_power: eigenvalue " << e.values(0) << " is below the floor " << floor;
    throw SingularError(msg.str());
  }
  RVec mapped = e.values.array().pow(power).matrix();
  return e.vectors * mapped.asDiagonal() * e.vectors.adjoint();
}

double fidelity(const CVec& x, const CVec& y) {
  require_dims(x.size() == y.size(), "fidelity: dimensions differ");
  double nx = x.squaredNorm();
  double ny = y.squaredNorm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::norm(x.dot(y)) / (nx * ny);
}

double frobenius_norm(const CMat& m) { return m.norm(); }

double commutator_norm(const CMat& a, const CMat& b) {
  require_dims(a.rows() == a.cols() && b.rows() == b.cols() && a.rows() == b.rows(),
               "commutator_norm: matrices must be square and of equal size");
  return (a * b - b * a).norm();
}

double unitarity_defect(const CMat& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return (u.adjoint() * u - CMat::Identity(u.rows(), u.cols())).norm();
}

bool is_unitary(const CMat& u, double tol) { return unitarity_defect(u) <= tol; }

namespace pauli {

CMat identity() { return CMat::Identity(2, 2); }

CMat x() {
  CMat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMat y() {
  CMat m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}

CMat z() {
  CMat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace pauli

}  // namespace rsp
