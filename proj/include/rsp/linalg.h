#pragma once

// Small dense complex linear algebra for bipartite pure states and the
// antilinear operators that encode them.
//
// Antilinear operators are stored through their linear part M in the fixed
// computational basis and act as x -> M * conj(x).

#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "rsp/errors.h"

namespace rsp {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

/// Smallest singular value an operator may have and still be inverted.
inline constexpr double kSingularityThreshold = 1e-8;

/// Process-wide default tolerance for equality checks on norms (1e-9 unless
/// changed). Reads and writes are atomic.
double default_tolerance();
void set_default_tolerance(double tol);

/// Conjugate-linear map x -> M * conj(x).
class AntilinearOp {
 public:
  AntilinearOp() = default;
  explicit AntilinearOp(CMat linear_part);

  /// scale * (entrywise complex conjugation) on C^dim.
  static AntilinearOp conjugation(Eigen::Index dim, Complex scale = 1.0);

  const CMat& matrix() const noexcept { return mat_; }
  Eigen::Index dim_in() const noexcept { return mat_.cols(); }
  Eigen::Index dim_out() const noexcept { return mat_.rows(); }
  bool is_square() const noexcept { return mat_.rows() == mat_.cols(); }

  double smallest_singular_value() const;
  bool invertible(double threshold = kSingularityThreshold) const;

  CVec operator()(const CVec& x) const;

 private:
  CMat mat_;
};

CVec apply(const AntilinearOp& op, const CVec& x);

/// The linear map a∘b, i.e. x -> mat_a * conj(mat_b) * x.
CMat compose_antilinear(const AntilinearOp& a, const AntilinearOp& b);

/// a∘L for linear L: x -> mat_a * conj(L * x).
AntilinearOp precompose(const AntilinearOp& a, const CMat& linear);

/// L∘a for linear L: x -> L * mat_a * conj(x).
AntilinearOp postcompose(const CMat& linear, const AntilinearOp& a);

/// Adjoint defined by <y|Rx> = <x|R^dag y>. For x -> M conj(x) it is
/// y -> M^T conj(y).
AntilinearOp adjoint_antilinear(const AntilinearOp& op);

/// Throws SingularError when the smallest singular value is below
/// kSingularityThreshold.
AntilinearOp invert_antilinear(const AntilinearOp& op);

/// A normalized pure state on H_A (x) H_B stored as its D_A x D_B amplitude
/// matrix, Psi(i, j) = <i, j|Psi>.
class BipartiteState {
 public:
  BipartiteState() = default;

  /// Throws NormalizationError when the Frobenius norm deviates from 1 by
  /// more than `tol`.
  static BipartiteState from_amplitudes(CMat amplitudes, double tol = 1e-9);

  /// sum_i c_i |i>|i> for nonnegative Schmidt coefficients c_i.
  static BipartiteState from_schmidt(const RVec& coeffs, double tol = 1e-9);

  /// (1/sqrt(D)) sum_i |i>|i>.
  static BipartiteState maximally_entangled(Eigen::Index dim);

  const CMat& amplitudes() const noexcept { return amplitudes_; }
  Eigen::Index dim_a() const noexcept { return amplitudes_.rows(); }
  Eigen::Index dim_b() const noexcept { return amplitudes_.cols(); }

 private:
  explicit BipartiteState(CMat amplitudes) : amplitudes_(std::move(amplitudes)) {}
  CMat amplitudes_;
};

struct SchmidtForm {
  RVec coeffs;  // descending
  CMat basis_a;
  CMat basis_b;
};

/// amplitudes == basis_a * diag(coeffs) * basis_b^T.
SchmidtForm schmidt_decompose(const BipartiteState& state);

/// The operator R with (R phi)_j = sum_i Psi_ij conj(phi_i); its linear part
/// is the transposed amplitude matrix.
AntilinearOp resource_from_state(const BipartiteState& state);

/// Inverse of resource_from_state: amplitudes = mat^T.
BipartiteState state_from_resource(const AntilinearOp& op, double tol = 1e-9);

struct ReducedDensities {
  CMat rho_a;  // R^dag R
  CMat rho_b;  // R R^dag
};

ReducedDensities reduced_densities(const AntilinearOp& op);

struct HermitianEigen {
  RVec values;   // ascending
  CMat vectors;  // columns
};

HermitianEigen eig_hermitian(const CMat& h);

/// f(h) for Hermitian h via its eigendecomposition, f applied to each
/// eigenvalue.
template <typename F>
CMat hermitian_function(const CMat& h, F&& f) {
  HermitianEigen e = eig_hermitian(h);
  RVec mapped(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) mapped(i) = f(e.values(i));
  return e.vectors * mapped.asDiagonal() * e.vectors.adjoint();
}

/// h^power for positive definite Hermitian h. Throws SingularError when an
/// eigenvalue is below `floor`.
CMat hermitian_power(const CMat& h, double power, double floor = kSingularityThreshold);

/// |<x|y>|^2 / (|x|^2 |y|^2). Zero when either vector vanishes.
double fidelity(const CVec& x, const CVec& y);

double frobenius_norm(const CMat& m);

/// ||AB - BA||_F
double commutator_norm(const CMat& a, const CMat& b);

bool is_unitary(const CMat& u, double tol = 1e-9);

/// ||U^dag U - 1||_F
double unitarity_defect(const CMat& u);

namespace pauli {
CMat identity();
CMat x();
CMat y();
CMat z();
}  // namespace pauli

}  // namespace rsp
