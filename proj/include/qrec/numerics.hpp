#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

namespace qrec {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thresholds for rank and equality decisions.
///
/// `rank_cut` is relative to the largest eigenvalue (or singular value) of
/// whatever is being ranked; `eq_tol` is an absolute residual bound used for
/// every "is this zero" check.
struct Tolerances {
  double rank_cut = 1e-10;
  double eq_tol = 1e-8;

  /// Throws PreconditionError unless both thresholds lie in (0, 1).
  void validate() const;
};

/// 100 * machine epsilon * dim, the accepted eigensolver error scale.
double solver_tolerance(Index dim);

struct HermitianEig {
  RVector eigenvalues;  // ascending
  CMatrix eigenvectors; // orthonormal columns
};

/// Eigendecomposition of the Hermitian part (A + A*)/2.
HermitianEig eig_hermitian(const CMatrix& a);

/// Largest singular value.
double op_norm(const CMatrix& a);

CMatrix hermitian_part(const CMatrix& a);
bool all_finite(const CMatrix& a);

/// A closed subspace of C^n held as an orthonormal frame.
class Subspace {
 public:
  Subspace() = default;

  /// The zero subspace of C^n.
  explicit Subspace(Index ambient_dim);

  static Subspace full(Index ambient_dim);

  /// Wraps a frame whose columns are already orthonormal (checked to `tol`).
  static Subspace from_frame(CMatrix frame, double tol = 1e-8);

  /// Orthonormalizes the columns of `vectors`, dropping directions whose
  /// singular value falls below rank_cut times the largest one.
  static Subspace span(const CMatrix& vectors, double rank_cut = 1e-10);

  /// span{e_i : i in indices}.
  static Subspace coordinate(Index ambient_dim, std::initializer_list<Index> indices);
  static Subspace coordinate(Index ambient_dim, const std::vector<Index>& indices);

  Index ambient_dim() const { return ambient_; }
  Index dim() const { return frame_.cols(); }
  bool is_zero() const { return dim() == 0; }
  bool is_full() const { return dim() == ambient_; }

  const CMatrix& frame() const { return frame_; }
  CMatrix projector() const;

 private:
  Index ambient_ = 0;
  CMatrix frame_;
};

/// supp(A) for positive semidefinite A. Eigenvalues at or above
/// rank_cut * lambda_max are kept. Throws if A has an eigenvalue below
/// -eq_tol * |A|.
Subspace support(const CMatrix& a, const Tolerances& tol = {});
CMatrix support_projector(const CMatrix& a, const Tolerances& tol = {});

Subspace intersect(const Subspace& a, const Subspace& b, const Tolerances& tol = {});
Subspace sum(const Subspace& a, const Subspace& b, const Tolerances& tol = {});
Subspace complement(const Subspace& a, const Tolerances& tol = {});

/// True when `inner` lies inside `outer`: |(I - P_outer) P_inner| <= eq_tol.
bool contains(const Subspace& outer, const Subspace& inner, const Tolerances& tol = {});

/// Right singular vectors of `m` whose singular value is at most
/// `rel_cut * max(1, sigma_max)`.
CMatrix null_space(const CMatrix& m, double rel_cut);

struct LinearSolution {
  CVector x;
  double residual = 0.0;
};

/// Minimum-norm least-squares solution of M x = b.
LinearSolution solve_linear(const CMatrix& m, const CVector& b);

/// Column stacking: column j occupies entries j*rows .. (j+1)*rows - 1.
CVector vectorize(const CMatrix& m);
CMatrix unvectorize(const CVector& v, Index rows, Index cols);

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// exp(t * generator) by Pade scaling and squaring. Rejects t < 0.
CMatrix expm(const CMatrix& generator, double t);

/// |exp(t/2 L)^2 - exp(t L)|, a consistency check on expm.
double expm_semigroup_defect(const CMatrix& generator, double t);

/// Orthonormal Hermitian basis (under tr(a b)) of the real span of the
/// Hermitian and anti-Hermitian parts of `spanning`. When `spanning` spans a
/// *-closed space this is a basis of that complex space.
std::vector<CMatrix> hermitian_orthonormal_basis(const std::vector<CMatrix>& spanning,
                                                 double rel_cut);

/// Groups the eigenvalues of Hermitian `h` into clusters separated by gaps
/// larger than `gap_tol * max(1, |h|)` and returns the eigenspace of each
/// cluster, lowest eigenvalues first.
std::vector<Subspace> spectral_subspaces(const CMatrix& h, double gap_tol);

}  // namespace qrec
