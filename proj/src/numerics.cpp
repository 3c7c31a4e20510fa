#include "qrec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qrec/error.hpp"

namespace qrec {

namespace {

constexpr const char* kModule = "numerics";

void require_square(const CMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    throw PreconditionError(kModule, std::string(what) + ": expected a square matrix, got " +
                                         std::to_string(a.rows()) + "x" +
                                         std::to_string(a.cols()));
  }
}

void require_finite(const CMatrix& a, const char* what) {
  if (!all_finite(a)) {
    throw PreconditionError(kModule, std::string(what) + ": non-finite entries");
  }
}

void require_same_ambient(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw PreconditionError(kModule, "ambient dimension mismatch: " +
                                         std::to_string(a.ambient_dim()) + " vs " +
                                         std::to_string(b.ambient_dim()));
  }
}

}  // namespace

void Tolerances::validate() const {
  if (!(rank_cut > 0.0 && rank_cut < 1.0)) {
    throw PreconditionError(kModule, "rank_cut must lie in (0, 1), got " + std::to_string(rank_cut));
  }
  if (!(eq_tol > 0.0 && eq_tol < 1.0)) {
    throw PreconditionError(kModule, "eq_tol must lie in (0, 1), got " + std::to_string(eq_tol));
  }
}

double solver_tolerance(Index dim) {
  return 100.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(std::max<Index>(dim, 1));
}

bool all_finite(const CMatrix& a) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) return false;
    }
  }
  return true;
}

CMatrix hermitian_part(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

HermitianEig eig_hermitian(const CMatrix& a) {
  require_square(a, "eig_hermitian");
  require_finite(a, "eig_hermitian");
  if (a.rows() == 0) return {RVector(0), CMatrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw PreconditionError(kModule, "eig_hermitian: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  // Largest eigenvalue of a*a; exact to relative rounding and far cheaper
  // than an SVD on large inputs.
  const CMatrix gram = a.rows() < a.cols() ? CMatrix(a * a.adjoint()) : CMatrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// ---------------------------------------------------------------------------
// Subspace

Subspace::Subspace(Index ambient_dim) : ambient_(ambient_dim), frame_(ambient_dim, 0) {}

Subspace Subspace::full(Index ambient_dim) {
  Subspace s(ambient_dim);
  s.frame_ = CMatrix::Identity(ambient_dim, ambient_dim);
  return s;
}

Subspace Subspace::from_frame(CMatrix frame, double tol) {
  require_finite(frame, "Subspace::from_frame");
  const Index k = frame.cols();
  const double defect = k == 0 ? 0.0 : (frame.adjoint() * frame - CMatrix::Identity(k, k)).norm();
  if (defect > tol) {
    throw PreconditionError(kModule, "Subspace::from_frame: columns are not orthonormal (defect " +
                                         std::to_string(defect) + ")");
  }
  Subspace s(frame.rows());
  s.frame_ = std::move(frame);
  return s;
}

Subspace Subspace::span(const CMatrix& vectors, double rank_cut) {
  require_finite(vectors, "Subspace::span");
  Subspace s(vectors.rows());
  if (vectors.cols() == 0 || vectors.rows() == 0) return s;
  Eigen::JacobiSVD<CMatrix> svd(vectors, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return s;
  Index rank = 0;
  while (rank < sv.size() && sv(rank) >= rank_cut * sv(0)) ++rank;
  s.frame_ = svd.matrixU().leftCols(rank);
  return s;
}

Subspace Subspace::coordinate(Index ambient_dim, std::initializer_list<Index> indices) {
  return coordinate(ambient_dim, std::vector<Index>(indices));
}

Subspace Subspace::coordinate(Index ambient_dim, const std::vector<Index>& indices) {
  CMatrix frame = CMatrix::Zero(ambient_dim, static_cast<Index>(indices.size()));
  for (std::size_t c = 0; c < indices.size(); ++c) {
    const Index i = indices[c];
    if (i < 0 || i >= ambient_dim) {
      throw PreconditionError(kModule, "Subspace::coordinate: index " + std::to_string(i) +
                                           " outside C^" + std::to_string(ambient_dim));
    }
    frame(i, static_cast<Index>(c)) = 1.0;
  }
  return Subspace::span(frame);
}

CMatrix Subspace::projector() const { return frame_ * frame_.adjoint(); }

// ---------------------------------------------------------------------------
// Support and lattice operations

Subspace support(const CMatrix& a, const Tolerances& tol) {
  const HermitianEig e = eig_hermitian(a);
  const Index n = a.rows();
  Subspace out(n);
  if (n == 0) return out;
  const double lmin = e.eigenvalues(0);
  const double lmax = e.eigenvalues(n - 1);
  const double scale = std::max(std::abs(lmin), std::abs(lmax));
  if (scale == 0.0) return out;
  if (lmin < -tol.eq_tol * scale) {
    throw PreconditionError(kModule, "support: significantly negative eigenvalue " +
                                         std::to_string(lmin) + " (input is not positive)");
  }
  if (lmax <= 0.0) return out;
  // Ties at the cut resolve toward inclusion.
  const double cut = tol.rank_cut * lmax;
  std::vector<Index> keep;
  for (Index i = 0; i < n; ++i) {
    if (std::max(e.eigenvalues(i), 0.0) >= cut) keep.push_back(i);
  }
  CMatrix frame(n, static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) frame.col(static_cast<Index>(c)) = e.eigenvectors.col(keep[c]);
  return Subspace::from_frame(std::move(frame), 1e-6);
}

CMatrix support_projector(const CMatrix& a, const Tolerances& tol) { return support(a, tol).projector(); }

CMatrix null_space(const CMatrix& m, double rel_cut) {
  const Index cols = m.cols();
  if (cols == 0) return CMatrix(0, 0);
  if (m.rows() == 0) return CMatrix::Identity(cols, cols);
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  const double thr = rel_cut * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > thr) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

Subspace intersect(const Subspace& a, const Subspace& b, const Tolerances& tol) {
  require_same_ambient(a, b);
  const Index n = a.ambient_dim();
  if (a.is_zero() || b.is_zero()) return Subspace(n);
  if (a.is_full()) return b;
  if (b.is_full()) return a;
  CMatrix stacked(2 * n, n);
  const CMatrix id = CMatrix::Identity(n, n);
  stacked.topRows(n) = a.projector() - id;
  stacked.bottomRows(n) = b.projector() - id;
  Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol.eq_tol) ++rank;
  return Subspace::span(svd.matrixV().rightCols(n - rank), tol.rank_cut);
}

Subspace sum(const Subspace& a, const Subspace& b, const Tolerances& tol) {
  require_same_ambient(a, b);
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  return support(a.projector() + b.projector(), tol);
}

Subspace complement(const Subspace& a, const Tolerances& tol) {
  const Index n = a.ambient_dim();
  if (a.is_zero()) return Subspace::full(n);
  if (a.is_full()) return Subspace(n);
  return support(CMatrix::Identity(n, n) - a.projector(), tol);
}

bool contains(const Subspace& outer, const Subspace& inner, const Tolerances& tol) {
  require_same_ambient(outer, inner);
  if (inner.is_zero() || outer.is_full()) return true;
  const CMatrix leak = inner.frame() - outer.frame() * (outer.frame().adjoint() * inner.frame());
  return op_norm(leak) <= tol.eq_tol;
}

// ---------------------------------------------------------------------------
// Linear algebra utilities

LinearSolution solve_linear(const CMatrix& m, const CVector& b) {
  require_finite(m, "solve_linear");
  require_finite(b, "solve_linear");
  if (m.rows() != b.size()) {
    throw PreconditionError(kModule, "solve_linear: right-hand side has " + std::to_string(b.size()) +
                                         " entries, matrix has " + std::to_string(m.rows()) + " rows");
  }
  if (m.cols() == 0) return {CVector(0), b.norm()};
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(m);
  LinearSolution out;
  out.x = cod.solve(b);
  out.residual = (m * out.x - b).norm();
  return out;
}

CVector vectorize(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvectorize(const CVector& v, Index rows, Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw PreconditionError(kModule, "unvectorize: " + std::to_string(v.size()) +
                                         " entries cannot fill a " + std::to_string(rows) + "x" +
                                         std::to_string(cols) + " matrix");
  }
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) { return Eigen::kroneckerProduct(a, b).eval(); }

CMatrix expm(const CMatrix& generator, double t) {
  require_square(generator, "expm");
  require_finite(generator, "expm");
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw PreconditionError(kModule, "expm: time must be finite and non-negative, got " + std::to_string(t));
  }
  const Index n = generator.rows();
  if (t == 0.0 || n == 0) return CMatrix::Identity(n, n);
  const CMatrix scaled = generator * Complex(t, 0.0);
  return scaled.exp();
}

double expm_semigroup_defect(const CMatrix& generator, double t) {
  const CMatrix half = expm(generator, 0.5 * t);
  return op_norm(half * half - expm(generator, t));
}

std::vector<CMatrix> hermitian_orthonormal_basis(const std::vector<CMatrix>& spanning, double rel_cut) {
  if (spanning.empty()) return {};
  const Index rows = spanning.front().rows();
  const Index cols = spanning.front().cols();
  const Index n2 = rows * cols;
  RMatrix real_form(2 * n2, 2 * static_cast<Index>(spanning.size()));
  const Complex minus_half_i(0.0, -0.5);
  for (std::size_t k = 0; k < spanning.size(); ++k) {
    const CMatrix& s = spanning[k];
    if (s.rows() != rows || s.cols() != cols) {
      throw PreconditionError(kModule, "hermitian_orthonormal_basis: mixed matrix sizes");
    }
    const CMatrix herm = (s + s.adjoint()) * 0.5;
    const CMatrix anti = (s - s.adjoint()) * minus_half_i;
    const CVector vh = vectorize(herm);
    const CVector va = vectorize(anti);
    real_form.col(2 * static_cast<Index>(k)) << vh.real(), vh.imag();
    real_form.col(2 * static_cast<Index>(k) + 1) << va.real(), va.imag();
  }
  Eigen::JacobiSVD<RMatrix> svd(real_form, Eigen::ComputeThinU);
  const RVector& sv = svd.singularValues();
  std::vector<CMatrix> basis;
  if (sv.size() == 0 || sv(0) == 0.0) return basis;
  for (Index k = 0; k < sv.size() && sv(k) > rel_cut * sv(0); ++k) {
    CVector v(n2);
    v.real() = svd.matrixU().col(k).head(n2);
    v.imag() = svd.matrixU().col(k).tail(n2);
    basis.push_back(hermitian_part(unvectorize(v, rows, cols)));
  }
  return basis;
}

std::vector<Subspace> spectral_subspaces(const CMatrix& h, double gap_tol) {
  const HermitianEig e = eig_hermitian(h);
  const Index n = h.rows();
  std::vector<Subspace> out;
  if (n == 0) return out;
  const double scale = std::max({1.0, std::abs(e.eigenvalues(0)), std::abs(e.eigenvalues(n - 1))});
  Index start = 0;
  for (Index i = 1; i <= n; ++i) {
    if (i == n || e.eigenvalues(i) - e.eigenvalues(i - 1) > gap_tol * scale) {
      out.push_back(Subspace::from_frame(e.eigenvectors.middleCols(start, i - start), 1e-6));
      start = i;
    }
  }
  return out;
}

}  // namespace qrec
