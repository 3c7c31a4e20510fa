#pragma once

// Independent reference computations. None of these call the library
// routine they are used to check.

#include <cmath>
#include <random>
#include <vector>

#include "qrec/channel.hpp"
#include "support/random_channels.hpp"

namespace qrec::testing {

/// Predual map by direct Kraus sums.
inline CMatrix predual(const QuantumChannel& ch, const CMatrix& rho) {
  CMatrix out = CMatrix::Zero(ch.dim(), ch.dim());
  for (const CMatrix& b : ch.kraus()) out += b * rho * b.adjoint();
  return out;
}

inline CMatrix heisenberg(const QuantumChannel& ch, const CMatrix& x) {
  CMatrix out = CMatrix::Zero(ch.dim(), ch.dim());
  for (const CMatrix& b : ch.kraus()) out += b.adjoint() * x * b;
  return out;
}

/// Largest leak |(I - p) Phi_*(p rho p) (I - p)| over `states` random states
/// supported in v. V is an enclosure exactly when every leak vanishes.
inline double hereditary_leak(const QuantumChannel& ch, const Subspace& v, std::mt19937_64& rng, int states = 10) {
  if (v.is_zero()) return 0.0;
  const Index d = ch.dim();
  const CMatrix q = CMatrix::Identity(d, d) - v.projector();
  double worst = 0.0;
  for (int k = 0; k < states; ++k) {
    const CMatrix out = q * predual(ch, random_state_in(rng, v)) * q;
    Eigen::JacobiSVD<CMatrix> svd(out);
    worst = std::max(worst, svd.singularValues()(0));
  }
  return worst;
}

/// Heisenberg superoperator assembled column by column from matrix units.
inline CMatrix superoperator_by_units(const QuantumChannel& ch) {
  const Index d = ch.dim();
  CMatrix m(d * d, d * d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) {
      CMatrix e = CMatrix::Zero(d, d);
      e(i, j) = 1.0;
      const CMatrix img = heisenberg(ch, e);
      m.col(j * d + i) = Eigen::Map<const CVector>(img.data(), d * d);
    }
  }
  return m;
}

/// dim ker(m) by full-pivot LU with an absolute threshold.
inline Index kernel_dim(const CMatrix& m, double threshold = 1e-9) {
  Eigen::FullPivLU<CMatrix> lu(m);
  lu.setThreshold(threshold);
  return lu.dimensionOfKernel();
}

/// Phi^n(x) by repeated application.
inline CMatrix power_iterate(const QuantumChannel& ch, CMatrix x, int n) {
  for (int k = 0; k < n; ++k) x = heisenberg(ch, x);
  return x;
}

/// Smallest enclosure containing supp(rho): support of sum_{k<=d^2} Phi_*^k(rho).
inline Subspace enclosure_hull(const QuantumChannel& ch, const CMatrix& rho) {
  CMatrix acc = rho;
  CMatrix cur = rho;
  for (Index k = 0; k < ch.dim() * ch.dim(); ++k) {
    cur = predual(ch, cur);
    acc += cur;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (acc + acc.adjoint()));
  const double top = es.eigenvalues().maxCoeff();
  std::vector<Index> keep;
  for (Index i = 0; i < ch.dim(); ++i)
    if (es.eigenvalues()(i) > 1e-9 * top) keep.push_back(i);
  CMatrix f(ch.dim(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) f.col(static_cast<Index>(k)) = es.eigenvectors().col(keep[k]);
  return Subspace::from_frame(f);
}

/// Simple symmetric walk on Z started at 0: returns p^k_00 for k < n by
/// evolving a probability vector on [-n, n].
inline std::vector<double> walk_return_probabilities(int n) {
  std::vector<double> p(static_cast<std::size_t>(2 * n + 3), 0.0);
  const int centre = n + 1;
  p[centre] = 1.0;
  std::vector<double> out;
  for (int k = 0; k < n; ++k) {
    out.push_back(p[centre]);
    std::vector<double> next(p.size(), 0.0);
    for (std::size_t i = 1; i + 1 < p.size(); ++i) next[i] = 0.5 * (p[i - 1] + p[i + 1]);
    p = std::move(next);
  }
  return out;
}

/// p^{2j}_00 = C(2j, j) / 4^j via the ratio (2j-1)/(2j).
inline double central_binomial_over_four(int j) {
  double v = 1.0;
  for (int i = 1; i <= j; ++i) v *= (2.0 * i - 1.0) / (2.0 * i);
  return v;
}

/// Number of eigenvalues cos(k pi / (m + 1)), k = 1..m, in [lo, hi), the
/// last cell closed. Values within `tie` below a boundary count to the right.
inline int cosine_count(int m, double lo, double hi, bool last, double tie = 1e-12) {
  int c = 0;
  for (int k = 1; k <= m; ++k) {
    const double x = std::cos(k * M_PI / (m + 1)) + tie;
    if (x >= lo && (x < hi || last)) ++c;
  }
  return c;
}

}  // namespace qrec::testing
