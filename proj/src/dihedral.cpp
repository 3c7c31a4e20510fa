#include "qrec/dihedral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace qrec {

namespace {

constexpr const char* kModule = "dihedral";

std::string reduce(const std::string& word) {
  std::string out;
  for (char c : word) {
    if (c == 'e') continue;
    if (c != 'a' && c != 'b') throw ParseError(kModule, std::string("unexpected letter '") + c + "' in word");
    if (!out.empty() && out.back() == c) {
      out.pop_back();
    } else {
      out.push_back(c);
    }
  }
  return out;
}

PartialPermutation label_map(long radius, long (*f)(long)) {
  const Index m = 2 * radius + 1;
  PartialPermutation p;
  p.image.assign(static_cast<std::size_t>(m), -1);
  for (long label = -radius; label <= radius; ++label) {
    const long target = f(label);
    if (target >= -radius && target <= radius) p.image[static_cast<std::size_t>(label + radius)] = target + radius;
  }
  return p;
}

// Left multiplication by a pairs {2j-1, 2j}, by b pairs {2j, 2j+1}.
long left_a(long l) { return (l % 2 == 0) ? l - 1 : l + 1; }
long left_b(long l) { return (l % 2 == 0) ? l + 1 : l - 1; }
// rho(g) d_h = d_{h g^-1}: right multiplication by ba (resp. ab).
long right_ab(long l) { return l - 2; }
long right_ba(long l) { return l + 2; }

double series_fit(const std::vector<double>& sums) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    num += sums[i] * std::sqrt(n);
    den += n;
  }
  return den > 0.0 ? num / den : 0.0;
}

void finish_series(PotentialSeries& s, Index n_max, Index ratio_m) {
  s.fit_constant = series_fit(s.sums);
  s.ratio_m = ratio_m > 0 ? ratio_m : n_max / 4;
  if (s.ratio_m >= 1 && 4 * s.ratio_m <= n_max) {
    s.growth_ratio = s.sums[static_cast<std::size_t>(4 * s.ratio_m - 1)] /
                     s.sums[static_cast<std::size_t>(2 * s.ratio_m - 1)];
  } else {
    s.growth_ratio = std::numeric_limits<double>::quiet_NaN();
  }
}

void check_window(const DihedralWalk& walk, Index n_max) {
  if (n_max < 1) throw PreconditionError(kModule, "n_max must be at least 1");
  if (n_max >= walk.radius()) {
    throw PreconditionError(kModule, "n_max = " + std::to_string(n_max) + " must be below N = " +
                                         std::to_string(walk.radius()) + " (truncation would corrupt the sums)");
  }
}

}  // namespace

std::string word_of_label(long label) {
  if (label == 0) return "e";
  const std::size_t len = static_cast<std::size_t>(std::labs(label));
  std::string w(len, 'a');
  char c = label > 0 ? 'b' : 'a';
  for (std::size_t i = len; i-- > 0;) {
    w[i] = c;
    c = (c == 'a') ? 'b' : 'a';
  }
  return w;
}

long label_of_word(const std::string& word) {
  const std::string r = reduce(word);
  if (r.empty()) return 0;
  const long len = static_cast<long>(r.size());
  return r.back() == 'b' ? len : -len;
}

long multiply_labels(long g, long h) {
  return label_of_word((g == 0 ? std::string() : word_of_label(g)) + (h == 0 ? std::string() : word_of_label(h)));
}

long inverse_label(long g) { return (g % 2 == 0) ? -g : g; }

// ---------------------------------------------------------------------------
// PartialPermutation

CMatrix PartialPermutation::matrix() const {
  const Index n = size();
  CMatrix m = CMatrix::Zero(n, n);
  for (Index s = 0; s < n; ++s) {
    if (image[s] >= 0) m(image[s], s) = 1.0;
  }
  return m;
}

CVector PartialPermutation::apply(const CVector& v) const {
  CVector out = CVector::Zero(size());
  for (Index s = 0; s < size(); ++s) {
    if (image[s] >= 0) out(image[s]) = v(s);
  }
  return out;
}

CMatrix PartialPermutation::conjugate(const CMatrix& rho) const {
  const Index n = size();
  CMatrix out = CMatrix::Zero(n, n);
  for (Index t = 0; t < n; ++t) {
    if (image[t] < 0) continue;
    for (Index s = 0; s < n; ++s) {
      if (image[s] >= 0) out(image[s], image[t]) = rho(s, t);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// DihedralWalk

DihedralWalk::DihedralWalk(long radius) : radius_(radius) {
  if (radius < 2) throw PreconditionError(kModule, "truncation radius N must be at least 2, got " + std::to_string(radius));
  lam_a_ = label_map(radius, left_a);
  lam_b_ = label_map(radius, left_b);
  rho_ab_ = label_map(radius, right_ab);
  rho_ba_ = label_map(radius, right_ba);
}

Index DihedralWalk::index_of(long label) const {
  if (label < -radius_ || label > radius_) {
    throw PreconditionError(kModule, "label " + std::to_string(label) + " lies outside the window");
  }
  return label + radius_;
}

std::vector<CMatrix> DihedralWalk::truncated_kraus() const {
  const double s = 1.0 / std::sqrt(2.0);
  return {s * lam_a_.matrix(), s * lam_b_.matrix()};
}

QuantumChannel DihedralWalk::channel(const Tolerances& tol) const {
  std::vector<CMatrix> kraus = truncated_kraus();
  const Index m = size();
  CMatrix boundary = CMatrix::Zero(m, m);
  bool needed = false;
  for (Index s = 0; s < m; ++s) {
    const double kept = 0.5 * ((lam_a_.image[s] >= 0 ? 1.0 : 0.0) + (lam_b_.image[s] >= 0 ? 1.0 : 0.0));
    if (kept < 1.0) {
      boundary(s, s) = std::sqrt(1.0 - kept);
      needed = true;
    }
  }
  if (needed) kraus.push_back(std::move(boundary));
  return QuantumChannel::validate(std::move(kraus), m, tol);
}

CMatrix DihedralWalk::step_predual(const CMatrix& rho, double& leak) const {
  if (rho.rows() != size() || rho.cols() != size()) {
    throw PreconditionError(kModule, "state has the wrong size for this window");
  }
  CMatrix out = 0.5 * (lam_a_.conjugate(rho) + lam_b_.conjugate(rho));
  // Counted from the dropped diagonal so that it is exactly zero in the interior.
  leak = 0.0;
  for (Index s = 0; s < size(); ++s) {
    if (lam_a_.image[s] < 0) leak += 0.5 * rho(s, s).real();
    if (lam_b_.image[s] < 0) leak += 0.5 * rho(s, s).real();
  }
  return out;
}

RVector DihedralWalk::step_diagonal(const RVector& p, double& leak) const {
  if (p.size() != size()) throw PreconditionError(kModule, "diagonal state has the wrong size for this window");
  RVector out = RVector::Zero(size());
  leak = 0.0;
  for (Index s = 0; s < size(); ++s) {
    if (lam_a_.image[s] >= 0) {
      out(lam_a_.image[s]) += 0.5 * p(s);
    } else {
      leak += 0.5 * p(s);
    }
    if (lam_b_.image[s] >= 0) {
      out(lam_b_.image[s]) += 0.5 * p(s);
    } else {
      leak += 0.5 * p(s);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Potentials

PotentialSeries potential_series(const DihedralWalk& walk, const RVector& x_diag, Index start, Index n_max,
                                 Index ratio_m) {
  check_window(walk, n_max);
  if (x_diag.size() != walk.size()) throw PreconditionError(kModule, "observable has the wrong size for this window");
  if (x_diag.minCoeff() < 0.0) throw PreconditionError(kModule, "observable must be positive");
  if (start < 0 || start >= walk.size()) throw PreconditionError(kModule, "start index out of range");

  PotentialSeries s;
  s.sums.reserve(static_cast<std::size_t>(n_max));
  RVector p = RVector::Zero(walk.size());
  p(start) = 1.0;
  double total = 0.0;
  for (Index k = 0; k < n_max; ++k) {
    total += p.dot(x_diag);
    s.sums.push_back(total);
    if (k + 1 < n_max) {
      double leak = 0.0;
      p = walk.step_diagonal(p, leak);
      s.leak += leak;
    }
  }
  finish_series(s, n_max, ratio_m);
  return s;
}

PotentialSeries potential_series(const DihedralWalk& walk, const CMatrix& x, const CVector& v, Index n_max,
                                 Index ratio_m) {
  check_window(walk, n_max);
  const Index m = walk.size();
  if (x.rows() != m || x.cols() != m || v.size() != m) {
    throw PreconditionError(kModule, "observable or start vector has the wrong size for this window");
  }
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  if (eig_hermitian(x).eigenvalues(0) < -1e-12 * scale || op_norm(x - x.adjoint()) > 1e-12 * scale) {
    throw PreconditionError(kModule, "observable must be positive semidefinite");
  }

  Index nonzero = 0;
  Index where = 0;
  for (Index i = 0; i < m; ++i) {
    if (v(i) != Complex(0.0)) {
      ++nonzero;
      where = i;
    }
  }
  if (nonzero == 0) throw PreconditionError(kModule, "start vector is zero");
  if (nonzero == 1 && std::abs(v(where)) == 1.0) {
    return potential_series(walk, RVector(x.diagonal().real()), where, n_max, ratio_m);
  }

  PotentialSeries s;
  s.sums.reserve(static_cast<std::size_t>(n_max));
  CMatrix rho = v * v.adjoint();
  double total = 0.0;
  for (Index k = 0; k < n_max; ++k) {
    total += (rho * x).trace().real();
    s.sums.push_back(total);
    if (k + 1 < n_max) {
      double leak = 0.0;
      rho = walk.step_predual(rho, leak);
      s.leak += leak;
    }
  }
  finish_series(s, n_max, ratio_m);
  return s;
}

std::vector<double> return_mass_cesaro(const DihedralWalk& walk, Index k_max) {
  RVector x = RVector::Zero(walk.size());
  const Index centre = walk.index_of(0);
  x(centre) = 1.0;
  const PotentialSeries s = potential_series(walk, x, centre, k_max);
  std::vector<double> c(s.sums.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = s.sums[k] / static_cast<double>(k + 1);
  return c;
}

// ---------------------------------------------------------------------------
// Shift equivalence

ShiftEquivalence shift_equivalence_check(const DihedralWalk& walk) {
  const long n = walk.radius();
  ShiftEquivalence out;
  // Descending labels: rho(ab) lowers the label by 2, i.e. one step right.
  for (long l = n; l >= -n; --l)
    if (l % 2 == 0) out.order.push_back(walk.index_of(l));
  out.even_size = static_cast<Index>(out.order.size());
  for (long l = n; l >= -n; --l)
    if (l % 2 != 0) out.order.push_back(walk.index_of(l));
  out.odd_size = static_cast<Index>(out.order.size()) - out.even_size;

  const Index m = walk.size();
  CMatrix u = CMatrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) u(out.order[static_cast<std::size_t>(i)], i) = 1.0;
  const CMatrix conj = u.adjoint() * walk.rho_ab().matrix() * u;

  CMatrix shift = CMatrix::Zero(m, m);
  std::vector<bool> interior(static_cast<std::size_t>(m), false);
  for (Index i = 0; i < m; ++i) {
    const bool last_of_copy = (i == out.even_size - 1) || (i == m - 1);
    if (!last_of_copy) {
      shift(i + 1, i) = 1.0;
      interior[static_cast<std::size_t>(i)] = true;
    }
  }
  for (Index j = 0; j < m; ++j) {
    const double col = (conj.col(j) - shift.col(j)).cwiseAbs().maxCoeff();
    out.full_residual = std::max(out.full_residual, col);
    if (interior[static_cast<std::size_t>(j)]) out.interior_residual = std::max(out.interior_residual, col);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral partitions

CosineSpectrum cosine_spectrum(Index n) {
  if (n < 1) throw PreconditionError(kModule, "orbit size must be positive");
  Eigen::SelfAdjointEigenSolver<RMatrix> es;
  const RVector diag = RVector::Zero(n);
  const RVector sub = RVector::Constant(std::max<Index>(n - 1, 0), 0.5);
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw PreconditionError(kModule, "tridiagonal eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Index dyadic_cell(double eigenvalue, int level, double tie_tol) {
  const double scale = std::ldexp(1.0, level);
  const Index last = (Index{2} << level) - 1;
  const Index j = static_cast<Index>(std::floor((eigenvalue + 1.0 + tie_tol) * scale));
  return std::clamp<Index>(j, 0, last);
}

RMatrix OrbitPartition::projector(int level, Index j) const {
  const std::vector<Index>& cell = cells.at(static_cast<std::size_t>(level));
  RMatrix q = RMatrix::Zero(size, size);
  for (Index i = 0; i < size; ++i) {
    if (cell[static_cast<std::size_t>(i)] == j) q += spectrum.eigenvectors.col(i) * spectrum.eigenvectors.col(i).transpose();
  }
  return q;
}

namespace {

OrbitPartition partition_orbit(Index n, int level, double tie_tol) {
  OrbitPartition o;
  o.size = n;
  o.spectrum = cosine_spectrum(n);
  const RMatrix& v = o.spectrum.eigenvectors;
  o.orthonormality_residual = (v.transpose() * v - RMatrix::Identity(n, n)).norm();
  for (int l = 0; l <= level; ++l) {
    std::vector<Index> cell(static_cast<std::size_t>(n));
    std::vector<Index> rank(static_cast<std::size_t>(Index{2} << l), 0);
    for (Index i = 0; i < n; ++i) {
      cell[static_cast<std::size_t>(i)] = dyadic_cell(o.spectrum.eigenvalues(i), l, tie_tol);
      ++rank[static_cast<std::size_t>(cell[static_cast<std::size_t>(i)])];
    }
    o.cells.push_back(std::move(cell));
    o.ranks.push_back(std::move(rank));
  }
  return o;
}

PartitionProjections assemble(std::vector<Index> sizes, int level, double tie_tol) {
  if (level < 0) throw PreconditionError(kModule, "level must be non-negative");
  if (!(tie_tol >= 0.0)) throw PreconditionError(kModule, "tie_tol must be non-negative");
  const Index smallest = *std::min_element(sizes.begin(), sizes.end());
  if (level > 30 || (Index{2} << level) > smallest) {
    throw PreconditionError(kModule, "level " + std::to_string(level) + " is too deep for an orbit of size " +
                                         std::to_string(smallest));
  }
  PartitionProjections out;
  out.level = level;
  out.tie_tol = tie_tol;
  for (Index n : sizes) out.orbits.push_back(partition_orbit(n, level, tie_tol));

  const double orth_tol = Tolerances{}.eq_tol;
  out.complete = out.orthogonal = out.refines = true;
  out.atomlessness.assign(static_cast<std::size_t>(level), 0.0);
  for (const OrbitPartition& o : out.orbits) {
    if (o.orthonormality_residual > orth_tol) out.orthogonal = false;
    for (int l = 0; l <= level; ++l) {
      const auto& cell = o.cells[static_cast<std::size_t>(l)];
      const auto& rank = o.ranks[static_cast<std::size_t>(l)];
      Index total = 0;
      for (Index r : rank) total += r;
      const Index cells = Index{2} << l;
      for (Index c : cell)
        if (c < 0 || c >= cells) out.complete = false;
      if (total != o.size) out.complete = false;
      if (l == 0) continue;
      const auto& parent = o.cells[static_cast<std::size_t>(l - 1)];
      for (std::size_t i = 0; i < cell.size(); ++i)
        if (cell[i] / 2 != parent[i]) out.refines = false;
      const auto& parent_rank = o.ranks[static_cast<std::size_t>(l - 1)];
      double& worst = out.atomlessness[static_cast<std::size_t>(l - 1)];
      for (Index j = 0; j < cells; ++j) {
        const Index pr = parent_rank[static_cast<std::size_t>(j / 2)];
        if (pr > 0) worst = std::max(worst, static_cast<double>(rank[static_cast<std::size_t>(j)]) / static_cast<double>(pr));
      }
    }
  }
  return out;
}

}  // namespace

PartitionProjections partition_projections(const DihedralWalk& walk, int level, double tie_tol) {
  const long n = walk.radius();
  const Index even = 2 * (n / 2) + 1;
  const Index odd = walk.size() - even;
  return assemble({even, odd}, level, tie_tol);
}

PartitionProjections partition_projections(Index orbit_size, int level, double tie_tol) {
  return assemble({orbit_size}, level, tie_tol);
}

GKLSGenerator walk_generator(const DihedralWalk& walk) {
  GKLSGenerator gen;
  gen.dim = walk.size();
  gen.hamiltonian = CMatrix::Zero(gen.dim, gen.dim);
  gen.jumps = walk.truncated_kraus();
  return gen;
}

}  // namespace qrec
