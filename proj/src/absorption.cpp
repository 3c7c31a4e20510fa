#include "qrec/absorption.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qrec {

namespace {

constexpr const char* kModule = "absorption";
constexpr double kSplitGap = 1e-3;

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

void require_enclosure(const Superoperator& map, const Subspace& v) {
  const EnclosureCert cert = is_enclosure(map, v);
  if (!cert.is_enclosure) {
    throw PreconditionError(kModule, "subspace is not an enclosure (slack " + fmt(cert.slack) + ")");
  }
}

double max_product_norm(const CMatrix& a, const CMatrix& b) {
  return std::max(op_norm(a * b), op_norm(b * a));
}

bool orthogonal(const Subspace& a, const Subspace& b, double tol) {
  if (a.is_zero() || b.is_zero()) return true;
  return op_norm(a.frame().adjoint() * b.frame()) <= tol;
}

}  // namespace

const char* to_string(AbsorptionMethod m) {
  return m == AbsorptionMethod::iterative ? "iterative" : "linear_system";
}

double blocks_residual(const CMatrix& a, const Subspace& v, const RecurrenceDecomposition& rd,
                       const Tolerances& tol) {
  const Subspace w = intersect(complement(v, tol), rd.transient, tol);
  const CMatrix pw = w.projector();
  return op_norm(a - v.projector() - pw * a * pw);
}

AbsorptionOperator absorption_iterative(const Superoperator& map, const Subspace& v,
                                        const RecurrenceDecomposition& rd, const StopRule& stop) {
  require_enclosure(map, v);
  const Superoperator h = map.in_picture(Picture::heisenberg);
  const CesaroResult c = cesaro_average(h, v.projector(), stop);
  AbsorptionOperator out;
  out.enclosure = v;
  out.matrix = hermitian_part(c.average);
  out.method = AbsorptionMethod::iterative;
  out.converged = c.converged;
  out.terms = c.terms;
  out.fixed_point_residual = op_norm(h.apply(out.matrix) - out.matrix);
  out.blocks_residual = blocks_residual(out.matrix, v, rd, map.tol());
  return out;
}

AbsorbingCheck is_absorbing_recurrent(const Superoperator& map, const RecurrenceDecomposition& rd,
                                      const StopRule& stop) {
  const Index d = map.dim();
  const CesaroResult c = cesaro_average(map.in_picture(Picture::heisenberg), rd.recurrent().projector(), stop);
  AbsorbingCheck out;
  out.deviation = op_norm(hermitian_part(c.average) - CMatrix::Identity(d, d));
  out.absorbing = c.converged && out.deviation <= map.tol().eq_tol;
  return out;
}

AbsorptionOperator absorption_linear(const Superoperator& map, const Subspace& v,
                                     const RecurrenceDecomposition& rd) {
  const Tolerances& tol = map.tol();
  require_enclosure(map, v);
  if (!contains(rd.recurrent(), v, tol)) {
    throw PreconditionError(kModule, "linear absorption requires an enclosure inside the recurrent space");
  }
  const AbsorbingCheck absorbing = is_absorbing_recurrent(map, rd);
  if (!absorbing.absorbing) {
    throw PreconditionError(kModule, "recurrent space is not absorbing: |A(R) - I| = " + fmt(absorbing.deviation));
  }
  const Superoperator h = map.in_picture(Picture::heisenberg);
  const CMatrix pv = v.projector();

  AbsorptionOperator out;
  out.enclosure = v;
  out.method = AbsorptionMethod::linear_system;
  const Subspace& t = rd.transient;
  if (t.is_zero()) {
    out.matrix = pv;
  } else {
    const CMatrix& f = t.frame();
    // y -> F* Phi(F y F*) F on B(T)
    const CMatrix corner = kron(f.transpose(), f.adjoint()) * h.matrix() * kron(f.conjugate(), f);
    out.corner_radius = spectral_radius(corner);
    if (out.corner_radius >= 1.0 - tol.eq_tol) {
      throw PreconditionError(kModule, "transient corner map has spectral radius " + fmt(out.corner_radius) +
                                           "; compressed system is not uniquely solvable");
    }
    const Index k = t.dim() * t.dim();
    const CMatrix rhs = -(f.adjoint() * h.apply(pv) * f);
    const LinearSolution sol = solve_linear(corner - CMatrix::Identity(k, k), vectorize(rhs));
    out.solve_residual = sol.residual;
    const CMatrix y = unvectorize(sol.x, t.dim(), t.dim());
    out.matrix = hermitian_part(pv + f * y * f.adjoint());
  }
  out.fixed_point_residual = op_norm(h.apply(out.matrix) - out.matrix);
  out.blocks_residual = blocks_residual(out.matrix, v, rd, tol);
  return out;
}

// ---------------------------------------------------------------------------
// Fixed points from absorption operators

FixedPointReconstruction fixed_points_via_absorption(const Superoperator& map, const RecurrenceDecomposition& rd,
                                                     const Dome& dome, std::uint64_t seed) {
  const Tolerances& tol = map.tol();
  const AbsorbingCheck absorbing = is_absorbing_recurrent(map, rd);
  if (!absorbing.absorbing) {
    throw PreconditionError(kModule, "recurrent space is not absorbing: |A(R) - I| = " + fmt(absorbing.deviation));
  }
  const Superoperator h = map.in_picture(Picture::heisenberg);
  const FixedPointSpace reference = fixed_point_space(h);
  const Subspace recurrent = rd.recurrent();
  const Superoperator restricted = restrict_map(h, recurrent);
  const FixedPointSpace algebra = fixed_point_space(restricted);

  std::vector<Subspace> enclosures;
  enclosures.push_back(recurrent);
  for (std::size_t i = 0; i < dome.parts.size(); ++i) {
    enclosures.push_back(dome.parts[i]);
    for (std::size_t j = i + 1; j < dome.parts.size(); ++j) {
      enclosures.push_back(sum(dome.parts[i], dome.parts[j], tol));
    }
  }
  std::mt19937_64 rng(seed);
  const int draws = 10 + 2 * static_cast<int>(recurrent.dim());
  for (int k = 0; k < draws; ++k) {
    for (const Subspace& s : spectral_subspaces(algebra.random_hermitian(rng), kSplitGap)) {
      enclosures.push_back(Subspace::span(recurrent.frame() * s.frame(), tol.rank_cut));
    }
  }

  std::vector<CMatrix> absorbed;
  absorbed.reserve(enclosures.size());
  for (const Subspace& v : enclosures) absorbed.push_back(absorption_iterative(h, v, rd).matrix);

  FixedPointReconstruction out;
  out.enclosures_used = enclosures.size();
  out.span.matrix_dim = map.dim();
  out.span.basis = hermitian_orthonormal_basis(absorbed, tol.eq_tol);
  out.reference_dim = reference.dim();
  for (const CMatrix& b : out.span.basis) out.span_in_reference = std::max(out.span_in_reference, reference.distance(b));
  for (const CMatrix& b : reference.basis) out.reference_in_span = std::max(out.reference_in_span, out.span.distance(b));

  const CMatrix pp = rd.positive.projector();
  const CMatrix pn = rd.null.projector();
  const CMatrix pt = rd.transient.projector();
  const Superoperator positive_map = restrict_map(h, rd.positive);
  const CMatrix& fp = rd.positive.frame();
  for (const CMatrix& x : reference.basis) {
    out.block_residual = std::max(out.block_residual, op_norm(x - pp * x * pp - pn * x * pn - pt * x * pt));
    const CMatrix corner = fp.adjoint() * x * fp;
    out.corner_residual = std::max(out.corner_residual, op_norm(positive_map.apply(corner) - corner));
  }
  return out;
}

AlgebraVerdict algebra_criterion(const Superoperator& map, const RecurrenceDecomposition& rd, const Dome& dome,
                                 std::uint64_t seed) {
  const Tolerances& tol = map.tol();
  const AbsorbingCheck absorbing = is_absorbing_recurrent(map, rd);
  if (!absorbing.absorbing) {
    throw PreconditionError(kModule, "recurrent space is not absorbing: |A(R) - I| = " + fmt(absorbing.deviation));
  }
  const Superoperator h = map.in_picture(Picture::heisenberg);
  const Subspace recurrent = rd.recurrent();

  std::vector<Subspace> candidates = dome.parts;
  for (Index i = 0; i < map.dim(); ++i) {
    Subspace ray = Subspace::coordinate(map.dim(), {i});
    if (contains(recurrent, ray, tol) && is_enclosure(h, ray).is_enclosure) candidates.push_back(std::move(ray));
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      if (orthogonal(candidates[i], candidates[j], tol.eq_tol)) pairs.emplace_back(i, j);
    }
  }
  if (!recurrent.is_zero()) {
    const FixedPointSpace algebra = fixed_point_space(restrict_map(h, recurrent));
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 10; ++k) {
      const auto pieces = spectral_subspaces(algebra.random_hermitian(rng), kSplitGap);
      if (pieces.size() < 2) continue;
      candidates.push_back(Subspace::span(recurrent.frame() * pieces.front().frame(), tol.rank_cut));
      candidates.push_back(Subspace::span(recurrent.frame() * pieces.back().frame(), tol.rank_cut));
      pairs.emplace_back(candidates.size() - 2, candidates.size() - 1);
    }
  }

  std::vector<CMatrix> absorbed;
  absorbed.reserve(candidates.size());
  for (const Subspace& v : candidates) absorbed.push_back(absorption_iterative(h, v, rd).matrix);

  AlgebraVerdict out;
  out.worst.norm = -1.0;
  for (const auto& [i, j] : pairs) {
    const double n = max_product_norm(absorbed[i], absorbed[j]);
    if (n > out.worst.norm) out.worst = {candidates[i], candidates[j], n};
  }
  out.pairs_checked = pairs.size();
  if (pairs.empty()) out.worst.norm = 0.0;
  out.is_algebra = out.worst.norm <= tol.eq_tol;
  return out;
}

// ---------------------------------------------------------------------------
// Classical chains

ClassicalChain ClassicalChain::validate(RMatrix p, std::vector<std::string> labels, const Tolerances& tol) {
  tol.validate();
  const Index n = p.rows();
  if (n == 0 || p.cols() != n) {
    throw PreconditionError(kModule, "transition matrix must be square and non-empty");
  }
  if (!p.allFinite()) throw PreconditionError(kModule, "transition matrix has non-finite entries");
  for (Index x = 0; x < n; ++x) {
    if (p.row(x).minCoeff() < -tol.eq_tol) {
      throw PreconditionError(kModule, "row " + std::to_string(x) + " has a negative entry");
    }
    const double s = p.row(x).sum();
    if (std::abs(s - 1.0) > tol.eq_tol) {
      throw PreconditionError(kModule, "row " + std::to_string(x) + " sums to " + fmt(s) + ", expected 1");
    }
  }
  if (labels.empty()) {
    for (Index x = 0; x < n; ++x) labels.push_back(std::to_string(x));
  } else if (static_cast<Index>(labels.size()) != n) {
    throw PreconditionError(kModule, "expected " + std::to_string(n) + " labels, got " + std::to_string(labels.size()));
  }
  return ClassicalChain(std::move(p), std::move(labels), tol);
}

std::vector<bool> ClassicalChain::recurrent_states() const {
  const Index n = size();
  std::vector<std::vector<bool>> reach(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), false));
  for (Index x = 0; x < n; ++x) {
    reach[x][x] = true;
    for (Index y = 0; y < n; ++y) {
      if (p_(x, y) > 0.0) reach[x][y] = true;
    }
  }
  for (Index k = 0; k < n; ++k)
    for (Index x = 0; x < n; ++x)
      if (reach[x][k])
        for (Index y = 0; y < n; ++y)
          if (reach[k][y]) reach[x][y] = true;
  std::vector<bool> rec(static_cast<std::size_t>(n), true);
  for (Index x = 0; x < n; ++x)
    for (Index y = 0; y < n; ++y)
      if (reach[x][y] && !reach[y][x]) rec[x] = false;
  return rec;
}

RVector classical_absorption(const ClassicalChain& chain, const std::vector<Index>& closed_set) {
  const Index n = chain.size();
  const RMatrix& p = chain.transitions();
  const double eq_tol = chain.tol().eq_tol;
  std::vector<bool> in_c(static_cast<std::size_t>(n), false);
  for (Index x : closed_set) {
    if (x < 0 || x >= n) throw PreconditionError(kModule, "state " + std::to_string(x) + " is out of range");
    in_c[x] = true;
  }
  for (Index x = 0; x < n; ++x) {
    if (!in_c[x]) continue;
    double out_mass = 0.0;
    for (Index y = 0; y < n; ++y)
      if (!in_c[y]) out_mass += std::max(p(x, y), 0.0);
    if (out_mass > eq_tol) {
      throw PreconditionError(kModule, "set is not closed: state " + chain.labels()[x] + " leaks probability " +
                                           fmt(out_mass));
    }
  }
  const std::vector<bool> rec = chain.recurrent_states();
  std::vector<Index> unknown;
  for (Index x = 0; x < n; ++x)
    if (!in_c[x] && !rec[x]) unknown.push_back(x);

  RVector a = RVector::Zero(n);
  for (Index x = 0; x < n; ++x)
    if (in_c[x]) a(x) = 1.0;
  if (unknown.empty()) return a;

  const Index u = static_cast<Index>(unknown.size());
  RMatrix block(u, u);
  RVector rhs(u);
  for (Index i = 0; i < u; ++i) {
    double into_c = 0.0;
    for (Index y = 0; y < n; ++y)
      if (in_c[y]) into_c += p(unknown[i], y);
    rhs(i) = -into_c;
    for (Index j = 0; j < u; ++j) block(i, j) = p(unknown[i], unknown[j]);
  }
  Eigen::EigenSolver<RMatrix> es(block, false);
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  if (radius >= 1.0 - eq_tol) {
    throw PreconditionError(kModule, "transient block has spectral radius " + fmt(radius) + "; system is singular");
  }
  const RVector sol = (block - RMatrix::Identity(u, u)).colPivHouseholderQr().solve(rhs);
  for (Index i = 0; i < u; ++i) a(unknown[i]) = sol(i);
  return a;
}

QuantumChannel embed_classical_chain(const ClassicalChain& chain) {
  const Index n = chain.size();
  std::vector<CMatrix> kraus;
  for (Index x = 0; x < n; ++x) {
    for (Index y = 0; y < n; ++y) {
      const double pxy = chain.transitions()(x, y);
      if (pxy <= 0.0) continue;
      CMatrix b = CMatrix::Zero(n, n);
      b(y, x) = std::sqrt(pxy);
      kraus.push_back(std::move(b));
    }
  }
  return QuantumChannel::validate(std::move(kraus), n, chain.tol());
}

}  // namespace qrec
