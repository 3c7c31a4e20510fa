#include "qrec/structure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>

namespace qrec {

namespace {

constexpr const char* kModule = "structure";

// Relative eigenvalue gap below which neighbouring eigenspaces of a random
// fixed point are kept together. Merging is always safe (a union of spectral
// projections is a spectral projection), splitting across a tiny gap is not.
constexpr double kSplitGap = 1e-3;

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

}  // namespace

EnclosureCert is_enclosure(const Superoperator& map, const Subspace& v) {
  EnclosureCert cert{v, subharmonic_slack(map, v), false};
  cert.is_enclosure = v.is_zero() || v.is_full() || cert.slack >= -map.tol().eq_tol;
  return cert;
}

EnclosureCert is_enclosure(const QuantumChannel& channel, const Subspace& v) {
  EnclosureCert cert{v, subharmonic_slack(channel, v), false};
  cert.is_enclosure = v.is_zero() || v.is_full() || cert.slack >= -channel.tol().eq_tol;
  return cert;
}

// ---------------------------------------------------------------------------
// FixedPointSpace

CMatrix FixedPointSpace::project(const CMatrix& x) const {
  CMatrix out = CMatrix::Zero(matrix_dim, matrix_dim);
  for (const CMatrix& b : basis) {
    const Complex c = (b.adjoint() * x).trace();
    out += c * b;
  }
  return out;
}

double FixedPointSpace::distance(const CMatrix& x) const { return (x - project(x)).norm(); }

CMatrix FixedPointSpace::random_hermitian(std::mt19937_64& rng) const {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix h = CMatrix::Zero(matrix_dim, matrix_dim);
  for (const CMatrix& b : basis) h += gauss(rng) * b;
  return hermitian_part(h);
}

namespace {

FixedPointSpace kernel_to_space(const CMatrix& kernel, Index d, const Tolerances& tol) {
  std::vector<CMatrix> elems;
  elems.reserve(static_cast<std::size_t>(kernel.cols()));
  for (Index k = 0; k < kernel.cols(); ++k) elems.push_back(unvectorize(kernel.col(k), d, d));
  FixedPointSpace out;
  out.matrix_dim = d;
  out.basis = hermitian_orthonormal_basis(elems, tol.eq_tol);
  if (out.dim() != kernel.cols()) {
    throw PreconditionError(kModule, "kernel of dimension " + std::to_string(kernel.cols()) +
                                         " is not closed under the adjoint (Hermitian span has dimension " +
                                         std::to_string(out.dim()) + ")");
  }
  return out;
}

}  // namespace

FixedPointSpace fixed_point_space(const Superoperator& map) {
  const Superoperator h = map.in_picture(Picture::heisenberg);
  const Index n = h.matrix().rows();
  const CMatrix kernel = null_space(h.matrix() - CMatrix::Identity(n, n), h.tol().rank_cut);
  return kernel_to_space(kernel, h.dim(), h.tol());
}

FixedPointSpace fixed_point_space(const QuantumChannel& channel) {
  return fixed_point_space(superoperator_matrix(channel, Picture::heisenberg));
}

FixedPointSpace commutant_basis(const std::vector<CMatrix>& generators, const Tolerances& tol) {
  if (generators.empty()) throw PreconditionError(kModule, "commutant_basis: empty generator list");
  const Index d = generators.front().rows();
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix stacked(2 * d * d * static_cast<Index>(generators.size()), d * d);
  Index row = 0;
  for (const CMatrix& g : generators) {
    if (g.rows() != d || g.cols() != d) {
      throw PreconditionError(kModule, "commutant_basis: generators must be square and of equal size");
    }
    // vec(x G - G x) = (G^T kron I - I kron G) vec(x)
    stacked.middleRows(row, d * d) = kron(g.transpose(), id) - kron(id, g);
    row += d * d;
    const CMatrix ga = g.adjoint();
    stacked.middleRows(row, d * d) = kron(ga.transpose(), id) - kron(id, ga);
    row += d * d;
  }
  return kernel_to_space(null_space(stacked, tol.rank_cut), d, tol);
}

ClosureReport algebra_closure_check(const FixedPointSpace& space, double eq_tol) {
  ClosureReport report;
  for (Index i = 0; i < space.dim(); ++i) {
    for (Index j = i; j < space.dim(); ++j) {
      const double dist = space.distance(space.basis[i] * space.basis[j]);
      if (dist > report.worst_distance || report.worst_i < 0) {
        report.worst_distance = dist;
        report.worst_i = i;
        report.worst_j = j;
      }
    }
  }
  report.closed = report.worst_distance <= eq_tol;
  return report;
}

FixedPointSpace harmonic_projection_span(const FixedPointSpace& space, int draws, std::mt19937_64& rng,
                                         const Tolerances& tol) {
  std::vector<CMatrix> projections;
  for (int k = 0; k < draws; ++k) {
    for (const Subspace& s : spectral_subspaces(space.random_hermitian(rng), kSplitGap)) {
      projections.push_back(s.projector());
    }
  }
  FixedPointSpace out;
  out.matrix_dim = space.matrix_dim;
  out.basis = hermitian_orthonormal_basis(projections, tol.eq_tol);
  return out;
}

// ---------------------------------------------------------------------------
// Recurrence

StopRule invariant_state_stop() {
  StopRule s;
  s.stall_tol = 1e-13;
  return s;
}

InvariantState maximal_invariant_state(const Superoperator& map, const StopRule& stop) {
  const Superoperator pred = map.in_picture(Picture::predual);
  const Index d = pred.dim();
  const CMatrix start = CMatrix::Identity(d, d) / static_cast<double>(d);
  const CesaroResult c = cesaro_average(pred, start, stop);
  InvariantState out;
  out.state = hermitian_part(c.average);
  const double tr = out.state.trace().real();
  if (tr > 0.0) out.state /= tr;
  out.terms = c.terms;
  out.converged = c.converged;
  out.invariance_residual = op_norm(pred.apply(out.state) - out.state);
  return out;
}

RecurrenceDecomposition recurrence_decomposition(const Superoperator& map, const StopRule& stop) {
  const InvariantState inv = maximal_invariant_state(map, stop);
  if (!inv.converged) {
    throw PreconditionError(kModule, "maximal invariant state did not converge within " +
                                         std::to_string(inv.terms) + " terms");
  }
  const Tolerances& tol = map.tol();
  RecurrenceDecomposition rd;
  rd.positive = support(inv.state, tol);
  rd.null = Subspace(map.dim());
  rd.transient = complement(rd.positive, tol);
  rd.max_invariant_state = inv.state;
  rd.positive_slack = subharmonic_slack(map, rd.positive);
  rd.converged = inv.converged;
  rd.terms = inv.terms;
  if (rd.positive_slack < -tol.eq_tol) {
    throw PreconditionError(kModule, "support of the invariant state is not an enclosure (slack " +
                                         fmt(rd.positive_slack) + ")");
  }
  return rd;
}

// ---------------------------------------------------------------------------
// Minimal enclosures

Dome minimal_enclosures(const Superoperator& map, const RecurrenceDecomposition& rd, std::uint64_t seed,
                        int quiet_draws) {
  const Subspace recurrent = rd.recurrent();
  Dome dome;
  dome.spans = Subspace(map.dim());
  if (recurrent.is_zero()) return dome;

  const Superoperator restricted = restrict_map(map.in_picture(Picture::heisenberg), recurrent);
  const FixedPointSpace algebra = fixed_point_space(restricted);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Index r = recurrent.dim();
  std::deque<CMatrix> work;  // frames in R coordinates
  work.push_back(CMatrix::Identity(r, r));
  std::vector<CMatrix> minimal;

  while (!work.empty()) {
    CMatrix g = std::move(work.front());
    work.pop_front();
    bool split = false;
    if (g.cols() > 1) {
      for (int quiet = 0; quiet < quiet_draws && !split; ++quiet) {
        CMatrix h = CMatrix::Zero(g.cols(), g.cols());
        for (const CMatrix& b : algebra.basis) h += gauss(rng) * (g.adjoint() * b * g);
        ++dome.draws;
        const std::vector<Subspace> pieces = spectral_subspaces(hermitian_part(h), kSplitGap);
        if (pieces.size() > 1) {
          for (const Subspace& p : pieces) work.push_back(g * p.frame());
          split = true;
        }
      }
    }
    if (!split) minimal.push_back(std::move(g));
  }

  for (const CMatrix& g : minimal) {
    Subspace part = Subspace::span(recurrent.frame() * g, map.tol().rank_cut);
    dome.slacks.push_back(subharmonic_slack(map, part));
    dome.spans = sum(dome.spans, part, map.tol());
    dome.parts.push_back(std::move(part));
  }
  return dome;
}

ComplementCert enclosure_complement(const Superoperator& map, const Subspace& v, const Subspace& z,
                                    const RecurrenceDecomposition& rd) {
  const Tolerances& tol = map.tol();
  if (!contains(z, v, tol)) throw PreconditionError(kModule, "enclosure_complement: V is not contained in Z");
  if (!contains(rd.recurrent(), z, tol)) {
    throw PreconditionError(kModule, "enclosure_complement: Z is not contained in the recurrent space");
  }
  if (!is_enclosure(map, v).is_enclosure) throw PreconditionError(kModule, "enclosure_complement: V is not an enclosure");
  if (!is_enclosure(map, z).is_enclosure) throw PreconditionError(kModule, "enclosure_complement: Z is not an enclosure");
  ComplementCert out;
  out.cert = is_enclosure(map, intersect(z, complement(v, tol), tol));
  out.violation = !out.cert.is_enclosure;
  return out;
}

EnclosureStructure enclosure_structure(const Superoperator& map, const Subspace& v,
                                       const RecurrenceDecomposition& rd, const StopRule& stop) {
  const Tolerances& tol = map.tol();
  const EnclosureCert cert = is_enclosure(map, v);
  if (!cert.is_enclosure) {
    throw PreconditionError(kModule, "enclosure_structure: subspace is not an enclosure (slack " +
                                         fmt(cert.slack) + ")");
  }
  EnclosureStructure s;
  s.positive_part = intersect(v, rd.positive, tol);
  s.null_part = intersect(v, rd.null, tol);
  s.transient_part = intersect(v, rd.transient, tol);
  const CMatrix pv = v.projector();
  const CMatrix p_pos = s.positive_part.projector();
  const CMatrix p_null = s.null_part.projector();
  const CMatrix p_tr = s.transient_part.projector();
  s.decomposition_residual = op_norm(pv - p_pos - p_null - p_tr);

  const Subspace recurrent_part = sum(s.positive_part, s.null_part, tol);
  s.recurrent_part_nonzero = v.is_zero() || !recurrent_part.is_zero();
  const CMatrix p_rec = recurrent_part.projector();
  const CesaroResult absorbed =
      cesaro_average(map.in_picture(Picture::heisenberg), p_rec, stop);
  s.inequality_slack = eig_hermitian(hermitian_part(absorbed.average) - p_rec - p_tr).eigenvalues(0);

  const CMatrix pr = rd.positive.projector();
  const CMatrix pt = rd.transient.projector();
  s.commutator_positive = op_norm(pv * pr - pr * pv);
  s.commutator_transient = op_norm(pv * pt - pt * pv);
  return s;
}

}  // namespace qrec
