#include "qrec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qrec {

namespace {

constexpr const char* kModule = "channel";

// FNV-1a over the raw bytes of the numeric data.
class Fingerprinter {
 public:
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ULL;
    }
  }
  void add(const CMatrix& m) {
    const Index r = m.rows(), c = m.cols();
    add(&r, sizeof r);
    add(&c, sizeof c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) {
        const double re = m(i, j).real() + 0.0;  // folds -0.0
        const double im = m(i, j).imag() + 0.0;
        add(&re, sizeof re);
        add(&im, sizeof im);
      }
  }
  void add(const std::string& s) { add(s.data(), s.size()); }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash_;
    return os.str();
  }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

void require_dim(const CMatrix& x, Index d, const char* what) {
  if (x.rows() != d || x.cols() != d) {
    throw PreconditionError(kModule, std::string(what) + ": expected a " + std::to_string(d) + "x" +
                                         std::to_string(d) + " matrix, got " +
                                         std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
}

double mean_difference(const CMatrix& a, const CMatrix& b) { return op_norm(a - b); }

}  // namespace

const char* to_string(Picture p) { return p == Picture::heisenberg ? "heisenberg" : "predual"; }

// ---------------------------------------------------------------------------
// QuantumChannel

QuantumChannel::QuantumChannel(Index dim, std::vector<CMatrix> kraus, Tolerances tol)
    : dim_(dim), kraus_(std::move(kraus)), tol_(tol) {
  Fingerprinter f;
  f.add(&dim_, sizeof dim_);
  for (const CMatrix& b : kraus_) f.add(b);
  fingerprint_ = f.hex();
}

double normalization_residual(const std::vector<CMatrix>& kraus, Index dim) {
  CMatrix s = CMatrix::Zero(dim, dim);
  for (const CMatrix& b : kraus) s += b.adjoint() * b;
  return op_norm(s - CMatrix::Identity(dim, dim));
}

QuantumChannel QuantumChannel::validate(std::vector<CMatrix> kraus, Index dim, const Tolerances& tol) {
  tol.validate();
  if (dim <= 0) throw PreconditionError(kModule, "dimension must be positive");
  if (kraus.empty()) throw PreconditionError(kModule, "empty Kraus list");
  CMatrix s = CMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < kraus.size(); ++i) {
    const CMatrix& b = kraus[i];
    if (b.rows() != dim || b.cols() != dim) {
      throw PreconditionError(kModule, "kraus[" + std::to_string(i) + "]: expected " + std::to_string(dim) +
                                           "x" + std::to_string(dim) + ", found " + std::to_string(b.rows()) +
                                           "x" + std::to_string(b.cols()));
    }
    if (!all_finite(b)) {
      throw PreconditionError(kModule, "kraus[" + std::to_string(i) + "]: non-finite entries");
    }
    s += b.adjoint() * b;
  }
  const double residual = op_norm(s - CMatrix::Identity(dim, dim));
  if (residual > tol.eq_tol) {
    std::ostringstream os;
    os << "normalization residual |sum B*B - I| = " << std::setprecision(17) << residual
       << " exceeds eq_tol " << tol.eq_tol;
    throw NormalizationError(os.str(), residual, s);
  }
  return QuantumChannel(dim, std::move(kraus), tol);
}

CMatrix apply(const QuantumChannel& channel, const CMatrix& x, Picture picture) {
  require_dim(x, channel.dim(), "apply");
  CMatrix out = CMatrix::Zero(channel.dim(), channel.dim());
  for (const CMatrix& b : channel.kraus()) {
    if (picture == Picture::heisenberg) {
      out.noalias() += b.adjoint() * x * b;
    } else {
      out.noalias() += b * x * b.adjoint();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Superoperator

Superoperator::Superoperator(Index dim, CMatrix matrix, Picture picture, Tolerances tol, std::string fingerprint)
    : dim_(dim), matrix_(std::move(matrix)), picture_(picture), tol_(tol), fingerprint_(std::move(fingerprint)) {
  if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim) {
    throw PreconditionError(kModule, "superoperator matrix must be " + std::to_string(dim * dim) + "x" +
                                         std::to_string(dim * dim));
  }
}

CMatrix Superoperator::apply(const CMatrix& x) const {
  require_dim(x, dim_, "Superoperator::apply");
  return unvectorize(matrix_ * vectorize(x), dim_, dim_);
}

Superoperator Superoperator::dual() const {
  const Picture other = picture_ == Picture::heisenberg ? Picture::predual : Picture::heisenberg;
  return Superoperator(dim_, matrix_.adjoint(), other, tol_, fingerprint_);
}

Superoperator Superoperator::then(const Superoperator& next) const {
  if (next.dim() != dim_ || next.picture() != picture_) {
    throw PreconditionError(kModule, "Superoperator::then: dimension or picture mismatch");
  }
  Fingerprinter f;
  f.add(fingerprint_);
  f.add(">");
  f.add(next.fingerprint());
  return Superoperator(dim_, next.matrix() * matrix_, picture_, tol_, f.hex());
}

Superoperator superoperator_matrix(const QuantumChannel& channel, Picture picture) {
  const Index d = channel.dim();
  CMatrix m = CMatrix::Zero(d * d, d * d);
  for (const CMatrix& b : channel.kraus()) {
    // vec(A X B) = (B^T kron A) vec(X)
    if (picture == Picture::heisenberg) {
      m += kron(b.transpose(), b.adjoint());
    } else {
      m += kron(b.conjugate(), b);
    }
  }
  return Superoperator(d, std::move(m), picture, channel.tol(), channel.fingerprint());
}

double subharmonic_slack(const Superoperator& map, const Subspace& v) {
  if (v.ambient_dim() != map.dim()) {
    throw PreconditionError(kModule, "subspace lives in C^" + std::to_string(v.ambient_dim()) +
                                         ", map acts on C^" + std::to_string(map.dim()));
  }
  if (v.is_zero() || v.is_full()) return 0.0;
  const CMatrix p = v.projector();
  const Superoperator h = map.in_picture(Picture::heisenberg);
  return eig_hermitian(h.apply(p) - p).eigenvalues(0);
}

double subharmonic_slack(const QuantumChannel& channel, const Subspace& v) {
  if (v.ambient_dim() != channel.dim()) {
    throw PreconditionError(kModule, "subspace lives in C^" + std::to_string(v.ambient_dim()) +
                                         ", channel acts on C^" + std::to_string(channel.dim()));
  }
  if (v.is_zero() || v.is_full()) return 0.0;
  const CMatrix p = v.projector();
  return eig_hermitian(apply(channel, p, Picture::heisenberg) - p).eigenvalues(0);
}

namespace {

void require_enclosure(double slack, const Tolerances& tol) {
  if (slack < -tol.eq_tol) {
    std::ostringstream os;
    os << "restriction requires an enclosure; subharmonic slack " << std::setprecision(6) << slack
       << " is below -eq_tol";
    throw PreconditionError(kModule, os.str());
  }
}

}  // namespace

QuantumChannel restrict_channel(const QuantumChannel& channel, const Subspace& v) {
  if (v.is_zero()) throw PreconditionError(kModule, "cannot restrict to the zero subspace");
  require_enclosure(subharmonic_slack(channel, v), channel.tol());
  const CMatrix& f = v.frame();
  std::vector<CMatrix> kraus;
  kraus.reserve(channel.kraus().size());
  for (const CMatrix& b : channel.kraus()) {
    CMatrix r = f.adjoint() * b * f;
    if (r.norm() > 0.0) kraus.push_back(std::move(r));
  }
  if (kraus.empty()) kraus.push_back(CMatrix::Zero(v.dim(), v.dim()));
  return QuantumChannel::validate(std::move(kraus), v.dim(), channel.tol());
}

Superoperator restrict_map(const Superoperator& map, const Subspace& v) {
  if (v.is_zero()) throw PreconditionError(kModule, "cannot restrict to the zero subspace");
  require_enclosure(subharmonic_slack(map, v), map.tol());
  const CMatrix& f = v.frame();
  // y -> F* Phi(F y F*) F
  const CMatrix compress = kron(f.transpose(), f.adjoint());
  const CMatrix embed = kron(f.conjugate(), f);
  Fingerprinter fp;
  fp.add(map.fingerprint());
  fp.add(f);
  return Superoperator(v.dim(), compress * map.matrix() * embed, map.picture(), map.tol(), fp.hex());
}

// ---------------------------------------------------------------------------
// Cesaro averages

namespace {

// Powers of Phi are formed by squaring, whose roundoff grows like n eps,
// while the mean only converges like 1/n when Phi has peripheral
// eigenvalues other than 1. So the plain doubling runs for at most
// kAveragingTerms terms; after that the averaged map M (a channel whose only
// peripheral eigenvalue is 1) is squared instead. Each M^k is a convex
// combination of powers of Phi and converges geometrically to the same limit.
// Near the limit projection squaring doubles the roundoff along the fixed
// directions, so once the steps fall below kRefineFrom the iteration
// switches to Q -> 3Q^2 - 2Q^3, which is superattractive at projections.
constexpr std::uint64_t kAveragingTerms = std::uint64_t{1} << 10;
constexpr double kRefineFrom = 1e-6;

CesaroResult cesaro_dyadic(const CMatrix& superop, const CMatrix& x, Index d, const StopRule& stop) {
  CMatrix power = superop;  // Phi^n
  CMatrix sum = CMatrix::Identity(superop.rows(), superop.cols());  // sum_{k<n} Phi^k
  const CVector start = vectorize(x);
  CVector current = start;
  std::uint64_t n = 1;
  CesaroResult out;
  const auto finish = [&](const CVector& v, bool converged) {
    out.average = unvectorize(v, d, d);
    out.terms = n;
    out.converged = converged;
    return out;
  };
  while (n < kAveragingTerms) {
    if (n >= stop.max_terms) return finish(current, false);
    sum += power * sum;
    n *= 2;
    const CVector next = sum * start / static_cast<double>(n);
    out.last_step = mean_difference(unvectorize(next, d, d), unvectorize(current, d, d));
    if (out.last_step <= stop.stall_tol) {
      n /= 2;
      return finish(current, true);
    }
    current = next;
    power = power * power;
  }
  CMatrix averaged = sum / static_cast<double>(n);
  while (true) {
    if (n >= stop.max_terms || n >= (std::uint64_t{1} << 62)) return finish(current, false);
    const CMatrix sq = averaged * averaged;
    averaged = out.last_step > kRefineFrom ? sq : CMatrix(3.0 * sq - 2.0 * sq * averaged);
    n *= 2;
    const CVector next = averaged * start;
    out.last_step = mean_difference(unvectorize(next, d, d), unvectorize(current, d, d));
    current = next;
    if (out.last_step <= stop.stall_tol) return finish(current, true);
  }
}

template <typename Step>
CesaroResult cesaro_linear(const CMatrix& x, Step&& step_fn, const StopRule& stop) {
  CMatrix term = x;
  CMatrix partial = x;
  CMatrix mean = x;
  CesaroResult out;
  for (std::uint64_t n = 1;; ++n) {
    if (n >= stop.max_terms) {
      out.average = mean;
      out.terms = n;
      out.converged = false;
      return out;
    }
    term = step_fn(term);
    partial += term;
    const CMatrix next_mean = partial / static_cast<double>(n + 1);
    const double step = mean_difference(next_mean, mean);
    out.last_step = step;
    if (step <= stop.stall_tol) {
      out.average = mean;
      out.terms = n;
      out.converged = true;
      return out;
    }
    mean = next_mean;
  }
}

}  // namespace

CesaroResult cesaro_average(const Superoperator& map, const CMatrix& x, const StopRule& stop) {
  require_dim(x, map.dim(), "cesaro_average");
  if (stop.schedule == CesaroSchedule::dyadic) {
    return cesaro_dyadic(map.matrix(), x, map.dim(), stop);
  }
  return cesaro_linear(x, [&](const CMatrix& t) { return map.apply(t); }, stop);
}

CesaroResult cesaro_average(const QuantumChannel& channel, const CMatrix& x, Picture picture,
                            const StopRule& stop) {
  require_dim(x, channel.dim(), "cesaro_average");
  if (stop.schedule == CesaroSchedule::dyadic) {
    return cesaro_dyadic(superoperator_matrix(channel, picture).matrix(), x, channel.dim(), stop);
  }
  return cesaro_linear(x, [&](const CMatrix& t) { return apply(channel, t, picture); }, stop);
}

// ---------------------------------------------------------------------------
// Continuous time

CMatrix generator_matrix(const GKLSGenerator& gen, const Tolerances& tol) {
  const Index d = gen.dim;
  if (d <= 0) throw PreconditionError(kModule, "generator dimension must be positive");
  CMatrix h = gen.hamiltonian.size() == 0 ? CMatrix::Zero(d, d) : gen.hamiltonian;
  require_dim(h, d, "generator hamiltonian");
  if (op_norm(h - h.adjoint()) > tol.eq_tol) {
    throw PreconditionError(kModule, "generator hamiltonian is not Hermitian within eq_tol");
  }
  const CMatrix id = CMatrix::Identity(d, d);
  const Complex i(0.0, 1.0);
  // i[H, x] = i H x - i x H
  CMatrix m = i * kron(id, h) - i * kron(h.transpose(), id);
  for (std::size_t k = 0; k < gen.jumps.size(); ++k) {
    const CMatrix& l = gen.jumps[k];
    require_dim(l, d, "generator jump");
    const CMatrix ll = l.adjoint() * l;
    m += kron(l.transpose(), l.adjoint());
    m -= 0.5 * (kron(id, ll) + kron(ll.transpose(), id));
  }
  return m;
}

Superoperator generator_channel(const GKLSGenerator& gen, double t, const Tolerances& tol) {
  if (!(t >= 0.0)) throw PreconditionError(kModule, "generator_channel: negative time");
  const CMatrix l = generator_matrix(gen, tol);
  Fingerprinter f;
  f.add(l);
  f.add(&t, sizeof t);
  return Superoperator(gen.dim, expm(l, t), Picture::heisenberg, tol, f.hex());
}

std::vector<Complex> spectrum(const CMatrix& m) {
  if (m.rows() != m.cols()) throw PreconditionError(kModule, "spectrum of a non-square matrix");
  if (m.rows() == 0) return {};
  Eigen::ComplexEigenSolver<CMatrix> solver(m, false);
  if (solver.info() != Eigen::Success) throw PreconditionError(kModule, "eigensolver did not converge");
  std::vector<Complex> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + m.rows());
  std::stable_sort(ev.begin(), ev.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
  return ev;
}

double spectral_radius(const CMatrix& m) {
  const auto ev = spectrum(m);
  return ev.empty() ? 0.0 : std::abs(ev.front());
}

}  // namespace qrec
