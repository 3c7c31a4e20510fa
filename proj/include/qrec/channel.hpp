#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrec/error.hpp"
#include "qrec/numerics.hpp"

namespace qrec {

/// Heisenberg: x -> sum B_i* x B_i.  Predual: rho -> sum B_i rho B_i*.
enum class Picture { heisenberg, predual };

const char* to_string(Picture p);

/// Raised by QuantumChannel::validate when sum B_i* B_i is not the identity.
class NormalizationError : public PreconditionError {
 public:
  NormalizationError(const std::string& message, double residual, CMatrix offending_sum)
      : PreconditionError("channel", message), residual_(residual), sum_(std::move(offending_sum)) {}

  double residual() const { return residual_; }
  const CMatrix& offending_sum() const { return sum_; }

 private:
  double residual_;
  CMatrix sum_;
};

/// Unital completely positive map on d x d matrices given by predual Kraus
/// operators. Immutable once validated.
class QuantumChannel {
 public:
  /// Checks dimensions and |sum B_i* B_i - I| <= eq_tol.
  static QuantumChannel validate(std::vector<CMatrix> kraus, Index dim, const Tolerances& tol = {});

  Index dim() const { return dim_; }
  const std::vector<CMatrix>& kraus() const { return kraus_; }
  const Tolerances& tol() const { return tol_; }

  /// Hash of the Kraus data, stable across runs.
  const std::string& fingerprint() const { return fingerprint_; }

 private:
  QuantumChannel(Index dim, std::vector<CMatrix> kraus, Tolerances tol);

  Index dim_ = 0;
  std::vector<CMatrix> kraus_;
  Tolerances tol_;
  std::string fingerprint_;
};

/// |sum B_i* B_i - I| in operator norm.
double normalization_residual(const std::vector<CMatrix>& kraus, Index dim);

CMatrix apply(const QuantumChannel& channel, const CMatrix& x, Picture picture);

/// d^2 x d^2 matrix of a linear map on d x d matrices, acting on
/// column-stacked vectors.
class Superoperator {
 public:
  Superoperator(Index dim, CMatrix matrix, Picture picture, Tolerances tol, std::string fingerprint);

  Index dim() const { return dim_; }
  const CMatrix& matrix() const { return matrix_; }
  Picture picture() const { return picture_; }
  const Tolerances& tol() const { return tol_; }
  const std::string& fingerprint() const { return fingerprint_; }

  CMatrix apply(const CMatrix& x) const;

  /// Same map seen in the other picture (adjoint under tr(x* y)).
  Superoperator dual() const;
  Superoperator in_picture(Picture p) const { return p == picture_ ? *this : dual(); }

  Superoperator then(const Superoperator& next) const;

 private:
  Index dim_;
  CMatrix matrix_;
  Picture picture_;
  Tolerances tol_;
  std::string fingerprint_;
};

Superoperator superoperator_matrix(const QuantumChannel& channel, Picture picture);

/// lambda_min(Phi(p_V) - p_V); non-negative (up to eq_tol) exactly when V is
/// an enclosure.
double subharmonic_slack(const Superoperator& map, const Subspace& v);
double subharmonic_slack(const QuantumChannel& channel, const Subspace& v);

/// Channel on C^dim(V) with Kraus operators F* B_i F, F the frame of V.
/// Refuses when V is not an enclosure.
QuantumChannel restrict_channel(const QuantumChannel& channel, const Subspace& v);

/// Superoperator counterpart of restrict_channel.
Superoperator restrict_map(const Superoperator& map, const Subspace& v);

enum class CesaroSchedule {
  /// Averages over n = 1, 2, 4, ..., 1024 terms via repeated squaring of the
  /// superoperator, then squares the 1024-term averaged map M and compares
  /// M^k(X) with M^2k(X). Consecutive values compared at each doubling.
  dyadic,
  /// Term by term, consecutive means compared after every term.
  linear,
};

struct StopRule {
  std::uint64_t max_terms = std::uint64_t{1} << 60;
  double stall_tol = 1e-12;
  CesaroSchedule schedule = CesaroSchedule::dyadic;
};

struct CesaroResult {
  CMatrix average;
  std::uint64_t terms = 0;
  bool converged = false;
  double last_step = 0.0;  // |mean_next - mean| at the stopping point
};

/// (1/n) sum_{k<n} Phi^k(X), stopped at the first checkpoint n whose mean
/// differs from the next one by at most stall_tol in operator norm.
CesaroResult cesaro_average(const Superoperator& map, const CMatrix& x, const StopRule& stop = {});
CesaroResult cesaro_average(const QuantumChannel& channel, const CMatrix& x, Picture picture,
                            const StopRule& stop = {});

/// L(x) = i[H, x] + sum_i (L_i* x L_i - 1/2 {L_i* L_i, x}).
struct GKLSGenerator {
  Index dim = 0;
  CMatrix hamiltonian;
  std::vector<CMatrix> jumps;
};

/// Heisenberg-picture matrix of the generator. Validates shapes and that
/// the Hamiltonian is Hermitian within eq_tol.
CMatrix generator_matrix(const GKLSGenerator& gen, const Tolerances& tol = {});

/// exp(t L) as a Heisenberg superoperator.
Superoperator generator_channel(const GKLSGenerator& gen, double t, const Tolerances& tol = {});

/// Eigenvalues sorted by decreasing modulus.
std::vector<Complex> spectrum(const CMatrix& m);
double spectral_radius(const CMatrix& m);

}  // namespace qrec
