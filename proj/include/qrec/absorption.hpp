#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrec/structure.hpp"

namespace qrec {

enum class AbsorptionMethod { iterative, linear_system };

const char* to_string(AbsorptionMethod m);

/// A(V), the long-time limit of Phi^n(p_V), with its provenance.
struct AbsorptionOperator {
  Subspace enclosure;
  CMatrix matrix;
  AbsorptionMethod method = AbsorptionMethod::iterative;
  double fixed_point_residual = 0.0;  // |Phi(A) - A|
  double blocks_residual = 0.0;       // see blocks_residual()
  bool converged = true;
  std::uint64_t terms = 0;            // Cesaro terms (iterative only)
  double solve_residual = 0.0;        // linear system residual (linear only)
  double corner_radius = 0.0;         // spectral radius of the transient corner map (linear only)
};

/// Cesaro limit of Phi^n(p_V). Throws if V is not an enclosure.
AbsorptionOperator absorption_iterative(const Superoperator& map, const Subspace& v,
                                        const RecurrenceDecomposition& rd, const StopRule& stop = {});

/// Solves L(y) = -p_T L(p_V) p_T on B(T) with L = Phi - Id and returns
/// A = p_V + y. Requires A(R) = I, V inside R, and a transient corner map
/// with spectral radius below 1 - eq_tol.
AbsorptionOperator absorption_linear(const Superoperator& map, const Subspace& v,
                                     const RecurrenceDecomposition& rd);

/// |A - p_V - p_W A p_W| with W = V-perp intersect T.
double blocks_residual(const CMatrix& a, const Subspace& v, const RecurrenceDecomposition& rd,
                       const Tolerances& tol = {});

struct AbsorbingCheck {
  bool absorbing = false;
  double deviation = 0.0;  // |A(R) - I|
};

AbsorbingCheck is_absorbing_recurrent(const Superoperator& map, const RecurrenceDecomposition& rd,
                                      const StopRule& stop = {});

struct FixedPointReconstruction {
  FixedPointSpace span;            // span of the computed absorption operators
  Index reference_dim = 0;         // dim ker(Phi - Id)
  double span_in_reference = 0.0;  // max distance of span elements from the kernel
  double reference_in_span = 0.0;  // max distance of kernel elements from the span
  double block_residual = 0.0;     // max |x - p_R+ x p_R+ - p_R0 x p_R0 - p_T x p_T|
  double corner_residual = 0.0;    // max |Phi^{R+}(corner) - corner|
  std::size_t enclosures_used = 0;

  bool matches(double eq_tol) const {
    return span.dim() == reference_dim && span_in_reference <= eq_tol && reference_in_span <= eq_tol &&
           block_residual <= eq_tol && corner_residual <= eq_tol;
  }
};

/// Rebuilds F(P) as the span of absorption operators of enclosures inside R:
/// DOME parts, their pairwise sums, and spectral projections of random
/// elements of the restricted fixed-point algebra.
FixedPointReconstruction fixed_points_via_absorption(const Superoperator& map, const RecurrenceDecomposition& rd,
                                                     const Dome& dome, std::uint64_t seed);

struct PairNorm {
  Subspace v;
  Subspace w;
  double norm = 0.0;  // max(|A(V)A(W)|, |A(W)A(V)|)
};

struct AlgebraVerdict {
  bool is_algebra = true;
  PairNorm worst;
  std::size_t pairs_checked = 0;
};

/// F(P) is an algebra iff A(V)A(W) = 0 for orthogonal enclosures V, W in R.
/// Checks DOME pairs, coordinate-ray enclosures inside R, and 10 seeded
/// random orthogonal pairs.
AlgebraVerdict algebra_criterion(const Superoperator& map, const RecurrenceDecomposition& rd, const Dome& dome,
                                 std::uint64_t seed);

/// Row-stochastic transition matrix of a finite Markov chain.
class ClassicalChain {
 public:
  /// Checks rows sum to 1 and entries are >= -eq_tol.
  static ClassicalChain validate(RMatrix p, std::vector<std::string> labels = {}, const Tolerances& tol = {});

  Index size() const { return p_.rows(); }
  const RMatrix& transitions() const { return p_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Tolerances& tol() const { return tol_; }

  /// States belonging to closed communicating classes.
  std::vector<bool> recurrent_states() const;

 private:
  ClassicalChain(RMatrix p, std::vector<std::string> labels, Tolerances tol)
      : p_(std::move(p)), labels_(std::move(labels)), tol_(tol) {}

  RMatrix p_;
  std::vector<std::string> labels_;
  Tolerances tol_;
};

/// Absorption probabilities into the closed set C.
RVector classical_absorption(const ClassicalChain& chain, const std::vector<Index>& closed_set);

/// Kraus operators sqrt(p_xy) |y><x|; the diagonal of the predual reproduces
/// the chain.
QuantumChannel embed_classical_chain(const ClassicalChain& chain);

}  // namespace qrec
