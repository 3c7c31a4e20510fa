#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qrec/channel.hpp"

namespace qrec {

struct EnclosureCert {
  Subspace subspace;
  double slack = 0.0;  // lambda_min(Phi(p_V) - p_V)
  bool is_enclosure = false;
};

/// Enclosure test via Phi(p_V) >= p_V. The zero and full subspaces are
/// always certified.
EnclosureCert is_enclosure(const Superoperator& map, const Subspace& v);
EnclosureCert is_enclosure(const QuantumChannel& channel, const Subspace& v);

/// Linear space of d x d matrices with an orthonormal Hermitian basis under
/// the trace pairing.
struct FixedPointSpace {
  Index matrix_dim = 0;
  std::vector<CMatrix> basis;

  Index dim() const { return static_cast<Index>(basis.size()); }
  CMatrix project(const CMatrix& x) const;
  /// Frobenius distance of x from the span.
  double distance(const CMatrix& x) const;
  /// Random Hermitian element sum g_k b_k with standard normal g_k.
  CMatrix random_hermitian(std::mt19937_64& rng) const;
};

/// ker(Phi - Id) for the Heisenberg map. Throws if the numerical kernel is
/// not closed under the adjoint.
FixedPointSpace fixed_point_space(const Superoperator& map);
FixedPointSpace fixed_point_space(const QuantumChannel& channel);

/// Stop rule used for invariant states: tighter than the default because
/// the state feeds a rank decision at rank_cut.
StopRule invariant_state_stop();

struct InvariantState {
  CMatrix state;
  std::uint64_t terms = 0;
  bool converged = false;
  double invariance_residual = 0.0;  // |Phi_*(rho) - rho|
};

/// Cesaro limit of Phi_*^k(I/d); its support is the supremum of the supports
/// of all invariant states.
InvariantState maximal_invariant_state(const Superoperator& map, const StopRule& stop = invariant_state_stop());

/// (R+, R0, T). In finite dimension R0 is always {0} and R = R+.
struct RecurrenceDecomposition {
  Subspace positive;  // R+
  Subspace null;      // R0
  Subspace transient; // T
  CMatrix max_invariant_state;
  double positive_slack = 0.0;  // enclosure certificate for R+
  bool converged = false;
  std::uint64_t terms = 0;

  Subspace recurrent() const { return positive; }
};

RecurrenceDecomposition recurrence_decomposition(const Superoperator& map,
                                                 const StopRule& stop = invariant_state_stop());

/// {x : x G = G x and x G* = G* x for every generator G}.
FixedPointSpace commutant_basis(const std::vector<CMatrix>& generators, const Tolerances& tol = {});

struct ClosureReport {
  bool closed = true;
  Index worst_i = -1;
  Index worst_j = -1;
  double worst_distance = 0.0;
};

/// Checks that every product b_i b_j of basis elements stays in the span.
ClosureReport algebra_closure_check(const FixedPointSpace& space, double eq_tol = 1e-8);

/// Span of spectral projections of `draws` random Hermitian elements of
/// `space`. When the space is an algebra every such projection belongs to it.
FixedPointSpace harmonic_projection_span(const FixedPointSpace& space, int draws, std::mt19937_64& rng,
                                         const Tolerances& tol = {});

struct Dome {
  std::vector<Subspace> parts;
  std::vector<double> slacks;
  Subspace spans;
  int draws = 0;  // random elements consumed
};

/// Decomposition of R into mutually orthogonal minimal enclosures by
/// recursive spectral splitting. A part is declared minimal after
/// `quiet_draws` consecutive random elements fail to split it.
Dome minimal_enclosures(const Superoperator& map, const RecurrenceDecomposition& rd, std::uint64_t seed,
                        int quiet_draws = 8);

struct ComplementCert {
  EnclosureCert cert;  // for Z intersect V-perp
  bool violation = false;
};

/// Certificate for Z intersect V-perp given enclosures V subset Z subset R.
ComplementCert enclosure_complement(const Superoperator& map, const Subspace& v, const Subspace& z,
                                    const RecurrenceDecomposition& rd);

struct EnclosureStructure {
  Subspace positive_part;   // V intersect R+
  Subspace null_part;       // V intersect R0
  Subspace transient_part;  // V intersect T
  double decomposition_residual = 0.0;  // |p_V - sum of part projectors|
  double inequality_slack = 0.0;        // lambda_min(A(V cap R) - p_{V cap R} - p_{V cap T})
  bool recurrent_part_nonzero = false;
  double commutator_positive = 0.0;     // |[p_V, p_R+]|
  double commutator_transient = 0.0;    // |[p_V, p_T]|

  bool holds(double eq_tol) const {
    return decomposition_residual <= eq_tol && inequality_slack >= -eq_tol && recurrent_part_nonzero;
  }
};

/// Splits an enclosure along (R+, R0, T) and checks the absorption bound on
/// its transient part.
EnclosureStructure enclosure_structure(const Superoperator& map, const Subspace& v,
                                       const RecurrenceDecomposition& rd, const StopRule& stop = {});

}  // namespace qrec
