#pragma once

#include <string>
#include <vector>

#include "qrec/channel.hpp"

namespace qrec {

// Elements of the infinite dihedral group <a, b | a^2 = b^2 = e> are labelled
// by integers: words ending in b are positive, words ending in a negative,
// and the label's magnitude is the word length.
//   ... aba -> -3, ba -> -2, a -> -1, e -> 0, b -> 1, ab -> 2, bab -> 3 ...

/// Reduced word for a label ("e" for the identity).
std::string word_of_label(long label);
/// Label of any word over {a, b, e}; the word is reduced first.
long label_of_word(const std::string& word);
/// Label of g * h.
long multiply_labels(long g, long h);
long inverse_label(long g);

/// Injective map on {0..n-1} with undefined entries (-1) for basis vectors
/// sent outside the truncation window.
struct PartialPermutation {
  std::vector<Index> image;

  Index size() const { return static_cast<Index>(image.size()); }
  CMatrix matrix() const;
  CVector apply(const CVector& v) const;
  /// P rho P*.
  CMatrix conjugate(const CMatrix& rho) const;
};

/// Left and right regular representations truncated to word length <= N,
/// with an absorbing boundary.
class DihedralWalk {
 public:
  /// Throws PreconditionError for N < 2.
  explicit DihedralWalk(long radius);

  long radius() const { return radius_; }
  Index size() const { return 2 * radius_ + 1; }
  Index index_of(long label) const;
  long label_of(Index index) const { return static_cast<long>(index) - radius_; }

  const PartialPermutation& lam_a() const { return lam_a_; }
  const PartialPermutation& lam_b() const { return lam_b_; }
  const PartialPermutation& rho_ab() const { return rho_ab_; }
  const PartialPermutation& rho_ba() const { return rho_ba_; }

  /// Kraus operators lam(a)/sqrt2, lam(b)/sqrt2 of the truncated walk. They
  /// are not trace preserving at the boundary.
  std::vector<CMatrix> truncated_kraus() const;

  /// Truncated walk completed to a channel by one extra Kraus operator
  /// sqrt(I - sum B_i* B_i), supported on the two boundary sites.
  QuantumChannel channel(const Tolerances& tol = {}) const;

  /// One predual step rho -> (lam_a rho lam_a + lam_b rho lam_b) / 2 of the
  /// truncated walk. `leak` receives tr(rho) - tr(rho').
  CMatrix step_predual(const CMatrix& rho, double& leak) const;
  /// Same on a diagonal density, stored as a vector.
  RVector step_diagonal(const RVector& p, double& leak) const;

 private:
  long radius_;
  PartialPermutation lam_a_, lam_b_, rho_ab_, rho_ba_;
};

struct PotentialSeries {
  std::vector<double> sums;  // sums[n-1] = S_n = sum_{k<n} tr(Phi_*^k(rho0) x)
  double leak = 0.0;         // total trace lost over the evolved steps
  double fit_constant = 0.0; // least-squares c in S_n ~ c sqrt(n)
  Index ratio_m = 0;
  double growth_ratio = 0.0; // S_{4m} / S_{2m}, NaN when 4m > n_max
};

/// Partial sums S_1..S_{n_max} of the form potential of x along the orbit of
/// |v><v|. Requires n_max < N so that no mass reaches the boundary. When v
/// is a basis vector the evolution stays diagonal and only the diagonal of
/// x is used. ratio_m defaults to n_max / 4.
PotentialSeries potential_series(const DihedralWalk& walk, const CMatrix& x, const CVector& v, Index n_max,
                                 Index ratio_m = 0);
/// Diagonal variant: x given by its diagonal, start at basis index `start`.
PotentialSeries potential_series(const DihedralWalk& walk, const RVector& x_diag, Index start, Index n_max,
                                 Index ratio_m = 0);

/// c_k = S_k / k for the return mass to the identity, k = 1..k_max.
std::vector<double> return_mass_cesaro(const DihedralWalk& walk, Index k_max);

struct ShiftEquivalence {
  /// order[i] = original basis index placed at position i. The even-label
  /// orbit comes first, then the odd-label orbit, each sorted so that
  /// rho(ab) moves one step to the right.
  std::vector<Index> order;
  Index even_size = 0;
  Index odd_size = 0;
  double interior_residual = 0.0;  // max |U* rho(ab) U - S (+) S| over interior columns
  double full_residual = 0.0;      // same over all columns
};

ShiftEquivalence shift_equivalence_check(const DihedralWalk& walk);

/// Eigendecomposition of the n x n tridiagonal Toeplitz matrix with zero
/// diagonal and 1/2 off the diagonal, the truncated (rho(ab) + rho(ba))/2
/// on one orbit.
struct CosineSpectrum {
  RVector eigenvalues;   // ascending
  RMatrix eigenvectors;
};

CosineSpectrum cosine_spectrum(Index n);

/// Dyadic cell of an eigenvalue at a given level: cells are
/// [-1 + j 2^-level, -1 + (j+1) 2^-level), the last closed at 1. Values
/// within tie_tol below a boundary are assigned to the right cell.
Index dyadic_cell(double eigenvalue, int level, double tie_tol);

struct OrbitPartition {
  Index size = 0;
  CosineSpectrum spectrum;
  std::vector<std::vector<Index>> cells;      // cells[level][i] for eigenvalue i
  std::vector<std::vector<Index>> ranks;      // ranks[level][j]
  double orthonormality_residual = 0.0;       // |V^T V - I|

  /// q_{j,level} as a dense projector.
  RMatrix projector(int level, Index j) const;
};

struct PartitionProjections {
  int level = 0;
  double tie_tol = 1e-12;
  std::vector<OrbitPartition> orbits;  // even-label orbit, then odd-label orbit
  bool complete = false;    // every eigenvalue in exactly one cell, ranks sum to the orbit size
  bool orthogonal = false;  // disjoint cells and orthonormal eigenvectors
  bool refines = false;     // cell at level n halves to the cell at level n-1
  /// ratios[n-1] = max_j rank(q_{j,n}) / rank(q_{j/2,n-1}), n = 1..level.
  std::vector<double> atomlessness;

  bool properties_hold() const { return complete && orthogonal && refines; }
};

/// Spectral partition of the truncated cosine operator on both orbits for
/// levels 0..level. Requires 2^(level+1) <= smallest orbit size.
PartitionProjections partition_projections(const DihedralWalk& walk, int level, double tie_tol = 1e-12);
/// Same for a single orbit of the given size.
PartitionProjections partition_projections(Index orbit_size, int level, double tie_tol = 1e-12);

/// Continuous-time counterpart: H = 0, jumps lam(a)/sqrt2 and lam(b)/sqrt2
/// truncated to the window.
GKLSGenerator walk_generator(const DihedralWalk& walk);

}  // namespace qrec
