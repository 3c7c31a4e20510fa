#pragma once

// Seeded random channels for property tests.

#include <cmath>
#include <random>
#include <vector>

#include "qrec/channel.hpp"

namespace qrec::testing {

inline CMatrix gaussian(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

/// Haar unitary: QR of a complex Ginibre matrix with the phases of R's
/// diagonal divided out.
inline CMatrix haar_unitary(std::mt19937_64& rng, Index d) {
  Eigen::HouseholderQR<CMatrix> qr(gaussian(rng, d, d));
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR();
  for (Index j = 0; j < d; ++j) {
    const Complex z = r(j, j);
    if (std::abs(z) > 0.0) q.col(j) *= z / std::abs(z);
  }
  return q;
}

/// Isometry C^cols -> C^rows (rows >= cols).
inline CMatrix random_isometry(std::mt19937_64& rng, Index rows, Index cols) {
  return haar_unitary(rng, rows).leftCols(cols);
}

/// k random Kraus operators normalized by (sum G*G)^(-1/2).
inline std::vector<CMatrix> random_kraus(std::mt19937_64& rng, Index d, int k) {
  std::vector<CMatrix> g;
  CMatrix s = CMatrix::Zero(d, d);
  for (int i = 0; i < k; ++i) {
    g.push_back(gaussian(rng, d, d));
    s += g.back().adjoint() * g.back();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
  const CMatrix inv_sqrt =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
  for (CMatrix& b : g) b = b * inv_sqrt;
  return g;
}

inline QuantumChannel random_channel(std::mt19937_64& rng, Index d, int k) {
  return QuantumChannel::validate(random_kraus(rng, d, k), d);
}

inline CMatrix block_diag(const std::vector<CMatrix>& blocks) {
  Index n = 0;
  for (const CMatrix& b : blocks) n += b.rows();
  CMatrix out = CMatrix::Zero(n, n);
  Index at = 0;
  for (const CMatrix& b : blocks) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

/// Recurrent block of one of three kinds, always with two Kraus operators:
///   0: primitive (two random Kraus operators), F = scalars
///   1: unitary, F = functions of u
///   2: K (x) I_m, F = I (x) M_m
inline std::vector<CMatrix> recurrent_block(std::mt19937_64& rng, Index size, int kind) {
  if (size == 1 || kind == 1) {
    const CMatrix u = haar_unitary(rng, size) / std::sqrt(2.0);
    return {u, u};
  }
  if (kind == 2 && size % 2 == 0) {
    const Index m = 2;
    const Index s = size / m;
    std::vector<CMatrix> k = s == 1 ? std::vector<CMatrix>{CMatrix::Identity(1, 1) / std::sqrt(2.0),
                                                          CMatrix::Identity(1, 1) / std::sqrt(2.0)}
                                    : random_kraus(rng, s, 2);
    std::vector<CMatrix> out;
    for (const CMatrix& b : k) out.push_back(kron(b, CMatrix::Identity(m, m)));
    return out;
  }
  return random_kraus(rng, size, 2);
}

struct StructuredChannel {
  QuantumChannel channel;
  Index recurrent_dim;  // before the final rotation R = span of the first recurrent_dim basis vectors
  CMatrix rotation;     // Haar unitary applied last
};

/// Channel on C^d = R (+) T with a blockwise recurrent part on R (two Kraus
/// operators) and, when T != {0}, two leak operators J_i p_T built from a
/// random isometry C^t -> C^d (x) C^2. The whole channel is then rotated by
/// a Haar unitary.
inline StructuredChannel structured_channel(std::mt19937_64& rng, Index d, Index transient_dim) {
  const Index r = d - transient_dim;
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_int_distribution<Index> piece(1, std::min<Index>(r, 3));
  std::vector<CMatrix> first;
  std::vector<CMatrix> second;
  Index left = r;
  while (left > 0) {
    const Index s = std::min(left, piece(rng));
    const std::vector<CMatrix> b = recurrent_block(rng, s, kind(rng));
    first.push_back(b[0]);
    second.push_back(b[1]);
    left -= s;
  }
  std::vector<CMatrix> kraus;
  for (const std::vector<CMatrix>* blocks : {&first, &second}) {
    CMatrix k = CMatrix::Zero(d, d);
    k.topLeftCorner(r, r) = block_diag(*blocks);
    kraus.push_back(k);
  }
  if (transient_dim > 0) {
    const CMatrix j = random_isometry(rng, 2 * d, transient_dim);
    for (int i = 0; i < 2; ++i) {
      CMatrix k = CMatrix::Zero(d, d);
      k.rightCols(transient_dim) = j.middleRows(i * d, d);
      kraus.push_back(k);
    }
  }
  const CMatrix w = haar_unitary(rng, d);
  for (CMatrix& k : kraus) k = w * k * w.adjoint();
  return {QuantumChannel::validate(std::move(kraus), d), r, w};
}

/// Random state supported in v (density of a random Ginibre matrix).
inline CMatrix random_state_in(std::mt19937_64& rng, const Subspace& v) {
  const CMatrix g = gaussian(rng, v.dim(), v.dim());
  const CMatrix s = v.frame() * (g * g.adjoint()) * v.frame().adjoint();
  return s / s.trace().real();
}

/// Random subspace of the given dimension.
inline Subspace random_subspace(std::mt19937_64& rng, Index ambient, Index dim) {
  if (dim == 0) return Subspace(ambient);
  return Subspace::span(gaussian(rng, ambient, dim));
}

}  // namespace qrec::testing
