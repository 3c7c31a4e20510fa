#include "qrec/catalog.hpp"

#include <cmath>

namespace qrec::catalog {

QuantumChannel identity(Index d, const Tolerances& tol) {
  return QuantumChannel::validate({CMatrix::Identity(d, d)}, d, tol);
}

QuantumChannel amplitude_damping(double gamma, const Tolerances& tol) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw PreconditionError("channel", "damping rate must lie in [0, 1]");
  CMatrix b0 = CMatrix::Zero(2, 2);
  b0(0, 0) = 1.0;
  b0(1, 1) = std::sqrt(1.0 - gamma);
  CMatrix b1 = CMatrix::Zero(2, 2);
  b1(0, 1) = std::sqrt(gamma);
  return QuantumChannel::validate({b0, b1}, 2, tol);
}

QuantumChannel three_level_absorber(const Tolerances& tol) {
  CMatrix b1 = CMatrix::Zero(3, 3);
  b1(0, 0) = 1.0;
  b1(1, 1) = 1.0;
  CMatrix b2 = CMatrix::Zero(3, 3);
  b2(0, 2) = 1.0 / std::sqrt(2.0);
  b2(1, 2) = 1.0 / std::sqrt(2.0);
  return QuantumChannel::validate({b1, b2}, 3, tol);
}

QuantumChannel unitary_channel(const CMatrix& u, const Tolerances& tol) {
  const Index d = u.rows();
  if (u.cols() != d || op_norm(u.adjoint() * u - CMatrix::Identity(d, d)) > tol.eq_tol) {
    throw PreconditionError("channel", "unitary_channel: matrix is not unitary");
  }
  return QuantumChannel::validate({u}, d, tol);
}

ClassicalChain gamblers_ruin(Index n, const Tolerances& tol) {
  if (n < 3) throw PreconditionError("absorption", "gambler's ruin needs at least 3 states");
  RMatrix p = RMatrix::Zero(n, n);
  p(0, 0) = 1.0;
  p(n - 1, n - 1) = 1.0;
  for (Index x = 1; x + 1 < n; ++x) {
    p(x, x - 1) = 0.5;
    p(x, x + 1) = 0.5;
  }
  return ClassicalChain::validate(p, {}, tol);
}

GKLSGenerator qubit_dephasing(double gamma) {
  if (!(gamma >= 0.0)) throw PreconditionError("channel", "dephasing rate must be non-negative");
  GKLSGenerator gen;
  gen.dim = 2;
  gen.hamiltonian = CMatrix::Zero(2, 2);
  CMatrix z = CMatrix::Zero(2, 2);
  z(0, 0) = std::sqrt(gamma);
  z(1, 1) = -std::sqrt(gamma);
  gen.jumps = {z};
  return gen;
}

}  // namespace qrec::catalog
