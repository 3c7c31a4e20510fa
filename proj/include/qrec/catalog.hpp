#pragma once

#include "qrec/absorption.hpp"
#include "qrec/channel.hpp"

namespace qrec::catalog {

/// Single Kraus operator I on C^d.
QuantumChannel identity(Index d, const Tolerances& tol = {});

/// B0 = diag(1, sqrt(1 - gamma)), B1 = sqrt(gamma) |0><1|.
QuantumChannel amplitude_damping(double gamma, const Tolerances& tol = {});

/// B1 = |0><0| + |1><1|, B2 = |psi><2| with psi = (|0> + |1>)/sqrt2.
QuantumChannel three_level_absorber(const Tolerances& tol = {});

/// Single Kraus operator u (checked unitary).
QuantumChannel unitary_channel(const CMatrix& u, const Tolerances& tol = {});

/// Symmetric gambler's ruin on {0..n-1} with absorbing ends.
ClassicalChain gamblers_ruin(Index n, const Tolerances& tol = {});

/// L(x) = gamma (Z x Z - x) on a qubit.
GKLSGenerator qubit_dephasing(double gamma = 1.0);

}  // namespace qrec::catalog
