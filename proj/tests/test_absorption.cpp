#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qrec/absorption.hpp"
#include "qrec/catalog.hpp"
#include "support/oracles.hpp"
#include "support/random_channels.hpp"

using namespace qrec;
namespace t = qrec::testing;

namespace {

Superoperator heis(const QuantumChannel& ch) { return superoperator_matrix(ch, Picture::heisenberg); }

CMatrix diag3(double a, double b, double c) {
  CMatrix m = CMatrix::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

/// Random absorbing chain: a few absorbing states, the rest transient with
/// at least one edge towards a lower-numbered state so every path drains.
ClassicalChain random_absorbing_chain(std::mt19937_64& rng, Index n, Index absorbing) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RMatrix p = RMatrix::Zero(n, n);
  for (Index x = 0; x < absorbing; ++x) p(x, x) = 1.0;
  for (Index x = absorbing; x < n; ++x) {
    for (Index y = 0; y < n; ++y)
      if (u(rng) < 0.4) p(x, y) = u(rng);
    p(x, std::uniform_int_distribution<Index>(0, x - 1)(rng)) += 0.5;
    p.row(x) /= p.row(x).sum();
  }
  return ClassicalChain::validate(p);
}

}  // namespace

TEST_CASE("three-level absorber, iterative and linear") {
  const Superoperator h = heis(catalog::three_level_absorber());
  const RecurrenceDecomposition rd = recurrence_decomposition(h);
  const Subspace v0 = Subspace::coordinate(3, {0});
  const AbsorptionOperator it = absorption_iterative(h, v0, rd);
  const AbsorptionOperator lin = absorption_linear(h, v0, rd);
  const CMatrix expected = diag3(1.0, 0.0, 0.5);
  CHECK(op_norm(it.matrix - expected) < 1e-9);
  CHECK(op_norm(lin.matrix - expected) < 1e-12);
  CHECK(op_norm(it.matrix - lin.matrix) < 1e-6);
  CHECK(op_norm(t::power_iterate(catalog::three_level_absorber(), v0.projector(), 50) - expected) < 1e-12);
  CHECK(it.blocks_residual < 1e-8);
  CHECK(lin.blocks_residual < 1e-8);
  CHECK(it.fixed_point_residual < 1e-8);
  CHECK(lin.corner_radius < 1e-12);

  const Subspace r = Subspace::coordinate(3, {0, 1});
  CHECK(op_norm(absorption_iterative(h, r, rd).matrix - CMatrix::Identity(3, 3)) < 1e-9);
  CHECK(op_norm(absorption_linear(h, r, rd).matrix - CMatrix::Identity(3, 3)) < 1e-12);
  CHECK(op_norm(absorption_iterative(h, Subspace::full(3), rd).matrix - CMatrix::Identity(3, 3)) < 1e-12);

  CHECK_THROWS_AS(absorption_iterative(h, Subspace::coordinate(3, {2}), rd), PreconditionError);
  CHECK_THROWS_AS(absorption_linear(h, Subspace::full(3), rd), PreconditionError);
}

TEST_CASE("blocks residual on trivial cases") {
  const Superoperator id = heis(catalog::identity(3));
  const RecurrenceDecomposition rd = recurrence_decomposition(id);
  std::mt19937_64 rng(79);
  const Subspace v = t::random_subspace(rng, 3, 2);
  const AbsorptionOperator a = absorption_iterative(id, v, rd);
  CHECK(op_norm(a.matrix - v.projector()) < 1e-12);
  CHECK(a.blocks_residual < 1e-12);
  CHECK(blocks_residual(CMatrix::Identity(3, 3), Subspace::full(3), rd) < 1e-15);
}

TEST_CASE("absorbing recurrent space") {
  for (const QuantumChannel& ch : {catalog::identity(2), catalog::amplitude_damping(0.5), catalog::three_level_absorber()}) {
    const Superoperator h = heis(ch);
    const AbsorbingCheck c = is_absorbing_recurrent(h, recurrence_decomposition(h));
    CHECK(c.absorbing);
    CHECK(c.deviation < 1e-8);
  }
}

TEST_CASE("amplitude damping absorption") {
  const Superoperator h = heis(catalog::amplitude_damping(0.5));
  const RecurrenceDecomposition rd = recurrence_decomposition(h);
  const AbsorptionOperator a = absorption_linear(h, Subspace::coordinate(2, {0}), rd);
  CHECK(op_norm(a.matrix - CMatrix::Identity(2, 2)) < 1e-12);
  const AlgebraVerdict v = algebra_criterion(h, rd, minimal_enclosures(h, rd, 1), 1);
  CHECK(v.is_algebra);
}

TEST_CASE("fixed points from absorption operators") {
  const Superoperator h = heis(catalog::three_level_absorber());
  const RecurrenceDecomposition rd = recurrence_decomposition(h);
  const Dome dome = minimal_enclosures(h, rd, 7);
  const FixedPointReconstruction r = fixed_points_via_absorption(h, rd, dome, 7);
  CHECK(r.span.dim() == 4);
  CHECK(r.matches(1e-8));

  const Superoperator id = heis(catalog::identity(3));
  const RecurrenceDecomposition rid = recurrence_decomposition(id);
  const FixedPointReconstruction ri = fixed_points_via_absorption(id, rid, minimal_enclosures(id, rid, 3), 3);
  CHECK(ri.span.dim() == 9);
  CHECK(ri.matches(1e-8));
}

TEST_CASE("algebra criterion on the three-level absorber") {
  const Superoperator h = heis(catalog::three_level_absorber());
  const RecurrenceDecomposition rd = recurrence_decomposition(h);
  for (std::uint64_t seed : {1u, 7u, 99u}) {
    const AlgebraVerdict v = algebra_criterion(h, rd, minimal_enclosures(h, rd, seed), seed);
    CHECK_FALSE(v.is_algebra);
    CHECK(std::abs(v.worst.norm - 0.25) < 1e-6);
  }
  // diag(1, 0, 1/2) diag(0, 1, 1/2) = 1/4 |2><2|
  const CMatrix prod = diag3(1.0, 0.0, 0.5) * diag3(0.0, 1.0, 0.5);
  CHECK(op_norm(prod) == doctest::Approx(0.25));
}

TEST_CASE("gambler's ruin") {
  const ClassicalChain chain = catalog::gamblers_ruin(5);
  const RVector a = classical_absorption(chain, {4});
  for (Index x = 0; x < 5; ++x) CHECK(std::abs(a(x) - static_cast<double>(x) / 4.0) < 1e-10);
  const RVector all = classical_absorption(chain, {0, 1, 2, 3, 4});
  CHECK((all - RVector::Ones(5)).norm() == 0.0);
  CHECK_THROWS_AS(classical_absorption(chain, {2}), PreconditionError);
  CHECK_THROWS_AS(classical_absorption(chain, {7}), PreconditionError);

  const QuantumChannel ch = embed_classical_chain(chain);
  const Superoperator h = heis(ch);
  const RecurrenceDecomposition rd = recurrence_decomposition(h);
  const AbsorptionOperator q4 = absorption_linear(h, Subspace::coordinate(5, {4}), rd);
  const AbsorptionOperator q0 = absorption_linear(h, Subspace::coordinate(5, {0}), rd);
  for (Index x = 0; x < 5; ++x) CHECK(std::abs(q4.matrix(x, x).real() - a(x)) < 1e-6);
  CHECK(fixed_point_space(h).dim() == 2);

  const CMatrix prod = q0.matrix * q4.matrix;
  CHECK(std::abs(prod(1, 1).real() - 3.0 / 16.0) < 1e-6);
  CHECK(std::abs(prod(2, 2).real() - 0.25) < 1e-6);
  CHECK(std::abs(prod(3, 3).real() - 3.0 / 16.0) < 1e-6);

  const Dome dome = minimal_enclosures(h, rd, 5);
  CHECK(dome.parts.size() == 2);
  const AlgebraVerdict v = algebra_criterion(h, rd, dome, 5);
  CHECK_FALSE(v.is_algebra);
  CHECK(fixed_points_via_absorption(h, rd, dome, 5).matches(1e-8));
}

TEST_CASE("chain validation and recurrence") {
  RMatrix bad(2, 2);
  bad << 0.5, 0.4, 0, 1;
  CHECK_THROWS_AS(ClassicalChain::validate(bad), PreconditionError);
  RMatrix neg(2, 2);
  neg << 1.5, -0.5, 0, 1;
  CHECK_THROWS_AS(ClassicalChain::validate(neg), PreconditionError);
  CHECK_THROWS_AS(ClassicalChain::validate(RMatrix::Identity(2, 2), {"only one"}), PreconditionError);

  const std::vector<bool> rec = catalog::gamblers_ruin(5).recurrent_states();
  CHECK(rec == std::vector<bool>{true, false, false, false, true});

  // State 2 is transient and cannot reach the closed set {0}.
  RMatrix p(3, 3);
  p << 1, 0, 0, 0, 1, 0, 0, 0.5, 0.5;
  const RVector a = classical_absorption(ClassicalChain::validate(p), {0});
  CHECK(a(2) == 0.0);
  CHECK(a(1) == 0.0);
}

TEST_CASE("embedding examples") {
  const ClassicalChain id = ClassicalChain::validate(RMatrix::Identity(3, 3));
  const QuantumChannel q = embed_classical_chain(id);
  CHECK(q.kraus().size() == 3);
  CHECK(is_enclosure(q, Subspace::coordinate(3, {1})).is_enclosure);
  CHECK(is_enclosure(q, Subspace::coordinate(3, {0, 2})).is_enclosure);

  RMatrix flip(2, 2);
  flip << 0, 1, 1, 0;
  const Superoperator h = heis(embed_classical_chain(ClassicalChain::validate(flip)));
  const RecurrenceDecomposition rd = recurrence_decomposition(h);
  CHECK(op_norm(absorption_iterative(h, Subspace::full(2), rd).matrix - CMatrix::Identity(2, 2)) < 1e-12);

  // Predual diagonal reproduces the chain.
  const ClassicalChain g = catalog::gamblers_ruin(5);
  const QuantumChannel ch = embed_classical_chain(g);
  for (Index x = 0; x < 5; ++x) {
    CMatrix e = CMatrix::Zero(5, 5);
    e(x, x) = 1.0;
    const CMatrix out = t::predual(ch, e);
    for (Index y = 0; y < 5; ++y) CHECK(std::abs(out(y, y).real() - g.transitions()(x, y)) < 1e-15);
    CHECK(op_norm(out - CMatrix(out.diagonal().asDiagonal())) < 1e-15);
  }
}

TEST_CASE("classical bridge on random absorbing chains") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 6 + 2 * trial % 7;
    const Index absorbing = 2 + trial % 2;
    const ClassicalChain chain = random_absorbing_chain(rng, n, absorbing);
    const Superoperator h = heis(embed_classical_chain(chain));
    const RecurrenceDecomposition rd = recurrence_decomposition(h);
    std::vector<Index> closed;
    for (Index x = 0; x < absorbing; ++x)
      if (x == 0 || std::uniform_int_distribution<int>(0, 1)(rng)) closed.push_back(x);
    const RVector a = classical_absorption(chain, closed);
    const AbsorptionOperator q = absorption_linear(h, Subspace::coordinate(n, closed), rd);
    CHECK((q.matrix.diagonal().real() - a).cwiseAbs().maxCoeff() < 1e-6);
    for (Index x = 0; x < n; ++x) {
      CHECK(a(x) >= -1e-8);
      CHECK(a(x) <= 1.0 + 1e-8);
    }
  }
}

TEST_CASE("absorption properties on structured channels") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 8; ++trial) {
    const Index d = 4 + trial % 3;
    const t::StructuredChannel s = t::structured_channel(rng, d, 1 + trial % 2);
    const Superoperator h = heis(s.channel);
    const RecurrenceDecomposition rd = recurrence_decomposition(h);
    const AbsorbingCheck ab = is_absorbing_recurrent(h, rd);
    REQUIRE(ab.absorbing);
    const Dome dome = minimal_enclosures(h, rd, static_cast<std::uint64_t>(trial));

    CMatrix total = CMatrix::Zero(d, d);
    std::vector<CMatrix> parts;
    for (const Subspace& v : dome.parts) {
      const AbsorptionOperator it = absorption_iterative(h, v, rd);
      const AbsorptionOperator lin = absorption_linear(h, v, rd);
      CHECK(op_norm(it.matrix - lin.matrix) < 1e-6);
      CHECK(it.blocks_residual < 1e-8);
      CHECK(lin.blocks_residual < 1e-8);
      CHECK(it.fixed_point_residual < 1e-8);
      CHECK(lin.fixed_point_residual < 1e-8);
      const RVector ev = eig_hermitian(lin.matrix).eigenvalues;
      CHECK(ev(0) >= -1e-8);
      CHECK(ev(d - 1) <= 1.0 + 1e-8);
      total += lin.matrix;
      parts.push_back(lin.matrix);
    }
    CHECK(op_norm(total - CMatrix::Identity(d, d)) < 1e-6);

    // Monotone: A(V) <= A(V + W) for DOME parts V, W.
    if (dome.parts.size() >= 2) {
      const Subspace vw = sum(dome.parts[0], dome.parts[1]);
      const CMatrix big = absorption_linear(h, vw, rd).matrix;
      CHECK(eig_hermitian(big - parts[0]).eigenvalues(0) >= -1e-8);
    }

    const FixedPointSpace f = fixed_point_space(h);
    const AlgebraVerdict verdict = algebra_criterion(h, rd, dome, static_cast<std::uint64_t>(trial));
    CHECK(verdict.is_algebra == algebra_closure_check(f).closed);
    CHECK(fixed_points_via_absorption(h, rd, dome, static_cast<std::uint64_t>(trial)).matches(1e-8));
  }
}
