#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qmeas/errors.hpp"
#include "qmeas/linalg.hpp"
#include "qmeas/states.hpp"
#include "test_support.hpp"

using namespace qmeas;
using linalg::Complex;
using linalg::ComplexMatrix;
using states::Basis;
using states::DensityMatrix;
using states::PureState;

namespace {

DensityMatrix random_density(std::size_t n, std::uint64_t seed) {
  return DensityMatrix(testsupport::random_density_mat(n, seed));
}

const double kH09 = 0.4689955935892812; // binary entropy of 0.9
const double kH08 = 0.7219280948873623; // binary entropy of 0.8

} // namespace

TEST_SUITE("states") {

TEST_CASE("entropy of reference states") {
  DensityMatrix mixed(ComplexMatrix::from_rows({{0.5, 0.0}, {0.0, 0.5}}));
  CHECK(std::abs(states::von_neumann_entropy(mixed) - 1.0) <= 1e-12);

  PureState plus({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  CHECK(states::von_neumann_entropy(plus.density()) <= 1e-12);

  DensityMatrix skew(ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.1}}));
  CHECK(std::abs(states::von_neumann_entropy(skew) - 0.468996) <= 1e-6);
  CHECK(std::abs(states::von_neumann_entropy(skew) - kH09) <= 1e-12);
}

TEST_CASE("entropy bounds and unitary invariance") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    DensityMatrix rho = random_density(5, seed);
    const double s = states::von_neumann_entropy(rho);
    CHECK(s >= 0.0);
    CHECK(s <= std::log2(5.0) + 1e-9);
    ComplexMatrix u = testsupport::random_unitary(5, seed + 100);
    DensityMatrix rotated(linalg::conjugate_by(u, rho.mat()));
    CHECK(std::abs(states::von_neumann_entropy(rotated) - s) <= 1e-10);
  }
}

TEST_CASE("relative entropy of a state with itself is zero") {
  DensityMatrix rho = random_density(4, 17);
  auto v = states::relative_entropy(rho, rho);
  REQUIRE(v.has_value());
  CHECK(*v <= 1e-10);
}

TEST_CASE("disjoint support returns the infinite sentinel") {
  DensityMatrix zero(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  DensityMatrix one(ComplexMatrix::from_rows({{0.0, 0.0}, {0.0, 1.0}}));
  CHECK_FALSE(states::relative_entropy(zero, one).has_value());
  CHECK_FALSE(states::relative_entropy(one, zero).has_value());
  // Full-support second argument stays finite.
  auto v = states::relative_entropy(zero, DensityMatrix(ComplexMatrix::from_rows(
                                              {{0.9, 0.0}, {0.0, 0.1}})));
  REQUIRE(v.has_value());
  CHECK(std::abs(*v - (-std::log2(0.9))) <= 1e-12);
}

TEST_CASE("relative entropy scalar oracle") {
  DensityMatrix uniform(ComplexMatrix::from_rows({{0.5, 0.0}, {0.0, 0.5}}));
  DensityMatrix skew(ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.1}}));
  auto v = states::relative_entropy(uniform, skew);
  REQUIRE(v.has_value());
  CHECK(std::abs(*v - 0.736966) <= 1e-6);
  CHECK(std::abs(*v - 0.7369655941662062) <= 1e-12);
}

TEST_CASE("relative entropy is positive for distinct states") {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    DensityMatrix a = random_density(3, seed);
    DensityMatrix b = random_density(3, seed + 50);
    auto v = states::relative_entropy(a, b);
    REQUIRE(v.has_value());
    if (linalg::max_abs_diff(a.mat(), b.mat()) > 1e-8) CHECK(*v > 0.0);
  }
}

TEST_CASE("dephase keeps diagonals and kills coherences") {
  Basis comp = Basis::standard(2);
  PureState plus({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  DensityMatrix dephased = states::dephase(plus.density(), comp);
  CHECK(std::abs(dephased.mat()(0, 0).real() - 0.5) <= 1e-12);
  CHECK(std::abs(dephased.mat()(1, 1).real() - 0.5) <= 1e-12);
  CHECK(std::abs(dephased.mat()(0, 1)) <= 1e-12);

  DensityMatrix diag(ComplexMatrix::from_rows({{0.3, 0.0}, {0.0, 0.7}}));
  CHECK(linalg::max_abs_diff(states::dephase(diag, comp).mat(), diag.mat()) <=
        1e-12);
}

TEST_CASE("dephase is idempotent and trace preserving") {
  for (std::uint64_t seed : {11u, 12u}) {
    DensityMatrix rho = random_density(4, seed);
    Basis b(testsupport::random_unitary(4, seed + 30), "rot");
    DensityMatrix once = states::dephase(rho, b);
    DensityMatrix twice = states::dephase(once, b);
    CHECK(linalg::max_abs_diff(once.mat(), twice.mat()) <= 1e-11);
    CHECK(std::abs(linalg::trace(once.mat()).real() - 1.0) <= 1e-12);
  }
}

TEST_CASE("coherence reference values") {
  Basis comp = Basis::standard(2);
  PureState plus({1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  CHECK(std::abs(states::coherence_rel_ent(plus.density(), comp) - 1.0) <=
        1e-12);

  DensityMatrix diag(ComplexMatrix::from_rows({{0.3, 0.0}, {0.0, 0.7}}));
  CHECK(states::coherence_rel_ent(diag, comp) <= 1e-12);

  DensityMatrix tilted(ComplexMatrix::from_rows({{0.5, 0.3}, {0.3, 0.5}}));
  const double c = states::coherence_rel_ent(tilted, comp);
  CHECK(std::abs(c - 0.278072) <= 1e-6);
  CHECK(std::abs(c - (1.0 - kH08)) <= 1e-12);
}

TEST_CASE("coherence agrees with the relative-entropy route") {
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    DensityMatrix rho = random_density(3, seed);
    Basis b(testsupport::random_unitary(3, seed + 70), "rot");
    const double via_entropies = states::coherence_rel_ent(rho, b);
    auto via_relent = states::relative_entropy(rho, states::dephase(rho, b));
    REQUIRE(via_relent.has_value());
    CHECK(std::abs(via_entropies - *via_relent) <= 1e-9);
    const double via_diff = states::von_neumann_entropy(states::dephase(rho, b)) -
                            states::von_neumann_entropy(rho);
    CHECK(std::abs(via_entropies - via_diff) <= 1e-10);
  }
}

TEST_CASE("coherence vanishes in the eigenbasis") {
  DensityMatrix rho = random_density(4, 31);
  Basis eig(linalg::hermitian_eig(rho.mat()).eigenvectors, "eigen");
  CHECK(states::coherence_rel_ent(rho, eig) <= 1e-9);
}

TEST_CASE("purification of diag(0.9, 0.1) pairs weights descending") {
  DensityMatrix skew(ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.1}}));
  PureState psi = states::purify(skew);
  REQUIRE(psi.dim() == 4);
  // sqrt(0.9)|0>|e0> + sqrt(0.1)|1>|e1>, up to a global phase.
  CHECK(std::abs(std::abs(psi.amplitudes()[0]) - std::sqrt(0.9)) <= 1e-12);
  CHECK(std::abs(psi.amplitudes()[1]) <= 1e-12);
  CHECK(std::abs(psi.amplitudes()[2]) <= 1e-12);
  CHECK(std::abs(std::abs(psi.amplitudes()[3]) - std::sqrt(0.1)) <= 1e-12);
  ComplexMatrix reduced =
      linalg::partial_trace(psi.projector(), {2, 2}, {0});
  CHECK(linalg::max_abs_diff(reduced, skew.mat()) <= 1e-12);
}

TEST_CASE("purification round trip over random states") {
  for (std::size_t n : {2, 3, 5}) {
    DensityMatrix rho = random_density(n, 40 + n);
    PureState psi = states::purify(rho);
    ComplexMatrix reduced =
        linalg::partial_trace(psi.projector(), {n, n}, {0});
    CHECK(linalg::max_abs_diff(reduced, rho.mat()) <= 1e-10);
  }
}

TEST_CASE("purification of a pure state is a product") {
  PureState a({0.6, Complex(0.0, 0.8)});
  PureState psi = states::purify(a.density());
  ComplexMatrix env = linalg::partial_trace(psi.projector(), {2, 2}, {1});
  // Reduced environment state is pure, so its entropy vanishes.
  CHECK(states::von_neumann_entropy(DensityMatrix(env)) <= 1e-9);
}

TEST_CASE("maximally mixed qubit purifies to a maximally entangled pair") {
  DensityMatrix mixed(ComplexMatrix::from_rows({{0.5, 0.0}, {0.0, 0.5}}));
  PureState psi = states::purify(mixed);
  ComplexMatrix reduced = linalg::partial_trace(psi.projector(), {2, 2}, {1});
  CHECK(std::abs(reduced(0, 0).real() - 0.5) <= 1e-12);
  CHECK(std::abs(reduced(1, 1).real() - 0.5) <= 1e-12);
  CHECK(std::abs(reduced(0, 1)) <= 1e-12);
}

TEST_CASE("validation rejects malformed inputs") {
  CHECK_THROWS_AS(
      DensityMatrix(ComplexMatrix::from_rows({{0.5, 0.4}, {0.1, 0.5}})),
      ValidationError);
  CHECK_THROWS_AS(
      DensityMatrix(ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.2}})),
      ValidationError);
  CHECK_THROWS_AS(
      DensityMatrix(ComplexMatrix::from_rows({{1.5, 0.0}, {0.0, -0.5}})),
      ValidationError);
  CHECK_THROWS_AS(PureState({0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(Basis(ComplexMatrix::from_rows({{1.0, 1.0}, {0.0, 1.0}})),
                  ValidationError);
  DensityMatrix rho = random_density(3, 90);
  DensityMatrix other = random_density(4, 91);
  CHECK_THROWS_AS(states::relative_entropy(rho, other), DimensionError);
  CHECK_THROWS_AS(states::dephase(rho, Basis::standard(4)), DimensionError);
}

} // TEST_SUITE
