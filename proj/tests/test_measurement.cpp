#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qmeas/errors.hpp"
#include "qmeas/linalg.hpp"
#include "qmeas/measurement.hpp"
#include "qmeas/states.hpp"
#include "test_support.hpp"

using namespace qmeas;
using linalg::Complex;
using linalg::ComplexMatrix;
using measurement::FinalState;
using measurement::MeasurementModel;
using states::DensityMatrix;

namespace {

const double kInv2 = 1.0 / std::sqrt(2.0);

DensityMatrix diag09() {
  return DensityMatrix(ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.1}}));
}

MeasurementModel plus_shift_model(DensityMatrix apparatus) {
  return measurement::build_controlled_shift(
      2, apparatus.dim(), {kInv2, kInv2}, std::move(apparatus));
}

std::vector<Complex> uniform_amps(std::size_t m) {
  return std::vector<Complex>(m, Complex(1.0 / std::sqrt(double(m)), 0.0));
}

} // namespace

TEST_SUITE("measurement") {

TEST_CASE("smallest shift model uses identity and swap records") {
  MeasurementModel model = plus_shift_model(diag09());
  CHECK(linalg::max_abs_diff(model.records()[0], ComplexMatrix::identity(2)) <=
        1e-12);
  ComplexMatrix swap = ComplexMatrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
  CHECK(linalg::max_abs_diff(model.records()[1], swap) <= 1e-12);
}

TEST_CASE("record validation accepts shifts and reports tiny violation") {
  MeasurementModel model = plus_shift_model(diag09());
  auto rv = measurement::validate_records(model.records(),
                                          model.apparatus_basis());
  CHECK(rv.accepted);
  CHECK(rv.worst_overlap <= 1e-14);
  CHECK(rv.worst_unitarity <= 1e-14);
}

TEST_CASE("identical records are rejected") {
  MeasurementModel model = plus_shift_model(diag09());
  std::vector<ComplexMatrix> bad = {ComplexMatrix::identity(2),
                                    ComplexMatrix::identity(2)};
  auto rv = measurement::validate_records(bad, model.apparatus_basis());
  CHECK_FALSE(rv.accepted);
  CHECK(rv.worst_overlap >= 1.0 - 1e-12);
  CHECK_THROWS_AS(MeasurementModel({kInv2, kInv2}, diag09(), bad),
                  ValidationError);
}

TEST_CASE("conjugating all records by one unitary keeps them valid") {
  DensityMatrix apparatus(testsupport::random_density_mat(4, 301));
  MeasurementModel model = measurement::build_controlled_shift(
      3, 4, uniform_amps(3), apparatus);
  ComplexMatrix w = testsupport::random_unitary(4, 302);
  std::vector<ComplexMatrix> rotated;
  for (const ComplexMatrix& v : model.records()) rotated.push_back(w * v);
  auto rv = measurement::validate_records(rotated, model.apparatus_basis());
  CHECK(rv.accepted);
  CHECK(rv.worst_overlap <= 1e-12);
  MeasurementModel custom(uniform_amps(3), apparatus, rotated);
  CHECK(custom.system_dim() == 3);
}

TEST_CASE("random taller models satisfy all invariants") {
  DensityMatrix apparatus(testsupport::random_density_mat(4, 311));
  MeasurementModel model = measurement::build_controlled_shift(
      3, 4, uniform_amps(3), apparatus);
  auto rv = measurement::validate_records(model.records(),
                                          model.apparatus_basis());
  CHECK(rv.accepted);
  for (const ComplexMatrix& v : model.records()) {
    CHECK(linalg::max_abs_diff(linalg::dagger(v) * v,
                               ComplexMatrix::identity(4)) <= 1e-12);
  }
}

TEST_CASE("joint unitary is block diagonal and unitary") {
  MeasurementModel model = plus_shift_model(diag09());
  ComplexMatrix u = measurement::build_joint_unitary(model);
  REQUIRE(u.rows() == 4);
  ComplexMatrix expected = ComplexMatrix::from_rows({{1.0, 0.0, 0.0, 0.0},
                                                     {0.0, 1.0, 0.0, 0.0},
                                                     {0.0, 0.0, 0.0, 1.0},
                                                     {0.0, 0.0, 1.0, 0.0}});
  CHECK(linalg::max_abs_diff(u, expected) <= 1e-12);

  // |s_1>|a_0> maps to |s_1>|a_1>.
  std::vector<Complex> in(4, 0.0), want(4, 0.0);
  in[2] = 1.0;
  want[3] = 1.0;
  auto out = linalg::matvec(u, in);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(out[i] - want[i]) <= 1e-12);

  DensityMatrix apparatus(testsupport::random_density_mat(4, 321));
  MeasurementModel tall = measurement::build_controlled_shift(
      3, 4, uniform_amps(3), apparatus);
  ComplexMatrix ut = measurement::build_joint_unitary(tall);
  CHECK(linalg::max_abs_diff(linalg::dagger(ut) * ut,
                             ComplexMatrix::identity(12)) <= 1e-12);
}

TEST_CASE("pure apparatus gives the ideal entangled outcome") {
  DensityMatrix pure(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  FinalState fs = measurement::evolve(plus_shift_model(pure));
  std::vector<Complex> bell = {kInv2, 0.0, 0.0, kInv2};
  CHECK(linalg::max_abs_diff(fs.joint.mat(), linalg::outer(bell)) <= 1e-12);
}

TEST_CASE("incoherent system leaves a product state") {
  DensityMatrix apparatus(testsupport::random_density_mat(3, 331));
  MeasurementModel model = measurement::build_controlled_shift(
      2, 3, {1.0, 0.0}, apparatus);
  FinalState fs = measurement::evolve(model);
  ComplexMatrix expected = linalg::tensor(
      ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}), apparatus.mat());
  CHECK(linalg::max_abs_diff(fs.joint.mat(), expected) <= 1e-12);
}

TEST_CASE("mixed apparatus blocks match hand evaluation") {
  FinalState fs = measurement::evolve(plus_shift_model(diag09()));
  CHECK(linalg::max_abs_diff(fs.block(0, 0),
                             ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.1}})) <=
        1e-12);
  CHECK(linalg::max_abs_diff(fs.block(1, 1),
                             ComplexMatrix::from_rows({{0.1, 0.0}, {0.0, 0.9}})) <=
        1e-12);
  ComplexMatrix half = ComplexMatrix::from_rows({{0.5, 0.0}, {0.0, 0.5}});
  CHECK(linalg::max_abs_diff(fs.apparatus_final.mat(), half) <= 1e-12);
  // Off-diagonal block V_0 rho V_1† has zero trace here.
  CHECK(std::abs(linalg::trace(fs.block(0, 1))) <= 1e-12);
}

TEST_CASE("evolve agrees with explicit unitary conjugation") {
  DensityMatrix apparatus(testsupport::random_density_mat(3, 341));
  MeasurementModel model = measurement::build_controlled_shift(
      3, 3, {0.6, Complex(0.0, 0.48), -0.64}, apparatus);
  FinalState fs = measurement::evolve(model);
  ComplexMatrix u = measurement::build_joint_unitary(model);
  ComplexMatrix initial = linalg::tensor(
      model.system_state().projector(), apparatus.mat());
  CHECK(linalg::max_abs_diff(fs.joint.mat(),
                             linalg::conjugate_by(u, initial)) <= 1e-12);
}

TEST_CASE("entropy is conserved from apparatus to joint and blocks") {
  DensityMatrix apparatus(testsupport::random_density_mat(4, 351));
  MeasurementModel model = measurement::build_controlled_shift(
      2, 4, {0.8, -0.6}, apparatus);
  FinalState fs = measurement::evolve(model);
  const double sa = states::von_neumann_entropy(model.apparatus());
  CHECK(std::abs(states::von_neumann_entropy(fs.joint) - sa) <= 1e-9);
  for (std::size_t i = 0; i < 2; ++i) {
    DensityMatrix block_i(fs.block(i, i));
    CHECK(std::abs(states::von_neumann_entropy(block_i) - sa) <= 1e-9);
  }
}

TEST_CASE("tripartite marginals are consistent") {
  DensityMatrix apparatus(testsupport::random_density_mat(3, 361));
  MeasurementModel model = measurement::build_controlled_shift(
      2, 3, {0.6, Complex(0.48, 0.64)}, apparatus);
  FinalState fs = measurement::evolve(model);
  const std::size_t m = 2, n = 3;
  ComplexMatrix tri = fs.tripartite.projector();
  CHECK(linalg::max_abs_diff(
            linalg::partial_trace(tri, {m, n, n}, {0, 1}), fs.joint.mat()) <=
        1e-10);
  CHECK(linalg::max_abs_diff(linalg::partial_trace(tri, {m, n, n}, {1}),
                             fs.apparatus_final.mat()) <= 1e-10);
  CHECK(linalg::max_abs_diff(linalg::partial_trace(tri, {m, n, n}, {0}),
                             fs.system_final.mat()) <= 1e-10);
  // Environment marginal is untouched by the interaction.
  states::PureState psi_ae = states::purify(model.apparatus());
  ComplexMatrix env_before =
      linalg::partial_trace(psi_ae.projector(), {n, n}, {1});
  ComplexMatrix env_after = linalg::partial_trace(tri, {m, n, n}, {2});
  CHECK(linalg::max_abs_diff(env_before, env_after) <= 1e-10);
}

TEST_CASE("valid records force a diagonal post-measurement system") {
  DensityMatrix apparatus(testsupport::random_density_mat(4, 371));
  MeasurementModel model = measurement::build_controlled_shift(
      3, 4, uniform_amps(3), apparatus);
  FinalState fs = measurement::evolve(model);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      CHECK(std::abs(fs.system_final.mat()(i, j)) <= 1e-12);
      CHECK(std::abs(linalg::trace(fs.block(i, j))) <= 1e-12);
    }
}

TEST_CASE("overlapping records leave system coherences in place") {
  // Built by hand: V_0 = V_1 = I violates the record condition, and the
  // resulting system marginal keeps its off-diagonal entries.
  DensityMatrix apparatus = diag09();
  std::vector<Complex> s = {kInv2, kInv2};
  ComplexMatrix sys(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      sys(i, j) = s[i] * std::conj(s[j]) *
                  linalg::trace(apparatus.mat()); // V_i = V_j = I
  CHECK(std::abs(sys(0, 1)) >= 0.49);
}

TEST_CASE("apparatus channel matches the evolved marginal") {
  DensityMatrix apparatus(testsupport::random_density_mat(4, 381));
  MeasurementModel model = measurement::build_controlled_shift(
      3, 4, {0.5, Complex(0.5, 0.5), -0.5}, apparatus);
  FinalState fs = measurement::evolve(model);
  measurement::ApparatusChannel ch = measurement::apparatus_channel(model);
  CHECK(linalg::max_abs_diff(ch.apply(apparatus.mat()),
                             fs.apparatus_final.mat()) <= 1e-10);
}

TEST_CASE("shift channel is unital") {
  DensityMatrix apparatus(testsupport::random_density_mat(3, 391));
  MeasurementModel model = measurement::build_controlled_shift(
      3, 3, uniform_amps(3), apparatus);
  measurement::ApparatusChannel ch = measurement::apparatus_channel(model);
  ComplexMatrix third = (1.0 / 3.0) * ComplexMatrix::identity(3);
  CHECK(linalg::max_abs_diff(ch.apply(third), third) <= 1e-12);
}

TEST_CASE("incoherent system makes the channel a plain conjugation") {
  DensityMatrix apparatus(testsupport::random_density_mat(3, 392));
  MeasurementModel model = measurement::build_controlled_shift(
      2, 3, {1.0, 0.0}, apparatus);
  measurement::ApparatusChannel ch = measurement::apparatus_channel(model);
  ComplexMatrix probe = testsupport::random_density_mat(3, 393);
  ComplexMatrix expected = linalg::conjugate_by(model.records()[0], probe);
  CHECK(linalg::max_abs_diff(ch.apply(probe), expected) <= 1e-12);
}

TEST_CASE("construction rejects bad dimensions") {
  CHECK_THROWS_AS(measurement::build_controlled_shift(3, 2, uniform_amps(3),
                                                      DensityMatrix(
                                                          (1.0 / 2.0) *
                                                          ComplexMatrix::identity(2))),
                  DimensionError);
  CHECK_THROWS_AS(MeasurementModel({0.9, 0.1}, diag09(),
                                   {ComplexMatrix::identity(2),
                                    ComplexMatrix::from_rows({{0.0, 1.0},
                                                              {1.0, 0.0}})}),
                  ValidationError);
}

} // TEST_SUITE
