#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qmeas/errors.hpp"
#include "qmeas/linalg.hpp"
#include "qmeas/measurement.hpp"
#include "qmeas/quantities.hpp"
#include "qmeas/states.hpp"
#include "test_support.hpp"

using namespace qmeas;
using linalg::Complex;
using linalg::ComplexMatrix;
using measurement::FinalState;
using measurement::MeasurementModel;
using quantities::MeasuredSide;
using quantities::OptimizerBudget;
using states::DensityMatrix;

namespace {

const double kInv2 = 1.0 / std::sqrt(2.0);
const double kGain09 = 0.5310044064107188; // 1 - H(0.9)
const double kH09 = 0.4689955935892812;

DensityMatrix diag09() {
  return DensityMatrix(ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.1}}));
}

MeasurementModel scenario09() {
  return measurement::build_controlled_shift(2, 2, {kInv2, kInv2}, diag09());
}

std::vector<Complex> random_amplitudes(std::size_t m, std::uint64_t seed) {
  ComplexMatrix g = testsupport::random_gaussian(m, 1, seed);
  double norm2 = 0.0;
  for (std::size_t i = 0; i < m; ++i) norm2 += std::norm(g(i, 0));
  std::vector<Complex> s(m);
  for (std::size_t i = 0; i < m; ++i) s[i] = g(i, 0) / std::sqrt(norm2);
  return s;
}

MeasurementModel random_model(std::size_t m, std::size_t n,
                              std::uint64_t seed) {
  return measurement::build_controlled_shift(
      m, n, random_amplitudes(m, seed),
      DensityMatrix(testsupport::random_density_mat(n, seed + 7000)));
}

} // namespace

TEST_SUITE("quantities") {

TEST_CASE("holevo reference values") {
  DensityMatrix zero(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  DensityMatrix one(ComplexMatrix::from_rows({{0.0, 0.0}, {0.0, 1.0}}));
  quantities::Ensemble flagged({0.5, 0.5}, {zero, one});
  CHECK(std::abs(quantities::holevo(flagged) - 1.0) <= 1e-12);

  quantities::Ensemble single({1.0}, {diag09()});
  CHECK(quantities::holevo(single) <= 1e-12);

  DensityMatrix a(ComplexMatrix::from_rows({{0.9, 0.0}, {0.0, 0.1}}));
  DensityMatrix b(ComplexMatrix::from_rows({{0.1, 0.0}, {0.0, 0.9}}));
  quantities::Ensemble pair({0.5, 0.5}, {a, b});
  CHECK(std::abs(quantities::holevo(pair) - 0.531004) <= 1e-6);
  CHECK(std::abs(quantities::holevo(pair) - kGain09) <= 1e-12);
}

TEST_CASE("ensemble validation") {
  DensityMatrix rho = diag09();
  CHECK_THROWS_AS(quantities::Ensemble({0.5, 0.4}, {rho, rho}),
                  ValidationError);
  CHECK_THROWS_AS(quantities::Ensemble({0.5, 0.5}, {rho}), DimensionError);
}

TEST_CASE("information gain limiting cases") {
  DensityMatrix pure(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  MeasurementModel ideal =
      measurement::build_controlled_shift(2, 2, {kInv2, kInv2}, pure);
  FinalState fs = measurement::evolve(ideal);
  CHECK(std::abs(quantities::information_gain(fs, ideal) - 1.0) <= 1e-9);

  DensityMatrix mixed(ComplexMatrix::from_rows({{0.5, 0.0}, {0.0, 0.5}}));
  MeasurementModel blind =
      measurement::build_controlled_shift(2, 2, {kInv2, kInv2}, mixed);
  FinalState fs2 = measurement::evolve(blind);
  CHECK(quantities::information_gain(fs2, blind) <= 1e-9);
}

TEST_CASE("information gain of the skewed-apparatus scenario") {
  MeasurementModel model = scenario09();
  FinalState fs = measurement::evolve(model);
  const double gain = quantities::information_gain(fs, model);
  CHECK(std::abs(gain - 0.531004) <= 1e-6);
  CHECK(std::abs(gain - kGain09) <= 1e-9);
}

TEST_CASE("information gain equals the marginal entropy increase") {
  for (std::uint64_t seed : {401u, 402u, 403u}) {
    MeasurementModel model = random_model(2, 3, seed);
    FinalState fs = measurement::evolve(model);
    const double gain = quantities::information_gain(fs, model);
    const double route2 = states::von_neumann_entropy(fs.apparatus_final) -
                          states::von_neumann_entropy(model.apparatus());
    CHECK(std::abs(gain - route2) <= 1e-9);
  }
}

TEST_CASE("holevo of the record ensemble equals information gain") {
  MeasurementModel model = random_model(3, 4, 411);
  FinalState fs = measurement::evolve(model);
  std::vector<double> probs;
  std::vector<DensityMatrix> members;
  for (std::size_t i = 0; i < 3; ++i) {
    probs.push_back(std::norm(model.amplitudes()[i]));
    members.emplace_back(fs.block(i, i));
  }
  quantities::Ensemble e(probs, members);
  CHECK(std::abs(quantities::holevo(e) -
                 quantities::information_gain(fs, model)) <= 1e-9);
}

TEST_CASE("coherent information of reference bipartite states") {
  std::vector<Complex> bell = {kInv2, 0.0, 0.0, kInv2};
  DensityMatrix bell_dm(linalg::outer(bell));
  CHECK(std::abs(quantities::coherent_information_state(bell_dm, 2, 2) - 1.0) <=
        1e-9);

  DensityMatrix mixed(testsupport::random_density_mat(3, 421));
  ComplexMatrix prod = linalg::tensor(
      ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}), mixed.mat());
  CHECK(std::abs(quantities::coherent_information_state(DensityMatrix(prod), 2,
                                                        3)) <= 1e-9);
}

TEST_CASE("gain equals coherent information on evolved scenarios") {
  for (std::uint64_t seed : {431u, 432u}) {
    MeasurementModel model = random_model(3, 3, seed);
    FinalState fs = measurement::evolve(model);
    CHECK(std::abs(quantities::information_gain(fs, model) -
                   quantities::coherent_information_state(fs.joint, 3, 3)) <=
          1e-9);
  }
}

TEST_CASE("classical correlations of a flagged mixture") {
  // sum p_i |i><i| (x) |i><i| -> H(p) by measuring the flag basis.
  ComplexMatrix rho(4, 4);
  rho(0 * 2 + 0, 0 * 2 + 0) = 0.3;
  rho(1 * 2 + 1, 1 * 2 + 1) = 0.7;
  auto res = quantities::classical_correlations(DensityMatrix(rho), 2, 2,
                                                MeasuredSide::First);
  const double h03 = -(0.3 * std::log2(0.3) + 0.7 * std::log2(0.7));
  CHECK(std::abs(res.value - h03) <= 1e-7);
}

TEST_CASE("classical correlations vanish on product states") {
  ComplexMatrix prod = linalg::tensor(
      testsupport::random_density_mat(2, 441),
      testsupport::random_density_mat(3, 442));
  auto res = quantities::classical_correlations(DensityMatrix(prod), 2, 3,
                                                MeasuredSide::First);
  CHECK(res.value <= 1e-6);
  auto res2 = quantities::classical_correlations(DensityMatrix(prod), 2, 3,
                                                 MeasuredSide::Second);
  CHECK(res2.value <= 1e-6);
}

TEST_CASE("classical correlations recover the gain on the dephased joint") {
  MeasurementModel model = scenario09();
  FinalState fs = measurement::evolve(model);
  DensityMatrix qc = quantities::classical_joint(fs, model);
  auto res = quantities::classical_correlations(qc, 2, 2, MeasuredSide::First);
  CHECK(std::abs(res.value - 0.531004) <= 1e-6);
  CHECK(res.value <= kGain09 + 1e-9);
}

TEST_CASE("classical correlations grow monotonically with budget") {
  MeasurementModel model = random_model(2, 3, 451);
  FinalState fs = measurement::evolve(model);
  DensityMatrix qc = quantities::classical_joint(fs, model);
  OptimizerBudget small{2, 10, 1e-9, 99};
  OptimizerBudget large{8, 80, 1e-9, 99};
  auto lo = quantities::classical_correlations(qc, 2, 3, MeasuredSide::First,
                                               small);
  auto hi = quantities::classical_correlations(qc, 2, 3, MeasuredSide::First,
                                               large);
  CHECK(lo.value <= hi.value + 1e-12);
}

TEST_CASE("channel coherent information limiting cases") {
  DensityMatrix rho = diag09();
  measurement::ApparatusChannel identity{{ComplexMatrix::identity(2)}};
  CHECK(std::abs(quantities::coherent_information_channel(rho, identity) -
                 kH09) <= 1e-9);

  DensityMatrix pure(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  MeasurementModel model = scenario09();
  measurement::ApparatusChannel noisy = measurement::apparatus_channel(model);
  CHECK(std::abs(quantities::coherent_information_channel(pure, noisy)) <=
        1e-9);
}

TEST_CASE("channel coherent information matches the tripartite route") {
  for (std::uint64_t seed : {461u, 462u}) {
    MeasurementModel model = random_model(2, 3, seed);
    FinalState fs = measurement::evolve(model);
    measurement::ApparatusChannel ch = measurement::apparatus_channel(model);
    const double via_channel =
        quantities::coherent_information_channel(model.apparatus(), ch);
    ComplexMatrix rho_ae = linalg::partial_trace(
        fs.tripartite.projector(), {2, 3, 3}, {1, 2});
    const double via_tripartite =
        states::von_neumann_entropy(fs.apparatus_final) -
        states::von_neumann_entropy(DensityMatrix(rho_ae));
    CHECK(std::abs(via_channel - via_tripartite) <= 1e-9);
    CHECK(via_channel <= states::von_neumann_entropy(model.apparatus()) + 1e-9);
  }
}

TEST_CASE("entropy exchange reference values") {
  DensityMatrix pure(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  MeasurementModel ideal =
      measurement::build_controlled_shift(2, 2, {kInv2, kInv2}, pure);
  CHECK(std::abs(quantities::entropy_exchange(measurement::evolve(ideal)) -
                 1.0) <= 1e-9);

  MeasurementModel incoherent = measurement::build_controlled_shift(
      2, 3, {1.0, 0.0}, DensityMatrix(testsupport::random_density_mat(3, 471)));
  CHECK(quantities::entropy_exchange(measurement::evolve(incoherent)) <= 1e-9);

  CHECK(std::abs(quantities::entropy_exchange(measurement::evolve(scenario09())) -
                 1.0) <= 1e-9);
}

TEST_CASE("disturbance limiting cases and the skewed scenario") {
  DensityMatrix rho = diag09();
  measurement::ApparatusChannel identity{{ComplexMatrix::identity(2)}};
  CHECK(std::abs(quantities::disturbance(rho, identity)) <= 1e-9);

  DensityMatrix pure(ComplexMatrix::from_rows({{1.0, 0.0}, {0.0, 0.0}}));
  MeasurementModel model = scenario09();
  measurement::ApparatusChannel noisy = measurement::apparatus_channel(model);
  CHECK(std::abs(quantities::disturbance(pure, noisy)) <= 1e-9);

  const double d = quantities::disturbance(rho, noisy);
  CHECK(std::abs(d - 0.468996) <= 1e-6);
  CHECK(std::abs(d - kH09) <= 1e-9);
}

TEST_CASE("disturbance stays within its admissible band") {
  for (std::uint64_t seed : {481u, 482u, 483u}) {
    MeasurementModel model = random_model(2, 4, seed);
    measurement::ApparatusChannel ch = measurement::apparatus_channel(model);
    const double d = quantities::disturbance(model.apparatus(), ch);
    CHECK(d >= -1e-9);
    CHECK(d <= 2.0 * std::log2(4.0) + 1e-9);
  }
}

TEST_CASE("full report is consistent and validates") {
  MeasurementModel model = random_model(2, 3, 491);
  FinalState fs = measurement::evolve(model);
  OptimizerBudget budget{8, 60, 1e-9, 17};
  quantities::QuantityReport rep = quantities::compute_report(model, fs, budget);
  CHECK(std::abs(rep.info_gain - rep.holevo_chi) <= 1e-9);
  CHECK(std::abs(rep.info_gain - rep.coherent_info_state) <= 1e-9);
  CHECK(rep.classical_corr <= rep.info_gain + 1e-9);
  CHECK(rep.classical_corr >= rep.info_gain - 1e-6);
  CHECK(rep.coh_initial_apparatus <= 1e-9);
  CHECK(std::abs(rep.disturbance -
                 (rep.mixedness - rep.coherent_info_channel)) <= 1e-12);
  CHECK(rep.info_gain <= rep.entropy_exchange + 1e-9);
  CHECK(rep.info_gain <= rep.coh_initial_system + 1e-9);
}

} // TEST_SUITE
