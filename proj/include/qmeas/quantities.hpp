#pragma once

#include <cstdint>
#include <vector>

#include "qmeas/linalg.hpp"
#include "qmeas/measurement.hpp"
#include "qmeas/states.hpp"

namespace qmeas::quantities {

using linalg::Complex;
using linalg::ComplexMatrix;

// Weighted list of states.
struct Ensemble {
  std::vector<double> probs;
  std::vector<states::DensityMatrix> members;

  Ensemble(std::vector<double> p, std::vector<states::DensityMatrix> m);
};

// chi = S(sum p rho) - sum p S(rho).
double holevo(const Ensemble& e);

// S(sum |s_i|^2 rho_ii) - sum |s_i|^2 S(rho_ii), the accessible-information
// ceiling of the record ensemble.
double information_gain(const measurement::FinalState& f,
                        const measurement::MeasurementModel& model);

// S(rho_B) - S(rho_AB) for a bipartite state with the declared factor
// dimensions (B is the second factor).
double coherent_information_state(const states::DensityMatrix& joint,
                                  std::size_t dim_a, std::size_t dim_b);

enum class MeasuredSide { First, Second };

struct OptimizerBudget {
  std::size_t starts = 16;
  int max_passes = 80;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

struct CorrelationResult {
  double value = 0.0;  // best found; a lower bound on the true supremum
  bool converged = false;
};

// J = sup over rank-one projective measurements {W|j><j|W†} on the
// measured side of S(rho_unmeasured) - sum_j p_j S(rho_unmeasured | j).
// Seeded multi-start coordinate direct search over Givens angles and
// phases of W; deterministic for a fixed budget.
CorrelationResult classical_correlations(const states::DensityMatrix& rho,
                                         std::size_t dim_a, std::size_t dim_b,
                                         MeasuredSide side,
                                         const OptimizerBudget& budget = {});

// S(Phi(rho)) - S((Phi (x) id) applied to the purification of rho).
double coherent_information_channel(const states::DensityMatrix& rho,
                                    const measurement::ApparatusChannel& ch);

// S of the apparatus+environment marginal of the tripartite state;
// throws ConsistencyError if it differs from S(system marginal) by more
// than 1e-6.
double entropy_exchange(const measurement::FinalState& f);

// D = S(rho) - I_c(rho, Phi).
double disturbance(const states::DensityMatrix& rho,
                   const measurement::ApparatusChannel& ch);

// Block-diagonal part of the joint state over the system labels:
// sum_i |s_i|^2 |i><i| (x) rho_ii. Classically correlated by
// construction; the natural input for classical_correlations.
states::DensityMatrix classical_joint(const measurement::FinalState& f,
                                      const measurement::MeasurementModel& model);

struct QuantityReport {
  std::size_t system_dim = 0;
  std::size_t apparatus_dim = 0;
  double info_gain = 0.0;
  double holevo_chi = 0.0;
  double classical_corr = 0.0;
  bool classical_corr_converged = false;
  double coherent_info_state = 0.0;
  double coherent_info_channel = 0.0;
  double entropy_exchange = 0.0;
  double disturbance = 0.0;
  double coh_initial_system = 0.0;
  double coh_final_system = 0.0;
  double coh_initial_apparatus = 0.0;
  double coh_final_apparatus = 0.0;
  double mixedness = 0.0;

  // Throws ValidationError when a field escapes its admissible range.
  void validate() const;
};

// Evaluates every scalar quantity for one evolved scenario. The
// classical-correlation search can be skipped (value left at zero,
// flagged unconverged) for runs that do not consume it.
QuantityReport compute_report(const measurement::MeasurementModel& model,
                              const measurement::FinalState& f,
                              const OptimizerBudget& corr_budget = {},
                              bool run_correlations = true);

} // namespace qmeas::quantities
