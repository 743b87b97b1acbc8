#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qmeas/linalg.hpp"
#include "qmeas/states.hpp"

namespace qmeas::entanglement {

using linalg::Complex;
using linalg::ComplexMatrix;

struct PptDescentOptions {
  double tol = 1e-9; // stop when an accepted step improves less than this
  int max_iter = 300;
  int dykstra_cap = 500;
  double dykstra_tol = 1e-10;
  // Optional extra starting point (projected onto the feasible set
  // before use); ignored unless its shape matches the state.
  ComplexMatrix warm_start;
};

struct PptLowerResult {
  // Best objective value reached by the descent (an estimate of the PPT
  // minimum from above).
  double objective = 0.0;
  // Convexity-certificate value: provably below the PPT minimum, hence a
  // direction-sound lower bound on the relative entropy of entanglement.
  double certified_lower = 0.0;
  bool converged = false;
  int iterations = 0;
  // Accepted objective values, non-increasing by construction.
  std::vector<double> objective_trace;
};

// min over PPT states sigma of S(rho||sigma), by projected gradient
// descent with Dykstra alternating projections onto the PSD-trace-one
// and PPT constraint sets.
PptLowerResult er_lower_ppt(const states::DensityMatrix& rho,
                            std::size_t dim_a, std::size_t dim_b,
                            const PptDescentOptions& opt = {});

// Explicit separable mixture sum_t w_t |l_t><l_t| (x) |r_t><r_t|.
struct SeparableEnsemble {
  std::vector<double> weights;
  std::vector<states::PureState> left_states;
  std::vector<states::PureState> right_states;

  std::size_t size() const { return weights.size(); }
  ComplexMatrix mixture(std::size_t dim_a, std::size_t dim_b) const;
  // Validates weights and the mixed state.
  states::DensityMatrix to_density(std::size_t dim_a, std::size_t dim_b) const;
};

// One candidate product state |left> (x) |right| with a relative weight
// (weights are renormalized within the block they are supplied in).
struct ProductAtom {
  std::vector<Complex> left;
  std::vector<Complex> right;
  double weight = 1.0;
};

struct SeesawOptions {
  std::size_t k = 0; // ensemble size cap; 0 means (dim_a*dim_b)^2
  std::size_t restarts = 2;
  double tol = 1e-8; // stop when a round improves less than this
  int max_rounds = 40;
  int weight_iters = 30;
  std::uint64_t seed = 1;
  // Caller-supplied product atoms appended to every restart's initial
  // ensemble (structured warm starts).
  std::vector<ProductAtom> initial_atoms;
};

struct SeesawResult {
  double upper = 0.0;
  bool converged = false;
  int rounds = 0;
  SeparableEnsemble ensemble;
  // Objective after the initial weight fit and after each accepted
  // round, non-increasing by construction.
  std::vector<double> objective_trace;
};

// S(rho||sigma*) over the best explicit separable ensemble found by
// alternating weight optimization and product-atom generation; always a
// valid upper bound on the relative entropy of entanglement.
SeesawResult er_seesaw_upper(const states::DensityMatrix& rho,
                             std::size_t dim_a, std::size_t dim_b,
                             const SeesawOptions& opt = {});

// Pure-state oracle: entropy of the reduced state.
double er_pure(const states::PureState& psi, std::size_t dim_a,
               std::size_t dim_b);

struct ERBudget {
  PptDescentOptions ppt;
  SeesawOptions seesaw;
  bool run_lower = true;
  bool run_upper = true;
};

// Direction rule: use `lower` for every "E_R >= x" claim and `upper`
// for every "E_R <= x" claim; `lower_objective` is the raw descent
// value, informative but not certified.
struct ERBracket {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_converged = false;
  bool upper_converged = false;
  int lower_iterations = 0;
  int upper_iterations = 0;
  double lower_objective = 0.0;
  SeparableEnsemble witness;
};

ERBracket er_bracket(const states::DensityMatrix& rho, std::size_t dim_a,
                     std::size_t dim_b, const ERBudget& budget = {});

} // namespace qmeas::entanglement
