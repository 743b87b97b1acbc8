#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qmeas/entanglement.hpp"
#include "qmeas/measurement.hpp"
#include "qmeas/quantities.hpp"
#include "qmeas/states.hpp"

namespace qmeas::verify {

inline constexpr const char* kSuiteVersion = "qmeas-suite/1";

// ---------------------------------------------------------------------------
// Samplers

// Haar-random pure state: independent standard complex Gaussian
// amplitudes, normalized. The global phase is fixed by making the
// largest-magnitude amplitude real positive (so d=1 yields exactly 1).
states::PureState sample_haar_pure(std::size_t d, std::uint64_t seed);

// Random density matrix from a d x rank complex Gaussian factor G via
// G G† / Tr(G G†).
states::DensityMatrix sample_density(std::size_t d, std::size_t rank,
                                     std::uint64_t seed);

// One randomized measurement scenario: Haar amplitudes, full-rank
// random apparatus, controlled-shift records. Regenerating from the
// same (dims, seed) reproduces the model bit-exactly.
struct ScenarioSample {
  measurement::MeasurementModel model;
  std::uint64_t seed = 0;
  std::size_t system_dim = 0;
  std::size_t apparatus_dim = 0;
};

ScenarioSample make_sample(std::size_t system_dim, std::size_t apparatus_dim,
                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Relation records

enum class Verdict { Holds, Violated, Inconclusive };

const char* verdict_name(Verdict v);

enum class BoundSide { Lower, Upper };

// A one-sided numeric bound on an optimizer-estimated quantity.
struct ErBound {
  double value = 0.0;
  BoundSide side = BoundSide::Lower;
};

struct InequalityRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0; // rhs - lhs
  bool direction_sound = true;
  Verdict verdict = Verdict::Inconclusive;
};

// Builders. The bound-direction rules are enforced at construction
// (std::logic_error), so a record can never certify an inequality with
// a wrong-direction bound.

// lhs <= rhs with both sides exact.
InequalityRecord exact_relation(std::string name, double lhs, double rhs,
                                double tol);

// |lhs - rhs| <= tol.
InequalityRecord identity_relation(std::string name, double lhs, double rhs,
                                   double tol);

// exact_part + ER <= rhs. Certification requires an upper bound on the
// ER term; refutation requires a lower bound.
InequalityRecord er_lhs_relation(std::string name, double exact_part,
                                 const ErBound& certify,
                                 const std::optional<ErBound>& refute,
                                 double rhs, double tol);

// lhs <= ER. Certification requires a lower bound on the ER term;
// refutation requires an upper bound.
InequalityRecord er_rhs_relation(std::string name, double lhs,
                                 const ErBound& certify,
                                 const std::optional<ErBound>& refute,
                                 double tol);

// found <= target + tol and found >= target - achieve_tol, where
// `found` is a best-effort lower estimate of a supremum that should
// attain `target`. Falling short is inconclusive, overshooting past
// tol is a violation.
InequalityRecord achievability_relation(std::string name, double found,
                                        double target, double achieve_tol,
                                        double tol);

// ---------------------------------------------------------------------------
// Scenario evaluation

struct RelationTolerances {
  double exact = 1e-9;  // relations with exactly computed sides
  double er = 5e-3;     // relations involving optimizer brackets
  double achieve = 1e-6; // shortfall allowance for the correlation search
};

struct EvaluationOptions {
  RelationTolerances tol;
  quantities::OptimizerBudget corr;
  // Budget for the joint final-state bracket (certified lower + witness
  // upper).
  entanglement::ERBudget er_joint;
  // Budget for the apparatus-environment upper bound; the matching
  // descent options are only exercised for refutation attempts.
  entanglement::SeesawOptions er_env;
  entanglement::PptDescentOptions er_env_lower;
  bool check_er = true;
  bool check_corr = true;
  // Basis for apparatus coherences: "eigen" (initial-state eigenbasis)
  // or "standard" (computational).
  std::string apparatus_basis = "eigen";
  // Fault injection for the detector self-test: "" or "im_plus_0.1".
  std::string fault;
};

struct ScenarioEvaluation {
  quantities::QuantityReport quantities;
  std::vector<InequalityRecord> records;
  double im_ic_gap = 0.0;
  double entropy_route_gap = 0.0;
  double er_joint_lower = 0.0;
  double er_joint_upper = 0.0;
  double er_env_upper = 0.0;
  bool er_enabled = false;
};

// Computes all quantities and the thirteen relation records for one
// scenario.
ScenarioEvaluation evaluate_scenario(const measurement::MeasurementModel& model,
                                     const EvaluationOptions& opts);

// ---------------------------------------------------------------------------
// Suite

struct SuiteBudgets {
  quantities::OptimizerBudget corr;
  // Entanglement budgets by total state dimension.
  entanglement::ERBudget er_small;
  entanglement::ERBudget er_medium;
  entanglement::ERBudget er_large;
  std::size_t er_small_max = 4;
  std::size_t er_medium_max = 16;

  static SuiteBudgets defaults();
};

struct SuiteConfig {
  std::vector<std::pair<std::size_t, std::size_t>> dims = {
      {2, 2}, {2, 4}, {3, 3}, {3, 9}};
  std::size_t samples = 100; // per dims pair
  std::uint64_t seed = 7;
  RelationTolerances tol;
  SuiteBudgets budgets = SuiteBudgets::defaults();
  bool check_er = true;
  bool check_corr = true;
  std::string apparatus_basis = "eigen";
  std::string fault; // "" or "im_plus_0.1"
  std::string version = kSuiteVersion;
};

struct SampleResult {
  std::size_t sample_index = 0;
  std::size_t system_dim = 0;
  std::size_t apparatus_dim = 0;
  std::uint64_t seed = 0;
  quantities::QuantityReport quantities;
  std::vector<InequalityRecord> records;
  double im_ic_gap = 0.0;
  double entropy_route_gap = 0.0;
};

struct RelationAggregate {
  std::string name;
  double min_slack = 0.0;
  std::size_t holds = 0;
  std::size_t violated = 0;
  std::size_t inconclusive = 0;
};

// Everything needed to replay a violated record offline.
struct ViolationReplay {
  std::size_t sample_index = 0;
  std::size_t system_dim = 0;
  std::size_t apparatus_dim = 0;
  std::uint64_t seed = 0;
  std::string relation;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
};

struct SuiteReport {
  std::string version;
  SuiteConfig config;
  std::vector<SampleResult> samples;
  std::vector<RelationAggregate> aggregate;
  std::vector<ViolationReplay> violations;
  double max_im_ic_gap = 0.0;
  double max_entropy_route_gap = 0.0;
  std::size_t violated_total = 0;
  std::size_t inconclusive_total = 0;

  bool passed() const { return violated_total == 0; }
};

// Runs the full randomized suite. Samples are independent work units;
// the report is byte-identical for any thread count.
SuiteReport run_suite(const SuiteConfig& config);

// ---------------------------------------------------------------------------
// Saturation probes

struct ProbeResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runs the three fixed limiting-case probes; throws ProbeFailure naming
// every failing probe after all have run.
std::vector<ProbeResult> saturation_probes();

} // namespace qmeas::verify
