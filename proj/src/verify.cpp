#include "qmeas/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qmeas/errors.hpp"
#include "qmeas/linalg.hpp"
#include "qmeas/rng.hpp"

namespace qmeas::verify {

using linalg::Complex;
using linalg::ComplexMatrix;

namespace {

// Fixed relation order (a)..(m); every sample emits exactly this list.
const std::array<const char*, 13> kRelationNames = {
    "er_joint_geq_gain",
    "gain_final_coherence_mixedness_cap",
    "gain_mixedness_cap",
    "initial_coherence_cap",
    "entropy_exchange_cap",
    "system_coherence_cap",
    "env_entanglement_cap",
    "env_entanglement_coherence_cap",
    "initial_ae_complementarity",
    "final_sa_complementarity",
    "disturbance_tradeoff",
    "gain_equals_coherent_info",
    "classical_correlation_match",
};

std::size_t relation_index(const std::string& name) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
    if (name == kRelationNames[i]) return i;
  }
  throw DomainError("unknown relation name: " + name);
}

void check_options_strings(const std::string& basis, const std::string& fault) {
  if (basis != "eigen" && basis != "standard") {
    throw ConfigError("unknown apparatus coherence basis: " + basis);
  }
  if (!fault.empty() && fault != "im_plus_0.1") {
    throw ConfigError("unknown fault injection: " + fault);
  }
}

} // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
  case Verdict::Holds:
    return "holds";
  case Verdict::Violated:
    return "violated";
  case Verdict::Inconclusive:
    return "inconclusive";
  }
  return "unknown";
}

states::PureState sample_haar_pure(std::size_t d, std::uint64_t seed) {
  if (d == 0) throw DimensionError("state dimension must be positive");
  std::mt19937_64 eng = rng::make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Complex> v(d);
  double norm = 0.0;
  for (Complex& c : v) {
    const double re = gauss(eng);
    const double im = gauss(eng);
    c = Complex(re, im);
    norm += std::norm(c);
  }
  norm = std::sqrt(norm);
  for (Complex& c : v) c /= norm;
  std::size_t top = 0;
  for (std::size_t i = 1; i < d; ++i) {
    if (std::abs(v[i]) > std::abs(v[top])) top = i;
  }
  const Complex phase = std::conj(v[top]) / std::abs(v[top]);
  for (Complex& c : v) c *= phase;
  return states::PureState(std::move(v));
}

states::DensityMatrix sample_density(std::size_t d, std::size_t rank,
                                     std::uint64_t seed) {
  if (rank < 1 || rank > d) {
    throw DimensionError("density factor rank must lie in [1, d]");
  }
  std::mt19937_64 eng = rng::make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(d, rank);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < rank; ++c) {
      const double re = gauss(eng);
      const double im = gauss(eng);
      g(r, c) = Complex(re, im);
    }
  }
  ComplexMatrix rho = g * dagger(g);
  const double tr = linalg::trace(rho).real();
  rho = (1.0 / tr) * rho;
  return states::DensityMatrix(rho);
}

ScenarioSample make_sample(std::size_t system_dim, std::size_t apparatus_dim,
                           std::uint64_t seed) {
  states::PureState amps =
      sample_haar_pure(system_dim, rng::derive_seed(seed, 1));
  states::DensityMatrix apparatus =
      sample_density(apparatus_dim, apparatus_dim, rng::derive_seed(seed, 2));
  return ScenarioSample{
      measurement::build_controlled_shift(system_dim, apparatus_dim,
                                          amps.amplitudes(),
                                          std::move(apparatus)),
      seed, system_dim, apparatus_dim};
}

InequalityRecord exact_relation(std::string name, double lhs, double rhs,
                                double tol) {
  InequalityRecord r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.direction_sound = true;
  r.verdict = r.slack >= -tol ? Verdict::Holds : Verdict::Violated;
  return r;
}

InequalityRecord identity_relation(std::string name, double lhs, double rhs,
                                   double tol) {
  InequalityRecord r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.direction_sound = true;
  r.verdict = std::abs(r.slack) <= tol ? Verdict::Holds : Verdict::Violated;
  return r;
}

InequalityRecord er_lhs_relation(std::string name, double exact_part,
                                 const ErBound& certify,
                                 const std::optional<ErBound>& refute,
                                 double rhs, double tol) {
  if (certify.side != BoundSide::Upper) {
    throw std::logic_error(
        "certifying an upper-bounded combination needs an upper bound");
  }
  if (refute && refute->side != BoundSide::Lower) {
    throw std::logic_error(
        "refuting an upper-bounded combination needs a lower bound");
  }
  InequalityRecord r;
  r.name = std::move(name);
  r.direction_sound = true;
  r.lhs = exact_part + certify.value;
  r.rhs = rhs;
  r.slack = rhs - r.lhs;
  if (r.slack >= -tol) {
    r.verdict = Verdict::Holds;
    return r;
  }
  if (refute) {
    const double refuting_lhs = exact_part + refute->value;
    if (rhs - refuting_lhs < -tol) {
      r.lhs = refuting_lhs;
      r.slack = rhs - refuting_lhs;
      r.verdict = Verdict::Violated;
      return r;
    }
  }
  r.verdict = Verdict::Inconclusive;
  return r;
}

InequalityRecord er_rhs_relation(std::string name, double lhs,
                                 const ErBound& certify,
                                 const std::optional<ErBound>& refute,
                                 double tol) {
  if (certify.side != BoundSide::Lower) {
    throw std::logic_error(
        "certifying a lower-bounded right-hand side needs a lower bound");
  }
  if (refute && refute->side != BoundSide::Upper) {
    throw std::logic_error(
        "refuting a lower-bounded right-hand side needs an upper bound");
  }
  InequalityRecord r;
  r.name = std::move(name);
  r.direction_sound = true;
  r.lhs = lhs;
  r.rhs = certify.value;
  r.slack = r.rhs - lhs;
  if (r.slack >= -tol) {
    r.verdict = Verdict::Holds;
    return r;
  }
  if (refute && refute->value - lhs < -tol) {
    r.rhs = refute->value;
    r.slack = r.rhs - lhs;
    r.verdict = Verdict::Violated;
    return r;
  }
  r.verdict = Verdict::Inconclusive;
  return r;
}

InequalityRecord achievability_relation(std::string name, double found,
                                        double target, double achieve_tol,
                                        double tol) {
  InequalityRecord r;
  r.name = std::move(name);
  r.lhs = found;
  r.rhs = target;
  r.slack = target - found;
  r.direction_sound = true;
  if (r.slack < -tol) {
    r.verdict = Verdict::Violated;
  } else if (r.slack <= achieve_tol) {
    r.verdict = Verdict::Holds;
  } else {
    r.verdict = Verdict::Inconclusive;
  }
  return r;
}

ScenarioEvaluation evaluate_scenario(const measurement::MeasurementModel& model,
                                     const EvaluationOptions& opts) {
  check_options_strings(opts.apparatus_basis, opts.fault);
  const std::size_t m = model.system_dim();
  const std::size_t n = model.apparatus_dim();
  const double log_m = std::log2(static_cast<double>(m));
  const double log_n = std::log2(static_cast<double>(n));

  const measurement::FinalState f = measurement::evolve(model);
  ScenarioEvaluation out;
  out.quantities =
      quantities::compute_report(model, f, opts.corr, opts.check_corr);
  if (opts.apparatus_basis == "standard") {
    const states::Basis basis = states::Basis::standard(n);
    out.quantities.coh_initial_apparatus =
        states::coherence_rel_ent(model.apparatus(), basis);
    out.quantities.coh_final_apparatus =
        states::coherence_rel_ent(f.apparatus_final, basis);
  }
  const quantities::QuantityReport& q = out.quantities;
  out.im_ic_gap = std::abs(q.info_gain - q.coherent_info_state);
  out.entropy_route_gap = std::abs(
      q.entropy_exchange - states::von_neumann_entropy(f.system_final));
  const double s_apparatus_final =
      states::von_neumann_entropy(f.apparatus_final);

  const double im =
      q.info_gain + (opts.fault == "im_plus_0.1" ? 0.1 : 0.0);

  out.er_enabled = opts.check_er;
  double sa_lower = 0.0;
  double sa_upper = std::log2(static_cast<double>(std::min(m, n)));
  double ae_upper = log_n;
  ComplexMatrix rho_ae;
  entanglement::SeparableEnsemble env_witness;
  if (opts.check_er) {
    // Structured warm starts built from the model: for the joint final
    // state, the label-conditional products |i> (x) V_i|a_j>; for the
    // apparatus-environment state, V_i|a_j> (x) |e_j>.
    std::vector<entanglement::ProductAtom> joint_atoms;
    std::vector<entanglement::ProductAtom> env_atoms;
    const ComplexMatrix& basis_cols = model.apparatus_basis().columns();
    for (std::size_t i = 0; i < m; ++i) {
      const double p_i = std::norm(model.amplitudes()[i]);
      if (p_i <= 1e-14) continue;
      std::vector<Complex> a_col(n);
      for (std::size_t j = 0; j < n; ++j) {
        const double w = p_i * model.apparatus_weights()[j];
        if (w <= 1e-14) continue;
        for (std::size_t r = 0; r < n; ++r) a_col[r] = basis_cols(r, j);
        std::vector<Complex> shifted = linalg::matvec(model.records()[i], a_col);
        std::vector<Complex> label(m, Complex(0.0, 0.0));
        label[i] = 1.0;
        std::vector<Complex> env(n, Complex(0.0, 0.0));
        env[j] = 1.0;
        joint_atoms.push_back({label, shifted, w});
        env_atoms.push_back({std::move(shifted), std::move(env), w});
      }
    }
    entanglement::ERBudget joint_budget = opts.er_joint;
    for (const auto& atom : joint_atoms) {
      joint_budget.seesaw.initial_atoms.push_back(atom);
    }
    const entanglement::ERBracket bracket =
        entanglement::er_bracket(f.joint, m, n, joint_budget);
    sa_lower = bracket.lower;
    sa_upper = bracket.upper;
    out.er_joint_lower = sa_lower;
    out.er_joint_upper = sa_upper;

    rho_ae = linalg::partial_trace(f.tripartite.projector(), {m, n, n},
                                   {1, 2});
    entanglement::SeesawOptions env_opts = opts.er_env;
    for (const auto& atom : env_atoms) {
      env_opts.initial_atoms.push_back(atom);
    }
    entanglement::SeesawResult env_result = entanglement::er_seesaw_upper(
        states::DensityMatrix(rho_ae), n, n, env_opts);
    ae_upper = std::min(env_result.upper, log_n);
    env_witness = std::move(env_result.ensemble);
    out.er_env_upper = ae_upper;
  }

  // Lower bound on the apparatus-environment term, computed only when a
  // certification attempt fails badly enough that refutation is worth
  // checking.
  std::optional<ErBound> env_refute;
  const double g_cert_slack = s_apparatus_final - im - ae_upper;
  const double h_cert_slack = log_n - im - q.coh_final_apparatus - ae_upper;
  if (opts.check_er &&
      (g_cert_slack < -opts.tol.er || h_cert_slack < -opts.tol.er)) {
    entanglement::PptDescentOptions po = opts.er_env_lower;
    if (env_witness.size() > 0) po.warm_start = env_witness.mixture(n, n);
    const entanglement::PptLowerResult lo =
        entanglement::er_lower_ppt(states::DensityMatrix(rho_ae), n, n, po);
    env_refute = ErBound{lo.certified_lower, BoundSide::Lower};
  }

  std::vector<InequalityRecord>& rec = out.records;
  rec.reserve(kRelationNames.size());
  rec.push_back(er_rhs_relation(
      kRelationNames[0], im, ErBound{sa_lower, BoundSide::Lower},
      ErBound{sa_upper, BoundSide::Upper}, opts.tol.er));
  rec.push_back(exact_relation(kRelationNames[1],
                               im + q.coh_final_apparatus + q.mixedness,
                               log_n, opts.tol.exact));
  rec.push_back(exact_relation(kRelationNames[2], im + q.mixedness, log_n,
                               opts.tol.exact));
  rec.push_back(exact_relation(kRelationNames[3], im, q.coh_initial_system,
                               opts.tol.exact));
  rec.push_back(exact_relation(kRelationNames[4], im, q.entropy_exchange,
                               opts.tol.exact));
  rec.push_back(exact_relation(kRelationNames[5], im + q.coh_final_system,
                               log_m, opts.tol.exact));
  rec.push_back(er_lhs_relation(kRelationNames[6], im,
                                ErBound{ae_upper, BoundSide::Upper},
                                env_refute, s_apparatus_final, opts.tol.er));
  rec.push_back(er_lhs_relation(kRelationNames[7],
                                im + q.coh_final_apparatus,
                                ErBound{ae_upper, BoundSide::Upper},
                                env_refute, log_n, opts.tol.er));
  rec.push_back(exact_relation(kRelationNames[8],
                               q.coh_initial_apparatus + q.mixedness, log_n,
                               opts.tol.exact));
  rec.push_back(er_lhs_relation(kRelationNames[9], q.coh_final_apparatus,
                                ErBound{sa_upper, BoundSide::Upper},
                                ErBound{sa_lower, BoundSide::Lower}, log_n,
                                opts.tol.er));
  rec.push_back(exact_relation(kRelationNames[10],
                               q.disturbance + im + q.coh_final_apparatus,
                               2.0 * log_n, opts.tol.exact));
  rec.push_back(identity_relation(kRelationNames[11], im,
                                  q.coherent_info_state, opts.tol.exact));
  rec.push_back(achievability_relation(kRelationNames[12], q.classical_corr,
                                       im, opts.tol.achieve, opts.tol.exact));
  return out;
}

SuiteBudgets SuiteBudgets::defaults() {
  SuiteBudgets b;

  b.er_small.ppt.tol = 1e-9;
  b.er_small.ppt.max_iter = 300;
  b.er_small.ppt.dykstra_cap = 500;
  b.er_small.ppt.dykstra_tol = 1e-10;
  b.er_small.seesaw.restarts = 2;
  b.er_small.seesaw.tol = 1e-8;
  b.er_small.seesaw.max_rounds = 40;
  b.er_small.seesaw.weight_iters = 30;

  b.er_medium.ppt.tol = 1e-7;
  b.er_medium.ppt.max_iter = 80;
  b.er_medium.ppt.dykstra_cap = 150;
  b.er_medium.ppt.dykstra_tol = 1e-9;
  b.er_medium.seesaw.restarts = 1;
  b.er_medium.seesaw.tol = 1e-6;
  b.er_medium.seesaw.max_rounds = 12;
  b.er_medium.seesaw.weight_iters = 12;

  b.er_large.ppt.tol = 1e-6;
  b.er_large.ppt.max_iter = 6;
  b.er_large.ppt.dykstra_cap = 60;
  b.er_large.ppt.dykstra_tol = 1e-8;
  b.er_large.seesaw.restarts = 1;
  b.er_large.seesaw.tol = 1e-5;
  b.er_large.seesaw.max_rounds = 3;
  b.er_large.seesaw.weight_iters = 6;

  return b;
}

namespace {

const entanglement::ERBudget& budget_for(const SuiteBudgets& b,
                                         std::size_t total_dim) {
  if (total_dim <= b.er_small_max) return b.er_small;
  if (total_dim <= b.er_medium_max) return b.er_medium;
  return b.er_large;
}

EvaluationOptions options_for(const SuiteConfig& config, std::size_t m,
                              std::size_t n) {
  EvaluationOptions o;
  o.tol = config.tol;
  o.corr = config.budgets.corr;
  o.er_joint = budget_for(config.budgets, m * n);
  const entanglement::ERBudget& env = budget_for(config.budgets, n * n);
  o.er_env = env.seesaw;
  o.er_env_lower = env.ppt;
  o.check_er = config.check_er;
  o.check_corr = config.check_corr;
  o.apparatus_basis = config.apparatus_basis;
  o.fault = config.fault;
  return o;
}

void validate_config(const SuiteConfig& config) {
  if (config.dims.empty()) throw ConfigError("dims list is empty");
  for (const auto& d : config.dims) {
    if (d.first < 2 || d.second < d.first) {
      throw ConfigError("dims must satisfy 2 <= M <= N");
    }
  }
  if (config.samples == 0) throw ConfigError("sample count must be positive");
  check_options_strings(config.apparatus_basis, config.fault);
}

} // namespace

SuiteReport run_suite(const SuiteConfig& config) {
  validate_config(config);
  SuiteReport rep;
  rep.version = config.version;
  rep.config = config;
  const std::size_t per_dims = config.samples;
  const std::size_t total = config.dims.size() * per_dims;
  rep.samples.resize(total);
  std::vector<std::string> errors(total);
  std::vector<char> failed(total, 0);

#pragma omp parallel for schedule(dynamic)
  for (long long j = 0; j < static_cast<long long>(total); ++j) {
    try {
      const std::size_t idx = static_cast<std::size_t>(j);
      const auto& dims = config.dims[idx / per_dims];
      const std::uint64_t seed = rng::derive_seed(config.seed, idx);
      const ScenarioSample sample =
          make_sample(dims.first, dims.second, seed);
      const EvaluationOptions opts =
          options_for(config, dims.first, dims.second);
      ScenarioEvaluation eval = evaluate_scenario(sample.model, opts);
      SampleResult& r = rep.samples[idx];
      r.sample_index = idx;
      r.system_dim = dims.first;
      r.apparatus_dim = dims.second;
      r.seed = seed;
      r.quantities = std::move(eval.quantities);
      r.records = std::move(eval.records);
      r.im_ic_gap = eval.im_ic_gap;
      r.entropy_route_gap = eval.entropy_route_gap;
    } catch (const std::exception& ex) {
      failed[j] = 1;
      errors[j] = ex.what();
    }
  }
  for (std::size_t j = 0; j < total; ++j) {
    if (failed[j]) {
      throw Error("sample " + std::to_string(j) + " failed: " + errors[j]);
    }
  }

  rep.aggregate.resize(kRelationNames.size());
  for (std::size_t k = 0; k < kRelationNames.size(); ++k) {
    rep.aggregate[k].name = kRelationNames[k];
    rep.aggregate[k].min_slack = std::numeric_limits<double>::infinity();
  }
  for (const SampleResult& r : rep.samples) {
    if (r.records.size() != kRelationNames.size()) {
      throw ConsistencyError("sample produced an unexpected record count");
    }
    for (std::size_t k = 0; k < r.records.size(); ++k) {
      const InequalityRecord& rec = r.records[k];
      RelationAggregate& agg = rep.aggregate[k];
      agg.min_slack = std::min(agg.min_slack, rec.slack);
      switch (rec.verdict) {
      case Verdict::Holds:
        ++agg.holds;
        break;
      case Verdict::Violated:
        ++agg.violated;
        ++rep.violated_total;
        rep.violations.push_back(ViolationReplay{
            r.sample_index, r.system_dim, r.apparatus_dim, r.seed, rec.name,
            rec.lhs, rec.rhs, rec.slack});
        break;
      case Verdict::Inconclusive:
        ++agg.inconclusive;
        ++rep.inconclusive_total;
        break;
      }
    }
    rep.max_im_ic_gap = std::max(rep.max_im_ic_gap, r.im_ic_gap);
    rep.max_entropy_route_gap =
        std::max(rep.max_entropy_route_gap, r.entropy_route_gap);
  }
  return rep;
}

namespace {

struct ProbeChecks {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << (detail.tellp() > 0 ? "; " : "") << "failed: " << what;
    }
  }
};

const InequalityRecord& record_at(const ScenarioEvaluation& e,
                                  const std::string& name) {
  return e.records[relation_index(name)];
}

bool no_violations(const ScenarioEvaluation& e) {
  for (const InequalityRecord& r : e.records) {
    if (r.verdict == Verdict::Violated) return false;
  }
  return true;
}

} // namespace

std::vector<ProbeResult> saturation_probes() {
  const SuiteBudgets budgets = SuiteBudgets::defaults();
  EvaluationOptions opts;
  opts.er_joint = budgets.er_small;
  opts.er_env = budgets.er_small.seesaw;
  opts.er_env_lower = budgets.er_small.ppt;
  opts.corr = budgets.corr;

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  std::vector<ProbeResult> out;

  const auto run_probe =
      [&](const std::string& name, std::vector<Complex> amplitudes,
          ComplexMatrix apparatus,
          const std::function<void(const ScenarioEvaluation&, ProbeChecks&)>&
              checks) {
        ProbeResult result;
        result.name = name;
        try {
          const measurement::MeasurementModel model =
              measurement::build_controlled_shift(
                  2, 2, std::move(amplitudes),
                  states::DensityMatrix(std::move(apparatus)));
          const ScenarioEvaluation eval = evaluate_scenario(model, opts);
          ProbeChecks c;
          checks(eval, c);
          c.expect(no_violations(eval), "no relation may be violated");
          result.passed = c.ok;
          result.detail = c.detail.str();
        } catch (const std::exception& ex) {
          result.passed = false;
          result.detail = std::string("exception: ") + ex.what();
        }
        out.push_back(std::move(result));
      };

  {
    ComplexMatrix pure(2, 2);
    pure(0, 0) = 1.0;
    run_probe("pure_apparatus", {inv_sqrt2, inv_sqrt2}, std::move(pure),
              [](const ScenarioEvaluation& e, ProbeChecks& c) {
                c.expect(std::abs(e.quantities.info_gain - 1.0) <= 1e-9,
                         "information gain saturates at one bit");
                c.expect(
                    std::abs(e.quantities.coh_initial_system - 1.0) <= 1e-9,
                    "initial system coherence is one bit");
                c.expect(e.er_joint_lower >= 1.0 - 5e-3 &&
                             e.er_joint_upper <= 1.0 + 5e-3,
                         "joint entanglement bracket pins one bit");
                c.expect(std::abs(record_at(e, "initial_coherence_cap").slack)
                             <= 1e-9,
                         "coherence cap saturates");
                c.expect(
                    std::abs(record_at(e, "gain_equals_coherent_info").slack)
                        <= 1e-9,
                    "gain matches coherent information");
              });
  }
  {
    ComplexMatrix mixed(2, 2);
    mixed(0, 0) = 0.9;
    mixed(1, 1) = 0.1;
    run_probe("incoherent_system", {1.0, 0.0}, std::move(mixed),
              [](const ScenarioEvaluation& e, ProbeChecks& c) {
                c.expect(e.quantities.info_gain <= 1e-9, "gain vanishes");
                c.expect(e.quantities.holevo_chi <= 1e-9,
                         "ensemble distinguishability vanishes");
                c.expect(e.quantities.entropy_exchange <= 1e-9,
                         "entropy exchange vanishes");
                c.expect(e.quantities.disturbance <= 1e-9,
                         "disturbance vanishes");
                c.expect(e.quantities.classical_corr <= 1e-9,
                         "classical correlations vanish");
              });
  }
  {
    ComplexMatrix maximally_mixed(2, 2);
    maximally_mixed(0, 0) = 0.5;
    maximally_mixed(1, 1) = 0.5;
    run_probe("maximally_mixed_apparatus", {inv_sqrt2, inv_sqrt2},
              std::move(maximally_mixed),
              [](const ScenarioEvaluation& e, ProbeChecks& c) {
                c.expect(e.quantities.info_gain <= 1e-9, "gain vanishes");
                c.expect(
                    std::abs(record_at(e, "gain_mixedness_cap").slack) <= 1e-9,
                    "mixedness cap saturates");
              });
  }

  std::string failures;
  for (const ProbeResult& r : out) {
    if (!r.passed) {
      failures += (failures.empty() ? "" : "; ") + r.name + " (" + r.detail +
                  ")";
    }
  }
  if (!failures.empty()) {
    throw ProbeFailure("saturation probes failed: " + failures);
  }
  return out;
}

} // namespace qmeas::verify
