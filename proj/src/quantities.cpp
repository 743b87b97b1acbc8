#include "qmeas/quantities.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "qmeas/errors.hpp"
#include "qmeas/rng.hpp"

namespace qmeas::quantities {

namespace {

std::vector<double> clipped_eigenvalues(const ComplexMatrix& h,
                                        const char* who) {
  std::vector<double> vals = linalg::hermitian_eigenvalues(h);
  for (double& x : vals) {
    if (x < 0.0) {
      if (x < linalg::kEigClipFloor) {
        std::ostringstream os;
        os << who << ": negative eigenvalue " << x;
        throw DomainError(os.str());
      }
      x = 0.0;
    }
  }
  return vals;
}

double entropy_of(const ComplexMatrix& h, const char* who) {
  return states::shannon_entropy(clipped_eigenvalues(h, who));
}

double clamp_tiny_negative(double x, const char* who) {
  if (x < 0.0) {
    if (x < -1e-8) {
      std::ostringstream os;
      os << who << ": significantly negative value " << x;
      throw ConsistencyError(os.str());
    }
    return 0.0;
  }
  return x;
}

} // namespace

Ensemble::Ensemble(std::vector<double> p, std::vector<states::DensityMatrix> m)
    : probs(std::move(p)), members(std::move(m)) {
  if (probs.empty() || probs.size() != members.size()) {
    throw DimensionError("Ensemble: need matching weight and member counts");
  }
  double sum = 0.0;
  for (double w : probs) {
    if (w < -1e-12) throw ValidationError("Ensemble: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw ValidationError("Ensemble: weights do not sum to 1");
  }
  for (const states::DensityMatrix& rho : members) {
    if (rho.dim() != members.front().dim()) {
      throw DimensionError("Ensemble: member dimension mismatch");
    }
  }
}

double holevo(const Ensemble& e) {
  const std::size_t n = e.members.front().dim();
  ComplexMatrix avg(n, n);
  for (std::size_t i = 0; i < e.probs.size(); ++i) {
    const double w = e.probs[i];
    if (w <= 0.0) continue;
    const ComplexMatrix& m = e.members[i].mat();
    for (std::size_t k = 0; k < avg.size(); ++k)
      avg.data()[k] += w * m.data()[k];
  }
  double chi = entropy_of(avg, "holevo");
  for (std::size_t i = 0; i < e.probs.size(); ++i) {
    if (e.probs[i] <= 0.0) continue;
    chi -= e.probs[i] * states::von_neumann_entropy(e.members[i]);
  }
  return clamp_tiny_negative(chi, "holevo");
}

double information_gain(const measurement::FinalState& f,
                        const measurement::MeasurementModel& model) {
  const std::size_t m = model.system_dim();
  const std::size_t n = model.apparatus_dim();
  ComplexMatrix avg(n, n);
  double members_term = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::norm(model.amplitudes()[i]);
    const ComplexMatrix& blk = f.block(i, i);
    if (w <= 0.0) continue;
    for (std::size_t k = 0; k < avg.size(); ++k)
      avg.data()[k] += w * blk.data()[k];
    members_term += w * entropy_of(blk, "information_gain");
  }
  return clamp_tiny_negative(entropy_of(avg, "information_gain") - members_term,
                             "information_gain");
}

double coherent_information_state(const states::DensityMatrix& joint,
                                  std::size_t dim_a, std::size_t dim_b) {
  if (dim_a * dim_b != joint.dim()) {
    throw DimensionError("coherent_information_state: dimension mismatch");
  }
  ComplexMatrix rho_b =
      linalg::partial_trace(joint.mat(), {dim_a, dim_b}, {1});
  return entropy_of(rho_b, "coherent_information_state") -
         states::von_neumann_entropy(joint);
}

// ---------------------------------------------------------------------------
// classical correlations
// ---------------------------------------------------------------------------

namespace {

// Unitary from a list of Givens parameters (theta, phi per index pair),
// applied in a fixed pair order.
ComplexMatrix givens_unitary(std::size_t d, const std::vector<double>& params) {
  ComplexMatrix w = ComplexMatrix::identity(d);
  std::size_t idx = 0;
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t q = p + 1; q < d; ++q) {
      const double theta = params[idx++];
      const double phi = params[idx++];
      const double c = std::cos(theta);
      const double s = std::sin(theta);
      const Complex e = std::polar(1.0, phi);
      // Right-multiply w by the rotation in the (p, q) plane.
      for (std::size_t r = 0; r < d; ++r) {
        const Complex wp = w(r, p), wq = w(r, q);
        w(r, p) = c * wp + s * e * wq;
        w(r, q) = -s * std::conj(e) * wp + c * wq;
      }
    }
  return w;
}

struct CorrelationWorkspace {
  const ComplexMatrix* rho;
  std::size_t da, db;
  MeasuredSide side;
  double unmeasured_entropy;
};

// J(W) for the rank-one projective measurement defined by W's columns.
double correlation_objective(const CorrelationWorkspace& ws,
                             const ComplexMatrix& w) {
  const std::size_t da = ws.da, db = ws.db;
  const std::size_t dm = ws.side == MeasuredSide::First ? da : db;
  const std::size_t du = ws.side == MeasuredSide::First ? db : da;
  const ComplexMatrix& rho = *ws.rho;
  double conditional = 0.0;
  for (std::size_t j = 0; j < dm; ++j) {
    // Unnormalized conditional state <w_j| rho |w_j> on the unmeasured
    // factor; its trace is the outcome probability.
    ComplexMatrix cond(du, du);
    for (std::size_t k = 0; k < du; ++k)
      for (std::size_t l = 0; l < du; ++l) {
        Complex acc = 0.0;
        for (std::size_t p = 0; p < dm; ++p)
          for (std::size_t q = 0; q < dm; ++q) {
            const std::size_t r = ws.side == MeasuredSide::First ? p * db + k
                                                                 : k * db + p;
            const std::size_t c = ws.side == MeasuredSide::First ? q * db + l
                                                                 : l * db + q;
            acc += std::conj(w(p, j)) * w(q, j) * rho(r, c);
          }
        cond(k, l) = acc;
      }
    const double pj = linalg::trace(cond).real();
    if (pj <= 1e-14) continue;
    std::vector<double> vals = linalg::hermitian_eigenvalues(cond);
    std::vector<double> probs;
    probs.reserve(vals.size());
    for (double x : vals) probs.push_back(x < 0.0 ? 0.0 : x / pj);
    conditional += pj * states::shannon_entropy(probs);
  }
  return ws.unmeasured_entropy - conditional;
}

} // namespace

CorrelationResult classical_correlations(const states::DensityMatrix& rho,
                                         std::size_t dim_a, std::size_t dim_b,
                                         MeasuredSide side,
                                         const OptimizerBudget& budget) {
  if (dim_a * dim_b != rho.dim()) {
    throw DimensionError("classical_correlations: dimension mismatch");
  }
  if (budget.starts == 0) {
    throw ValidationError("classical_correlations: need at least one start");
  }
  const std::size_t dm = side == MeasuredSide::First ? dim_a : dim_b;
  const std::size_t keep_unmeasured = side == MeasuredSide::First ? 1u : 0u;
  ComplexMatrix rho_u = linalg::partial_trace(
      rho.mat(), {dim_a, dim_b}, {keep_unmeasured});

  CorrelationWorkspace ws{&rho.mat(), dim_a, dim_b, side,
                          entropy_of(rho_u, "classical_correlations")};

  const std::size_t n_params = dm * (dm - 1);
  std::vector<double> best_values(budget.starts);
  std::vector<char> start_converged(budget.starts, 0);

  const std::ptrdiff_t n_starts = static_cast<std::ptrdiff_t>(budget.starts);
#pragma omp parallel for schedule(static) if (n_starts > 1)
  for (std::ptrdiff_t st = 0; st < n_starts; ++st) {
    std::vector<double> params(n_params, 0.0);
    if (st > 0) {
      auto eng = rng::make_engine(
          rng::derive_seed(budget.seed, static_cast<std::uint64_t>(st)));
      std::uniform_real_distribution<double> ang(0.0, 3.141592653589793);
      for (double& x : params) x = ang(eng);
    }
    double value = correlation_objective(ws, givens_unitary(dm, params));
    double step = 0.4;
    bool converged = false;
    for (int pass = 0; pass < budget.max_passes; ++pass) {
      double gained = 0.0;
      for (std::size_t k = 0; k < n_params; ++k) {
        const double saved = params[k];
        double best_local = value;
        double best_param = saved;
        for (double delta : {step, -step}) {
          params[k] = saved + delta;
          const double v = correlation_objective(ws, givens_unitary(dm, params));
          if (v > best_local) {
            best_local = v;
            best_param = params[k];
          }
        }
        params[k] = best_param;
        gained += best_local - value;
        value = best_local;
      }
      if (gained < budget.tol) {
        step *= 0.5;
        if (step < 1e-6) {
          converged = true;
          break;
        }
      }
    }
    best_values[static_cast<std::size_t>(st)] = value;
    start_converged[static_cast<std::size_t>(st)] = converged ? 1 : 0;
  }

  CorrelationResult out;
  // Sequential reduction keeps the winner independent of scheduling.
  std::size_t best_idx = 0;
  for (std::size_t i = 1; i < best_values.size(); ++i)
    if (best_values[i] > best_values[best_idx]) best_idx = i;
  out.value = clamp_tiny_negative(best_values[best_idx],
                                  "classical_correlations");
  out.converged = start_converged[best_idx] != 0;
  return out;
}

double coherent_information_channel(const states::DensityMatrix& rho,
                                    const measurement::ApparatusChannel& ch) {
  if (ch.dim() != rho.dim()) {
    throw DimensionError("coherent_information_channel: dimension mismatch");
  }
  const std::size_t n = rho.dim();
  const double out_entropy = entropy_of(ch.apply(rho.mat()),
                                        "coherent_information_channel");

  // (Phi (x) id) acting on the purification's projector.
  states::PureState psi = states::purify(rho);
  ComplexMatrix big(n * n, n * n);
  for (const ComplexMatrix& a : ch.kraus) {
    // |phi> = (A (x) I)|psi>
    std::vector<Complex> phi(n * n, Complex(0.0, 0.0));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t e = 0; e < n; ++e) {
        Complex acc = 0.0;
        for (std::size_t b = 0; b < n; ++b)
          acc += a(r, b) * psi.amplitudes()[b * n + e];
        phi[r * n + e] = acc;
      }
    for (std::size_t r = 0; r < n * n; ++r) {
      if (phi[r] == Complex(0.0, 0.0)) continue;
      for (std::size_t c = 0; c < n * n; ++c)
        big(r, c) += phi[r] * std::conj(phi[c]);
    }
  }
  return out_entropy - entropy_of(big, "coherent_information_channel");
}

double entropy_exchange(const measurement::FinalState& f) {
  const std::size_t m = f.system_dim();
  const std::size_t n = f.apparatus_dim();
  ComplexMatrix rho_ae = linalg::partial_trace(
      f.tripartite.projector(), {m, n, n}, {1, 2});
  const double se = entropy_of(rho_ae, "entropy_exchange");
  const double s_sys = states::von_neumann_entropy(f.system_final);
  if (std::abs(se - s_sys) > 1e-6) {
    std::ostringstream os;
    os << "entropy_exchange: routes disagree (" << se << " vs " << s_sys
       << ")";
    throw ConsistencyError(os.str());
  }
  return se;
}

double disturbance(const states::DensityMatrix& rho,
                   const measurement::ApparatusChannel& ch) {
  return states::von_neumann_entropy(rho) -
         coherent_information_channel(rho, ch);
}

states::DensityMatrix classical_joint(
    const measurement::FinalState& f,
    const measurement::MeasurementModel& model) {
  const std::size_t m = model.system_dim();
  const std::size_t n = model.apparatus_dim();
  ComplexMatrix out(m * n, m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::norm(model.amplitudes()[i]);
    if (w <= 0.0) continue;
    const ComplexMatrix& blk = f.block(i, i);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        out(i * n + r, i * n + c) = w * blk(r, c);
  }
  return states::DensityMatrix(std::move(out));
}

void QuantityReport::validate() const {
  const double log_m = std::log2(static_cast<double>(system_dim));
  const double log_n = std::log2(static_cast<double>(apparatus_dim));
  auto in_range = [](double x, double lo, double hi, const char* name) {
    if (x < lo || x > hi) {
      std::ostringstream os;
      os << "QuantityReport: " << name << " = " << x << " outside [" << lo
         << ", " << hi << "]";
      throw ValidationError(os.str());
    }
  };
  in_range(info_gain, -1e-9, log_n + 1e-9, "info_gain");
  in_range(holevo_chi, -1e-9, log_n + 1e-9, "holevo_chi");
  in_range(classical_corr, -1e-9, log_n + 1e-9, "classical_corr");
  in_range(entropy_exchange, -1e-9, 2.0 * log_n + 1e-9, "entropy_exchange");
  in_range(disturbance, -1e-9, 2.0 * log_n + 1e-9, "disturbance");
  in_range(mixedness, -1e-9, log_n + 1e-9, "mixedness");
  in_range(coh_initial_system, -1e-9, log_m + 1e-9, "coh_initial_system");
  in_range(coh_final_system, -1e-9, log_m + 1e-9, "coh_final_system");
  in_range(coh_initial_apparatus, -1e-9, log_n + 1e-9, "coh_initial_apparatus");
  in_range(coh_final_apparatus, -1e-9, log_n + 1e-9, "coh_final_apparatus");
  in_range(coherent_info_state, -log_n - 1e-9, log_n + 1e-9,
           "coherent_info_state");
  in_range(coherent_info_channel, -log_n - 1e-9, log_n + 1e-9,
           "coherent_info_channel");
}

QuantityReport compute_report(const measurement::MeasurementModel& model,
                              const measurement::FinalState& f,
                              const OptimizerBudget& corr_budget,
                              bool run_correlations) {
  const std::size_t m = model.system_dim();
  const std::size_t n = model.apparatus_dim();
  QuantityReport rep;
  rep.system_dim = m;
  rep.apparatus_dim = n;
  rep.mixedness = states::von_neumann_entropy(model.apparatus());
  rep.info_gain = information_gain(f, model);

  std::vector<double> probs;
  std::vector<states::DensityMatrix> members;
  for (std::size_t i = 0; i < m; ++i) {
    probs.push_back(std::norm(model.amplitudes()[i]));
    members.emplace_back(f.block(i, i));
  }
  rep.holevo_chi = holevo(Ensemble(std::move(probs), std::move(members)));

  if (run_correlations) {
    CorrelationResult corr = classical_correlations(
        classical_joint(f, model), m, n, MeasuredSide::First, corr_budget);
    rep.classical_corr = corr.value;
    rep.classical_corr_converged = corr.converged;
  }

  rep.coherent_info_state = coherent_information_state(f.joint, m, n);
  measurement::ApparatusChannel ch = measurement::apparatus_channel(model);
  rep.coherent_info_channel = coherent_information_channel(model.apparatus(), ch);
  rep.entropy_exchange = entropy_exchange(f);
  rep.disturbance = rep.mixedness - rep.coherent_info_channel;

  const states::Basis sys_basis = states::Basis::standard(m);
  rep.coh_initial_system =
      states::coherence_rel_ent(model.system_state().density(), sys_basis);
  rep.coh_final_system = states::coherence_rel_ent(f.system_final, sys_basis);
  rep.coh_initial_apparatus =
      states::coherence_rel_ent(model.apparatus(), model.apparatus_basis());
  rep.coh_final_apparatus =
      states::coherence_rel_ent(f.apparatus_final, model.apparatus_basis());
  rep.validate();
  return rep;
}

} // namespace qmeas::quantities
