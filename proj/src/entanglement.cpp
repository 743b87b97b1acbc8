#include "qmeas/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <utility>

#include "qmeas/errors.hpp"
#include "qmeas/rng.hpp"

namespace qmeas::entanglement {
namespace {

constexpr double kLn2 = 0.6931471805599453;
// Eigenvalues at or below this are treated as outside the support when
// evaluating relative entropy (mirrors the states module policy).
constexpr double kSupportFloor = 1e-12;
constexpr double kOutsideMassTol = 1e-10;
// Floor for eigenvalues entering divided-difference logarithm terms.
constexpr double kGradFloor = 1e-12;

using linalg::Spectrum;

void check_dims(const states::DensityMatrix& rho, std::size_t dim_a,
                std::size_t dim_b) {
  if (dim_a == 0 || dim_b == 0 || rho.dim() != dim_a * dim_b) {
    throw DimensionError("bipartite split does not match state dimension");
  }
}

// Euclidean projection onto the probability simplex.
std::vector<double> simplex_project(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
  return v;
}

// V diag(vals) V† from an eigendecomposition with substituted values.
ComplexMatrix rebuild(const Spectrum& spec, const std::vector<double>& vals) {
  const std::size_t n = spec.eigenvalues.size();
  ComplexMatrix scaled(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < n; ++k) {
      scaled(r, k) = spec.eigenvectors(r, k) * vals[k];
    }
  }
  return scaled * dagger(spec.eigenvectors);
}

ComplexMatrix hermitize(const ComplexMatrix& x) {
  ComplexMatrix h(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      h(r, c) = 0.5 * (x(r, c) + std::conj(x(c, r)));
    }
  }
  return h;
}

// Projection onto {X >= 0, Tr X = 1}: eigenvalues go to the simplex.
ComplexMatrix project_density(const ComplexMatrix& x) {
  Spectrum spec = linalg::hermitian_eig(x);
  return rebuild(spec, simplex_project(spec.eigenvalues));
}

// Projection onto the cone of states with positive partial transpose
// (no trace constraint): transpose, clip, transpose back.
ComplexMatrix project_ppt_cone(const ComplexMatrix& x, std::size_t dim_a,
                               std::size_t dim_b) {
  ComplexMatrix y = linalg::partial_transpose(x, dim_a, dim_b, 1);
  Spectrum spec = linalg::hermitian_eig(y);
  std::vector<double> vals = spec.eigenvalues;
  for (double& v : vals) v = std::max(v, 0.0);
  return linalg::partial_transpose(rebuild(spec, vals), dim_a, dim_b, 1);
}

// Dykstra alternating projections onto the intersection of the density
// set and the positive-partial-transpose cone.
ComplexMatrix dykstra_ppt(const ComplexMatrix& x, std::size_t dim_a,
                          std::size_t dim_b, int cap, double tol) {
  const std::size_t n = x.rows();
  ComplexMatrix y = hermitize(x);
  ComplexMatrix p(n, n);
  ComplexMatrix q(n, n);
  ComplexMatrix a = y;
  for (int it = 0; it < cap; ++it) {
    const ComplexMatrix yp = y + p;
    a = project_density(yp);
    p = yp - a;
    const ComplexMatrix aq = a + q;
    const ComplexMatrix b = project_ppt_cone(aq, dim_a, dim_b);
    q = aq - b;
    if (linalg::max_abs_diff(a, b) <= tol) break;
    y = b;
  }
  return a;
}

// Relative entropy S(rho||sigma) evaluated from sigma's spectrum, with
// sigma's clipped eigenvalues renormalized. Infinite results (support
// mismatch) are reported as nullopt.
struct ObjectiveContext {
  const ComplexMatrix* rho = nullptr;
  double entropy_rho = 0.0;

  std::optional<double> value(const Spectrum& sigma_spec) const {
    const std::size_t n = sigma_spec.eigenvalues.size();
    std::vector<double> s = sigma_spec.eigenvalues;
    double total = 0.0;
    for (double& v : s) {
      v = std::max(v, 0.0);
      total += v;
    }
    if (total <= 0.0) return std::nullopt;
    for (double& v : s) v /= total;
    double cross = 0.0;
    double outside = 0.0;
    std::vector<Complex> col(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t r = 0; r < n; ++r) col[r] = sigma_spec.eigenvectors(r, k);
      const std::vector<Complex> rv = linalg::matvec(*rho, col);
      double w = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        w += (std::conj(col[r]) * rv[r]).real();
      }
      w = std::max(w, 0.0);
      if (s[k] <= kSupportFloor) {
        outside += w;
      } else {
        cross -= w * std::log2(s[k]);
      }
    }
    if (outside > kOutsideMassTol) return std::nullopt;
    return std::max(cross - entropy_rho, 0.0);
  }
};

double phi_log(double x, double y) {
  if (std::abs(x - y) <= 1e-12 * std::max(x, y)) return 2.0 / (x + y);
  return (std::log(x) - std::log(y)) / (x - y);
}

// Gradient of sigma -> S(rho||sigma) in bits: the divided-difference
// (Daleckii-Krein) form -(1/ln 2) V (Phi o V†(rho)V) V† on sigma's
// eigenbasis.
ComplexMatrix log_gradient(const ComplexMatrix& rho, const Spectrum& spec) {
  const std::size_t n = spec.eigenvalues.size();
  std::vector<double> s = spec.eigenvalues;
  for (double& v : s) v = std::max(v, kGradFloor);
  const ComplexMatrix a =
      dagger(spec.eigenvectors) * rho * spec.eigenvectors;
  // The divided-difference factors can reach 1/kGradFloor, so rounding
  // asymmetry in `a` would be amplified far past the Hermiticity
  // guards; build the scaled core exactly Hermitian.
  ComplexMatrix h(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) {
      const Complex sym = 0.5 * (a(k, l) + std::conj(a(l, k)));
      const Complex val = -phi_log(s[k], s[l]) / kLn2 * sym;
      h(k, l) = val;
      h(l, k) = std::conj(val);
    }
  }
  return hermitize(spec.eigenvectors * h * dagger(spec.eigenvectors));
}

// Convexity certificate: for any full-rank density sigma-hat,
//   min over PPT densities of S(rho||.)
//     >= f(sigma-hat) + min_PPT <G, .> - <G, sigma-hat>
// and <G, .> over PPT densities is bounded below by both the smallest
// eigenvalue of G and of its partial transpose.
double lower_certificate(const ObjectiveContext& ctx, const ComplexMatrix& sigma,
                         std::size_t dim_a, std::size_t dim_b) {
  const std::size_t n = sigma.rows();
  double best = 0.0;
  for (const double mu : {1e-9, 1e-7, 1e-5}) {
    ComplexMatrix blended = (1.0 - mu) * sigma;
    for (std::size_t i = 0; i < n; ++i) {
      blended(i, i) += mu / static_cast<double>(n);
    }
    const Spectrum spec = linalg::hermitian_eig(blended);
    const std::optional<double> f = ctx.value(spec);
    if (!f) continue;
    const ComplexMatrix g = log_gradient(*ctx.rho, spec);
    const double lam_g = linalg::hermitian_eigenvalues(g).front();
    const double lam_gt =
        linalg::hermitian_eigenvalues(
            linalg::partial_transpose(g, dim_a, dim_b, 1))
            .front();
    const double cert =
        *f + std::max(lam_g, lam_gt) - linalg::inner_real(g, blended);
    best = std::max(best, cert);
  }
  return best;
}

// Schmidt decomposition of a bipartite vector: weight (squared
// coefficient) plus left/right factors, in descending weight order.
struct SchmidtTerm {
  double weight = 0.0;
  std::vector<Complex> left;
  std::vector<Complex> right;
};

std::vector<SchmidtTerm> schmidt_terms(const std::vector<Complex>& psi,
                                       std::size_t dim_a, std::size_t dim_b) {
  ComplexMatrix m(dim_a, dim_b);
  for (std::size_t a = 0; a < dim_a; ++a) {
    for (std::size_t b = 0; b < dim_b; ++b) {
      m(a, b) = psi[a * dim_b + b];
    }
  }
  const ComplexMatrix k = m * dagger(m);
  const Spectrum spec = linalg::hermitian_eig(k);
  std::vector<SchmidtTerm> terms;
  for (std::size_t idx = spec.eigenvalues.size(); idx-- > 0;) {
    const double w = spec.eigenvalues[idx];
    if (w <= 1e-14) continue;
    SchmidtTerm t;
    t.weight = w;
    t.left.resize(dim_a);
    for (std::size_t a = 0; a < dim_a; ++a) t.left[a] = spec.eigenvectors(a, idx);
    // Right factor: conjugate of the right singular vector, scaled out
    // of M† u / sqrt(w).
    t.right.assign(dim_b, Complex(0.0, 0.0));
    for (std::size_t b = 0; b < dim_b; ++b) {
      Complex acc(0.0, 0.0);
      for (std::size_t a = 0; a < dim_a; ++a) {
        acc += std::conj(m(a, b)) * t.left[a];
      }
      t.right[b] = std::conj(acc) / std::sqrt(w);
    }
    double norm = 0.0;
    for (const Complex& c : t.right) norm += std::norm(c);
    norm = std::sqrt(norm);
    if (norm <= 1e-14) continue;
    for (Complex& c : t.right) c /= norm;
    terms.push_back(std::move(t));
  }
  return terms;
}

std::vector<Complex> normalized(std::vector<Complex> v) {
  double norm = 0.0;
  for (const Complex& c : v) norm += std::norm(c);
  norm = std::sqrt(norm);
  if (norm <= 0.0) {
    throw DomainError("cannot normalize a zero vector");
  }
  for (Complex& c : v) c /= norm;
  return v;
}

std::vector<Complex> random_unit_vector(std::size_t n, std::mt19937_64& eng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Complex> v(n);
  for (Complex& c : v) {
    const double re = gauss(eng);
    const double im = gauss(eng);
    c = Complex(re, im);
  }
  return normalized(std::move(v));
}

// <l (x) r| G |l (x) r> contracted over the right factor: a dim_a x
// dim_a Hermitian matrix whose smallest eigenvector is the best left
// factor for fixed right factor.
ComplexMatrix contract_right(const ComplexMatrix& g, std::size_t dim_a,
                             std::size_t dim_b, const std::vector<Complex>& r) {
  ComplexMatrix m(dim_a, dim_a);
  for (std::size_t p = 0; p < dim_a; ++p) {
    for (std::size_t q = 0; q < dim_a; ++q) {
      Complex acc(0.0, 0.0);
      for (std::size_t b = 0; b < dim_b; ++b) {
        for (std::size_t b2 = 0; b2 < dim_b; ++b2) {
          acc += std::conj(r[b]) * g(p * dim_b + b, q * dim_b + b2) * r[b2];
        }
      }
      m(p, q) = acc;
    }
  }
  return m;
}

ComplexMatrix contract_left(const ComplexMatrix& g, std::size_t dim_a,
                            std::size_t dim_b, const std::vector<Complex>& l) {
  ComplexMatrix m(dim_b, dim_b);
  for (std::size_t b = 0; b < dim_b; ++b) {
    for (std::size_t b2 = 0; b2 < dim_b; ++b2) {
      Complex acc(0.0, 0.0);
      for (std::size_t p = 0; p < dim_a; ++p) {
        for (std::size_t q = 0; q < dim_a; ++q) {
          acc += std::conj(l[p]) * g(p * dim_b + b, q * dim_b + b2) * l[q];
        }
      }
      m(b, b2) = acc;
    }
  }
  return m;
}

std::vector<Complex> min_eigvec(const ComplexMatrix& h) {
  const Spectrum spec = linalg::hermitian_eig(h);
  std::vector<Complex> v(h.rows());
  for (std::size_t r = 0; r < h.rows(); ++r) v[r] = spec.eigenvectors(r, 0);
  return v;
}

struct AtomCandidate {
  double value = 0.0;
  std::vector<Complex> left;
  std::vector<Complex> right;
};

// Best product state minimizing <l (x) r| G |l (x) r|, by alternating
// smallest-eigenvector updates of each factor from several starts.
AtomCandidate min_product_atom(const ComplexMatrix& g, std::size_t dim_a,
                               std::size_t dim_b, std::mt19937_64& eng,
                               int random_starts) {
  std::vector<std::vector<Complex>> right_inits;
  // Deterministic start: the dominant Schmidt right-factor of the
  // smallest eigenvector of G.
  {
    const std::vector<Complex> bottom = min_eigvec(g);
    const std::vector<SchmidtTerm> terms = schmidt_terms(bottom, dim_a, dim_b);
    if (!terms.empty()) right_inits.push_back(terms.front().right);
  }
  for (int s = 0; s < random_starts; ++s) {
    right_inits.push_back(random_unit_vector(dim_b, eng));
  }
  AtomCandidate best;
  best.value = std::numeric_limits<double>::infinity();
  for (const std::vector<Complex>& init : right_inits) {
    std::vector<Complex> r = init;
    std::vector<Complex> l;
    double val = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 4; ++pass) {
      l = min_eigvec(hermitize(contract_right(g, dim_a, dim_b, r)));
      const ComplexMatrix mb = hermitize(contract_left(g, dim_a, dim_b, l));
      const Spectrum spec = linalg::hermitian_eig(mb);
      r.resize(dim_b);
      for (std::size_t b = 0; b < dim_b; ++b) r[b] = spec.eigenvectors(b, 0);
      val = spec.eigenvalues.front();
    }
    if (val < best.value) {
      best.value = val;
      best.left = l;
      best.right = r;
    }
  }
  return best;
}

struct Atom {
  std::vector<Complex> left;
  std::vector<Complex> right;
  ComplexMatrix projector; // |l r><l r|
};

Atom make_atom(std::vector<Complex> l, std::vector<Complex> r) {
  Atom a;
  a.left = normalized(std::move(l));
  a.right = normalized(std::move(r));
  a.projector = linalg::outer(linalg::kron_vec(a.left, a.right));
  return a;
}

ComplexMatrix mixture_of(const std::vector<Atom>& atoms,
                         const std::vector<double>& w, std::size_t n) {
  ComplexMatrix sigma(n, n);
  for (std::size_t t = 0; t < atoms.size(); ++t) {
    if (w[t] <= 0.0) continue;
    const Complex* src = atoms[t].projector.data();
    Complex* dst = sigma.data();
    for (std::size_t i = 0; i < n * n; ++i) dst[i] += w[t] * src[i];
  }
  return sigma;
}

struct SeesawState {
  std::vector<Atom> atoms;
  std::vector<double> weights;
  double objective = std::numeric_limits<double>::infinity();
  Spectrum sigma_spec; // spectrum of the current mixture
  // True while objective/sigma_spec match (atoms, weights). Appending
  // or dropping zero-weight atoms keeps the mixture bitwise identical,
  // so those operations leave the flag set.
  bool state_valid = false;
};

// Projected-gradient descent on the mixing weights (the objective is
// convex in the weights). Only improving steps are accepted, so the
// stored objective never increases here.
void optimize_weights(SeesawState& st, const ObjectiveContext& ctx,
                      std::size_t n, int iters, double tol) {
  if (!st.state_valid) {
    ComplexMatrix sigma = mixture_of(st.atoms, st.weights, n);
    st.sigma_spec = linalg::hermitian_eig(sigma);
    std::optional<double> f = ctx.value(st.sigma_spec);
    if (!f) f = std::numeric_limits<double>::infinity();
    st.objective = *f;
    st.state_valid = true;
  }
  for (int it = 0; it < iters; ++it) {
    if (!std::isfinite(st.objective)) {
      // No usable gradient; fall back to blending toward the uniform
      // mixture until the support covers rho.
      std::vector<double> blend(st.weights.size(),
                                1.0 / static_cast<double>(st.weights.size()));
      bool rescued = false;
      for (double t = 0.5; t >= 1e-3; t *= 0.5) {
        std::vector<double> w2(st.weights.size());
        for (std::size_t i = 0; i < w2.size(); ++i) {
          w2[i] = (1.0 - t) * st.weights[i] + t * blend[i];
        }
        ComplexMatrix s2 = mixture_of(st.atoms, w2, n);
        Spectrum spec2 = linalg::hermitian_eig(s2);
        const std::optional<double> f2 = ctx.value(spec2);
        if (f2) {
          st.weights = std::move(w2);
          st.sigma_spec = std::move(spec2);
          st.objective = *f2;
          rescued = true;
          break;
        }
      }
      if (!rescued) return;
      continue;
    }
    const ComplexMatrix g = log_gradient(*ctx.rho, st.sigma_spec);
    std::vector<double> grad(st.atoms.size());
    for (std::size_t t = 0; t < st.atoms.size(); ++t) {
      grad[t] = linalg::inner_real(st.atoms[t].projector, g);
    }
    double gain = 0.0;
    bool accepted = false;
    double step = 1.0;
    for (int h = 0; h < 25; ++h) {
      std::vector<double> w2(st.weights.size());
      for (std::size_t i = 0; i < w2.size(); ++i) {
        w2[i] = st.weights[i] - step * grad[i];
      }
      w2 = simplex_project(std::move(w2));
      ComplexMatrix s2 = mixture_of(st.atoms, w2, n);
      Spectrum spec2 = linalg::hermitian_eig(s2);
      const std::optional<double> f2 = ctx.value(spec2);
      if (f2 && *f2 < st.objective - 1e-15) {
        gain = st.objective - *f2;
        st.weights = std::move(w2);
        st.sigma_spec = std::move(spec2);
        st.objective = *f2;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || gain < tol * 0.1) return;
  }
}

// Remove atoms whose weight is exactly zero: the mixture is bitwise
// unchanged, so the cached objective stays valid.
void drop_zero_atoms(SeesawState& st) {
  std::vector<Atom> atoms;
  std::vector<double> weights;
  for (std::size_t t = 0; t < st.weights.size(); ++t) {
    if (st.weights[t] == 0.0) continue;
    atoms.push_back(std::move(st.atoms[t]));
    weights.push_back(st.weights[t]);
  }
  if (!atoms.empty()) {
    st.atoms = std::move(atoms);
    st.weights = std::move(weights);
  }
}

// Enforce the ensemble-size cap by deleting the lightest atoms and
// refitting the weights. Kept only if the refit does not lose ground;
// otherwise the state is restored and the caller should stop growing.
bool enforce_cap(SeesawState& st, const ObjectiveContext& ctx, std::size_t n,
                 std::size_t cap, int iters, double tol) {
  if (st.atoms.size() <= cap) return true;
  const SeesawState snapshot = st;
  std::vector<std::size_t> order(st.weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) {
                     return st.weights[x] > st.weights[y];
                   });
  order.resize(cap);
  std::sort(order.begin(), order.end());
  std::vector<Atom> atoms;
  std::vector<double> weights;
  for (const std::size_t t : order) {
    atoms.push_back(std::move(st.atoms[t]));
    weights.push_back(st.weights[t]);
  }
  st.atoms = std::move(atoms);
  st.weights = std::move(weights);
  st.state_valid = false;
  optimize_weights(st, ctx, n, iters, tol);
  if (st.objective <= snapshot.objective) return true;
  st = snapshot;
  return false;
}

// Deterministic initial ensemble: caller-supplied atoms (if any), the
// Schmidt terms of every eigenvector of rho (guarantees the mixture
// supports rho), and the computational product-basis dephasing.
SeesawState initial_state(const states::DensityMatrix& rho, std::size_t dim_a,
                          std::size_t dim_b,
                          const std::vector<ProductAtom>& seeds) {
  const std::size_t n = rho.dim();
  SeesawState st;
  std::vector<double> weights;

  std::vector<Atom> seed_atoms;
  std::vector<double> seed_w;
  double seed_total = 0.0;
  for (const ProductAtom& s : seeds) {
    if (s.weight <= 0.0) continue;
    seed_atoms.push_back(make_atom(s.left, s.right));
    seed_w.push_back(s.weight);
    seed_total += s.weight;
  }

  std::vector<Atom> eig_atoms;
  std::vector<double> eig_w;
  double eig_total = 0.0;
  const Spectrum rho_spec = linalg::hermitian_eig(rho.mat());
  for (std::size_t k = 0; k < rho_spec.eigenvalues.size(); ++k) {
    const double lam = rho_spec.eigenvalues[k];
    if (lam <= 1e-12) continue;
    std::vector<Complex> col(n);
    for (std::size_t r = 0; r < n; ++r) col[r] = rho_spec.eigenvectors(r, k);
    for (const SchmidtTerm& t : schmidt_terms(col, dim_a, dim_b)) {
      eig_atoms.push_back(make_atom(t.left, t.right));
      eig_w.push_back(lam * t.weight);
      eig_total += lam * t.weight;
    }
  }

  std::vector<Atom> deph_atoms;
  std::vector<double> deph_w;
  double deph_total = 0.0;
  for (std::size_t a = 0; a < dim_a; ++a) {
    for (std::size_t b = 0; b < dim_b; ++b) {
      const double d = std::max(rho.mat()(a * dim_b + b, a * dim_b + b).real(),
                                0.0) +
                       1e-6;
      std::vector<Complex> l(dim_a, Complex(0.0, 0.0));
      std::vector<Complex> r(dim_b, Complex(0.0, 0.0));
      l[a] = 1.0;
      r[b] = 1.0;
      deph_atoms.push_back(make_atom(std::move(l), std::move(r)));
      deph_w.push_back(d);
      deph_total += d;
    }
  }

  const bool have_seeds = seed_total > 0.0;
  const double seed_mass = have_seeds ? 0.6 : 0.0;
  const double eig_mass = (eig_total > 0.0) ? (have_seeds ? 0.3 : 0.7) : 0.0;
  const double deph_mass = 1.0 - seed_mass - eig_mass;
  for (std::size_t i = 0; i < seed_atoms.size(); ++i) {
    st.atoms.push_back(std::move(seed_atoms[i]));
    weights.push_back(seed_mass * seed_w[i] / seed_total);
  }
  for (std::size_t i = 0; i < eig_atoms.size(); ++i) {
    st.atoms.push_back(std::move(eig_atoms[i]));
    weights.push_back(eig_mass * eig_w[i] / eig_total);
  }
  for (std::size_t i = 0; i < deph_atoms.size(); ++i) {
    st.atoms.push_back(std::move(deph_atoms[i]));
    weights.push_back(deph_mass * deph_w[i] / deph_total);
  }
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& w : weights) w /= total;
  st.weights = std::move(weights);
  return st;
}

} // namespace

PptLowerResult er_lower_ppt(const states::DensityMatrix& rho, std::size_t dim_a,
                            std::size_t dim_b, const PptDescentOptions& opt) {
  check_dims(rho, dim_a, dim_b);
  const std::size_t n = rho.dim();
  const ObjectiveContext ctx{&rho.mat(), states::von_neumann_entropy(rho)};
  const auto project = [&](const ComplexMatrix& x) {
    return dykstra_ppt(x, dim_a, dim_b, opt.dykstra_cap, opt.dykstra_tol);
  };

  // Start candidates: the dephased mix (exactly feasible), the Dykstra
  // projection of rho itself, the Schmidt-dephasing of rho's
  // eigenvectors (a separable state; the exact minimizer when rho is
  // pure), and an optional caller-provided warm start. The best
  // objective wins.
  std::vector<ComplexMatrix> starts;
  {
    ComplexMatrix mix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      mix(i, i) = 0.9 * std::max(rho.mat()(i, i).real(), 0.0) +
                  0.1 / static_cast<double>(n);
    }
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += mix(i, i).real();
    for (std::size_t i = 0; i < n; ++i) mix(i, i) /= tr;
    starts.push_back(std::move(mix));
  }
  starts.push_back(project(rho.mat()));
  {
    ComplexMatrix sd(n, n);
    const Spectrum rho_spec = linalg::hermitian_eig(rho.mat());
    for (std::size_t k = 0; k < n; ++k) {
      const double lam = rho_spec.eigenvalues[k];
      if (lam <= 1e-12) continue;
      std::vector<Complex> col(n);
      for (std::size_t r = 0; r < n; ++r) col[r] = rho_spec.eigenvectors(r, k);
      for (const SchmidtTerm& t : schmidt_terms(col, dim_a, dim_b)) {
        const ComplexMatrix p =
            linalg::outer(linalg::kron_vec(t.left, t.right));
        const Complex* src = p.data();
        Complex* dst = sd.data();
        for (std::size_t i = 0; i < n * n; ++i) {
          dst[i] += lam * t.weight * src[i];
        }
      }
    }
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += sd(i, i).real();
    if (tr > 0.5) {
      starts.push_back((1.0 / tr) * sd);
    }
  }
  if (opt.warm_start.rows() == n && opt.warm_start.cols() == n) {
    starts.push_back(project(opt.warm_start));
  }

  ComplexMatrix sigma;
  Spectrum sigma_spec;
  double f = std::numeric_limits<double>::infinity();
  for (ComplexMatrix& cand : starts) {
    Spectrum spec = linalg::hermitian_eig(cand);
    const std::optional<double> fc = ctx.value(spec);
    if (fc && *fc < f) {
      f = *fc;
      sigma = std::move(cand);
      sigma_spec = std::move(spec);
    }
  }

  PptLowerResult out;
  out.objective_trace.push_back(f);
  out.converged = false;
  double warm_step = 1.0;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    const ComplexMatrix g = log_gradient(*ctx.rho, sigma_spec);
    double step = std::min(1.0, warm_step * 4.0);
    bool accepted = false;
    double improvement = 0.0;
    for (int h = 0; h < 40 && step > 1e-14; ++h) {
      ComplexMatrix cand = project(sigma - step * g);
      Spectrum spec = linalg::hermitian_eig(cand);
      const std::optional<double> fc = ctx.value(spec);
      if (fc && *fc < f - 1e-15) {
        improvement = f - *fc;
        sigma = std::move(cand);
        sigma_spec = std::move(spec);
        f = *fc;
        warm_step = step;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = true;
      break;
    }
    out.objective_trace.push_back(f);
    if (improvement < opt.tol) {
      ++iter;
      out.converged = true;
      break;
    }
  }
  out.iterations = iter;
  out.objective = f;
  out.certified_lower =
      std::max(0.0, lower_certificate(ctx, sigma, dim_a, dim_b));
  return out;
}

ComplexMatrix SeparableEnsemble::mixture(std::size_t dim_a,
                                         std::size_t dim_b) const {
  const std::size_t n = dim_a * dim_b;
  ComplexMatrix sigma(n, n);
  for (std::size_t t = 0; t < weights.size(); ++t) {
    const ComplexMatrix p = linalg::outer(linalg::kron_vec(
        left_states[t].amplitudes(), right_states[t].amplitudes()));
    const Complex* src = p.data();
    Complex* dst = sigma.data();
    for (std::size_t i = 0; i < n * n; ++i) dst[i] += weights[t] * src[i];
  }
  return sigma;
}

states::DensityMatrix SeparableEnsemble::to_density(std::size_t dim_a,
                                                    std::size_t dim_b) const {
  if (weights.size() != left_states.size() ||
      weights.size() != right_states.size()) {
    throw ValidationError("ensemble component counts disagree");
  }
  double total = 0.0;
  for (const double w : weights) {
    if (w < -1e-12) throw ValidationError("negative ensemble weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-8) {
    throw ValidationError("ensemble weights do not sum to one");
  }
  return states::DensityMatrix(mixture(dim_a, dim_b));
}

SeesawResult er_seesaw_upper(const states::DensityMatrix& rho,
                             std::size_t dim_a, std::size_t dim_b,
                             const SeesawOptions& opt) {
  check_dims(rho, dim_a, dim_b);
  const std::size_t n = rho.dim();
  const std::size_t cap = opt.k > 0 ? opt.k : n * n;
  const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
  const ObjectiveContext ctx{&rho.mat(), states::von_neumann_entropy(rho)};
  const double gap_tol = std::max(opt.tol, 1e-10);

  SeesawResult best;
  best.upper = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart < restarts; ++restart) {
    std::mt19937_64 eng =
        rng::make_engine(rng::derive_seed(opt.seed, 1000 + restart));
    SeesawState st = initial_state(rho, dim_a, dim_b, opt.initial_atoms);
    // Later restarts explore extra random atoms (zero initial weight,
    // so the first weight fit is unaffected when they do not help).
    for (std::size_t extra = 0; extra < 2 * restart; ++extra) {
      st.atoms.push_back(make_atom(random_unit_vector(dim_a, eng),
                                   random_unit_vector(dim_b, eng)));
      st.weights.push_back(0.0);
    }

    std::vector<double> trace;
    optimize_weights(st, ctx, n, opt.weight_iters, opt.tol);
    trace.push_back(st.objective);
    bool converged = false;
    int rounds = 0;
    for (; rounds < opt.max_rounds; ++rounds) {
      if (!std::isfinite(st.objective)) break;
      const ComplexMatrix g = log_gradient(*ctx.rho, st.sigma_spec);
      const AtomCandidate cand =
          min_product_atom(g, dim_a, dim_b, eng, 2);
      const double gap = linalg::inner_real(g, mixture_of(st.atoms, st.weights,
                                                          n)) -
                         cand.value;
      if (gap <= gap_tol) {
        converged = true;
        break;
      }
      st.atoms.push_back(make_atom(cand.left, cand.right));
      st.weights.push_back(0.0);
      const double before = st.objective;
      optimize_weights(st, ctx, n, opt.weight_iters, opt.tol);
      drop_zero_atoms(st);
      if (!enforce_cap(st, ctx, n, cap, opt.weight_iters, opt.tol)) {
        converged = true;
        ++rounds;
        break;
      }
      trace.push_back(st.objective);
      if (before - st.objective < opt.tol) {
        converged = true;
        ++rounds;
        break;
      }
    }

    if (st.objective < best.upper) {
      best.upper = st.objective;
      best.converged = converged;
      best.rounds = rounds;
      best.objective_trace = std::move(trace);
      SeparableEnsemble ens;
      for (std::size_t t = 0; t < st.atoms.size(); ++t) {
        if (st.weights[t] <= 1e-12) continue;
        ens.weights.push_back(st.weights[t]);
        ens.left_states.emplace_back(normalized(st.atoms[t].left));
        ens.right_states.emplace_back(normalized(st.atoms[t].right));
      }
      double total = std::accumulate(ens.weights.begin(), ens.weights.end(),
                                     0.0);
      for (double& w : ens.weights) w /= total;
      best.ensemble = std::move(ens);
    }
  }
  if (!std::isfinite(best.upper)) {
    // Degenerate fall-back: the trivial ceiling, marked unconverged.
    best.upper = std::log2(static_cast<double>(std::min(dim_a, dim_b)));
    best.converged = false;
  }
  return best;
}

double er_pure(const states::PureState& psi, std::size_t dim_a,
               std::size_t dim_b) {
  if (psi.dim() != dim_a * dim_b) {
    throw DimensionError("bipartite split does not match state dimension");
  }
  const ComplexMatrix reduced =
      linalg::partial_trace(psi.projector(), {dim_a, dim_b}, {0});
  return states::von_neumann_entropy(states::DensityMatrix(reduced));
}

ERBracket er_bracket(const states::DensityMatrix& rho, std::size_t dim_a,
                     std::size_t dim_b, const ERBudget& budget) {
  check_dims(rho, dim_a, dim_b);
  ERBracket out;
  if (budget.run_upper) {
    SeesawResult up = er_seesaw_upper(rho, dim_a, dim_b, budget.seesaw);
    out.upper = up.upper;
    out.upper_converged = up.converged;
    out.upper_iterations = up.rounds;
    out.witness = std::move(up.ensemble);
  }
  if (budget.run_lower) {
    PptDescentOptions ppt = budget.ppt;
    if (budget.run_upper && out.witness.size() > 0 &&
        ppt.warm_start.rows() != rho.dim()) {
      // The separable witness is a strong feasible start for the
      // descent side.
      ppt.warm_start = out.witness.mixture(dim_a, dim_b);
    }
    const PptLowerResult lo = er_lower_ppt(rho, dim_a, dim_b, ppt);
    out.lower = lo.certified_lower;
    out.lower_objective = lo.objective;
    out.lower_converged = lo.converged;
    out.lower_iterations = lo.iterations;
  }
  if (!budget.run_upper) {
    out.upper = std::log2(static_cast<double>(std::min(dim_a, dim_b)));
    out.upper_converged = false;
  }
  if (out.lower > out.upper + 1e-6) {
    throw BracketInversionError(
        "certified lower bound exceeds the separable upper bound");
  }
  return out;
}

} // namespace qmeas::entanglement
