#include "qmeas/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qmeas/errors.hpp"

namespace qmeas::states {

namespace {

double clip_probability(double x, const char* who) {
  if (x < 0.0) {
    if (x < linalg::kEigClipFloor) {
      std::ostringstream os;
      os << who << ": value " << x << " below the clipping floor";
      throw DomainError(os.str());
    }
    return 0.0;
  }
  return x;
}

double log2_clamped(double x) { return std::log2(x); }

} // namespace

DensityMatrix::DensityMatrix(ComplexMatrix mat, double tol)
    : mat_(std::move(mat)) {
  if (!mat_.square() || mat_.rows() == 0) {
    throw DimensionError("DensityMatrix: expected non-empty square matrix");
  }
  if (linalg::hermiticity_defect(mat_) > tol) {
    throw ValidationError("DensityMatrix: not Hermitian within tolerance");
  }
  const double tr = linalg::trace(mat_).real();
  if (std::abs(tr - 1.0) > tol) {
    std::ostringstream os;
    os << "DensityMatrix: trace " << tr << " differs from 1";
    throw ValidationError(os.str());
  }
  eigenvalues_ = linalg::hermitian_eigenvalues(mat_);
  for (double& x : eigenvalues_) {
    if (x < 0.0) {
      if (x < linalg::kEigClipFloor) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << x;
        throw ValidationError(os.str());
      }
      x = 0.0;
    }
  }
}

PureState::PureState(std::vector<Complex> amplitudes, double tol)
    : amp_(std::move(amplitudes)) {
  if (amp_.empty()) throw DimensionError("PureState: empty amplitude vector");
  double norm2 = 0.0;
  for (const Complex& a : amp_) norm2 += std::norm(a);
  if (std::abs(std::sqrt(norm2) - 1.0) > tol) {
    std::ostringstream os;
    os << "PureState: norm " << std::sqrt(norm2) << " differs from 1";
    throw ValidationError(os.str());
  }
}

Basis::Basis(ComplexMatrix columns, std::string label, double tol)
    : columns_(std::move(columns)), label_(std::move(label)) {
  if (!columns_.square() || columns_.rows() == 0) {
    throw DimensionError("Basis: expected non-empty square matrix");
  }
  ComplexMatrix gram = linalg::dagger(columns_) * columns_;
  if (linalg::max_abs_diff(gram, ComplexMatrix::identity(columns_.rows())) >
      tol) {
    throw ValidationError("Basis: columns are not orthonormal");
  }
}

Basis Basis::standard(std::size_t dim, std::string label) {
  return Basis(ComplexMatrix::identity(dim), std::move(label));
}

double shannon_entropy(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p) {
    const double q = clip_probability(x, "shannon_entropy");
    if (q > 0.0) s -= q * log2_clamped(q);
  }
  return s < 0.0 ? 0.0 : s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return shannon_entropy(rho.eigenvalues());
}

std::optional<double> relative_entropy(const DensityMatrix& rho,
                                       const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionError("relative_entropy: dimension mismatch");
  }
  const linalg::Spectrum spec = linalg::hermitian_eig(sigma.mat());
  const std::size_t n = rho.dim();

  // Weights w_k = <v_k| rho |v_k> of rho in sigma's eigenbasis.
  std::vector<double> w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex row = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        row += rho.mat()(i, j) * spec.eigenvectors(j, k);
      acc += std::conj(spec.eigenvectors(i, k)) * row;
    }
    w[k] = clip_probability(acc.real(), "relative_entropy");
  }

  double outside_mass = 0.0;
  double cross = 0.0; // -Tr(rho log2 sigma) over the support
  for (std::size_t k = 0; k < n; ++k) {
    if (spec.eigenvalues[k] <= kSupportTol) {
      outside_mass += w[k];
    } else if (w[k] > 0.0) {
      cross -= w[k] * log2_clamped(spec.eigenvalues[k]);
    }
  }
  if (outside_mass > 1e-10) return std::nullopt;

  double value = cross - von_neumann_entropy(rho);
  if (value < 0.0) {
    if (value < -1e-8) {
      throw ConsistencyError("relative_entropy: significantly negative result");
    }
    value = 0.0;
  }
  return value;
}

DensityMatrix dephase(const DensityMatrix& rho, const Basis& b) {
  if (rho.dim() != b.dim()) {
    throw DimensionError("dephase: basis dimension mismatch");
  }
  const std::size_t n = rho.dim();
  const ComplexMatrix& cols = b.columns();
  ComplexMatrix out(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    // p_k = <b_k| rho |b_k>
    Complex acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += rho.mat()(i, j) * cols(j, k);
      acc += std::conj(cols(i, k)) * row;
    }
    const double pk = clip_probability(acc.real(), "dephase");
    // out += p_k |b_k><b_k|
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        out(i, j) += pk * cols(i, k) * std::conj(cols(j, k));
  }
  return DensityMatrix(std::move(out));
}

double coherence_rel_ent(const DensityMatrix& rho, const Basis& b) {
  if (rho.dim() != b.dim()) {
    throw DimensionError("coherence_rel_ent: basis dimension mismatch");
  }
  const std::size_t n = rho.dim();
  const ComplexMatrix& cols = b.columns();
  std::vector<double> p(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex row = 0.0;
      for (std::size_t j = 0; j < n; ++j) row += rho.mat()(i, j) * cols(j, k);
      acc += std::conj(cols(i, k)) * row;
    }
    p[k] = clip_probability(acc.real(), "coherence_rel_ent");
  }
  double c = shannon_entropy(p) - von_neumann_entropy(rho);
  if (c < 0.0) {
    if (c < -1e-8) {
      throw ConsistencyError("coherence_rel_ent: significantly negative result");
    }
    c = 0.0;
  }
  return c;
}

PureState purify(const DensityMatrix& rho) {
  const std::size_t n = rho.dim();
  linalg::Spectrum spec = linalg::hermitian_eig(rho.mat());
  std::vector<Complex> psi(n * n, Complex(0.0, 0.0));
  // Pair eigenvalues with reference-system labels in descending order so
  // the largest weight sits on |e_0>.
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = n - 1 - r;
    double lam = spec.eigenvalues[k];
    if (lam < 0.0) lam = 0.0;
    if (lam == 0.0) continue;
    const double root = std::sqrt(lam);
    for (std::size_t a = 0; a < n; ++a)
      psi[a * n + r] = root * spec.eigenvectors(a, k);
  }
  return PureState(std::move(psi));
}

} // namespace qmeas::states
