#include "qmeas/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <utility>

namespace qmeas::linalg {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                        const char* op) {
  if (!a.same_shape(b)) {
    std::ostringstream os;
    os << op << ": shape mismatch (" << a.rows() << "x" << a.cols() << " vs "
       << b.rows() << "x" << b.cols() << ")";
    throw DimensionError(os.str());
  }
}

void require_square(const ComplexMatrix& a, const char* op) {
  if (!a.square() || a.rows() == 0) {
    std::ostringstream os;
    os << op << ": expected non-empty square matrix, got " << a.rows() << "x"
       << a.cols();
    throw DimensionError(os.str());
  }
}

} // namespace

ComplexMatrix ComplexMatrix::from_rows(
    std::initializer_list<std::initializer_list<Complex>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  ComplexMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) {
      throw DimensionError("from_rows: ragged row lengths");
    }
    std::size_t j = 0;
    for (const auto& z : row) m(i, j++) = z;
    ++i;
  }
  return m;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "operator+");
  ComplexMatrix c(a.rows(), a.cols());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) c.data()[i] = a.data()[i] + b.data()[i];
  return c;
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "operator-");
  ComplexMatrix c(a.rows(), a.cols());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

ComplexMatrix operator*(Complex s, const ComplexMatrix& a) {
  ComplexMatrix c(a.rows(), a.cols());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) c.data()[i] = s * a.data()[i];
  return c;
}

ComplexMatrix operator*(double s, const ComplexMatrix& a) {
  return Complex(s, 0.0) * a;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "operator*: inner dimension mismatch (" << a.rows() << "x"
       << a.cols() << " times " << b.rows() << "x" << b.cols() << ")";
    throw DimensionError(os.str());
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  ComplexMatrix c(m, n);
  // Each output row is accumulated serially by a single thread, so the
  // result does not depend on the thread count.
#pragma omp parallel for schedule(static) if (m >= 32)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(m); ++i) {
    Complex* crow = c.data() + static_cast<std::size_t>(i) * n;
    const Complex* arow = a.data() + static_cast<std::size_t>(i) * k;
    for (std::size_t l = 0; l < k; ++l) {
      const Complex ail = arow[l];
      if (ail == Complex(0.0, 0.0)) continue;
      const Complex* brow = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

ComplexMatrix detail::matmul_serial(const ComplexMatrix& a,
                                    const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul_serial: inner dimension mismatch");
  }
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  ComplexMatrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    Complex* crow = c.data() + i * n;
    const Complex* arow = a.data() + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const Complex ail = arow[l];
      if (ail == Complex(0.0, 0.0)) continue;
      const Complex* brow = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ail * brow[j];
    }
  }
  return c;
}

ComplexMatrix dagger(const ComplexMatrix& a) {
  ComplexMatrix c(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      c(j, i) = std::conj(a(i, j));
  return c;
}

Complex trace(const ComplexMatrix& a) {
  require_square(a, "trace");
  Complex t = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
  return t;
}

double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i]));
  return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double hermiticity_defect(const ComplexMatrix& a) {
  require_square(a, "hermiticity_defect");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j)
      m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

double frobenius_norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a.data()[i]);
  return std::sqrt(s);
}

ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& a) {
  return u * (a * dagger(u));
}

double inner_real(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "inner_real");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (std::conj(a.data()[i]) * b.data()[i]).real();
  return s;
}

std::vector<Complex> matvec(const ComplexMatrix& a,
                            const std::vector<Complex>& v) {
  if (a.cols() != v.size()) {
    throw DimensionError("matvec: dimension mismatch");
  }
  std::vector<Complex> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Complex s = 0.0;
    const Complex* arow = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) s += arow[j] * v[j];
    out[i] = s;
  }
  return out;
}

ComplexMatrix outer(const std::vector<Complex>& v) {
  ComplexMatrix m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

std::vector<Complex> kron_vec(const std::vector<Complex>& a,
                              const std::vector<Complex>& b) {
  std::vector<Complex> out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      out[i * b.size() + j] = a[i] * b[j];
  return out;
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t ra = a.rows(), ca = a.cols();
  const std::size_t rb = b.rows(), cb = b.cols();
  if (ra == 0 || rb == 0) throw DimensionError("tensor: empty operand");
  ComplexMatrix c(ra * rb, ca * cb);
#pragma omp parallel for schedule(static) if (ra * rb >= 64)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(ra * rb); ++r) {
    const std::size_t ia = static_cast<std::size_t>(r) / rb;
    const std::size_t ib = static_cast<std::size_t>(r) % rb;
    Complex* crow = c.data() + static_cast<std::size_t>(r) * (ca * cb);
    const Complex* arow = a.data() + ia * ca;
    const Complex* brow = b.data() + ib * cb;
    for (std::size_t ja = 0; ja < ca; ++ja) {
      const Complex aja = arow[ja];
      Complex* seg = crow + ja * cb;
      for (std::size_t jb = 0; jb < cb; ++jb) seg[jb] = aja * brow[jb];
    }
  }
  return c;
}

ComplexMatrix detail::tensor_serial(const ComplexMatrix& a,
                                    const ComplexMatrix& b) {
  const std::size_t ra = a.rows(), ca = a.cols();
  const std::size_t rb = b.rows(), cb = b.cols();
  if (ra == 0 || rb == 0) throw DimensionError("tensor_serial: empty operand");
  ComplexMatrix c(ra * rb, ca * cb);
  for (std::size_t ia = 0; ia < ra; ++ia)
    for (std::size_t ib = 0; ib < rb; ++ib) {
      Complex* crow = c.data() + (ia * rb + ib) * (ca * cb);
      const Complex* arow = a.data() + ia * ca;
      const Complex* brow = b.data() + ib * cb;
      for (std::size_t ja = 0; ja < ca; ++ja)
        for (std::size_t jb = 0; jb < cb; ++jb)
          crow[ja * cb + jb] = arow[ja] * brow[jb];
    }
  return c;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep) {
  require_square(rho, "partial_trace");
  std::size_t total = 1;
  for (std::size_t d : dims) {
    if (d == 0) throw DimensionError("partial_trace: zero factor dimension");
    total *= d;
  }
  if (total != rho.rows()) {
    throw DimensionError(
        "partial_trace: factor dimensions do not multiply to matrix size");
  }
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= dims.size())
      throw DimensionError("partial_trace: keep index out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw DimensionError("partial_trace: keep indices must be ascending");
  }

  // Composite index strides per factor (row-major).
  std::vector<std::size_t> stride(dims.size());
  {
    std::size_t s = 1;
    for (std::size_t k = dims.size(); k-- > 0;) {
      stride[k] = s;
      s *= dims[k];
    }
  }

  std::vector<std::size_t> traced;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    if (std::find(keep.begin(), keep.end(), k) == keep.end())
      traced.push_back(k);
  }

  // Enumerate composite offsets of kept and traced multi-indices.
  auto offsets = [&](const std::vector<std::size_t>& factors) {
    std::vector<std::size_t> out{0};
    for (std::size_t k : factors) {
      std::vector<std::size_t> next;
      next.reserve(out.size() * dims[k]);
      for (std::size_t base : out)
        for (std::size_t i = 0; i < dims[k]; ++i)
          next.push_back(base + i * stride[k]);
      out = std::move(next);
    }
    return out;
  };
  const std::vector<std::size_t> kept_off = offsets(keep);
  const std::vector<std::size_t> traced_off = offsets(traced);

  const std::size_t n_out = kept_off.size();
  ComplexMatrix out(n_out, n_out);
  const std::size_t n = rho.rows();
#pragma omp parallel for schedule(static) if (n_out >= 64)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n_out); ++i) {
    const std::size_t row_base = kept_off[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < n_out; ++j) {
      const std::size_t col_base = kept_off[j];
      Complex s = 0.0;
      for (std::size_t t : traced_off)
        s += rho.data()[(row_base + t) * n + (col_base + t)];
      out(static_cast<std::size_t>(i), j) = s;
    }
  }
  return out;
}

ComplexMatrix partial_transpose(const ComplexMatrix& rho, std::size_t dim_a,
                                std::size_t dim_b, std::size_t factor) {
  require_square(rho, "partial_transpose");
  if (dim_a * dim_b != rho.rows()) {
    throw DimensionError("partial_transpose: dimensions do not match matrix");
  }
  if (factor > 1) throw DimensionError("partial_transpose: factor must be 0 or 1");
  ComplexMatrix out(rho.rows(), rho.cols());
  for (std::size_t ia = 0; ia < dim_a; ++ia)
    for (std::size_t ib = 0; ib < dim_b; ++ib)
      for (std::size_t ja = 0; ja < dim_a; ++ja)
        for (std::size_t jb = 0; jb < dim_b; ++jb) {
          const std::size_t r = ia * dim_b + ib;
          const std::size_t c = ja * dim_b + jb;
          if (factor == 0)
            out(r, c) = rho(ja * dim_b + ib, ia * dim_b + jb);
          else
            out(r, c) = rho(ia * dim_b + jb, ja * dim_b + ib);
        }
  return out;
}

// ---------------------------------------------------------------------------
// Jacobi eigensolvers
// ---------------------------------------------------------------------------

namespace {

struct Rotation {
  std::size_t p, q;
  double c, s;
  Complex phase; // unit modulus, carries the phase of the (p, q) entry
};

// off-diagonal Frobenius norm.
double off_norm(const std::vector<Complex>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q)
      s += 2.0 * std::norm(a[p * n + q]);
  return std::sqrt(s);
}

// Parameters of the two-sided rotation zeroing entry (p, q) of the
// current matrix. Returns false when the entry is already below the
// skip threshold.
bool make_rotation(const std::vector<Complex>& a, std::size_t n,
                   std::size_t p, std::size_t q, double skip, Rotation& rot) {
  const Complex b = a[p * n + q];
  const double absb = std::abs(b);
  if (absb <= skip) return false;
  const double app = a[p * n + p].real();
  const double aqq = a[q * n + q].real();
  const double tau = (aqq - app) / (2.0 * absb);
  const double sign = tau >= 0.0 ? 1.0 : -1.0;
  const double t = -sign / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  rot = Rotation{p, q, c, t * c, b / absb};
  return true;
}

// Left action: rows p and q of A <- J† A.
void rotate_rows(std::vector<Complex>& a, std::size_t n, const Rotation& r) {
  Complex* rp = a.data() + r.p * n;
  Complex* rq = a.data() + r.q * n;
  const Complex sp = r.s * r.phase;
  const Complex spc = std::conj(sp);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex xp = rp[k], xq = rq[k];
    rp[k] = r.c * xp + sp * xq;
    rq[k] = r.c * xq - spc * xp;
  }
}

// Right action: columns p and q of A <- A J.
void rotate_cols(std::vector<Complex>& a, std::size_t n, const Rotation& r) {
  const Complex spc = r.s * std::conj(r.phase);
  const Complex sp = std::conj(spc);
  Complex* base = a.data();
  for (std::size_t k = 0; k < n; ++k) {
    Complex* row = base + k * n;
    const Complex xp = row[r.p], xq = row[r.q];
    row[r.p] = r.c * xp + spc * xq;
    row[r.q] = r.c * xq - sp * xp;
  }
}

struct JacobiResult {
  std::vector<double> eigenvalues;
  std::vector<Complex> vectors; // row-major n x n, empty if not requested
};

std::vector<Complex> symmetrized_copy(const ComplexMatrix& h) {
  const std::size_t n = h.rows();
  std::vector<Complex> a(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      a[i * n + j] = 0.5 * (h(i, j) + std::conj(h(j, i)));
    a[i * n + i] = Complex(h(i, i).real(), 0.0);
  }
  return a;
}

void check_hermitian(const ComplexMatrix& h, const char* who) {
  require_square(h, who);
  const double scale = std::max(1.0, max_abs(h));
  if (hermiticity_defect(h) > 1e-9 * scale) {
    throw NotHermitianError(std::string(who) + ": input is not Hermitian");
  }
}

JacobiResult finalize(std::vector<Complex> a, std::vector<Complex> v,
                      std::size_t n, bool want_vectors) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a[i * n + i].real();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] < diag[y]; });
  JacobiResult res;
  res.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.eigenvalues[i] = diag[order[i]];
  if (want_vectors) {
    res.vectors.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        res.vectors[i * n + j] = v[i * n + order[j]];
  }
  return res;
}

// Round-robin parallel Jacobi. Rotation parameters for each round are
// computed from the pre-round matrix; the index pairs within a round are
// disjoint, so row and column updates touch disjoint memory and the
// result is identical for any thread count.
JacobiResult jacobi_round_robin(const ComplexMatrix& h, double eig_tol,
                                bool want_vectors, const char* who) {
  check_hermitian(h, who);
  const std::size_t n = h.rows();
  std::vector<Complex> a = symmetrized_copy(h);
  std::vector<Complex> v;
  if (want_vectors) {
    v.assign(n * n, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  if (n == 1) return finalize(std::move(a), std::move(v), n, want_vectors);

  const double fro = frobenius_norm(h);
  const double stop = 0.01 * eig_tol * std::max(1.0, fro);
  const double skip = stop / static_cast<double>(n);

  const std::size_t m = (n % 2 == 0) ? n : n + 1; // pad with a bye slot
  std::vector<Rotation> active;
  active.reserve(m / 2);

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off_norm(a, n) <= stop)
      return finalize(std::move(a), std::move(v), n, want_vectors);
    for (std::size_t round = 0; round + 1 < m; ++round) {
      active.clear();
      for (std::size_t i = 0; i < m / 2; ++i) {
        std::size_t p, q;
        if (i == 0) {
          p = m - 1;
          q = round % (m - 1);
        } else {
          p = (round + i) % (m - 1);
          q = (round + m - 1 - i) % (m - 1);
        }
        if (p >= n || q >= n) continue; // bye slot on odd sizes
        if (p > q) std::swap(p, q);
        Rotation rot;
        if (make_rotation(a, n, p, q, skip, rot)) active.push_back(rot);
      }
      if (active.empty()) continue;
      const std::ptrdiff_t nr = static_cast<std::ptrdiff_t>(active.size());
#pragma omp parallel for schedule(static) if (n >= 64)
      for (std::ptrdiff_t t = 0; t < nr; ++t)
        rotate_rows(a, n, active[static_cast<std::size_t>(t)]);
#pragma omp parallel for schedule(static) if (n >= 64)
      for (std::ptrdiff_t t = 0; t < nr; ++t) {
        rotate_cols(a, n, active[static_cast<std::size_t>(t)]);
        if (want_vectors) rotate_cols(v, n, active[static_cast<std::size_t>(t)]);
      }
    }
  }
  if (off_norm(a, n) <= stop)
    return finalize(std::move(a), std::move(v), n, want_vectors);
  throw NoConvergenceError(std::string(who) +
                           ": Jacobi sweep budget exhausted");
}

// Serial cyclic Jacobi reference: rotations are computed and applied one
// pair at a time in row-cyclic order.
JacobiResult jacobi_cyclic_serial(const ComplexMatrix& h, double eig_tol,
                                  bool want_vectors, const char* who) {
  check_hermitian(h, who);
  const std::size_t n = h.rows();
  std::vector<Complex> a = symmetrized_copy(h);
  std::vector<Complex> v;
  if (want_vectors) {
    v.assign(n * n, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  if (n == 1) return finalize(std::move(a), std::move(v), n, want_vectors);

  const double fro = frobenius_norm(h);
  const double stop = 0.01 * eig_tol * std::max(1.0, fro);
  const double skip = stop / static_cast<double>(n);

  for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
    if (off_norm(a, n) <= stop)
      return finalize(std::move(a), std::move(v), n, want_vectors);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        Rotation rot;
        if (!make_rotation(a, n, p, q, skip, rot)) continue;
        rotate_rows(a, n, rot);
        rotate_cols(a, n, rot);
        if (want_vectors) rotate_cols(v, n, rot);
      }
  }
  if (off_norm(a, n) <= stop)
    return finalize(std::move(a), std::move(v), n, want_vectors);
  throw NoConvergenceError(std::string(who) +
                           ": Jacobi sweep budget exhausted");
}

Spectrum to_spectrum(JacobiResult r, std::size_t n) {
  Spectrum s;
  s.eigenvalues = std::move(r.eigenvalues);
  if (!r.vectors.empty()) {
    s.eigenvectors = ComplexMatrix(n, n);
    std::copy(r.vectors.begin(), r.vectors.end(), s.eigenvectors.data());
  }
  return s;
}

} // namespace

Spectrum hermitian_eig(const ComplexMatrix& h, double eig_tol) {
  return to_spectrum(jacobi_round_robin(h, eig_tol, true, "hermitian_eig"),
                     h.rows());
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h,
                                          double eig_tol) {
  return jacobi_round_robin(h, eig_tol, false, "hermitian_eigenvalues")
      .eigenvalues;
}

Spectrum hermitian_eig_serial(const ComplexMatrix& h, double eig_tol) {
  return to_spectrum(
      jacobi_cyclic_serial(h, eig_tol, true, "hermitian_eig_serial"), h.rows());
}

ComplexMatrix spectral_apply(const ComplexMatrix& h,
                             const std::function<double(double)>& f,
                             double eig_tol) {
  Spectrum s = hermitian_eig(h, eig_tol);
  const std::size_t n = h.rows();
  ComplexMatrix scaled = s.eigenvectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double fj = f(s.eigenvalues[j]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= fj;
  }
  return scaled * dagger(s.eigenvectors);
}

} // namespace qmeas::linalg
