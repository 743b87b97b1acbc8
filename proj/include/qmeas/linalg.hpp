#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <vector>

#include "qmeas/errors.hpp"

namespace qmeas::linalg {

using Complex = std::complex<double>;

// Clipping floor for density-like spectra: eigenvalues in
// [kEigClipFloor, 0) are rounded-off zeros; anything more negative marks
// a genuinely indefinite input. Enforced by callers that expect positive
// semidefinite matrices (the eigensolvers themselves return raw values).
inline constexpr double kEigClipFloor = -1e-12;

// Default stopping tolerance for the Jacobi eigensolvers (off-diagonal
// Frobenius mass relative to the matrix norm).
inline constexpr double kDefaultEigTol = 1e-10;

// Hard sweep budget for the Jacobi eigensolvers.
inline constexpr int kMaxJacobiSweeps = 100;

// Dense row-major complex matrix. Storage is a flat vector; entry (r, c)
// lives at r * cols + c.
class ComplexMatrix {
public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  // Convenience constructor for tests and probes.
  static ComplexMatrix from_rows(
      std::initializer_list<std::initializer_list<Complex>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  std::size_t size() const { return data_.size(); }

  Complex& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  const Complex& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  Complex* data() { return data_.data(); }
  const Complex* data() const { return data_.data(); }

  bool same_shape(const ComplexMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, const ComplexMatrix& a);
ComplexMatrix operator*(double s, const ComplexMatrix& a);

// Conjugate transpose.
ComplexMatrix dagger(const ComplexMatrix& a);

Complex trace(const ComplexMatrix& a);

// Largest entry magnitude (max norm).
double max_abs(const ComplexMatrix& a);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

// max norm of A - A†.
double hermiticity_defect(const ComplexMatrix& a);

// Frobenius norm.
double frobenius_norm(const ComplexMatrix& a);

// U * A * U†.
ComplexMatrix conjugate_by(const ComplexMatrix& u, const ComplexMatrix& a);

// Hermitian inner product Tr(A† B); real for Hermitian operands
// (imaginary part discarded).
double inner_real(const ComplexMatrix& a, const ComplexMatrix& b);

std::vector<Complex> matvec(const ComplexMatrix& a,
                            const std::vector<Complex>& v);

// |v><v|
ComplexMatrix outer(const std::vector<Complex>& v);

// Kronecker product of vectors, row-major factor convention: entry
// index is i_a * dim_b + i_b.
std::vector<Complex> kron_vec(const std::vector<Complex>& a,
                              const std::vector<Complex>& b);

struct Spectrum {
  // Ascending, unclipped.
  std::vector<double> eigenvalues;
  // Orthonormal eigenvector columns matching eigenvalue order; empty
  // when only eigenvalues were requested.
  ComplexMatrix eigenvectors;
};

// Full eigendecomposition of a Hermitian matrix via the round-robin
// parallel Jacobi scheme. Results are identical for any thread count.
Spectrum hermitian_eig(const ComplexMatrix& h, double eig_tol = kDefaultEigTol);

// Eigenvalues only; skips eigenvector accumulation.
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& h,
                                          double eig_tol = kDefaultEigTol);

// Serial cyclic Jacobi reference implementation (kept for testing and
// benchmark comparison against the round-robin scheme).
Spectrum hermitian_eig_serial(const ComplexMatrix& h,
                              double eig_tol = kDefaultEigTol);

// Kronecker product, row-major composite index (i_a * dim_b + i_b).
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

// Trace out every factor not listed in `keep`. `dims` are the factor
// dimensions in index order; `keep` holds factor positions (ascending).
ComplexMatrix partial_trace(const ComplexMatrix& rho,
                            const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& keep);

// Transpose one factor of a bipartite operator in the computational
// product basis. `factor` is 0 or 1.
ComplexMatrix partial_transpose(const ComplexMatrix& rho, std::size_t dim_a,
                                std::size_t dim_b, std::size_t factor);

// V f(D) V† for Hermitian input with spectrum D. f receives the raw
// eigenvalues and may throw DomainError outside its domain.
ComplexMatrix spectral_apply(const ComplexMatrix& h,
                             const std::function<double(double)>& f,
                             double eig_tol = kDefaultEigTol);

namespace detail {

// Serial reference kernels, exercised by the unit tests and the
// benchmark tool to validate and time the parallel versions.
ComplexMatrix matmul_serial(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix tensor_serial(const ComplexMatrix& a, const ComplexMatrix& b);

} // namespace detail

} // namespace qmeas::linalg
