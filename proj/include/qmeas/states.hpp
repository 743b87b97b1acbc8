#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmeas/linalg.hpp"

namespace qmeas::states {

using linalg::Complex;
using linalg::ComplexMatrix;

// Hermiticity / trace / norm validation tolerance for state types.
inline constexpr double kStateTol = 1e-10;

// Eigenvalues at or below this are outside the support (drives the
// Infinite sentinel of relative_entropy).
inline constexpr double kSupportTol = 1e-12;

// Validated density operator. Eigenvalues are computed once at
// construction (ascending, with round-off negatives clipped to zero) and
// shared by every entropy call; the object is immutable afterwards.
class DensityMatrix {
public:
  explicit DensityMatrix(ComplexMatrix mat, double tol = kStateTol);

  std::size_t dim() const { return mat_.rows(); }
  const ComplexMatrix& mat() const { return mat_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

private:
  ComplexMatrix mat_;
  std::vector<double> eigenvalues_;
};

// Normalized state vector.
class PureState {
public:
  explicit PureState(std::vector<Complex> amplitudes, double tol = kStateTol);

  std::size_t dim() const { return amp_.size(); }
  const std::vector<Complex>& amplitudes() const { return amp_; }
  ComplexMatrix projector() const { return linalg::outer(amp_); }
  DensityMatrix density() const { return DensityMatrix(projector()); }

private:
  std::vector<Complex> amp_;
};

// Orthonormal basis given by unitary columns.
class Basis {
public:
  explicit Basis(ComplexMatrix columns, std::string label = "",
                 double tol = kStateTol);
  static Basis standard(std::size_t dim, std::string label = "standard");

  std::size_t dim() const { return columns_.rows(); }
  const ComplexMatrix& columns() const { return columns_; }
  const std::string& label() const { return label_; }

private:
  ComplexMatrix columns_;
  std::string label_;
};

// -sum p log2 p over a probability list; entries in [-1e-12, 0) are
// treated as round-off zeros, more negative entries are rejected.
double shannon_entropy(const std::vector<double>& p);

// S(rho) in bits.
double von_neumann_entropy(const DensityMatrix& rho);

// S(rho||sigma) in bits; std::nullopt is the Infinite sentinel, returned
// when rho carries more than 1e-10 mass outside sigma's support.
std::optional<double> relative_entropy(const DensityMatrix& rho,
                                       const DensityMatrix& sigma);

// Diagonal part of rho in basis b, as an operator.
DensityMatrix dephase(const DensityMatrix& rho, const Basis& b);

// Relative entropy of coherence S(rho^D) - S(rho) with respect to b.
double coherence_rel_ent(const DensityMatrix& rho, const Basis& b);

// Standard purification on a doubled space: sum_i sqrt(a_i)|a_i>|e_i>
// with eigenvalues paired in descending order and {|e_i>} the standard
// basis of the second factor.
PureState purify(const DensityMatrix& rho);

} // namespace qmeas::states
