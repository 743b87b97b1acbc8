#include "qmeas/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "qmeas/errors.hpp"

namespace qmeas::measurement {

namespace {

// Apparatus eigenbasis columns ordered by descending weight, matching
// the pairing convention of states::purify.
std::pair<states::Basis, std::vector<double>> descending_eigenbasis(
    const states::DensityMatrix& apparatus) {
  linalg::Spectrum spec = linalg::hermitian_eig(apparatus.mat());
  const std::size_t n = apparatus.dim();
  ComplexMatrix cols(n, n);
  std::vector<double> weights(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = n - 1 - r;
    double lam = spec.eigenvalues[k];
    weights[r] = lam < 0.0 ? 0.0 : lam;
    for (std::size_t i = 0; i < n; ++i) cols(i, r) = spec.eigenvectors(i, k);
  }
  return {states::Basis(std::move(cols), "apparatus-eigen"), std::move(weights)};
}

} // namespace

RecordValidation validate_records(const std::vector<ComplexMatrix>& records,
                                  const states::Basis& apparatus_basis,
                                  double tol) {
  const std::size_t n = apparatus_basis.dim();
  RecordValidation out;
  for (const ComplexMatrix& v : records) {
    if (!v.square() || v.rows() != n) {
      throw DimensionError("validate_records: record has wrong shape");
    }
    const double defect = linalg::max_abs_diff(
        linalg::dagger(v) * v, ComplexMatrix::identity(n));
    out.worst_unitarity = std::max(out.worst_unitarity, defect);
  }
  const ComplexMatrix& b = apparatus_basis.columns();
  for (std::size_t j = 0; j < records.size(); ++j) {
    for (std::size_t k = 0; k < records.size(); ++k) {
      if (j == k) continue;
      ComplexMatrix prod = linalg::dagger(records[j]) * records[k];
      // Diagonal of V_j† V_k in the apparatus eigenbasis.
      for (std::size_t i = 0; i < n; ++i) {
        Complex acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          Complex row = 0.0;
          for (std::size_t c = 0; c < n; ++c) row += prod(r, c) * b(c, i);
          acc += std::conj(b(r, i)) * row;
        }
        out.worst_overlap = std::max(out.worst_overlap, std::abs(acc));
      }
    }
  }
  out.accepted = out.worst_overlap <= tol && out.worst_unitarity <= tol;
  return out;
}

MeasurementModel::MeasurementModel(std::vector<Complex> amplitudes,
                                   states::DensityMatrix apparatus,
                                   std::vector<ComplexMatrix> records,
                                   double tol)
    : amplitudes_(std::move(amplitudes)),
      apparatus_(std::move(apparatus)),
      apparatus_basis_(states::Basis::standard(1)),
      records_(std::move(records)) {
  if (amplitudes_.empty()) {
    throw DimensionError("MeasurementModel: no system amplitudes");
  }
  if (records_.size() != amplitudes_.size()) {
    throw DimensionError(
        "MeasurementModel: need one record per system basis label");
  }
  double norm2 = 0.0;
  for (const Complex& s : amplitudes_) norm2 += std::norm(s);
  if (std::abs(norm2 - 1.0) > tol) {
    throw ValidationError("MeasurementModel: amplitudes not normalized");
  }
  auto [basis, weights] = descending_eigenbasis(apparatus_);
  apparatus_basis_ = std::move(basis);
  weights_ = std::move(weights);
  RecordValidation rv = validate_records(records_, apparatus_basis_, tol);
  if (!rv.accepted) {
    std::ostringstream os;
    os << "MeasurementModel: records rejected (overlap " << rv.worst_overlap
       << ", unitarity " << rv.worst_unitarity << ")";
    throw ValidationError(os.str());
  }
}

MeasurementModel build_controlled_shift(std::size_t m, std::size_t n,
                                        std::vector<Complex> amplitudes,
                                        states::DensityMatrix apparatus) {
  if (n < m) {
    throw DimensionError(
        "build_controlled_shift: apparatus must be at least system-sized");
  }
  if (amplitudes.size() != m || apparatus.dim() != n) {
    throw DimensionError("build_controlled_shift: dimension mismatch");
  }
  auto [basis, weights] = descending_eigenbasis(apparatus);
  (void)weights;
  const ComplexMatrix& b = basis.columns();
  std::vector<ComplexMatrix> records;
  records.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    // V_j = sum_i |a_{(i+j) mod N}><a_i|
    ComplexMatrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t t = (i + j) % n;
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
          v(r, c) += b(r, t) * std::conj(b(c, i));
    }
    records.push_back(std::move(v));
  }
  return MeasurementModel(std::move(amplitudes), std::move(apparatus),
                          std::move(records));
}

ComplexMatrix build_joint_unitary(const MeasurementModel& model) {
  const std::size_t m = model.system_dim();
  const std::size_t n = model.apparatus_dim();
  ComplexMatrix u(m * n, m * n);
  for (std::size_t j = 0; j < m; ++j) {
    const ComplexMatrix& v = model.records()[j];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c)
        u(j * n + r, j * n + c) = v(r, c);
  }
  return u;
}

const ComplexMatrix& FinalState::block(std::size_t i, std::size_t j) const {
  return blocks[i * system_dim() + j];
}

FinalState evolve(const MeasurementModel& model) {
  const std::size_t m = model.system_dim();
  const std::size_t n = model.apparatus_dim();
  const std::vector<Complex>& s = model.amplitudes();

  std::vector<ComplexMatrix> blocks;
  blocks.reserve(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      blocks.push_back(model.records()[i] *
                       (model.apparatus().mat() *
                        linalg::dagger(model.records()[j])));

  ComplexMatrix joint(m * n, m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Complex w = s[i] * std::conj(s[j]);
      const ComplexMatrix& blk = blocks[i * m + j];
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
          joint(i * n + r, j * n + c) = w * blk(r, c);
    }

  ComplexMatrix app_final(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double w = std::norm(s[i]);
    const ComplexMatrix& blk = blocks[i * m + i];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) app_final(r, c) += w * blk(r, c);
  }

  ComplexMatrix sys_final(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      sys_final(i, j) = s[i] * std::conj(s[j]) * linalg::trace(blocks[i * m + j]);

  // Tripartite vector sum_i s_i |s_i> (V_i (x) I) |psi_AE>.
  states::PureState psi_ae = states::purify(model.apparatus());
  std::vector<Complex> tri(m * n * n, Complex(0.0, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    if (s[i] == Complex(0.0, 0.0)) continue;
    const ComplexMatrix& v = model.records()[i];
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t e = 0; e < n; ++e) {
        Complex acc = 0.0;
        for (std::size_t b = 0; b < n; ++b)
          acc += v(a, b) * psi_ae.amplitudes()[b * n + e];
        tri[i * n * n + a * n + e] = s[i] * acc;
      }
  }

  return FinalState{states::DensityMatrix(std::move(joint)),
                    std::move(blocks),
                    states::DensityMatrix(std::move(app_final)),
                    states::DensityMatrix(std::move(sys_final)),
                    states::PureState(std::move(tri))};
}

ComplexMatrix ApparatusChannel::apply(const ComplexMatrix& rho) const {
  if (kraus.empty()) throw ValidationError("ApparatusChannel: no Kraus terms");
  if (!rho.square() || rho.rows() != dim()) {
    throw DimensionError("ApparatusChannel: input has wrong shape");
  }
  ComplexMatrix out(dim(), dim());
  for (const ComplexMatrix& a : kraus) {
    ComplexMatrix term = a * (rho * linalg::dagger(a));
    for (std::size_t i = 0; i < out.size(); ++i)
      out.data()[i] += term.data()[i];
  }
  return out;
}

ApparatusChannel apparatus_channel(const MeasurementModel& model) {
  ApparatusChannel ch;
  const std::size_t n = model.apparatus_dim();
  ch.kraus.reserve(model.system_dim());
  for (std::size_t i = 0; i < model.system_dim(); ++i) {
    ComplexMatrix a(n, n);
    const Complex s = model.amplitudes()[i];
    const ComplexMatrix& v = model.records()[i];
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) a(r, c) = s * v(r, c);
    ch.kraus.push_back(std::move(a));
  }
  ComplexMatrix comp(n, n);
  for (const ComplexMatrix& a : ch.kraus) {
    ComplexMatrix term = linalg::dagger(a) * a;
    for (std::size_t i = 0; i < comp.size(); ++i)
      comp.data()[i] += term.data()[i];
  }
  if (linalg::max_abs_diff(comp, ComplexMatrix::identity(n)) > kModelTol) {
    throw ValidationError("apparatus_channel: Kraus completeness failed");
  }
  return ch;
}

} // namespace qmeas::measurement
