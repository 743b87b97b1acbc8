#pragma once

#include <vector>

#include "qmeas/linalg.hpp"
#include "qmeas/states.hpp"

namespace qmeas::measurement {

using linalg::Complex;
using linalg::ComplexMatrix;

inline constexpr double kModelTol = 1e-10;

struct RecordValidation {
  bool accepted = false;
  // max |<a_i| V_j† V_k |a_i>| over j != k.
  double worst_overlap = 0.0;
  // max unitarity defect over the records.
  double worst_unitarity = 0.0;
};

// Checks that each record is unitary and that the diagonal of V_j† V_k
// in the apparatus eigenbasis vanishes for j != k.
RecordValidation validate_records(const std::vector<ComplexMatrix>& records,
                                  const states::Basis& apparatus_basis,
                                  double tol = kModelTol);

// Pure system state, mixed apparatus, and one record unitary per system
// basis label. The system basis is the standard basis of the M-dim
// space; the apparatus eigenbasis is ordered by descending weight.
class MeasurementModel {
public:
  MeasurementModel(std::vector<Complex> amplitudes,
                   states::DensityMatrix apparatus,
                   std::vector<ComplexMatrix> records, double tol = kModelTol);

  std::size_t system_dim() const { return amplitudes_.size(); }
  std::size_t apparatus_dim() const { return apparatus_.dim(); }
  const std::vector<Complex>& amplitudes() const { return amplitudes_; }
  const states::DensityMatrix& apparatus() const { return apparatus_; }
  // Eigenbasis of the initial apparatus state, descending weights.
  const states::Basis& apparatus_basis() const { return apparatus_basis_; }
  const std::vector<double>& apparatus_weights() const { return weights_; }
  const std::vector<ComplexMatrix>& records() const { return records_; }
  states::PureState system_state() const {
    return states::PureState(amplitudes_);
  }

private:
  std::vector<Complex> amplitudes_;
  states::DensityMatrix apparatus_;
  states::Basis apparatus_basis_;
  std::vector<double> weights_;
  std::vector<ComplexMatrix> records_;
};

// Record family V_j = X^j where X cyclically shifts the apparatus
// eigenbasis; satisfies the record condition whenever M <= N.
MeasurementModel build_controlled_shift(std::size_t m, std::size_t n,
                                        std::vector<Complex> amplitudes,
                                        states::DensityMatrix apparatus);

// U = sum_j |s_j><s_j| (x) V_j on the joint space.
ComplexMatrix build_joint_unitary(const MeasurementModel& model);

struct FinalState {
  states::DensityMatrix joint;           // post-interaction system+apparatus
  std::vector<ComplexMatrix> blocks;     // row-major M x M list of V_i rho_A V_j†
  states::DensityMatrix apparatus_final; // sum_i |s_i|^2 rho_ii
  states::DensityMatrix system_final;    // entries s_i s_j* Tr(rho_ij)
  states::PureState tripartite;          // joint purified against the environment

  const ComplexMatrix& block(std::size_t i, std::size_t j) const;
  std::size_t system_dim() const { return system_final.dim(); }
  std::size_t apparatus_dim() const { return apparatus_final.dim(); }
};

FinalState evolve(const MeasurementModel& model);

// Effective apparatus evolution with Kraus operators s_i V_i.
struct ApparatusChannel {
  std::vector<ComplexMatrix> kraus;

  ComplexMatrix apply(const ComplexMatrix& rho) const;
  std::size_t dim() const { return kraus.empty() ? 0 : kraus.front().rows(); }
};

ApparatusChannel apparatus_channel(const MeasurementModel& model);

} // namespace qmeas::measurement
