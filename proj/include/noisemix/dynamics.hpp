#pragma once

// Exact master equations and closed-form fidelities.
//
// Basis conventions: the qubit vector is (|1>, |0>), so sigma_z = diag(1, -1)
// and sigma_- = |0><1| sits at (1, 0). The Lambda atom uses (|1>, |2>, |3>)
// with coupling L = |2><1| + |3><1|.

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "noisemix/coeffs.hpp"
#include "noisemix/time_grid.hpp"

namespace noisemix {

using DensityMatrix = Eigen::MatrixXcd;

class PureState {
 public:
  /// Throws ValidationError unless dim is 2 or 3 and the norm is 1 within 1e-12.
  explicit PureState(Eigen::VectorXcd amplitudes);

  static PureState normalized(Eigen::VectorXcd amplitudes);
  static PureState qubit(Complex mu, Complex nu) { return PureState(Eigen::Vector2cd(mu, nu)); }
  /// mu = cos(theta/2), nu = sin(theta/2) e^{i phi}.
  static PureState bloch(double theta, double phi);
  static PureState lambda(Complex a, Complex b, Complex c) { return PureState(Eigen::Vector3cd(a, b, c)); }
  static PureState ground() { return qubit(0.0, 1.0); }

  Eigen::Index dim() const { return amplitudes_.size(); }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_[i]; }
  /// |amplitude of the upper level|^2 (|mu|^2 or |a|^2).
  double upper_population() const { return std::norm(amplitudes_[0]); }
  DensityMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }

 private:
  Eigen::VectorXcd amplitudes_;
};

inline double hermiticity_error(const DensityMatrix& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}
inline double trace_error(const DensityMatrix& rho) { return std::abs(rho.trace() - 1.0); }
double min_eigenvalue(const DensityMatrix& rho);

/// Throws ValidationError when Hermiticity or unit trace fail at 1e-9 or an
/// eigenvalue is below -1e-6.
void check_density_matrix(const DensityMatrix& rho, const char* key = "rho0");

/// <psi|rho|psi>, imaginary residue dropped.
inline double overlap(const PureState& psi, const DensityMatrix& rho) {
  return (psi.amplitudes().adjoint() * rho * psi.amplitudes())(0, 0).real();
}

struct FidelityTrace {
  TimeGrid grid;
  Eigen::VectorXd values;
};

struct DensityTrace {
  TimeGrid grid;
  std::vector<DensityMatrix> states;
  /// Smallest eigenvalue seen over the trace; positivity is monitored, not enforced.
  double min_eigenvalue = 1.0;
};

/// rotating: interaction picture w.r.t. H_sys, the frame of the closed-form
/// fidelities. lab: the frame in which the qubit equation carries omega.
enum class Frame { rotating, lab };

DensityTrace propagate_qubit(const CoefficientSolution& coeff, const DensityMatrix& rho0, double omega,
                             const TimeGrid& output, Frame frame = Frame::rotating);
inline DensityTrace propagate_qubit(const CoefficientSolution& coeff, const DensityMatrix& rho0, double omega,
                                    Frame frame = Frame::rotating) {
  return propagate_qubit(coeff, rho0, omega, coeff.grid, frame);
}

/// The Lambda equation is already written in the rotating frame:
///   rho' = Q [L rho, L^dag] + Q^* [L, rho L^dag].
DensityTrace propagate_lambda(const CoefficientSolution& coeff, const DensityMatrix& rho0, const TimeGrid& output);
inline DensityTrace propagate_lambda(const CoefficientSolution& coeff, const DensityMatrix& rho0) {
  return propagate_lambda(coeff, rho0, coeff.grid);
}

Eigen::Matrix3cd lambda_coupling();

FidelityTrace fidelity_from_states(const PureState& psi0, const DensityTrace& trace);

/// Closed-form qubit fidelity for initial upper population mu_sq.
FidelityTrace fidelity_qubit(double mu_sq, const CoefficientSolution& coeff);

enum class AverageVariant { paper_formula, haar_integral };

/// State average of 1 - p - (p - 2p^2) P + 2 (p - p^2) X over pure qubit states,
/// with P the excited-population factor and X the coherence factor.
///   paper_formula: 1/2 + (P + X) / 4
///   haar_integral: 1/2 + P / 6 + X / 3
double average_from_factors(double population, double coherence, AverageVariant variant);

FidelityTrace average_fidelity_qubit(const CoefficientSolution& coeff, AverageVariant variant);

/// Closed-form Lambda fidelity. Throws std::logic_error if the complex
/// evaluation leaves an imaginary residue above 1e-12.
FidelityTrace fidelity_lambda(const PureState& psi0, const CoefficientSolution& coeff);

}  // namespace noisemix
