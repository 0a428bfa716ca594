#pragma once

// O-operator coefficients: F(t) for the qubit (O = F sigma_-) and Q(t) for the
// Lambda atom (O = Q L). Both obey
//
//   X(t) = int_0^t G(t - s) x(t, s) ds,   d/dt x(t, s) = [i omega + q X(t)] x(t, s),  x(s, s) = 1
//
// with q = 1 (qubit) or q = 2 (Lambda). For exponential kernels this closes
// into the Riccati equation  X' = Gamma gamma / 2 + (-gamma + i omega) X + q X^2.

#include <complex>
#include <cstddef>

#include <Eigen/Core>

#include "noisemix/kernels.hpp"
#include "noisemix/time_grid.hpp"

namespace noisemix {

using Complex = std::complex<double>;

enum class CoefficientKind { two_level_F, three_level_Q };

/// Coefficient of the quadratic term in the closure equation.
constexpr double quadratic_coefficient(CoefficientKind kind) {
  return kind == CoefficientKind::two_level_F ? 1.0 : 2.0;
}

struct CoefficientSolution {
  TimeGrid grid;
  Eigen::VectorXcd values;       ///< X(t_n)
  Eigen::VectorXcd integral;     ///< int_0^{t_n} X(s) ds (trapezoid)
  Eigen::VectorXd real_integral; ///< int_0^{t_n} Re X(s) ds
  CoefficientKind kind = CoefficientKind::two_level_F;

  /// Linear interpolation of X between grid nodes; clamps at the ends.
  Complex value_at(double t) const;

  /// Qbar(t_n) = -2 int_0^{t_n} Q(s) ds.
  Complex q_bar(std::size_t n) const { return -2.0 * integral[static_cast<Eigen::Index>(n)]; }
};

/// Fills `integral` and `real_integral` from `values` by the trapezoid rule.
void accumulate_integrals(CoefficientSolution& sol);

/// Fixed-step RK4 on the Riccati equation. Accepts OU, MarkovDephasedOU and Zero kernels.
CoefficientSolution solve_riccati(const KernelSpec& kernel, double omega, const TimeGrid& grid,
                                  CoefficientKind kind);

inline CoefficientSolution solve_riccati_F(const KernelSpec& kernel, double omega, const TimeGrid& grid) {
  return solve_riccati(kernel, omega, grid, CoefficientKind::two_level_F);
}

inline CoefficientSolution solve_riccati_Q(const KernelSpec& kernel, double omega, const TimeGrid& grid) {
  return solve_riccati(kernel, omega, grid, CoefficientKind::three_level_Q);
}

/// Product-integration of the memory integral for an arbitrary kernel.
///
/// Uses x(t_n, s_k) = E(t_n) / E(s_k), E(t) = exp(int_0^t [i omega + q X]). The
/// ratios are kept as one vector that is rescaled by E(t_n)/E(t_{n-1}) each
/// step, so E itself is never formed and cannot overflow. Each step costs one
/// trapezoid over s in [0, t_n]; the implicit dependence of E(t_n) on X(t_n)
/// is closed by a predictor (previous value) and one corrector pass.
CoefficientSolution solve_volterra(const KernelSpec& kernel, double omega, const TimeGrid& grid,
                                   CoefficientKind kind);

inline CoefficientSolution solve_volterra_F(const KernelSpec& kernel, double omega, const TimeGrid& grid) {
  return solve_volterra(kernel, omega, grid, CoefficientKind::two_level_F);
}

inline CoefficientSolution solve_volterra_Q(const KernelSpec& kernel, double omega, const TimeGrid& grid) {
  return solve_volterra(kernel, omega, grid, CoefficientKind::three_level_Q);
}

enum class SolverChoice { automatic, riccati, volterra };

/// Riccati when the kernel is exponential, Volterra otherwise (for `automatic`).
CoefficientSolution solve_coefficients(const KernelSpec& kernel, double omega, const TimeGrid& grid,
                                       CoefficientKind kind, SolverChoice solver = SolverChoice::automatic);

}  // namespace noisemix
