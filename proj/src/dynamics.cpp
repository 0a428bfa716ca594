#include "noisemix/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "noisemix/errors.hpp"

namespace noisemix {

PureState::PureState(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() != 2 && amplitudes_.size() != 3)
    throw ValidationError("initial", "state dimension must be 2 or 3");
  if (!amplitudes_.allFinite()) throw ValidationError("initial", "amplitudes must be finite");
  if (std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-12)
    throw ValidationError("initial", "state must be normalized");
}

PureState PureState::normalized(Eigen::VectorXcd amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw ValidationError("initial", "state has zero norm");
  return PureState(amplitudes / norm);
}

PureState PureState::bloch(double theta, double phi) {
  return qubit(std::cos(theta / 2.0), std::sin(theta / 2.0) * std::polar(1.0, phi));
}

double min_eigenvalue(const DensityMatrix& rho) {
  const DensityMatrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void check_density_matrix(const DensityMatrix& rho, const char* key) {
  if (rho.rows() != rho.cols() || (rho.rows() != 2 && rho.rows() != 3))
    throw ValidationError(key, "density matrix must be 2x2 or 3x3");
  if (!rho.allFinite()) throw ValidationError(key, "density matrix must be finite");
  if (hermiticity_error(rho) > 1e-9) throw ValidationError(key, "density matrix is not Hermitian");
  if (trace_error(rho) > 1e-9) throw ValidationError(key, "density matrix trace differs from 1");
  if (min_eigenvalue(rho) < -1e-6) throw ValidationError(key, "density matrix is not positive");
}

namespace {

template <int Dim>
using Matrix = Eigen::Matrix<Complex, Dim, Dim>;

// RK4 at the coefficient's own step; coefficient values at the half steps come
// from linear interpolation. Samples every `stride`-th node into the output.
template <int Dim, typename Rhs, typename ToFrame>
DensityTrace integrate(const CoefficientSolution& coeff, const DensityMatrix& rho0, const TimeGrid& output,
                       Rhs rhs, ToFrame to_frame) {
  const std::size_t stride = coeff.grid.coarsening_factor(output);
  if (stride == 0)
    throw GridMismatch("output grid (dt=" + std::to_string(output.step) + ", horizon=" +
                       std::to_string(output.horizon()) + ") is not a coarsening of the coefficient grid");
  check_density_matrix(rho0);
  if (rho0.rows() != Dim) throw ValidationError("rho0", "dimension does not match the system");

  DensityTrace trace;
  trace.grid = output;
  trace.states.reserve(output.size());

  const double h = coeff.grid.step;
  Matrix<Dim> rho = rho0;
  const auto record = [&](std::size_t node) {
    DensityMatrix out = to_frame(rho, coeff.grid.time(node));
    trace.min_eigenvalue = std::min(trace.min_eigenvalue, min_eigenvalue(out));
    trace.states.push_back(std::move(out));
  };
  record(0);

  const std::size_t steps = output.count * stride;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = coeff.grid.time(n);
    const Complex x0 = coeff.values[static_cast<Eigen::Index>(n)];
    const Complex xm = coeff.value_at(t + 0.5 * h);
    const Complex x1 = coeff.values[static_cast<Eigen::Index>(n + 1)];
    const Matrix<Dim> k1 = rhs(x0, rho);
    const Matrix<Dim> k2 = rhs(xm, Matrix<Dim>(rho + 0.5 * h * k1));
    const Matrix<Dim> k3 = rhs(xm, Matrix<Dim>(rho + 0.5 * h * k2));
    const Matrix<Dim> k4 = rhs(x1, Matrix<Dim>(rho + h * k3));
    rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!rho.allFinite()) throw NonFinite("density matrix diverged at step " + std::to_string(n + 1));
    if ((n + 1) % stride == 0) record(n + 1);
  }
  return trace;
}

}  // namespace

DensityTrace propagate_qubit(const CoefficientSolution& coeff, const DensityMatrix& rho0, double omega,
                             const TimeGrid& output, Frame frame) {
  if (coeff.kind != CoefficientKind::two_level_F)
    throw ValidationError("coeff", "qubit propagation needs a two-level coefficient");

  Matrix<2> sz = Matrix<2>::Zero();
  sz(0, 0) = 1.0;
  sz(1, 1) = -1.0;
  Matrix<2> lower = Matrix<2>::Zero();
  lower(1, 0) = 1.0;
  const Matrix<2> raise = lower.adjoint();
  const Matrix<2> excited = raise * lower;
  const Complex i(0.0, 1.0);

  const auto rhs = [&](Complex f, const Matrix<2>& rho) -> Matrix<2> {
    const Matrix<2> h = 0.5 * (omega + f.imag()) * sz;
    return -i * (h * rho - rho * h) +
           f.real() * (2.0 * lower * rho * raise - excited * rho - rho * excited);
  };
  const auto to_frame = [&](const Matrix<2>& rho, double t) -> DensityMatrix {
    DensityMatrix out = rho;
    if (frame == Frame::rotating) {
      const Complex phase = std::polar(1.0, omega * t);
      out(0, 1) *= phase;
      out(1, 0) *= std::conj(phase);
    }
    return out;
  };
  return integrate<2>(coeff, rho0, output, rhs, to_frame);
}

Eigen::Matrix3cd lambda_coupling() {
  Eigen::Matrix3cd l = Eigen::Matrix3cd::Zero();
  l(1, 0) = 1.0;
  l(2, 0) = 1.0;
  return l;
}

DensityTrace propagate_lambda(const CoefficientSolution& coeff, const DensityMatrix& rho0, const TimeGrid& output) {
  if (coeff.kind != CoefficientKind::three_level_Q)
    throw ValidationError("coeff", "Lambda propagation needs a three-level coefficient");

  const Matrix<3> l = lambda_coupling();
  const Matrix<3> ld = l.adjoint();
  const Matrix<3> ldl = ld * l;
  const auto rhs = [&](Complex q, const Matrix<3>& rho) -> Matrix<3> {
    const Matrix<3> jump = l * rho * ld;
    return q * (jump - ldl * rho) + std::conj(q) * (jump - rho * ldl);
  };
  const auto to_frame = [](const Matrix<3>& rho, double) -> DensityMatrix { return rho; };
  return integrate<3>(coeff, rho0, output, rhs, to_frame);
}

FidelityTrace fidelity_from_states(const PureState& psi0, const DensityTrace& trace) {
  FidelityTrace out{trace.grid, Eigen::VectorXd(static_cast<Eigen::Index>(trace.states.size()))};
  for (std::size_t n = 0; n < trace.states.size(); ++n)
    out.values[static_cast<Eigen::Index>(n)] = overlap(psi0, trace.states[n]);
  return out;
}

FidelityTrace fidelity_qubit(double mu_sq, const CoefficientSolution& coeff) {
  if (!(mu_sq >= 0.0 && mu_sq <= 1.0)) throw ValidationError("mu_sq", "population must lie in [0, 1]");
  const double p = mu_sq;
  FidelityTrace out{coeff.grid, Eigen::VectorXd(coeff.values.size())};
  for (Eigen::Index n = 0; n < coeff.values.size(); ++n) {
    const double decay = std::exp(-2.0 * coeff.real_integral[n]);
    const double coherence = std::exp(-coeff.integral[n]).real();
    out.values[n] = 1.0 - p - (p - 2.0 * p * p) * decay + 2.0 * (p - p * p) * coherence;
  }
  return out;
}

double average_from_factors(double population, double coherence, AverageVariant variant) {
  if (variant == AverageVariant::paper_formula) return 0.5 + (population + coherence) / 4.0;
  return 0.5 + population / 6.0 + coherence / 3.0;
}

FidelityTrace average_fidelity_qubit(const CoefficientSolution& coeff, AverageVariant variant) {
  FidelityTrace out{coeff.grid, Eigen::VectorXd(coeff.values.size())};
  for (Eigen::Index n = 0; n < coeff.values.size(); ++n) {
    out.values[n] = average_from_factors(std::exp(-2.0 * coeff.real_integral[n]),
                                         std::exp(-coeff.integral[n]).real(), variant);
  }
  return out;
}

FidelityTrace fidelity_lambda(const PureState& psi0, const CoefficientSolution& coeff) {
  if (psi0.dim() != 3) throw ValidationError("initial", "Lambda fidelity needs a three-level state");
  const double a2 = psi0.upper_population();
  const double bc2 = std::norm(psi0[1] + psi0[2]);
  FidelityTrace out{coeff.grid, Eigen::VectorXd(coeff.values.size())};
  for (Eigen::Index n = 0; n < coeff.values.size(); ++n) {
    const Complex qbar = coeff.q_bar(static_cast<std::size_t>(n));
    const Complex both = std::exp(qbar + std::conj(qbar));
    const Complex value = 0.5 * a2 * (1.0 - both) * bc2 + a2 * a2 * both + (1.0 - a2) * (1.0 - a2) +
                          (a2 - a2 * a2) * (std::exp(qbar) + std::exp(std::conj(qbar)));
    if (std::abs(value.imag()) > 1e-12)
      throw std::logic_error("Lambda fidelity has an imaginary residue " + std::to_string(value.imag()));
    out.values[n] = value.real();
  }
  return out;
}

}  // namespace noisemix
