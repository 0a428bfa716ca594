#include "noisemix/coeffs.hpp"

#include <cmath>
#include <string>

#include "noisemix/errors.hpp"

namespace noisemix {

namespace {

bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_finite(Complex z, std::size_t step, const char* solver) {
  if (!is_finite(z) || std::abs(z) > 1e150)
    throw NonFinite(std::string(solver) + ": coefficient diverged at step " + std::to_string(step));
}

CoefficientSolution make_solution(const TimeGrid& grid, CoefficientKind kind) {
  grid.validate();
  CoefficientSolution sol;
  sol.grid = grid;
  sol.kind = kind;
  sol.values = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.size()));
  return sol;
}

}  // namespace

Complex CoefficientSolution::value_at(double t) const {
  const double x = t / grid.step;
  if (x <= 0.0) return values[0];
  const auto last = static_cast<Eigen::Index>(grid.count);
  if (x >= static_cast<double>(last)) return values[last];
  const auto i = static_cast<Eigen::Index>(std::floor(x));
  const double w = x - static_cast<double>(i);
  if (w == 0.0) return values[i];
  return (1.0 - w) * values[i] + w * values[i + 1];
}

void accumulate_integrals(CoefficientSolution& sol) {
  const Eigen::Index n = sol.values.size();
  sol.integral.resize(n);
  sol.real_integral.resize(n);
  sol.integral[0] = 0.0;
  sol.real_integral[0] = 0.0;
  const double h = sol.grid.step / 2.0;
  for (Eigen::Index i = 1; i < n; ++i) {
    sol.integral[i] = sol.integral[i - 1] + h * (sol.values[i - 1] + sol.values[i]);
    sol.real_integral[i] = sol.real_integral[i - 1] + h * (sol.values[i - 1].real() + sol.values[i].real());
  }
}

CoefficientSolution solve_riccati(const KernelSpec& kernel, double omega, const TimeGrid& grid,
                                  CoefficientKind kind) {
  validate(kernel);
  const auto form = exponential_form(kernel);
  if (!form) throw ValidationError("kernel", "Riccati solver requires an exponential (OU-form) kernel");

  auto sol = make_solution(grid, kind);
  const double source = form->strength * form->memory_rate / 2.0;
  const Complex linear(-form->memory_rate, omega);
  const double quadratic = quadratic_coefficient(kind);
  const auto rhs = [&](Complex x) { return source + linear * x + quadratic * x * x; };

  const double h = grid.step;
  Complex x = 0.0;
  for (std::size_t n = 0; n < grid.count; ++n) {
    const Complex k1 = rhs(x);
    const Complex k2 = rhs(x + 0.5 * h * k1);
    const Complex k3 = rhs(x + 0.5 * h * k2);
    const Complex k4 = rhs(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(x, n + 1, "riccati");
    sol.values[static_cast<Eigen::Index>(n + 1)] = x;
  }
  accumulate_integrals(sol);
  return sol;
}

CoefficientSolution solve_volterra(const KernelSpec& kernel, double omega, const TimeGrid& grid,
                                   CoefficientKind kind) {
  validate(kernel);
  auto sol = make_solution(grid, kind);
  const Eigen::ArrayXd g = sample_kernel(kernel, grid);
  const double q = quadratic_coefficient(kind);
  const double h = grid.step;
  const Complex i_omega(0.0, omega);

  // ratio[k] = E(t_{n-1}) / E(s_k) for k < n.
  Eigen::ArrayXcd ratio(static_cast<Eigen::Index>(grid.size()));
  ratio[0] = 1.0;

  for (Eigen::Index n = 1; n <= static_cast<Eigen::Index>(grid.count); ++n) {
    Complex history = 0.5 * g[n] * ratio[0];
    for (Eigen::Index k = 1; k < n; ++k) history += g[n - k] * ratio[k];

    const Complex previous = sol.values[n - 1];
    const auto step_ratio = [&](Complex current) {
      return std::exp(0.5 * h * (2.0 * i_omega + q * (previous + current)));
    };
    const auto quadrature = [&](Complex r) { return h * (r * history + 0.5 * g[0]); };

    Complex current = quadrature(step_ratio(previous));  // predictor
    const Complex r = step_ratio(current);
    current = quadrature(r);  // corrector
    check_finite(current, static_cast<std::size_t>(n), "volterra");
    check_finite(r, static_cast<std::size_t>(n), "volterra");

    sol.values[n] = current;
    ratio.head(n) *= r;
    ratio[n] = 1.0;
  }
  accumulate_integrals(sol);
  return sol;
}

CoefficientSolution solve_coefficients(const KernelSpec& kernel, double omega, const TimeGrid& grid,
                                       CoefficientKind kind, SolverChoice solver) {
  if (solver == SolverChoice::automatic)
    solver = exponential_form(kernel) ? SolverChoice::riccati : SolverChoice::volterra;
  return solver == SolverChoice::riccati ? solve_riccati(kernel, omega, grid, kind)
                                         : solve_volterra(kernel, omega, grid, kind);
}

}  // namespace noisemix
