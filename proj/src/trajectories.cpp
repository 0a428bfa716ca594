#include "noisemix/trajectories.hpp"

#include <cmath>
#include <exception>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "noisemix/errors.hpp"

namespace noisemix {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::size_t block_size = 64;

}  // namespace

std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

NoiseSampler::NoiseSampler(const KernelSpec& kernel, const TimeGrid& grid) : grid_(grid) {
  validate(kernel);
  grid.validate();
  if (grid.size() > max_nodes)
    throw ValidationError("trajectory_nodes", "noise grid is limited to 4096 steps");

  const auto n = static_cast<Eigen::Index>(grid.size());
  const Eigen::ArrayXd g = sample_kernel(kernel, grid);
  if (g[0] == 0.0) {
    zero_ = true;
    factor_ = Eigen::MatrixXd::Zero(n, n);
    return;
  }
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) cov(r, c) = g[std::abs(r - c)];
  cov.diagonal().array() += 1e-12 * g[0];

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw NotPositiveSemidefinite("noise covariance is not positive definite even with diagonal jitter");
  factor_ = llt.matrixL();
}

NoisePath NoiseSampler::path(std::uint64_t master_seed, std::uint64_t index) const {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  NoisePath out{grid_, Eigen::VectorXcd::Zero(n)};
  if (zero_) return out;

  std::mt19937_64 rng(path_seed(master_seed, index));
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = normal(rng);
    y[i] = normal(rng);
  }
  const auto lower = factor_.triangularView<Eigen::Lower>();
  const Eigen::VectorXd zr = lower * x;
  const Eigen::VectorXd zi = lower * y;
  const double scale = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) out.samples[i] = Complex(zr[i], -zi[i]) * scale;  // z*
  return out;
}

std::vector<NoisePath> sample_noise_paths(const KernelSpec& kernel, const TimeGrid& grid,
                                          const EnsembleSpec& ensemble) {
  if (ensemble.count < 1) throw ValidationError("ensemble.count", "must be >= 1");
  const NoiseSampler sampler(kernel, grid);
  std::vector<NoisePath> paths;
  paths.reserve(ensemble.count);
  for (std::size_t p = 0; p < ensemble.count; ++p) paths.push_back(sampler.path(ensemble.seed, p));
  return paths;
}

namespace {

template <int Dim>
struct Accumulator {
  std::vector<Eigen::Matrix<Complex, Dim, Dim>> rho;
  Eigen::ArrayXd fid, fid_sq, norm, norm_sq;

  explicit Accumulator(Eigen::Index nodes)
      : rho(static_cast<std::size_t>(nodes), Eigen::Matrix<Complex, Dim, Dim>::Zero()),
        fid(Eigen::ArrayXd::Zero(nodes)),
        fid_sq(Eigen::ArrayXd::Zero(nodes)),
        norm(Eigen::ArrayXd::Zero(nodes)),
        norm_sq(Eigen::ArrayXd::Zero(nodes)) {}

  void add(const Accumulator& other) {
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += other.rho[i];
    fid += other.fid;
    fid_sq += other.fid_sq;
    norm += other.norm;
    norm_sq += other.norm_sq;
  }
};

template <int Dim>
EnsembleResult run_ensemble(const NoiseSampler& sampler, double omega, const CoefficientSolution& coeff,
                            const PureState& psi0, const EnsembleSpec& ensemble, int threads,
                            const Eigen::Matrix<Complex, Dim, Dim>& coupling) {
  using Vector = Eigen::Matrix<Complex, Dim, 1>;
  using Matrix = Eigen::Matrix<Complex, Dim, Dim>;

  const TimeGrid& grid = sampler.grid();
  const std::size_t stride = coeff.grid.coarsening_factor(grid);
  const auto nodes = static_cast<Eigen::Index>(grid.size());
  const double h = grid.step;
  const Complex i(0.0, 1.0);

  // H_sys = (omega/2) diag(1, -1[, -1])
  Eigen::Matrix<double, Dim, 1> energy = Eigen::Matrix<double, Dim, 1>::Constant(-omega / 2.0);
  energy[0] = omega / 2.0;
  const Matrix hamiltonian = energy.template cast<Complex>().asDiagonal();
  const Matrix ldl = coupling.adjoint() * coupling;
  const Vector start = psi0.amplitudes();

  const auto rhs = [&](Complex noise, Complex x, const Vector& psi) -> Vector {
    return -i * (hamiltonian * psi) + noise * (coupling * psi) - x * (ldl * psi);
  };

  const std::size_t blocks = (ensemble.count + block_size - 1) / block_size;
  std::vector<Accumulator<Dim>> partial;
  partial.reserve(blocks);
  for (std::size_t b = 0; b < blocks; ++b) partial.emplace_back(nodes);
  std::vector<std::exception_ptr> failures(blocks);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t b = 0; b < blocks; ++b) {
    try {
      auto& acc = partial[b];
      const std::size_t last = std::min(ensemble.count, (b + 1) * block_size);
      for (std::size_t p = b * block_size; p < last; ++p) {
        const NoisePath noise = sampler.path(ensemble.seed, p);
        Vector psi = start;
        for (Eigen::Index n = 0; n < nodes; ++n) {
          if (n > 0) {
            const std::size_t fine = static_cast<std::size_t>(n - 1) * stride;
            const double t = grid.time(static_cast<std::size_t>(n - 1));
            const Complex z0 = noise.samples[n - 1];
            const Complex z1 = noise.samples[n];
            const Complex zm = 0.5 * (z0 + z1);
            const Complex x0 = coeff.values[static_cast<Eigen::Index>(fine)];
            const Complex xm = coeff.value_at(t + 0.5 * h);
            const Complex x1 = coeff.values[static_cast<Eigen::Index>(fine + stride)];
            const Vector k1 = rhs(z0, x0, psi);
            const Vector k2 = rhs(zm, xm, psi + 0.5 * h * k1);
            const Vector k3 = rhs(zm, xm, psi + 0.5 * h * k2);
            const Vector k4 = rhs(z1, x1, psi + h * k3);
            psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (!psi.allFinite())
              throw NonFinite("trajectory " + std::to_string(p) + " diverged at node " + std::to_string(n));
          }
          // rotating frame: multiply by e^{i E_j t}
          const double t = grid.time(static_cast<std::size_t>(n));
          Vector rotated;
          for (int j = 0; j < Dim; ++j) rotated[j] = std::polar(1.0, energy[j] * t) * psi[j];
          const double fid = std::norm(start.dot(rotated));
          const double norm = rotated.squaredNorm();
          acc.rho[static_cast<std::size_t>(n)] += rotated * rotated.adjoint();
          acc.fid[n] += fid;
          acc.fid_sq[n] += fid * fid;
          acc.norm[n] += norm;
          acc.norm_sq[n] += norm * norm;
        }
      }
    } catch (...) {
      failures[b] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);

  Accumulator<Dim> total(nodes);
  for (const auto& block : partial) total.add(block);

  const double count = static_cast<double>(ensemble.count);
  const auto stderr_of = [&](const Eigen::ArrayXd& sum, const Eigen::ArrayXd& sum_sq) {
    const Eigen::ArrayXd mean = sum / count;
    if (ensemble.count < 2) return Eigen::VectorXd(Eigen::VectorXd::Zero(nodes));
    const Eigen::ArrayXd var = ((sum_sq - count * mean.square()) / (count - 1.0)).max(0.0);
    return Eigen::VectorXd((var / count).sqrt());
  };

  EnsembleResult result;
  result.rho.grid = grid;
  result.rho.states.reserve(static_cast<std::size_t>(nodes));
  for (const auto& r : total.rho) {
    DensityMatrix mean = r / count;
    result.rho.min_eigenvalue = std::min(result.rho.min_eigenvalue, min_eigenvalue(mean));
    result.rho.states.push_back(std::move(mean));
  }
  result.fidelity = (total.fid / count).matrix();
  result.fidelity_stderr = stderr_of(total.fid, total.fid_sq);
  result.trace = (total.norm / count).matrix();
  result.trace_stderr = stderr_of(total.norm, total.norm_sq);
  return result;
}

}  // namespace

EnsembleResult run_qsd_ensemble(const KernelSpec& kernel, double omega, const CoefficientSolution& coeff,
                                const PureState& psi0, const TimeGrid& grid, const EnsembleSpec& ensemble,
                                int threads) {
  if (ensemble.count < 1) throw ValidationError("ensemble.count", "must be >= 1");
  if (threads < 1) throw ValidationError("threads", "must be >= 1");
  const bool qubit = coeff.kind == CoefficientKind::two_level_F;
  if (psi0.dim() != (qubit ? 2 : 3))
    throw ValidationError("initial", "state dimension does not match the coefficient kind");
  if (coeff.grid.coarsening_factor(grid) == 0)
    throw GridMismatch("trajectory grid is not a uniform coarsening of the coefficient grid");

  const NoiseSampler sampler(kernel, grid);
  if (qubit) {
    Eigen::Matrix2cd lower = Eigen::Matrix2cd::Zero();
    lower(1, 0) = 1.0;
    return run_ensemble<2>(sampler, omega, coeff, psi0, ensemble, threads, lower);
  }
  return run_ensemble<3>(sampler, omega, coeff, psi0, ensemble, threads, lambda_coupling());
}

}  // namespace noisemix
