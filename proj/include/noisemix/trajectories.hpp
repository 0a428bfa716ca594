#pragma once

// Monte-Carlo unraveling of the linear QSD equation
//
//   d/dt |psi> = [-i H_sys + L z*_t - L^dag X(t) L] |psi>,
//
// driven by complex Gaussian noise with M[z_t z*_s] = G(t - s) and M[z_t z_s] = 0.
// The ensemble mean of |psi><psi| (no per-path normalization) is rho_sys.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "noisemix/coeffs.hpp"
#include "noisemix/dynamics.hpp"
#include "noisemix/kernels.hpp"
#include "noisemix/time_grid.hpp"

namespace noisemix {

struct NoisePath {
  TimeGrid grid;
  Eigen::VectorXcd samples;  ///< z*(t_n)
};

struct EnsembleSpec {
  std::size_t count = 2000;
  std::uint64_t seed = 0;
};

/// Counter-based stream seed for path `index`; independent of evaluation order.
std::uint64_t path_seed(std::uint64_t master_seed, std::uint64_t index);

/// Lower-triangular factor of the covariance C[n][m] = G(|t_n - t_m|) with
/// 1e-12 G(0) added to the diagonal. Computed once; read-only afterwards.
class NoiseSampler {
 public:
  static constexpr std::size_t max_nodes = 4097;

  NoiseSampler(const KernelSpec& kernel, const TimeGrid& grid);

  NoisePath path(std::uint64_t master_seed, std::uint64_t index) const;
  const TimeGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& factor() const { return factor_; }

 private:
  TimeGrid grid_;
  Eigen::MatrixXd factor_;
  bool zero_ = false;
};

std::vector<NoisePath> sample_noise_paths(const KernelSpec& kernel, const TimeGrid& grid,
                                          const EnsembleSpec& ensemble);

struct EnsembleResult {
  DensityTrace rho;                 ///< ensemble mean, rotating frame
  Eigen::VectorXd fidelity;         ///< mean of |<psi0|psi_t>|^2
  Eigen::VectorXd fidelity_stderr;
  Eigen::VectorXd trace;            ///< mean of <psi_t|psi_t>
  Eigen::VectorXd trace_stderr;
};

/// `grid` must be a uniform coarsening of `coeff.grid`; the noise lives on
/// `grid` and is linearly interpolated inside RK4 steps, while X(t) keeps its
/// fine resolution. Paths are grouped in fixed blocks that are reduced in
/// index order, so results are bit-identical for any `threads`.
EnsembleResult run_qsd_ensemble(const KernelSpec& kernel, double omega, const CoefficientSolution& coeff,
                                const PureState& psi0, const TimeGrid& grid, const EnsembleSpec& ensemble,
                                int threads = 1);

}  // namespace noisemix
