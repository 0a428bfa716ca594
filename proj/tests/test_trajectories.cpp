#include <doctest.h>

#include <cmath>

#include "noisemix/trajectories.hpp"

using namespace noisemix;

TEST_CASE("path seeds are distinct and reproducible") {
  CHECK(path_seed(0, 0) != path_seed(0, 1));
  CHECK(path_seed(0, 1) != path_seed(1, 0));
  CHECK(path_seed(42, 17) == path_seed(42, 17));
}

TEST_CASE("zero kernel yields zero paths") {
  const auto paths = sample_noise_paths(ZeroKernel{}, TimeGrid::from_horizon(0.1, 2.0), {10, 3});
  CHECK(paths.size() == 10);
  for (const auto& p : paths) CHECK(p.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("paths are reproducible") {
  const NoiseSampler sampler(OUKernel{{1, 0.5}}, TimeGrid::from_horizon(0.05, 5.0));
  CHECK(sampler.path(9, 4).samples == sampler.path(9, 4).samples);
  CHECK(sampler.path(9, 4).samples != sampler.path(9, 5).samples);
  CHECK(sampler.path(9, 4).samples != sampler.path(10, 4).samples);
}

TEST_CASE("sampler limits") {
  CHECK_THROWS_AS(NoiseSampler(OUKernel{{1, 0.5}}, TimeGrid{1e-3, 5000}), ValidationError);
}

TEST_CASE("empirical covariance matches the kernel") {
  const KernelSpec kernel = OUKernel{{1, 0.5}};
  const TimeGrid grid{0.05, 199};  // 200 points
  const std::size_t count = 5000;
  const auto paths = sample_noise_paths(kernel, grid, {count, 11});
  const Eigen::Index m = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXcd z(static_cast<Eigen::Index>(count), m);
  for (std::size_t j = 0; j < count; ++j) z.row(static_cast<Eigen::Index>(j)) = paths[j].samples.conjugate().transpose();

  std::size_t outside = 0, total = 0;
  double worst = 0.0;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a; b < m; ++b) {
      // M[z_a z*_b] = G and M[z_a z_b] = 0
      const Eigen::ArrayXcd cross = z.col(a).array() * z.col(b).conjugate().array();
      const Eigen::ArrayXcd pseudo = z.col(a).array() * z.col(b).array();
      const double g = eval_kernel(kernel, grid.time(static_cast<std::size_t>(b - a)));
      for (const auto& [samples, want] : {std::pair{cross, g}, std::pair{pseudo, 0.0}}) {
        const Complex mean = samples.mean();
        const double n = static_cast<double>(count);
        const double se_re = std::sqrt((samples.real() - mean.real()).square().sum() / (n - 1) / n);
        const double se_im = std::sqrt((samples.imag() - mean.imag()).square().sum() / (n - 1) / n);
        const double zr = std::abs(mean.real() - want) / se_re;
        const double zi = se_im > 0.0 ? std::abs(mean.imag()) / se_im : 0.0;
        worst = std::max({worst, zr, zi});
        outside += (zr > 5.0) + (zi > 5.0);
        total += 2;
      }
    }
  }
  MESSAGE("largest standardized deviation " << worst << " over " << total << " moments");
  CHECK(outside == 0);
}

TEST_CASE("ensemble: ground state, trace, hermiticity and determinism") {
  const KernelSpec kernel = MarkovDephasedKernel{{1, 0.1}, 4};
  const auto fine = TimeGrid::from_horizon(1e-3, 4.0);
  const auto coarse = TimeGrid::from_horizon(0.02, 4.0);
  const auto coeff = solve_coefficients(kernel, 1.0, fine, CoefficientKind::two_level_F);

  const auto ground = run_qsd_ensemble(kernel, 1.0, coeff, PureState::ground(), coarse, {50, 1});
  for (const auto& rho : ground.rho.states) CHECK((rho - PureState::ground().projector()).cwiseAbs().maxCoeff() < 1e-9);

  const auto psi = PureState::bloch(M_PI / 2, 0.0);
  const auto one = run_qsd_ensemble(kernel, 1.0, coeff, psi, coarse, {300, 7}, 1);
  const auto four = run_qsd_ensemble(kernel, 1.0, coeff, psi, coarse, {300, 7}, 4);
  CHECK(one.fidelity == four.fidelity);
  CHECK(one.trace == four.trace);
  for (std::size_t n = 0; n < one.rho.states.size(); ++n) {
    CHECK(one.rho.states[n] == four.rho.states[n]);
    CHECK(hermiticity_error(one.rho.states[n]) <= 1e-12);
  }
  std::size_t outside = 0;
  for (Eigen::Index n = 1; n < one.trace.size(); ++n) outside += std::abs(one.trace[n] - 1.0) > 3.0 * one.trace_stderr[n];
  CHECK(outside == 0);
  CHECK(one.fidelity[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ensemble rejects mismatched inputs") {
  const KernelSpec kernel = OUKernel{{1, 0.5}};
  const auto coeff = solve_riccati_F(kernel, 1.0, TimeGrid::from_horizon(1e-3, 1.0));
  CHECK_THROWS_AS(run_qsd_ensemble(kernel, 1.0, coeff, PureState::ground(), TimeGrid::from_horizon(0.0015, 1.0), {10, 0}),
                  GridMismatch);
  CHECK_THROWS(run_qsd_ensemble(kernel, 1.0, coeff, PureState::lambda(1.0, 0.0, 0.0), TimeGrid::from_horizon(0.01, 1.0),
                                {10, 0}));
}
