// Acceptance criteria: one PASS/FAIL line each, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "noisemix/cli.hpp"
#include "noisemix/experiments.hpp"
#include "noisemix/trajectories.hpp"

using namespace noisemix;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const TimeGrid kGrid = TimeGrid::from_horizon(1e-3, 8.0);
constexpr AverageVariant kVariants[] = {AverageVariant::paper_formula, AverageVariant::haar_integral};

const char* variant_name(AverageVariant v) { return v == AverageVariant::paper_formula ? "paper_formula" : "haar_integral"; }

ScenarioParams scenario(double gamma_beta, double dephasing, std::optional<double> dephasing_memory = {},
                        const TimeGrid& grid = kGrid) {
  ScenarioParams p;
  p.relaxation = {1.0, gamma_beta};
  p.dephasing_strength = dephasing;
  p.dephasing_memory_rate = dephasing_memory;
  p.grid = grid;
  return p;
}

ScenarioTriple averaged(const ScenarioParams& p, AverageVariant v) {
  return build_triple(p, System::qubit, AverageOverStates{v});
}

// Extremes of a - b over nodes with begin < t <= end.
std::pair<double, double> diff_range(const FidelityTrace& a, const FidelityTrace& b, double begin, double end) {
  double lo = 1e300, hi = -1e300;
  for (std::size_t n = 0; n < a.grid.size(); ++n) {
    const double t = a.grid.time(n);
    if (t <= begin || t > end + 1e-12) continue;
    const double d = a.values[static_cast<Eigen::Index>(n)] - b.values[static_cast<Eigen::Index>(n)];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return {lo, hi};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs `check` per variant; passes when some variant satisfies it.
Verdict any_variant(const std::function<Verdict(AverageVariant)>& check) {
  Verdict out;
  std::string matched;
  for (auto v : kVariants) {
    const Verdict r = check(v);
    out.detail += std::string(out.detail.empty() ? "" : "; ") + variant_name(v) + ": " + r.detail;
    if (r.pass && matched.empty()) matched = variant_name(v);
  }
  out.pass = !matched.empty();
  out.detail += " -> matching variant: " + (matched.empty() ? std::string("none") : matched);
  return out;
}

Verdict ac1() {
  const auto t0 = std::chrono::steady_clock::now();
  auto v = any_variant([](AverageVariant var) {
    const auto tr = averaged(scenario(0.1, 4.0), var);
    double lo = 1.0;
    for (std::size_t n = 1; n <= 4000; ++n) lo = std::min(lo, tr.composite.values[static_cast<Eigen::Index>(n)]);
    return Verdict{lo >= 0.95, fmt("min C on (0,4] = %.4f", lo)};
  });
  const double secs = seconds_since(t0);
  v.detail += fmt(" [%.2f s for both variants]", secs);
  v.pass = v.pass && secs < 2.0;
  return v;
}

Verdict ac2() {
  return any_variant([](AverageVariant var) {
    Verdict r{true, "tau ="};
    double prev = 0.0;
    for (double ga : {1.0, 2.0, 4.0}) {
      const auto tr = averaged(scenario(0.1, ga), var);
      const auto tau = detect_crossing(tr.composite, tr.relaxation);
      if (!tau) {
        r.pass = false;
        r.detail += fmt(" none(Ga=%g)", ga);
        continue;
      }
      r.detail += fmt(" %.3f", *tau);
      r.pass = r.pass && *tau >= 2.5 && *tau <= 4.5 && *tau >= prev;
      prev = *tau;
    }
    return r;
  });
}

Verdict ac3() {
  return any_variant([](AverageVariant var) {
    const auto tr = averaged(scenario(2.0, 4.0), var);
    const auto cross = detect_crossing(tr.composite, tr.dephasing);
    const double min_cr = diff_range(tr.composite, tr.relaxation, 0.0, 8.0).first;
    const bool ok = cross && std::abs(*cross - 1.8) <= 0.4 && min_cr > 0.0;
    const double before = cross ? diff_range(tr.composite, tr.dephasing, 0.0, *cross - 1e-2).second : 0.0;
    return Verdict{ok, fmt("C-D crossing %s (max C-D before it %.1e), min(C-R) on (0,8] = %.2e",
                           cross ? fmt("%.3f", *cross).c_str() : "none", before, min_cr)};
  });
}

Verdict ac4() {
  return any_variant([](AverageVariant var) {
    Verdict r{true, ""};
    {
      const auto tr = averaged(scenario(0.1, 1.0, 0.1), var);
      const auto cross = detect_crossing(tr.composite, tr.dephasing);
      const double end = cross ? *cross - 1e-2 : 8.0;
      const auto [lo, hi] = diff_range(tr.composite, tr.dephasing, 0.0, end);
      const bool above = lo > -1e-4;
      const bool ok = cross && above && std::abs(*cross - 3.6) <= 0.5;
      r.pass = r.pass && ok;
      r.detail += fmt("(a) first C-D sign change at %s, before it C-D in [%.1e, %.1e] (%s)%s",
                      cross ? fmt("%.3f", *cross).c_str() : "none", lo, hi, above ? "C >= D" : "C < D", ok ? "" : " FAIL");
    }
    {
      const auto tr = averaged(scenario(0.3, 1.0, 0.1), var);
      double first = -1.0, last = -1.0;
      for (std::size_t n = 1; n < tr.composite.grid.size(); ++n) {
        const auto i = static_cast<Eigen::Index>(n);
        const double c = tr.composite.values[i];
        if (c < tr.relaxation.values[i] - 1e-4 && c < tr.dephasing.values[i] - 1e-4) {
          if (first < 0.0) first = tr.composite.grid.time(n);
          last = tr.composite.grid.time(n);
        }
      }
      const bool ok = first >= 0.0;
      r.pass = r.pass && ok;
      r.detail += ok ? fmt(", (b) C<R,D on [%.3f, %.3f]", first, last) : std::string(", (b) no C<R,D interval FAIL");
    }
    {
      const auto tr = averaged(scenario(0.9, 1.0, 0.1), var);
      const auto [lo, hi] = diff_range(tr.composite, tr.relaxation, 0.0, 6.0);
      const double sup = std::max(std::abs(lo), std::abs(hi));
      r.pass = r.pass && sup <= 0.02;
      r.detail += fmt(", (c) sup|C-R| = %.4f%s", sup, sup <= 0.02 ? "" : " FAIL");
    }
    return r;
  });
}

Verdict ac5() {
  const auto t0 = std::chrono::steady_clock::now();
  const RegionDiagram d = classify_regions(DiagramSpec{});
  const double secs = seconds_since(t0);

  bool seen[5] = {};
  for (auto r : d.labels) seen[static_cast<int>(r)] = true;
  const bool all_codes = seen[1] && seen[2] && seen[3] && seen[4];

  bool monotone = true;
  for (std::size_t r = 1; r < d.rate_axis.size(); ++r) monotone = monotone && d.region_i_width(r) >= d.region_i_width(r - 1) - 1e-12;

  double iv_max_rate = -1.0;
  std::size_t iv_cells = 0;
  for (std::size_t r = 0; r < d.rate_axis.size(); ++r)
    for (std::size_t j = 0; j < d.time_axis.size(); ++j)
      if (d.at(r, j) == Region::iv) {
        ++iv_cells;
        iv_max_rate = std::max(iv_max_rate, d.rate_axis[r]);
      }
  const bool iv_small = iv_cells > 0 && iv_max_rate <= 1.0;

  Verdict v;
  v.pass = all_codes && monotone && iv_small && secs < 60.0;
  v.detail = fmt("codes i/ii/iii/iv present: %d%d%d%d, region-i width %.2f -> %.2f %s, region iv: %zu cells up to Ga=%.2f, %.1f s",
                 seen[1], seen[2], seen[3], seen[4], d.region_i_width(0), d.region_i_width(d.rate_axis.size() - 1),
                 monotone ? "non-decreasing" : "NOT monotone", iv_cells, iv_max_rate, secs);
  return v;
}

// Every parameter set that appears in a figure, as (label, kernel) pairs for
// the relaxation-only and composite channels.
std::vector<std::pair<std::string, KernelSpec>> figure_kernels() {
  std::vector<std::pair<std::string, KernelSpec>> out;
  for (auto id : {FigureId::fig1a, FigureId::fig1b, FigureId::fig1c, FigureId::fig2a, FigureId::fig2b}) {
    for (const auto& p : figure_parameter_sets(id, kGrid)) {
      const std::string tag = figure_name(id) + fmt(" gb=%g Ga=%g", p.relaxation.memory_rate, p.dephasing_strength);
      out.emplace_back(tag + " R", p.relaxation_kernel());
      out.emplace_back(tag + " C", p.composite_kernel());
    }
  }
  for (double ga : {0.1, 1.0, 3.0, 6.0}) out.emplace_back(fmt("fig3 Ga=%g C", ga), scenario(0.1, ga).composite_kernel());
  return out;
}

struct StructureStats {
  double herm = 0.0, trace = 0.0, f0 = 0.0, pop = 0.0, stationary = 0.0;
  void absorb(const DensityTrace& tr) {
    for (const auto& rho : tr.states) {
      herm = std::max(herm, hermiticity_error(rho));
      trace = std::max(trace, trace_error(rho));
    }
  }
};

StructureStats g_structure;

Verdict ac6() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto lambda_psi = PureState::normalized(Eigen::Vector3cd(1.0, 1.0, 0.0));
  double worst_qubit = 0.0, worst_lambda = 0.0;
  std::string worst_lambda_set;
  for (const auto& [label, kernel] : figure_kernels()) {
    const auto f = solve_coefficients(kernel, 1.0, kGrid, CoefficientKind::two_level_F);
    for (int s = 0; s < 10; ++s) {
      const auto psi = PureState::bloch(std::acos(2.0 * u(rng) - 1.0), 2.0 * M_PI * u(rng));
      const auto tr = propagate_qubit(f, psi.projector(), 1.0);
      g_structure.absorb(tr);
      const auto closed = fidelity_qubit(psi.upper_population(), f);
      worst_qubit = std::max(worst_qubit, (closed.values - fidelity_from_states(psi, tr).values).cwiseAbs().maxCoeff());
      g_structure.f0 = std::max(g_structure.f0, std::abs(closed.values[0] - 1.0));
    }
    const auto q = solve_coefficients(kernel, 1.0, kGrid, CoefficientKind::three_level_Q);
    const auto tr = propagate_lambda(q, lambda_psi.projector());
    g_structure.absorb(tr);
    const auto closed = fidelity_lambda(lambda_psi, q);
    const double gap = (closed.values - fidelity_from_states(lambda_psi, tr).values).cwiseAbs().maxCoeff();
    if (gap > worst_lambda) {
      worst_lambda = gap;
      worst_lambda_set = label;
    }
    g_structure.f0 = std::max(g_structure.f0, std::abs(closed.values[0] - 1.0));

    const auto excited = propagate_lambda(q, PureState::lambda(1.0, 0.0, 0.0).projector());
    g_structure.absorb(excited);
    for (std::size_t n = 0; n < excited.states.size(); ++n)
      g_structure.pop = std::max(g_structure.pop,
                                 std::abs(excited.states[n](0, 0).real() - std::exp(-4.0 * q.real_integral[n])));
    const auto dark = PureState::lambda(0.0, 1.0, 0.0);
    for (const auto& rho : propagate_lambda(q, dark.projector()).states)
      g_structure.stationary = std::max(g_structure.stationary, (rho - dark.projector()).cwiseAbs().maxCoeff());
    for (const auto& rho : propagate_qubit(f, PureState::ground().projector(), 1.0).states)
      g_structure.stationary =
          std::max(g_structure.stationary, (rho - PureState::ground().projector()).cwiseAbs().maxCoeff());
  }
  return {worst_qubit <= 1e-6 && worst_lambda <= 1e-6,
          fmt("qubit sup |closed form - <psi|rho|psi>| = %.2e (10 states x %zu sets), Lambda sup |closed form - <psi|rho|psi>| = %.2e (worst: %s)",
              worst_qubit, figure_kernels().size(), worst_lambda, worst_lambda_set.c_str())};
}

Verdict ac7() {
  std::vector<KernelSpec> kernels = {OUKernel{{1, 0.5}}};
  for (auto id : {FigureId::fig1a, FigureId::fig1b, FigureId::fig1c}) {
    for (const auto& p : figure_parameter_sets(id, kGrid)) {
      kernels.push_back(p.relaxation_kernel());
      kernels.push_back(p.composite_kernel());
    }
  }
  double worst = 0.0;
  for (const auto& k : kernels) {
    for (auto kind : {CoefficientKind::two_level_F, CoefficientKind::three_level_Q}) {
      const auto r = solve_riccati(k, 1.0, kGrid, kind);
      const auto v = solve_volterra(k, 1.0, kGrid, kind);
      worst = std::max(worst, (r.values - v.values).cwiseAbs().maxCoeff());
    }
  }
  return {worst <= 1e-4, fmt("sup |Riccati - Volterra| = %.2e over %zu kernels x {F, Q}", worst, kernels.size())};
}

Verdict ac8() {
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSpec kernel = MarkovDephasedKernel{{1, 0.1}, 4};
  const auto coeff = solve_coefficients(kernel, 1.0, kGrid, CoefficientKind::two_level_F);
  const auto coarse = TimeGrid::from_horizon(0.01, 8.0);
  const auto psi = PureState::normalized(Eigen::Vector2cd(1.0, 1.0));
  const auto master = fidelity_from_states(psi, propagate_qubit(coeff, psi.projector(), 1.0, coarse));
  double err[3];
  const std::size_t counts[3] = {500, 2000, 8000};
  for (int i = 0; i < 3; ++i) {
    const auto ens = run_qsd_ensemble(kernel, 1.0, coeff, psi, coarse, {counts[i], 20240601});
    err[i] = (ens.fidelity - master.values).cwiseAbs().maxCoeff();
  }
  const double ratio = err[0] / err[2];
  const double secs = seconds_since(t0);
  const bool ok = err[1] <= 0.02 && err[2] < err[0] && ratio >= 2.0 && ratio <= 8.0 && secs < 120.0;
  return {ok, fmt("sup error N=500: %.4f, N=2000: %.4f, N=8000: %.4f, ratio(500/8000) = %.2f (sqrt scaling 4, allowed [2, 8]), %.1f s",
                  err[0], err[1], err[2], ratio, secs)};
}

Verdict ac9() {
  double worst = 0.0;
  for (double gb : {0.1, 0.5, 2.0}) {
    for (double ga : {1.0, 2.0, 4.0}) {
      const OUParams beta{1.0, gb};
      const MarkovDephasedKernel markov{beta, ga};
      for (int n = 0; n <= 5000; ++n) {
        const double tau = 1e-3 * n;
        const double m = eval_kernel(markov, tau);
        worst = std::max(worst, std::abs(eval_composite_kernel(beta, OUParams{ga, 1e4}, tau) - m) / m);
      }
    }
  }
  return {worst <= 1e-3, fmt("max relative deviation on [0,5] = %.2e", worst)};
}

Verdict ac10() {
  const auto& s = g_structure;
  const bool ok = s.herm <= 1e-9 && s.trace <= 1e-9 && s.f0 <= 1e-12 && s.pop <= 1e-6 && s.stationary <= 1e-9;
  return {ok, fmt("hermiticity %.1e, trace %.1e, |F(0)-1| %.1e, Lambda population %.1e, ground/dark drift %.1e",
                  s.herm, s.trace, s.f0, s.pop, s.stationary)};
}

std::string capture(std::vector<std::string> args, int& status) {
  std::ostringstream out, err;
  status = dispatch(args, out, err);
  return out.str();
}

Verdict ac11() {
  const std::vector<std::vector<std::string>> commands = {
      {"trajectories", "--seed", "7", "--count", "200", "--state", "1,1", "--kernel", "markov", "--dephasing-strength", "4"},
      {"trajectories", "--seed", "18446744073709551615", "--count", "100", "--system", "lambda", "--state", "1,1,0",
       "--kernel", "composite", "--dephasing-strength", "1", "--dephasing-gamma", "0.5", "--horizon", "4", "--traj-dt", "0.02"},
      {"diagram", "--dt", "0.002"},
  };
  bool ok = true;
  std::size_t bytes = 0;
  for (auto cmd : commands) {
    std::string first;
    for (const char* threads : {"1", "4", "1"}) {
      auto args = cmd;
      args.insert(args.end(), {"--threads", threads});
      int status = 0;
      const std::string text = capture(args, status);
      ok = ok && status == 0 && !text.empty();
      if (first.empty()) first = text;
      ok = ok && text == first;
    }
    bytes += first.size();
  }
  return {ok, fmt("%zu seeded commands x threads {1, 4, 1}: %s (%zu bytes compared)", commands.size(),
                  ok ? "byte-identical" : "outputs differ", bytes)};
}

}  // namespace

int main() {
  const std::pair<const char*, Verdict (*)()> criteria[] = {
      {"AC1  fig1a C >= 0.95 on (0,4]", ac1},
      {"AC2  fig1a C-vs-R crossing", ac2},
      {"AC3  fig1c C-vs-D crossing, C > R", ac3},
      {"AC4  fig2b claims", ac4},
      {"AC5  fig3 region diagram", ac5},
      {"AC6  closed form vs integrator", ac6},
      {"AC7  Riccati vs Volterra", ac7},
      {"AC8  trajectory oracle", ac8},
      {"AC9  Markov kernel limit", ac9},
      {"AC10 structural invariants", ac10},  // reuses the AC6 propagations
      {"AC11 determinism", ac11},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
