#include "noisemix/experiments.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <exception>

#include "noisemix/coeffs.hpp"
#include "noisemix/errors.hpp"

namespace noisemix {

KernelSpec ScenarioParams::composite_kernel() const {
  if (dephasing_memory_rate) return CompositeKernel{relaxation, {dephasing_strength, *dephasing_memory_rate}};
  return MarkovDephasedKernel{relaxation, dephasing_strength};
}

ScenarioParams ScenarioParams::from_kernel(const KernelSpec& kernel, double omega, const TimeGrid& grid) {
  ScenarioParams p;
  p.omega = omega;
  p.grid = grid;
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, OUKernel>) {
          p.relaxation = k.params;
        } else if constexpr (std::is_same_v<K, CompositeKernel>) {
          p.relaxation = k.beta;
          p.dephasing_strength = k.alpha.strength;
          p.dephasing_memory_rate = k.alpha.memory_rate;
        } else if constexpr (std::is_same_v<K, MarkovDephasedKernel>) {
          p.relaxation = k.beta;
          p.dephasing_strength = k.dephasing_strength;
        } else {
          p.relaxation = {0.0, 1.0};
        }
      },
      kernel);
  return p;
}

double dephasing_factor(const ScenarioParams& params, double t) {
  if (params.dephasing_memory_rate)
    return std::exp(-dephasing_exponent(OUParams{params.dephasing_strength, *params.dephasing_memory_rate}, t));
  return std::exp(-params.dephasing_strength * t / 2.0);
}

FidelityTrace pure_dephasing_fidelity(const ScenarioParams& params, System system, const InitialCondition& initial) {
  const TimeGrid& grid = params.grid;
  FidelityTrace out{grid, Eigen::VectorXd(static_cast<Eigen::Index>(grid.size()))};

  if (const auto* avg = std::get_if<AverageOverStates>(&initial)) {
    if (system != System::qubit) throw ValidationError("initial", "state averages are defined for the qubit only");
    for (std::size_t n = 0; n < grid.size(); ++n)
      out.values[static_cast<Eigen::Index>(n)] =
          average_from_factors(1.0, dephasing_factor(params, grid.time(n)), avg->variant);
    return out;
  }

  const auto& psi = std::get<PureState>(initial);
  if (psi.dim() != (system == System::qubit ? 2 : 3))
    throw ValidationError("initial", "state dimension does not match the system");
  const double upper = psi.upper_population();
  double frozen = 0.0;  // population and lower-lower coherence contributions
  for (Eigen::Index j = 0; j < psi.dim(); ++j) frozen += std::pow(std::norm(psi[j]), 2);
  if (psi.dim() == 3) frozen += 2.0 * std::norm(psi[1]) * std::norm(psi[2]);
  const double damped = 2.0 * upper * (1.0 - upper);
  for (std::size_t n = 0; n < grid.size(); ++n)
    out.values[static_cast<Eigen::Index>(n)] = frozen + damped * dephasing_factor(params, grid.time(n));
  return out;
}

namespace {

CoefficientKind kind_of(System system) {
  return system == System::qubit ? CoefficientKind::two_level_F : CoefficientKind::three_level_Q;
}

FidelityTrace closed_form(const CoefficientSolution& coeff, System system, const InitialCondition& initial) {
  if (const auto* avg = std::get_if<AverageOverStates>(&initial)) {
    if (system != System::qubit) throw ValidationError("initial", "state averages are defined for the qubit only");
    return average_fidelity_qubit(coeff, avg->variant);
  }
  const auto& psi = std::get<PureState>(initial);
  if (system == System::qubit) {
    if (psi.dim() != 2) throw ValidationError("initial", "state dimension does not match the system");
    return fidelity_qubit(psi.upper_population(), coeff);
  }
  return fidelity_lambda(psi, coeff);
}

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

ScenarioTriple build_triple(const ScenarioParams& params, System system, const InitialCondition& initial) {
  const auto kind = kind_of(system);
  const auto relaxation = solve_coefficients(params.relaxation_kernel(), params.omega, params.grid, kind);
  const auto composite = solve_coefficients(params.composite_kernel(), params.omega, params.grid, kind);
  return {closed_form(relaxation, system, initial), pure_dephasing_fidelity(params, system, initial),
          closed_form(composite, system, initial), params};
}

std::optional<double> detect_crossing(const FidelityTrace& a, const FidelityTrace& b, Window window,
                                      double tie_tolerance) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size())
    throw GridMismatch("crossing detection needs traces on one grid");
  bool have_previous = false;
  Eigen::Index previous = 0;
  for (Eigen::Index n = 0; n < a.values.size(); ++n) {
    const double t = a.grid.time(static_cast<std::size_t>(n));
    if (t < window.begin || t > window.end) continue;
    const double d = a.values[n] - b.values[n];
    if (std::abs(d) < tie_tolerance) continue;
    if (have_previous) {
      const double dp = a.values[previous] - b.values[previous];
      if ((dp > 0.0) != (d > 0.0)) {
        const double tp = a.grid.time(static_cast<std::size_t>(previous));
        return tp + (t - tp) * dp / (dp - d);
      }
    }
    have_previous = true;
    previous = n;
  }
  return std::nullopt;
}

const char* region_name(Region r) {
  switch (r) {
    case Region::i: return "i";
    case Region::ii: return "ii";
    case Region::iii: return "iii";
    case Region::iv: return "iv";
  }
  return "?";
}

CellLabel classify_cell(double composite, double relaxation, double dephasing, double tie_tolerance) {
  const auto sign = [tie_tolerance](double d) { return std::abs(d) < tie_tolerance ? 0 : (d > 0.0 ? 1 : -1); };
  const int vs_r = sign(composite - relaxation);
  const int vs_d = sign(composite - dephasing);
  const bool tie = vs_r == 0 || vs_d == 0;
  if (vs_r >= 0 && vs_d >= 0) return {Region::i, tie};
  if (vs_r <= 0 && vs_d >= 0) return {Region::iii, tie};
  if (vs_r >= 0 && vs_d <= 0) return {Region::ii, tie};
  return {Region::iv, tie};
}

void DiagramSpec::validate() const {
  noisemix::validate(relaxation, "relaxation");
  if (time_points < 50) throw ValidationError("time_points", "must be >= 50");
  if (rate_points < 50) throw ValidationError("rate_points", "must be >= 50");
  if (!(rate_min >= 0.0) || !(rate_max > rate_min)) throw ValidationError("rate_max", "need 0 <= rate_min < rate_max");
  if (!(tie_tolerance >= 0.0)) throw ValidationError("tie_tolerance", "must be >= 0");
  const double spacing = horizon / static_cast<double>(time_points);
  const double ratio = spacing / step;
  if (!(step > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0)
    throw ValidationError("time_points", "time axis spacing must be a multiple of dt");
  if (initial.size() != 3) throw ValidationError("initial", "diagram needs a three-level state");
}

double RegionDiagram::region_i_width(std::size_t rate) const {
  std::size_t run = 0;
  while (run < time_axis.size() && at(rate, run) == Region::i) ++run;
  return run == 0 ? 0.0 : time_axis[run - 1];
}

RegionDiagram classify_regions(const DiagramSpec& spec, int threads) {
  spec.validate();
  const PureState psi0(spec.initial);
  const TimeGrid grid = TimeGrid::from_horizon(spec.step, spec.horizon);

  RegionDiagram diagram;
  const std::size_t stride = grid.count / spec.time_points;
  for (std::size_t j = 1; j <= spec.time_points; ++j) diagram.time_axis.push_back(grid.time(j * stride));
  for (std::size_t r = 0; r < spec.rate_points; ++r)
    diagram.rate_axis.push_back(spec.rate_min + (spec.rate_max - spec.rate_min) * static_cast<double>(r) /
                                                    static_cast<double>(spec.rate_points - 1));
  diagram.labels.resize(spec.rate_points * spec.time_points);
  diagram.ties.resize(spec.rate_points * spec.time_points);

  ScenarioParams base;
  base.relaxation = spec.relaxation;
  base.omega = spec.omega;
  base.grid = grid;
  const auto relaxation = fidelity_lambda(psi0, solve_riccati_Q(base.relaxation_kernel(), spec.omega, grid));

  std::vector<std::exception_ptr> failures(spec.rate_points);
  std::vector<std::uint8_t> ties(diagram.ties.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t r = 0; r < spec.rate_points; ++r) {
    try {
      ScenarioParams p = base;
      p.dephasing_strength = diagram.rate_axis[r];
      const auto composite = fidelity_lambda(psi0, solve_riccati_Q(p.composite_kernel(), p.omega, grid));
      const auto dephasing = pure_dephasing_fidelity(p, System::lambda, psi0);
      for (std::size_t j = 0; j < spec.time_points; ++j) {
        const auto n = static_cast<Eigen::Index>((j + 1) * stride);
        const auto cell = classify_cell(composite.values[n], relaxation.values[n], dephasing.values[n],
                                        spec.tie_tolerance);
        diagram.labels[r * spec.time_points + j] = cell.region;
        ties[r * spec.time_points + j] = cell.tie;
      }
    } catch (...) {
      failures[r] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
  for (std::size_t c = 0; c < ties.size(); ++c) diagram.ties[c] = ties[c] != 0;
  return diagram;
}

namespace {

constexpr std::array<std::pair<FigureId, const char*>, 6> figure_names{{{FigureId::fig1a, "fig1a"},
                                                                        {FigureId::fig1b, "fig1b"},
                                                                        {FigureId::fig1c, "fig1c"},
                                                                        {FigureId::fig2a, "fig2a"},
                                                                        {FigureId::fig2b, "fig2b"},
                                                                        {FigureId::fig3, "fig3"}}};

ScenarioParams scenario(double relax_memory, double dephasing_strength, std::optional<double> dephasing_memory,
                        const TimeGrid& grid) {
  ScenarioParams p;
  p.relaxation = {1.0, relax_memory};
  p.dephasing_strength = dephasing_strength;
  p.dephasing_memory_rate = dephasing_memory;
  p.grid = grid;
  return p;
}

struct CurveJob {
  std::string name;
  std::string role;
  ScenarioParams params;
};

Curve evaluate(const CurveJob& job) {
  Curve c{job.name, job.role, job.params, {}, {}};
  const auto& p = job.params;
  if (job.role == "D") {
    c.paper_formula = pure_dephasing_fidelity(p, System::qubit, AverageOverStates{AverageVariant::paper_formula});
    c.haar_integral = pure_dephasing_fidelity(p, System::qubit, AverageOverStates{AverageVariant::haar_integral});
    return c;
  }
  const KernelSpec kernel = job.role == "R" ? p.relaxation_kernel() : p.composite_kernel();
  const auto coeff = solve_coefficients(kernel, p.omega, p.grid, CoefficientKind::two_level_F);
  c.paper_formula = average_fidelity_qubit(coeff, AverageVariant::paper_formula);
  c.haar_integral = average_fidelity_qubit(coeff, AverageVariant::haar_integral);
  return c;
}

}  // namespace

std::optional<FigureId> parse_figure_id(const std::string& name) {
  for (const auto& [id, n] : figure_names)
    if (name == n) return id;
  return std::nullopt;
}

std::string figure_name(FigureId id) {
  for (const auto& [i, n] : figure_names)
    if (i == id) return n;
  return "?";
}

std::vector<ScenarioParams> figure_parameter_sets(FigureId id, const TimeGrid& grid) {
  std::vector<ScenarioParams> sets;
  switch (id) {
    case FigureId::fig1a:
    case FigureId::fig1b:
    case FigureId::fig1c: {
      const double memory = id == FigureId::fig1a ? 0.1 : id == FigureId::fig1b ? 0.5 : 2.0;
      for (double rate : {1.0, 2.0, 4.0}) sets.push_back(scenario(memory, rate, std::nullopt, grid));
      break;
    }
    case FigureId::fig2a:
      for (double memory : {0.1, 0.5, 2.0}) sets.push_back(scenario(0.1, 2.0, memory, grid));
      break;
    case FigureId::fig2b:
      for (double memory : {0.1, 0.3, 0.9}) sets.push_back(scenario(memory, 1.0, 0.1, grid));
      break;
    case FigureId::fig3:
      break;
  }
  return sets;
}

FigureData reproduce_figure(FigureId id, const TimeGrid& grid, int threads) {
  FigureData data{id, {}, std::nullopt};
  if (id == FigureId::fig3) {
    DiagramSpec spec;
    spec.step = grid.step;
    spec.horizon = grid.horizon();
    data.diagram = classify_regions(spec, threads);
    return data;
  }

  // R depends only on the relaxation channel and D only on the dephasing
  // channel, so duplicates across the panel are emitted once.
  std::vector<CurveJob> jobs;
  const auto sets = figure_parameter_sets(id, grid);
  const auto add_unique = [&](std::string name, std::string role, const ScenarioParams& p) {
    for (const auto& j : jobs)
      if (j.name == name) return;
    jobs.push_back({std::move(name), std::move(role), p});
  };
  for (const auto& p : sets) {
    const std::string relax_tag = "_gb" + compact(p.relaxation.memory_rate);
    const std::string deph_tag =
        p.dephasing_memory_rate ? "_Ga" + compact(p.dephasing_strength) + "_ga" + compact(*p.dephasing_memory_rate)
                                : "_Ga" + compact(p.dephasing_strength);
    add_unique("R" + relax_tag, "R", p);
    add_unique("D" + deph_tag, "D", p);
    add_unique("C" + relax_tag + deph_tag, "C", p);
  }

  data.curves.resize(jobs.size());
  std::vector<std::exception_ptr> failures(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    try {
      data.curves[j] = evaluate(jobs[j]);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  }
  for (const auto& failure : failures)
    if (failure) std::rethrow_exception(failure);
  return data;
}

}  // namespace noisemix
