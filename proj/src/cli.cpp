#include "noisemix/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "noisemix/coeffs.hpp"
#include "noisemix/config.hpp"
#include "noisemix/dynamics.hpp"
#include "noisemix/errors.hpp"
#include "noisemix/experiments.hpp"
#include "noisemix/table.hpp"
#include "noisemix/trajectories.hpp"

namespace noisemix {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Overrides {
  std::string config_path;
  std::optional<std::string> system, kernel, variant, out, format, state;
  std::optional<double> omega, strength, gamma, dephasing_strength, dephasing_gamma, dt, horizon, traj_dt;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> count;
  int threads = 1;
  bool emit_config = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON run configuration");
  sub->add_option("--system", o.system, "qubit | lambda");
  sub->add_option("--omega", o.omega, "system frequency (the unit of all rates)");
  sub->add_option("--kernel", o.kernel, "ou | composite | markov | zero");
  sub->add_option("--strength", o.strength, "relaxation strength Gamma_beta/omega");
  sub->add_option("--gamma", o.gamma, "relaxation memory rate gamma_beta/omega");
  sub->add_option("--dephasing-strength", o.dephasing_strength, "dephasing strength Gamma_alpha/omega");
  sub->add_option("--dephasing-gamma", o.dephasing_gamma, "dephasing memory rate gamma_alpha/omega");
  sub->add_option("--dt", o.dt, "time step (1/omega)");
  sub->add_option("--horizon", o.horizon, "final omega t");
  sub->add_option("--state", o.state, "initial amplitudes: 'a,b[,c]' (real) or 're:im,...'");
  sub->add_option("--variant", o.variant, "paper_formula | haar_integral");
  sub->add_option("--seed", o.seed, "64-bit master seed");
  sub->add_option("--count", o.count, "number of trajectories");
  sub->add_option("--traj-dt", o.traj_dt, "trajectory noise grid step");
  sub->add_option("--threads", o.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  sub->add_option("--out", o.out, "output file (directory for `figure`)");
  sub->add_option("--format", o.format, "csv | json");
  sub->add_flag("--emit-config", o.emit_config, "print the effective configuration and exit");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("--config", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_state(const std::string& text) {
  json amps = json::array();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      const auto colon = item.find(':');
      if (colon == std::string::npos) {
        amps.push_back(std::stod(item));
      } else {
        amps.push_back({std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
      }
    } catch (const std::logic_error&) {
      throw ValidationError("--state", "cannot parse amplitude '" + item + "'");
    }
  }
  return amps;
}

// Flags override the config file key by key; the merged document goes
// through the same strict parser.
RunConfig build_config(const Overrides& o) {
  json doc = json::object();
  if (!o.config_path.empty()) {
    const std::string text = read_file(o.config_path);
    if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
      try {
        doc = json::parse(text);
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
      }
      if (!doc.is_object()) throw ValidationError("config", "expected an object");
    }
  }
  if (o.system) doc["system"] = *o.system;
  if (o.omega) doc["omega"] = *o.omega;
  if (o.kernel || o.strength || o.gamma || o.dephasing_strength || o.dephasing_gamma) {
    json k = doc.contains("kernel") ? doc["kernel"] : json::object();
    if (o.kernel) k["type"] = *o.kernel;
    if (o.strength) k["strength"] = *o.strength;
    if (o.gamma) k["memory_rate"] = *o.gamma;
    if (o.dephasing_strength) k["dephasing_strength"] = *o.dephasing_strength;
    if (o.dephasing_gamma) k["dephasing_memory_rate"] = *o.dephasing_gamma;
    doc["kernel"] = k;
  }
  if (o.dt || o.horizon) {
    json g = doc.contains("grid") ? doc["grid"] : json::object();
    if (o.dt) g["dt"] = *o.dt;
    if (o.horizon) g["horizon"] = *o.horizon;
    doc["grid"] = g;
  }
  if (o.state) doc["initial"] = {{"amplitudes", parse_state(*o.state)}};
  if (o.seed || o.count || o.traj_dt) {
    json e = doc.contains("ensemble") ? doc["ensemble"] : json::object();
    if (o.seed) e["seed"] = *o.seed;
    if (o.count) e["count"] = *o.count;
    if (o.traj_dt) e["step"] = *o.traj_dt;
    doc["ensemble"] = e;
  }
  if (o.variant) doc["average_variant"] = *o.variant;
  if (o.out || o.format) {
    json out = doc.contains("output") ? doc["output"] : json::object();
    if (o.out) out["path"] = *o.out;
    if (o.format) out["format"] = *o.format;
    doc["output"] = out;
  }
  try {
    return config_from_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
}

std::string render(const Table& table, OutputFormat format) {
  if (format == OutputFormat::csv) return to_csv(table);
  json doc;
  doc["columns"] = table.header;
  json rows = json::array();
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    json row = json::array();
    for (const auto& col : table.columns) row.push_back(col[r]);
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  return doc.dump() + "\n";
}

void emit(const Table& table, const RunConfig& cfg, std::ostream& out) {
  const std::string text = render(table, cfg.output.format);
  if (cfg.output.path.empty()) {
    out << text;
  } else {
    write_file_atomically(cfg.output.path, text);
  }
}

Eigen::VectorXd times(const TimeGrid& grid) {
  return Eigen::VectorXd::NullaryExpr(static_cast<Eigen::Index>(grid.size()),
                                      [&](Eigen::Index n) { return grid.time(static_cast<std::size_t>(n)); });
}

CoefficientKind kind_of(const RunConfig& cfg) {
  return cfg.system == System::qubit ? CoefficientKind::two_level_F : CoefficientKind::three_level_Q;
}

PureState require_state(const RunConfig& cfg, const char* command) {
  auto psi = cfg.initial_state();
  if (!psi) throw ValidationError("initial", std::string(command) + " needs an initial state (--state)");
  return *psi;
}

void cmd_kernel(const RunConfig& cfg, std::ostream& out) {
  Table t;
  t.add("tau", times(cfg.grid)).add("G", sample_kernel(cfg.kernel, cfg.grid).matrix());
  emit(t, cfg, out);
}

struct CoeffOptions {
  std::string solver = "auto";
  bool volterra = false;
  bool compare = false;
};

void cmd_coeff(const RunConfig& cfg, const CoeffOptions& opts, std::ostream& out, std::ostream& err) {
  const auto kind = kind_of(cfg);
  if (opts.compare) {
    const auto ric = solve_riccati(cfg.kernel, cfg.omega, cfg.grid, kind);
    const auto vol = solve_volterra(cfg.kernel, cfg.omega, cfg.grid, kind);
    const Eigen::VectorXd diff = (ric.values - vol.values).cwiseAbs();
    Table t;
    t.add("t", times(cfg.grid))
        .add("riccati_re", ric.values.real())
        .add("riccati_im", ric.values.imag())
        .add("volterra_re", vol.values.real())
        .add("volterra_im", vol.values.imag())
        .add("abs_diff", diff);
    emit(t, cfg, out);
    err << "sup_norm_difference " << format_number(diff.maxCoeff()) << "\n";
    return;
  }
  SolverChoice solver = SolverChoice::automatic;
  if (opts.volterra || opts.solver == "volterra") solver = SolverChoice::volterra;
  else if (opts.solver == "riccati") solver = SolverChoice::riccati;
  else if (opts.solver != "auto") throw ValidationError("--solver", "expected auto, riccati or volterra");
  const auto sol = solve_coefficients(cfg.kernel, cfg.omega, cfg.grid, kind, solver);
  Table t;
  t.add("t", times(cfg.grid))
      .add("re", sol.values.real())
      .add("im", sol.values.imag())
      .add("int_re", sol.real_integral)
      .add("im_int", sol.integral.imag());
  emit(t, cfg, out);
}

void cmd_evolve(const RunConfig& cfg, const std::string& frame, std::ostream& out, std::ostream& err) {
  const PureState psi = require_state(cfg, "evolve");
  if (frame != "rotating" && frame != "lab") throw ValidationError("--frame", "expected rotating or lab");
  const auto coeff = solve_coefficients(cfg.kernel, cfg.omega, cfg.grid, kind_of(cfg));
  const DensityTrace trace =
      cfg.system == System::qubit
          ? propagate_qubit(coeff, psi.projector(), cfg.omega, frame == "lab" ? Frame::lab : Frame::rotating)
          : propagate_lambda(coeff, psi.projector());
  const Eigen::Index d = psi.dim();
  Table t;
  t.add("t", times(trace.grid));
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) {
      Eigen::VectorXd re(static_cast<Eigen::Index>(trace.states.size())), im(re.size());
      for (std::size_t n = 0; n < trace.states.size(); ++n) {
        re[static_cast<Eigen::Index>(n)] = trace.states[n](r, c).real();
        im[static_cast<Eigen::Index>(n)] = trace.states[n](r, c).imag();
      }
      const std::string idx = std::to_string(r) + std::to_string(c);
      t.add("re_rho" + idx, re).add("im_rho" + idx, im);
    }
  }
  emit(t, cfg, out);
  err << "min_eigenvalue " << format_number(trace.min_eigenvalue) << "\n";
}

void cmd_fidelity(const RunConfig& cfg, std::ostream& out) {
  const PureState psi = require_state(cfg, "fidelity");
  const auto coeff = solve_coefficients(cfg.kernel, cfg.omega, cfg.grid, kind_of(cfg));
  const FidelityTrace f = cfg.system == System::qubit ? fidelity_qubit(psi.upper_population(), coeff)
                                                      : fidelity_lambda(psi, coeff);
  Table t;
  t.add("t", times(f.grid)).add("fidelity", f.values);
  emit(t, cfg, out);
}

void cmd_average(const RunConfig& cfg, std::ostream& out) {
  if (cfg.system != System::qubit) throw ValidationError("system", "average-fidelity is defined for the qubit only");
  const auto coeff = solve_coefficients(cfg.kernel, cfg.omega, cfg.grid, CoefficientKind::two_level_F);
  const auto f = average_fidelity_qubit(coeff, cfg.average_variant);
  Table t;
  t.add("t", times(f.grid)).add("fidelity", f.values);
  emit(t, cfg, out);
}

void cmd_trajectories(const RunConfig& cfg, int threads, std::ostream& out) {
  const PureState psi = require_state(cfg, "trajectories");
  const EnsembleSpec ensemble = cfg.ensemble.value_or(EnsembleSpec{});
  const auto coeff = solve_coefficients(cfg.kernel, cfg.omega, cfg.grid, kind_of(cfg));
  const TimeGrid coarse = TimeGrid::from_horizon(cfg.trajectory_step, cfg.grid.horizon());
  const std::size_t stride = cfg.grid.coarsening_factor(coarse);
  if (stride == 0) throw GridMismatch("ensemble.step must be a multiple of dt not exceeding the horizon");
  const auto result = run_qsd_ensemble(cfg.kernel, cfg.omega, coeff, psi, coarse, ensemble, threads);

  const FidelityTrace closed = cfg.system == System::qubit ? fidelity_qubit(psi.upper_population(), coeff)
                                                           : fidelity_lambda(psi, coeff);
  Eigen::VectorXd closed_coarse(static_cast<Eigen::Index>(coarse.size()));
  for (Eigen::Index n = 0; n < closed_coarse.size(); ++n) closed_coarse[n] = closed.values[n * static_cast<Eigen::Index>(stride)];

  Table t;
  t.add("t", times(coarse))
      .add("fidelity", result.fidelity)
      .add("fidelity_stderr", result.fidelity_stderr)
      .add("trace", result.trace)
      .add("trace_stderr", result.trace_stderr)
      .add("closed_form", closed_coarse);
  emit(t, cfg, out);
}

json params_json(const ScenarioParams& p) {
  json j;
  j["omega"] = p.omega;
  j["relaxation"] = {{"strength", p.relaxation.strength}, {"memory_rate", p.relaxation.memory_rate}};
  j["dephasing"] = {{"strength", p.dephasing_strength}};
  if (p.dephasing_memory_rate) j["dephasing"]["memory_rate"] = *p.dephasing_memory_rate;
  else j["dephasing"]["memory_rate"] = "markov";
  return j;
}

Table diagram_table(const RegionDiagram& d) {
  const auto cells = static_cast<Eigen::Index>(d.labels.size());
  Eigen::VectorXd rate(cells), time(cells), region(cells), tie(cells);
  Eigen::Index c = 0;
  for (std::size_t r = 0; r < d.rate_axis.size(); ++r) {
    for (std::size_t j = 0; j < d.time_axis.size(); ++j, ++c) {
      rate[c] = d.rate_axis[r];
      time[c] = d.time_axis[j];
      region[c] = static_cast<double>(d.at(r, j));
      tie[c] = d.tie_at(r, j) ? 1.0 : 0.0;
    }
  }
  Table t;
  t.add("dephasing_strength", rate).add("t", time).add("region", region).add("tie", tie);
  return t;
}

json region_legend() {
  return {{"1", "i: C > R and C > D"},
          {"2", "ii: D >= C > R"},
          {"3", "iii: R >= C >= D"},
          {"4", "iv: C < R and C < D"}};
}

void cmd_figure(const RunConfig& cfg, const std::string& name, int threads, std::ostream& err) {
  const auto id = parse_figure_id(name);
  if (!id) throw ValidationError("figure", "unknown figure '" + name + "'");
  if (cfg.output.path.empty()) throw ValidationError("--out", "figure needs an output directory");
  const fs::path dir(cfg.output.path);
  fs::create_directories(dir);

  const FigureData data = reproduce_figure(*id, cfg.grid, threads);
  json manifest;
  manifest["figure"] = name;
  manifest["grid"] = {{"dt", cfg.grid.step}, {"horizon", cfg.grid.horizon()}};
  if (data.diagram) {
    write_file_atomically(dir / "diagram.csv", to_csv(diagram_table(*data.diagram)));
    manifest["diagram"] = "diagram.csv";
    manifest["legend"] = region_legend();
    manifest["tie_tolerance"] = 1e-4;
    manifest["system"] = "lambda";
    manifest["initial"] = "(|1> + |2>)/sqrt(2)";
    manifest["relaxation"] = {{"strength", 1.0}, {"memory_rate", 0.1}};
    manifest["dephasing"] = "markov";
  } else {
    json curves = json::array();
    for (const auto& c : data.curves) {
      Table t;
      t.add("t", times(c.paper_formula.grid))
          .add("paper_formula", c.paper_formula.values)
          .add("haar_integral", c.haar_integral.values);
      const std::string file = c.name + ".csv";
      write_file_atomically(dir / file, to_csv(t));
      json entry = params_json(c.params);
      entry["file"] = file;
      entry["name"] = c.name;
      entry["role"] = c.role;
      curves.push_back(std::move(entry));
    }
    manifest["curves"] = std::move(curves);
    manifest["columns"] = {"t", "paper_formula", "haar_integral"};
    manifest["system"] = "qubit";
    manifest["initial"] = "average over pure states";
  }
  write_file_atomically(dir / "manifest.json", manifest.dump(2) + "\n");
  err << "wrote " << (data.diagram ? 1 : data.curves.size()) << " table(s) and manifest.json to " << dir.string()
      << "\n";
}

struct DiagramOptions {
  std::size_t time_points = 100;
  std::size_t rate_points = 60;
  double rate_min = 0.1;
  double rate_max = 6.0;
};

void cmd_diagram(const RunConfig& cfg, const DiagramOptions& opts, int threads, std::ostream& out) {
  DiagramSpec spec;
  const auto params = ScenarioParams::from_kernel(cfg.kernel, cfg.omega, cfg.grid);
  spec.relaxation = params.relaxation;
  spec.omega = cfg.omega;
  spec.step = cfg.grid.step;
  spec.horizon = cfg.grid.horizon();
  spec.time_points = opts.time_points;
  spec.rate_points = opts.rate_points;
  spec.rate_min = opts.rate_min;
  spec.rate_max = opts.rate_max;
  if (cfg.initial) {
    if (cfg.initial->size() != 3) throw ValidationError("initial", "diagram needs a three-level state");
    spec.initial = *cfg.initial;
  }
  emit(diagram_table(classify_regions(spec, threads)), cfg, out);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"noisemix: exact relaxation + dephasing dynamics of two- and three-level atoms"};
  app.require_subcommand(1);

  Overrides o;
  CoeffOptions coeff_opts;
  DiagramOptions diagram_opts;
  std::string frame = "rotating";
  std::string figure;

  auto* kernel = app.add_subcommand("kernel", "tabulate the correlation kernel G(tau)");
  auto* coeff = app.add_subcommand("coeff", "solve for F(t) (qubit) or Q(t) (lambda)");
  coeff->add_option("--solver", coeff_opts.solver, "auto | riccati | volterra");
  coeff->add_flag("--volterra", coeff_opts.volterra, "use the memory-integral solver");
  coeff->add_flag("--compare", coeff_opts.compare, "run both solvers and report the sup-norm difference");
  auto* evolve = app.add_subcommand("evolve", "propagate the exact master equation");
  evolve->add_option("--frame", frame, "rotating | lab (qubit only)");
  auto* fidelity = app.add_subcommand("fidelity", "closed-form fidelity for an initial state");
  auto* average = app.add_subcommand("average-fidelity", "qubit fidelity averaged over pure initial states");
  auto* traj = app.add_subcommand("trajectories", "Monte-Carlo QSD ensemble");
  auto* fig = app.add_subcommand("figure", "tabulate the R/D/C curves of one figure panel");
  fig->add_option("id", figure, "fig1a | fig1b | fig1c | fig2a | fig2b | fig3")->required();
  auto* diagram = app.add_subcommand("diagram", "R/D/C region diagram for the Lambda atom");
  diagram->add_option("--time-points", diagram_opts.time_points);
  diagram->add_option("--rate-points", diagram_opts.rate_points);
  diagram->add_option("--rate-min", diagram_opts.rate_min);
  diagram->add_option("--rate-max", diagram_opts.rate_max);
  for (auto* sub : {kernel, coeff, evolve, fidelity, average, traj, fig, diagram}) add_common(sub, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? exit_ok : exit_invalid;
  }

  try {
    const RunConfig cfg = build_config(o);
    if (o.emit_config) {
      out << to_json(cfg).dump(2) << "\n";
      return exit_ok;
    }
    if (kernel->parsed()) cmd_kernel(cfg, out);
    else if (coeff->parsed()) cmd_coeff(cfg, coeff_opts, out, err);
    else if (evolve->parsed()) cmd_evolve(cfg, frame, out, err);
    else if (fidelity->parsed()) cmd_fidelity(cfg, out);
    else if (average->parsed()) cmd_average(cfg, out);
    else if (traj->parsed()) cmd_trajectories(cfg, o.threads, out);
    else if (fig->parsed()) cmd_figure(cfg, figure, o.threads, err);
    else if (diagram->parsed()) cmd_diagram(cfg, diagram_opts, o.threads, out);
    return exit_ok;
  } catch (const NonFinite& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const NotPositiveSemidefinite& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_invalid;
  }
}

}  // namespace noisemix
