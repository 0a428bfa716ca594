#pragma once

// Relaxation (R), dephasing (D) and composite (C) fidelity comparisons.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "noisemix/dynamics.hpp"
#include "noisemix/kernels.hpp"
#include "noisemix/time_grid.hpp"

namespace noisemix {

enum class System { qubit, lambda };

struct ScenarioParams {
  OUParams relaxation{1.0, 0.1};
  double dephasing_strength = 0.0;
  /// nullopt selects delta-correlated (Markov) dephasing.
  std::optional<double> dephasing_memory_rate;
  double omega = 1.0;
  TimeGrid grid = TimeGrid::from_horizon(1e-3, 8.0);

  KernelSpec relaxation_kernel() const { return OUKernel{relaxation}; }
  KernelSpec composite_kernel() const;
  static ScenarioParams from_kernel(const KernelSpec& kernel, double omega, const TimeGrid& grid);
};

/// Marks a state-averaged qubit fidelity instead of a fixed initial state.
struct AverageOverStates {
  AverageVariant variant = AverageVariant::paper_formula;
};

using InitialCondition = std::variant<PureState, AverageOverStates>;

struct ScenarioTriple {
  FidelityTrace relaxation;
  FidelityTrace dephasing;
  FidelityTrace composite;
  ScenarioParams params;
};

/// Coherence damping M[e^{i Xi(t)}] of the pure dephasing channel.
double dephasing_factor(const ScenarioParams& params, double t);

/// Pure-dephasing fidelity: populations are frozen and every coherence between
/// the upper level and a lower level is damped by dephasing_factor. Evaluated
/// in the rotating frame, like the closed forms for R and C.
FidelityTrace pure_dephasing_fidelity(const ScenarioParams& params, System system, const InitialCondition& initial);

ScenarioTriple build_triple(const ScenarioParams& params, System system, const InitialCondition& initial);

struct Window {
  double begin = 0.0;
  double end = 1e300;
};

/// First sign change of a - b inside `window`, linearly interpolated between
/// the bracketing nodes. Nodes with |a - b| < tie_tolerance are skipped.
std::optional<double> detect_crossing(const FidelityTrace& a, const FidelityTrace& b, Window window = {},
                                      double tie_tolerance = 1e-4);

enum class Region : std::uint8_t { i = 1, ii = 2, iii = 3, iv = 4 };

const char* region_name(Region r);

struct CellLabel {
  Region region;
  bool tie;
};

/// i: C>R, C>D; ii: D>=C>R; iii: R>=C>=D; iv: C<R, C<D. Differences below the
/// tolerance are ties; a tied cell goes to the first region of i, iii, ii, iv
/// it satisfies when ties count as either ordering.
CellLabel classify_cell(double composite, double relaxation, double dephasing, double tie_tolerance = 1e-4);

struct DiagramSpec {
  OUParams relaxation{1.0, 0.1};
  double omega = 1.0;
  double step = 1e-3;
  double horizon = 8.0;
  std::size_t time_points = 100;  ///< omega t = horizon * j / time_points, j = 1..time_points
  std::size_t rate_points = 60;   ///< linspace(rate_min, rate_max)
  double rate_min = 0.1;
  double rate_max = 6.0;
  double tie_tolerance = 1e-4;
  Eigen::VectorXcd initial = Eigen::Vector3cd(1.0, 1.0, 0.0) / std::sqrt(2.0);

  void validate() const;
};

struct RegionDiagram {
  std::vector<double> time_axis;
  std::vector<double> rate_axis;
  std::vector<Region> labels;  ///< row-major: rate index, then time index
  std::vector<bool> ties;

  Region at(std::size_t rate, std::size_t time) const { return labels[rate * time_axis.size() + time]; }
  bool tie_at(std::size_t rate, std::size_t time) const { return ties[rate * time_axis.size() + time]; }
  /// omega t extent of the region-i window that opens at t -> 0+.
  double region_i_width(std::size_t rate) const;
};

/// Lambda atom, Markov dephasing swept over rate_axis.
RegionDiagram classify_regions(const DiagramSpec& spec, int threads = 1);

enum class FigureId { fig1a, fig1b, fig1c, fig2a, fig2b, fig3 };

std::optional<FigureId> parse_figure_id(const std::string& name);
std::string figure_name(FigureId id);

struct Curve {
  std::string name;   ///< unique file stem, e.g. "C_Ga4"
  std::string role;   ///< "R", "D" or "C"
  ScenarioParams params;
  FidelityTrace paper_formula;
  FidelityTrace haar_integral;
};

struct FigureData {
  FigureId id;
  std::vector<Curve> curves;
  std::optional<RegionDiagram> diagram;
};

/// Parameter sets of one figure panel (empty for fig3).
std::vector<ScenarioParams> figure_parameter_sets(FigureId id, const TimeGrid& grid);

FigureData reproduce_figure(FigureId id, const TimeGrid& grid = TimeGrid::from_horizon(1e-3, 8.0), int threads = 1);

}  // namespace noisemix
