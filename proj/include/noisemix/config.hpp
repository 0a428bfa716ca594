#pragma once

// Run configuration: JSON document with strict key checking. Every rate and
// time is in units of omega, the qubit frequency.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "noisemix/dynamics.hpp"
#include "noisemix/experiments.hpp"
#include "noisemix/kernels.hpp"
#include "noisemix/time_grid.hpp"
#include "noisemix/trajectories.hpp"

namespace noisemix {

enum class OutputFormat { csv, json };

struct OutputSpec {
  std::string path;  ///< empty: standard output
  OutputFormat format = OutputFormat::csv;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct RunConfig {
  System system = System::qubit;
  double omega = 1.0;
  KernelSpec kernel = OUKernel{{1.0, 0.1}};
  TimeGrid grid = TimeGrid::from_horizon(1e-3, 8.0);
  std::optional<Eigen::VectorXcd> initial;  ///< nullopt: average over initial states
  std::optional<EnsembleSpec> ensemble;
  double trajectory_step = 0.01;
  AverageVariant average_variant = AverageVariant::paper_formula;
  OutputSpec output;

  /// Re-checks every invariant; throws ValidationError naming the key.
  void validate() const;
  std::optional<PureState> initial_state() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Parses a JSON document (empty text means all defaults). Throws ParseError
/// on syntax errors and ValidationError on unknown keys or bad values.
RunConfig parse_config(std::string_view text);
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

std::string to_string(System s);
std::string to_string(AverageVariant v);
std::string kernel_type_name(const KernelSpec& k);

}  // namespace noisemix
