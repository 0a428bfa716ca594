#include "noisemix/config.hpp"

#include <cmath>
#include <set>

#include "noisemix/errors.hpp"

namespace noisemix {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError(where.empty() ? "config" : where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ValidationError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

double get_number(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  return v.get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& path, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(path, "expected a string");
  return v.get<std::string>();
}

KernelSpec parse_kernel(const json& k) {
  const std::string type = get_string(k, "type", "kernel.type", "ou");
  const auto ou = [&](const char* prefix, const char* s_key, const char* m_key, OUParams fallback) {
    return OUParams{get_number(k, s_key, std::string(prefix) + s_key, fallback.strength),
                    get_number(k, m_key, std::string(prefix) + m_key, fallback.memory_rate)};
  };
  if (type == "ou") {
    reject_unknown(k, "kernel", {"type", "strength", "memory_rate"});
    return OUKernel{ou("kernel.", "strength", "memory_rate", {1.0, 0.1})};
  }
  if (type == "composite") {
    reject_unknown(k, "kernel", {"type", "strength", "memory_rate", "dephasing_strength", "dephasing_memory_rate"});
    return CompositeKernel{ou("kernel.", "strength", "memory_rate", {1.0, 0.1}),
                           ou("kernel.", "dephasing_strength", "dephasing_memory_rate", {1.0, 0.1})};
  }
  if (type == "markov") {
    reject_unknown(k, "kernel", {"type", "strength", "memory_rate", "dephasing_strength"});
    return MarkovDephasedKernel{ou("kernel.", "strength", "memory_rate", {1.0, 0.1}),
                                get_number(k, "dephasing_strength", "kernel.dephasing_strength", 1.0)};
  }
  if (type == "zero") {
    reject_unknown(k, "kernel", {"type"});
    return ZeroKernel{};
  }
  throw ValidationError("kernel.type", "expected one of ou, composite, markov, zero");
}

json kernel_json(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, OUKernel>) {
          return {{"type", "ou"}, {"strength", k.params.strength}, {"memory_rate", k.params.memory_rate}};
        } else if constexpr (std::is_same_v<K, CompositeKernel>) {
          return {{"type", "composite"},
                  {"strength", k.beta.strength},
                  {"memory_rate", k.beta.memory_rate},
                  {"dephasing_strength", k.alpha.strength},
                  {"dephasing_memory_rate", k.alpha.memory_rate}};
        } else if constexpr (std::is_same_v<K, MarkovDephasedKernel>) {
          return {{"type", "markov"},
                  {"strength", k.beta.strength},
                  {"memory_rate", k.beta.memory_rate},
                  {"dephasing_strength", k.dephasing_strength}};
        } else {
          return {{"type", "zero"}};
        }
      },
      spec);
}

Eigen::VectorXcd parse_amplitudes(const json& v) {
  if (!v.is_array() || (v.size() != 2 && v.size() != 3))
    throw ValidationError("initial.amplitudes", "expected 2 or 3 amplitudes");
  Eigen::VectorXcd a(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& e = v[i];
    if (e.is_number()) {
      a[static_cast<Eigen::Index>(i)] = e.get<double>();
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      a[static_cast<Eigen::Index>(i)] = Complex(e[0].get<double>(), e[1].get<double>());
    } else {
      throw ValidationError("initial.amplitudes", "each amplitude is a number or a [re, im] pair");
    }
  }
  // Normalize on load unless already normalized, so emitted configs re-parse unchanged.
  const double norm2 = a.squaredNorm();
  if (!(norm2 > 0.0) || !std::isfinite(norm2)) throw ValidationError("initial.amplitudes", "state has zero norm");
  if (std::abs(norm2 - 1.0) > 1e-12) a /= std::sqrt(norm2);
  return a;
}

}  // namespace

std::string to_string(System s) { return s == System::qubit ? "qubit" : "lambda"; }

std::string to_string(AverageVariant v) {
  return v == AverageVariant::paper_formula ? "paper_formula" : "haar_integral";
}

std::string kernel_type_name(const KernelSpec& k) { return kernel_json(k)["type"].get<std::string>(); }

std::optional<PureState> RunConfig::initial_state() const {
  if (!initial) return std::nullopt;
  return PureState(*initial);
}

void RunConfig::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw ValidationError("omega", "must be finite and > 0");
  noisemix::validate(kernel);
  grid.validate();
  if (initial) {
    (void)PureState(*initial);
    if (initial->size() != (system == System::qubit ? 2 : 3))
      throw ValidationError("initial.amplitudes", "state dimension does not match the system");
  }
  if (ensemble && ensemble->count < 1) throw ValidationError("ensemble.count", "must be >= 1");
  if (!(trajectory_step > 0.0) || !std::isfinite(trajectory_step))
    throw ValidationError("ensemble.step", "must be finite and > 0");
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const bool initial_equal = a.initial.has_value() == b.initial.has_value() &&
                             (!a.initial || (a.initial->size() == b.initial->size() && *a.initial == *b.initial));
  const bool ensemble_equal =
      a.ensemble.has_value() == b.ensemble.has_value() &&
      (!a.ensemble || (a.ensemble->count == b.ensemble->count && a.ensemble->seed == b.ensemble->seed));
  return a.system == b.system && a.omega == b.omega && a.kernel == b.kernel && a.grid == b.grid && initial_equal &&
         ensemble_equal && a.trajectory_step == b.trajectory_step && a.average_variant == b.average_variant &&
         a.output == b.output;
}

RunConfig config_from_json(const json& doc) {
  RunConfig cfg;
  if (doc.is_null()) return cfg;
  reject_unknown(doc, "",
                 {"system", "omega", "kernel", "grid", "initial", "ensemble", "average_variant", "output"});

  const std::string system = get_string(doc, "system", "system", "qubit");
  if (system == "qubit") cfg.system = System::qubit;
  else if (system == "lambda") cfg.system = System::lambda;
  else throw ValidationError("system", "expected qubit or lambda");

  cfg.omega = get_number(doc, "omega", "omega", 1.0);
  if (doc.contains("kernel")) {
    if (!doc["kernel"].is_object()) throw ValidationError("kernel", "expected an object");
    cfg.kernel = parse_kernel(doc["kernel"]);
  }

  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    reject_unknown(g, "grid", {"dt", "horizon"});
    const double dt = get_number(g, "dt", "grid.dt", 1e-3);
    const double horizon = get_number(g, "horizon", "grid.horizon", 8.0);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("grid.dt", "must be finite and > 0");
    if (!(horizon >= dt) || !std::isfinite(horizon)) throw ValidationError("grid.horizon", "must be >= dt");
    cfg.grid = TimeGrid::from_horizon(dt, horizon);
  }

  if (doc.contains("initial")) {
    const auto& init = doc["initial"];
    if (init.is_string()) {
      if (init.get<std::string>() != "average") throw ValidationError("initial", "expected \"average\" or an object");
    } else {
      reject_unknown(init, "initial", {"amplitudes"});
      if (!init.contains("amplitudes")) throw ValidationError("initial.amplitudes", "missing");
      cfg.initial = parse_amplitudes(init["amplitudes"]);
    }
  }

  if (doc.contains("ensemble")) {
    const auto& e = doc["ensemble"];
    reject_unknown(e, "ensemble", {"count", "seed", "step"});
    EnsembleSpec spec;
    if (e.contains("count")) {
      if (!e["count"].is_number_integer() || e["count"].get<std::int64_t>() < 1)
        throw ValidationError("ensemble.count", "expected an integer >= 1");
      spec.count = e["count"].get<std::size_t>();
    }
    if (e.contains("seed")) {
      if (!e["seed"].is_number_unsigned() && !(e["seed"].is_number_integer() && e["seed"].get<std::int64_t>() >= 0))
        throw ValidationError("ensemble.seed", "expected an unsigned 64-bit integer");
      spec.seed = e["seed"].get<std::uint64_t>();
    }
    cfg.trajectory_step = get_number(e, "step", "ensemble.step", cfg.trajectory_step);
    cfg.ensemble = spec;
  }

  const std::string variant = get_string(doc, "average_variant", "average_variant", "paper_formula");
  if (variant == "paper_formula") cfg.average_variant = AverageVariant::paper_formula;
  else if (variant == "haar_integral") cfg.average_variant = AverageVariant::haar_integral;
  else throw ValidationError("average_variant", "expected paper_formula or haar_integral");

  if (doc.contains("output")) {
    const auto& o = doc["output"];
    reject_unknown(o, "output", {"path", "format"});
    cfg.output.path = get_string(o, "path", "output.path", "");
    const std::string format = get_string(o, "format", "output.format", "csv");
    if (format == "csv") cfg.output.format = OutputFormat::csv;
    else if (format == "json") cfg.output.format = OutputFormat::json;
    else throw ValidationError("output.format", "expected csv or json");
  }

  cfg.validate();
  return cfg;
}

RunConfig parse_config(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return RunConfig{};
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  try {
    return config_from_json(doc);
  } catch (const json::exception& e) {
    throw ValidationError("config", e.what());
  }
}

json to_json(const RunConfig& c) {
  json doc;
  doc["system"] = to_string(c.system);
  doc["omega"] = c.omega;
  doc["kernel"] = kernel_json(c.kernel);
  doc["grid"] = {{"dt", c.grid.step}, {"horizon", c.grid.horizon()}};
  if (c.initial) {
    json amps = json::array();
    for (Eigen::Index i = 0; i < c.initial->size(); ++i) amps.push_back({(*c.initial)[i].real(), (*c.initial)[i].imag()});
    doc["initial"] = {{"amplitudes", amps}};
  } else {
    doc["initial"] = "average";
  }
  if (c.ensemble) {
    doc["ensemble"] = {{"count", c.ensemble->count}, {"seed", c.ensemble->seed}, {"step", c.trajectory_step}};
  }
  doc["average_variant"] = to_string(c.average_variant);
  doc["output"] = {{"path", c.output.path}, {"format", c.output.format == OutputFormat::csv ? "csv" : "json"}};
  return doc;
}

}  // namespace noisemix
