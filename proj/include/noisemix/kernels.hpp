#pragma once

// Correlation kernels of the relaxation, dephasing and composite noise.
// Every kernel is even in t - s, so only tau = |t - s| >= 0 is exposed.

#include <cmath>
#include <optional>
#include <type_traits>
#include <variant>

#include <Eigen/Core>

#include "noisemix/errors.hpp"
#include "noisemix/time_grid.hpp"

namespace noisemix {

/// Ornstein-Uhlenbeck channel: correlation (strength * memory_rate / 2) e^{-memory_rate tau}.
template <typename Scalar>
struct BasicOUParams {
  Scalar strength{1};
  Scalar memory_rate{1};

  friend bool operator==(const BasicOUParams&, const BasicOUParams&) = default;
};

using OUParams = BasicOUParams<double>;

inline void validate(const OUParams& p, const char* key = "kernel") {
  if (!(p.strength >= 0.0) || !std::isfinite(p.strength))
    throw ValidationError(std::string(key) + ".strength", "must be finite and >= 0");
  if (!(p.memory_rate > 0.0) || !std::isfinite(p.memory_rate))
    throw ValidationError(std::string(key) + ".memory_rate", "must be finite and > 0");
}

struct OUKernel {
  OUParams params;
  friend bool operator==(const OUKernel&, const OUKernel&) = default;
};

/// Relaxation OU noise dressed by a non-Markovian OU dephasing channel.
struct CompositeKernel {
  OUParams beta;
  OUParams alpha;
  friend bool operator==(const CompositeKernel&, const CompositeKernel&) = default;
};

/// Relaxation OU noise dressed by delta-correlated dephasing of rate `dephasing_strength`.
struct MarkovDephasedKernel {
  OUParams beta;
  double dephasing_strength = 0.0;
  friend bool operator==(const MarkovDephasedKernel&, const MarkovDephasedKernel&) = default;
};

struct ZeroKernel {
  friend bool operator==(const ZeroKernel&, const ZeroKernel&) = default;
};

using KernelSpec = std::variant<OUKernel, CompositeKernel, MarkovDephasedKernel, ZeroKernel>;

inline void validate(const KernelSpec& spec) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, OUKernel>) {
          validate(k.params, "kernel");
        } else if constexpr (std::is_same_v<K, CompositeKernel>) {
          validate(k.beta, "kernel");
          validate(k.alpha, "kernel.dephasing");
        } else if constexpr (std::is_same_v<K, MarkovDephasedKernel>) {
          validate(k.beta, "kernel");
          if (!(k.dephasing_strength >= 0.0) || !std::isfinite(k.dephasing_strength))
            throw ValidationError("kernel.dephasing_strength", "must be finite and >= 0");
        }
      },
      spec);
}

template <typename Scalar>
Scalar eval_ou_kernel(const BasicOUParams<Scalar>& p, Scalar tau) {
  using std::exp;
  return p.strength * p.memory_rate / Scalar(2) * exp(-p.memory_rate * tau);
}

/// Double integral int_0^tau dt1 int_0^t1 dt2 alpha(t1 - t2) of an OU dephasing
/// correlation: (Gamma/2) [tau + (e^{-gamma tau} - 1) / gamma].
template <typename Scalar>
Scalar dephasing_exponent(const BasicOUParams<Scalar>& alpha, Scalar tau) {
  using std::expm1;
  const Scalar x = alpha.memory_rate * tau;
  Scalar bracket;
  if (x < Scalar(1e-6)) {
    // tau + (e^{-x} - 1)/gamma = tau * (x/2 - x^2/6 + x^3/24 - ...)
    bracket = tau * x * (Scalar(1) / 2 - x / 6 + x * x / 24);
  } else {
    bracket = tau + expm1(-x) / alpha.memory_rate;
  }
  return alpha.strength / Scalar(2) * bracket;
}

template <typename Scalar>
Scalar eval_composite_kernel(const BasicOUParams<Scalar>& beta, const BasicOUParams<Scalar>& alpha,
                             Scalar tau) {
  using std::exp;
  return eval_ou_kernel(beta, tau) * exp(-dephasing_exponent(alpha, tau));
}

struct MarkovLimit {
  OUParams params;  ///< tilded (strength, memory_rate)
  double ratio;     ///< memory_rate / tilded memory_rate
};

inline MarkovLimit markov_limit_params(const OUParams& beta, double dephasing_strength) {
  const double memory = beta.memory_rate + dephasing_strength / 2.0;
  const double ratio = beta.memory_rate / memory;
  return {{ratio * beta.strength, memory}, ratio};
}

/// Amplitude/decay pair of an exponential kernel, or nullopt for a Composite
/// kernel with active dephasing. Zero maps to zero strength.
inline std::optional<OUParams> exponential_form(const KernelSpec& spec) {
  return std::visit(
      [](const auto& k) -> std::optional<OUParams> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, OUKernel>) {
          return k.params;
        } else if constexpr (std::is_same_v<K, MarkovDephasedKernel>) {
          return markov_limit_params(k.beta, k.dephasing_strength).params;
        } else if constexpr (std::is_same_v<K, ZeroKernel>) {
          return OUParams{0.0, 1.0};
        } else {
          if (k.alpha.strength == 0.0) return k.beta;
          return std::nullopt;
        }
      },
      spec);
}

inline double eval_kernel(const KernelSpec& spec, double tau) {
  return std::visit(
      [tau](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, OUKernel>) {
          return eval_ou_kernel(k.params, tau);
        } else if constexpr (std::is_same_v<K, CompositeKernel>) {
          return eval_composite_kernel(k.beta, k.alpha, tau);
        } else if constexpr (std::is_same_v<K, MarkovDephasedKernel>) {
          return eval_ou_kernel(markov_limit_params(k.beta, k.dephasing_strength).params, tau);
        } else {
          return 0.0;
        }
      },
      spec);
}

/// G(t_n) for every node of `grid`.
inline Eigen::ArrayXd sample_kernel(const KernelSpec& spec, const TimeGrid& grid) {
  Eigen::ArrayXd out(static_cast<Eigen::Index>(grid.size()));
  for (Eigen::Index n = 0; n < out.size(); ++n) out[n] = eval_kernel(spec, grid.time(static_cast<std::size_t>(n)));
  return out;
}

}  // namespace noisemix
