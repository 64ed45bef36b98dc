#include "xbar/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace xbar {

namespace {

// One unclamped potentiation step of size alpha at conductance g.
inline double raw_step(double g, double alpha, double beta, double g_min,
                       double range) {
  return alpha * std::exp(-beta * (g - g_min) / range);
}

double final_after_pulses(double alpha, double beta, int n_max, double g_min,
                          double range) {
  double g = g_min;
  for (int k = 0; k < n_max; ++k) {
    g += raw_step(g, alpha, beta, g_min, range);
  }
  return g;
}

}  // namespace

double solve_step_size(double beta, int n_max, double g_min, double g_max) {
  if (!(g_min < g_max)) {
    throw std::invalid_argument("solve_step_size: g_min must be < g_max");
  }
  if (n_max < 2) {
    throw std::invalid_argument("solve_step_size: n_max must be >= 2");
  }
  if (beta < 0.0) {
    throw std::invalid_argument("solve_step_size: beta must be >= 0");
  }
  const double range = g_max - g_min;
  if (beta == 0.0) {
    return range / n_max;  // every step is identical
  }

  // Steps shrink with g, so alpha lies in (range/n_max, range]. Bisect; keep
  // the upper bound so the unclamped span never undershoots g_max and the
  // clamped ladder tops out at exactly g_max.
  double lo = range / n_max;
  double hi = range;
  if (final_after_pulses(lo, beta, n_max, g_min, range) >= g_max ||
      final_after_pulses(hi, beta, n_max, g_min, range) < g_max) {
    throw std::runtime_error(
        "solve_step_size: root not bracketed for beta=" + std::to_string(beta) +
        " n_max=" + std::to_string(n_max));
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;  // interval collapsed to adjacent doubles
    }
    if (final_after_pulses(mid, beta, n_max, g_min, range) < g_max) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double final_g = final_after_pulses(hi, beta, n_max, g_min, range);
  if (std::abs(final_g - g_max) > 1e-9 * range) {
    throw std::runtime_error("solve_step_size: bisection did not converge");
  }
  return hi;
}

DeviceParams DeviceParams::symmetric(double beta, int n_max, double g_min,
                                     double g_max) {
  DeviceParams p;
  p.beta_p = beta;
  p.beta_d = beta;
  p.g_min = g_min;
  p.g_max = g_max;
  p.n_max = n_max;
  p.alpha_p = solve_step_size(beta, n_max, g_min, g_max);
  p.alpha_d = p.alpha_p;
  p.validate();
  return p;
}

void DeviceParams::validate() const {
  if (!(g_min < g_max)) {
    throw std::invalid_argument("DeviceParams: g_min must be < g_max");
  }
  if (!(alpha_p > 0.0) || !(alpha_d > 0.0)) {
    throw std::invalid_argument("DeviceParams: alpha_p and alpha_d must be > 0");
  }
  if (beta_p < 0.0 || beta_d < 0.0) {
    throw std::invalid_argument("DeviceParams: beta must be >= 0");
  }
  if (n_max < 2) {
    throw std::invalid_argument("DeviceParams: n_max must be >= 2");
  }
}

double potentiate(double g, const DeviceParams& params) {
  if (g < params.g_min || g > params.g_max) {
    throw std::invalid_argument("potentiate: g outside [g_min, g_max]");
  }
  const double range = params.g_max - params.g_min;
  const double next =
      g + raw_step(g, params.alpha_p, params.beta_p, params.g_min, range);
  return std::min(params.g_max, next);
}

double depress(double g, const DeviceParams& params) {
  if (g < params.g_min || g > params.g_max) {
    throw std::invalid_argument("depress: g outside [g_min, g_max]");
  }
  const double range = params.g_max - params.g_min;
  const double next =
      g - params.alpha_d * std::exp(-params.beta_d * (params.g_max - g) / range);
  return std::max(params.g_min, next);
}

std::vector<double> potentiation_ladder(const DeviceParams& params) {
  std::vector<double> ladder(static_cast<std::size_t>(params.n_max) + 1);
  ladder[0] = params.g_min;
  for (int k = 0; k < params.n_max; ++k) {
    ladder[static_cast<std::size_t>(k) + 1] = potentiate(ladder[k], params);
  }
  return ladder;
}

PulseTrace trace_response(const DeviceParams& params, int pulses) {
  if (pulses < 1) {
    throw std::invalid_argument("trace_response: pulses must be >= 1");
  }
  PulseTrace trace;
  trace.potentiation.reserve(pulses);
  trace.depression.reserve(pulses);
  double g = params.g_min;
  for (int k = 0; k < pulses; ++k) {
    g = potentiate(g, params);
    trace.potentiation.push_back(g);
  }
  g = params.g_max;
  for (int k = 0; k < pulses; ++k) {
    g = depress(g, params);
    trace.depression.push_back(g);
  }
  return trace;
}

double sample_variation(double sigma, Rng& rng) {
  if (sigma < 0.0) {
    throw std::invalid_argument("sample_variation: sigma must be >= 0");
  }
  return std::max(0.0, rng.gaussian(1.0, sigma));
}

}  // namespace xbar
