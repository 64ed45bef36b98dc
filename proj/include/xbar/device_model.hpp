#pragma once

#include <vector>

#include "xbar/rng.hpp"

namespace xbar {

// Behavioral model of one programmable conductance device. A potentiation
// pulse adds alpha_p * exp(-beta_p * (g - g_min) / (g_max - g_min)); a
// depression pulse subtracts alpha_d * exp(-beta_d * (g_max - g) /
// (g_max - g_min)). beta = 0 degenerates to fixed steps of
// (g_max - g_min) / n_max.
struct DeviceParams {
  double alpha_p = 0.0;
  double beta_p = 0.0;
  double alpha_d = 0.0;
  double beta_d = 0.0;
  double g_min = 0.0;
  double g_max = 1.0;
  int n_max = 64;

  // Symmetric parameterization: one nonlinearity for both directions, step
  // scales tied so n_max pulses span the range either way.
  static DeviceParams symmetric(double beta, int n_max, double g_min = 0.0,
                                double g_max = 1.0);

  void validate() const;  // throws std::invalid_argument on a bad combination
};

// Step scale alpha such that n_max unclamped potentiation pulses from g_min
// land on g_max (never below; overshoot bounded by the bisection resolution).
double solve_step_size(double beta, int n_max, double g_min, double g_max);

// One conductance pulse, clamped to [g_min, g_max]. g must already be inside
// the range.
double potentiate(double g, const DeviceParams& params);
double depress(double g, const DeviceParams& params);

// Conductance after each of k = 1..n_max potentiation pulses from g_min.
// ladder[0] = g_min; ladder[n_max] = g_max exactly (the final pulse clamps).
std::vector<double> potentiation_ladder(const DeviceParams& params);

struct PulseTrace {
  std::vector<double> potentiation;  // from g_min, one entry per pulse
  std::vector<double> depression;    // from g_max, one entry per pulse
};

PulseTrace trace_response(const DeviceParams& params, int pulses);

// Static per-device conductance scale: max(0, N(1, sigma)). Always consumes
// one gaussian draw (two uniforms), so the stream position does not depend on
// sigma; sigma = 0 yields exactly 1.
double sample_variation(double sigma, Rng& rng);

}  // namespace xbar
