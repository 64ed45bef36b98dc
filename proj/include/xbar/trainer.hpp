#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbar/crossbar.hpp"
#include "xbar/mnist_io.hpp"
#include "xbar/network.hpp"
#include "xbar/rng.hpp"

namespace xbar {

enum class RunMode { kHwOnchip, kHwOffchip, kSwReference };

// Hard-sigmoid half-width shipped as the default; fixed by a pilot sweep
// over {1, 2, 5, 10, 20} on a 5,000-sample training subset (see
// tools/calibrate_c: held-out final-window means 71.6 / 72.9 / 69.4 /
// 60.1 / 40.2%, winner c = 2).
inline constexpr double kDefaultHalfWidth = 2.0;

struct ExperimentConfig {
  double beta = 2.0;
  int n_max = 64;
  UpdateMethod method = UpdateMethod::kB;
  int batch_size = 1;
  double sigma = 0.0;
  RunMode mode = RunMode::kHwOnchip;
  std::vector<int> hidden = {200};
  int epochs = 1;
  std::uint64_t seed = 1;
  int eval_interval = 600;
  std::vector<double> c = {kDefaultHalfWidth};  // broadcast if single
  double learning_rate = 0.01;                  // SW reference only
  int repeats = 10;                             // off-chip re-programmings
  InitScheme init = InitScheme::kRandomLowPulse;
  bool shuffle = false;  // opt-in seeded per-epoch shuffle

  void validate() const;        // throws std::invalid_argument
  Topology topology() const;    // {784, hidden..., 10} with c broadcast
  DeviceParams device() const;  // symmetric model from beta / n_max

  bool operator==(const ExperimentConfig&) const = default;
};

struct MetricsPoint {
  long long iteration = 0;  // samples consumed when the checkpoint ran
  double accuracy = 0.0;
};

// Mean / min / max over the final `window` checkpoints (all, if fewer).
struct Summary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  int window = 0;
};

Summary final_window_summary(const std::vector<MetricsPoint>& series,
                             int window = 10);

struct TrainResult {
  std::vector<MetricsPoint> series;  // checkpoint 0 = untrained network
  Summary summary;
  double final_accuracy = 0.0;
  std::vector<Crossbar> arrays;                  // hw modes
  std::vector<std::vector<double>> sw_weights;   // sw mode, row-major/layer
};

// Pulse-based training on conductance arrays (per sample: forward, deltas,
// signed votes; each mini-batch flush replays a synapse's net vote count as
// that many identical pulses). Deterministic per (config, seed).
TrainResult train_online(const ExperimentConfig& config, const Dataset& train,
                         const Dataset& test);

// Continuous-weight backprop baseline: same topology and hard-sigmoid, true
// ramp derivative 1/(2c), softmax/cross-entropy, dW = -lr * delta * a,
// online (batch 1).
TrainResult train_reference_sw(const ExperimentConfig& config,
                               const Dataset& train, const Dataset& test);

// Fraction of test samples whose argmax output matches the label (ties to
// the lowest class index). The batched kernel path; bitwise-identical
// per-sample sums to evaluate_serial.
double evaluate(const std::vector<Crossbar>& arrays, const Topology& topo,
                const Dataset& test);
double evaluate_dense(const std::vector<std::vector<double>>& weights,
                      const Topology& topo, const Dataset& test);
// Single-sample serial reference used to pin the batched path in tests.
double evaluate_serial(const std::vector<Crossbar>& arrays,
                       const Topology& topo, const Dataset& test);

struct OffchipResult {
  TrainResult ideal;                    // sigma = 0 training phase
  std::vector<double> repeat_accuracy;  // one per re-programmed array
  Summary repeat_summary;               // mean/min/max over repeats
};

// Train with ideal devices, then program the learned weights onto `repeats`
// fresh arrays with variation sigma (seeds seed, seed+1, ...) and evaluate
// each.
OffchipResult run_offchip_experiment(const ExperimentConfig& config,
                                     const Dataset& train,
                                     const Dataset& test);

// Variation sampled at construction; training reads varied currents while
// pulses land on nominal conductances. Equivalent to train_online with
// mode = hw_onchip.
TrainResult run_onchip_experiment(const ExperimentConfig& config,
                                  const Dataset& train, const Dataset& test);

}  // namespace xbar
