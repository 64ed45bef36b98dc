#include "xbar/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "xbar/kernels.hpp"

namespace xbar {

namespace {

constexpr int kEvalBatch = 16;

struct LayerView {
  const double* w;
  int rows;  // including the bias row
  int cols;
};

Summary summarize(const double* values, int count) {
  Summary s;
  s.window = count;
  if (count == 0) return s;
  s.min = values[0];
  s.max = values[0];
  double sum = 0.0;
  for (int i = 0; i < count; ++i) {
    sum += values[i];
    s.min = std::min(s.min, values[i]);
    s.max = std::max(s.max, values[i]);
  }
  s.mean = sum / count;
  return s;
}

// Batched forward pass over the test set; argmax on the output sums (softmax
// is monotone, so this matches argmax probability, ties to lowest index).
long long correct_count(const std::vector<LayerView>& layers,
                        const std::vector<double>& c, const Dataset& test) {
  const int num_layers = static_cast<int>(layers.size());
  const int chunks = (test.count + kEvalBatch - 1) / kEvalBatch;
  long long correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct)
  for (int chunk = 0; chunk < chunks; ++chunk) {
    const int begin = chunk * kEvalBatch;
    const int b = std::min(kEvalBatch, test.count - begin);
    std::vector<double> vt(static_cast<std::size_t>(layers[0].rows) * b);
    std::vector<double> out;
    std::vector<double> vt_next;
    for (int i = 0; i < layers[0].rows - 1; ++i) {
      for (int k = 0; k < b; ++k) {
        vt[static_cast<std::size_t>(i) * b + k] = test.image(begin + k)[i];
      }
    }
    for (int k = 0; k < b; ++k) {
      vt[static_cast<std::size_t>(layers[0].rows - 1) * b + k] = 1.0;
    }
    for (int l = 0; l < num_layers; ++l) {
      const int m = layers[l].cols;
      out.resize(static_cast<std::size_t>(b) * m);
      kernels::forward_mvm_batch_ref(layers[l].w, layers[l].rows, m,
                                     vt.data(), b, out.data());
      if (l + 1 < num_layers) {
        const double cl = c[l];
        vt_next.resize(static_cast<std::size_t>(m + 1) * b);
        for (int k = 0; k < b; ++k) {
          for (int j = 0; j < m; ++j) {
            vt_next[static_cast<std::size_t>(j) * b + k] =
                hard_sigmoid(out[static_cast<std::size_t>(k) * m + j], cl);
          }
        }
        for (int k = 0; k < b; ++k) {
          vt_next[static_cast<std::size_t>(m) * b + k] = 1.0;
        }
        vt.swap(vt_next);
      }
    }
    const int m = layers[num_layers - 1].cols;
    for (int k = 0; k < b; ++k) {
      const double* sk = out.data() + static_cast<std::size_t>(k) * m;
      int best = 0;
      for (int j = 1; j < m; ++j) {
        if (sk[j] > sk[best]) best = j;
      }
      if (best == test.labels[begin + k]) ++correct;
    }
  }
  return correct;
}

std::vector<LayerView> views_of(const std::vector<Crossbar>& arrays) {
  std::vector<LayerView> layers;
  layers.reserve(arrays.size());
  for (const Crossbar& xb : arrays) {
    layers.push_back({xb.weights(), xb.rows(), xb.cols()});
  }
  return layers;
}

void check_eval_inputs(std::size_t layer_count, const Topology& topo,
                       const Dataset& test) {
  if (layer_count != static_cast<std::size_t>(topo.weight_layers())) {
    throw std::invalid_argument("evaluate: layer count mismatch");
  }
  if (test.count == 0) {
    throw std::invalid_argument("evaluate: empty test set");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (beta < 0.0) {
    throw std::invalid_argument("beta must be >= 0");
  }
  if (n_max < 2) {
    throw std::invalid_argument("n_max must be >= 2");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("batch size must be >= 1");
  }
  if (mode == RunMode::kSwReference && batch_size != 1) {
    throw std::invalid_argument(
        "the software reference runs online (batch size 1)");
  }
  if (sigma < 0.0) {
    throw std::invalid_argument("sigma must be >= 0");
  }
  if (hidden.empty()) {
    throw std::invalid_argument("at least one hidden layer is required");
  }
  for (int h : hidden) {
    if (h <= 0) {
      throw std::invalid_argument("hidden layer sizes must be positive");
    }
  }
  if (epochs < 1) {
    throw std::invalid_argument("epochs must be >= 1");
  }
  if (eval_interval < 1) {
    throw std::invalid_argument("eval interval must be >= 1");
  }
  if (c.size() != 1 && c.size() != hidden.size()) {
    throw std::invalid_argument(
        "c needs one value or one per hidden layer");
  }
  for (double ci : c) {
    if (!(ci > 0.0)) {
      throw std::invalid_argument("c values must be positive");
    }
  }
  if (learning_rate < 0.0) {
    throw std::invalid_argument("learning rate must be non-negative");
  }
  if (repeats < 1) {
    throw std::invalid_argument("repeats must be >= 1");
  }
}

Topology ExperimentConfig::topology() const {
  Topology topo;
  topo.sizes.reserve(hidden.size() + 2);
  topo.sizes.push_back(784);
  topo.sizes.insert(topo.sizes.end(), hidden.begin(), hidden.end());
  topo.sizes.push_back(10);
  topo.c = (c.size() == 1) ? std::vector<double>(hidden.size(), c[0]) : c;
  topo.validate();
  return topo;
}

DeviceParams ExperimentConfig::device() const {
  return DeviceParams::symmetric(beta, n_max);
}

Summary final_window_summary(const std::vector<MetricsPoint>& series,
                             int window) {
  const int n = static_cast<int>(series.size());
  const int w = std::min(window, n);
  std::vector<double> tail(static_cast<std::size_t>(w));
  for (int i = 0; i < w; ++i) {
    tail[i] = series[n - w + i].accuracy;
  }
  return summarize(tail.data(), w);
}

double evaluate(const std::vector<Crossbar>& arrays, const Topology& topo,
                const Dataset& test) {
  check_eval_inputs(arrays.size(), topo, test);
  return static_cast<double>(correct_count(views_of(arrays), topo.c, test)) /
         test.count;
}

double evaluate_dense(const std::vector<std::vector<double>>& weights,
                      const Topology& topo, const Dataset& test) {
  check_eval_inputs(weights.size(), topo, test);
  std::vector<LayerView> layers;
  layers.reserve(weights.size());
  for (int l = 0; l < topo.weight_layers(); ++l) {
    const auto [rows, cols] = topo.array_dims(l);
    if (weights[l].size() != static_cast<std::size_t>(rows) * cols) {
      throw std::invalid_argument("evaluate: weight matrix " +
                                  std::to_string(l) + " has wrong size");
    }
    layers.push_back({weights[l].data(), rows, cols});
  }
  return static_cast<double>(correct_count(layers, topo.c, test)) /
         test.count;
}

double evaluate_serial(const std::vector<Crossbar>& arrays,
                       const Topology& topo, const Dataset& test) {
  check_eval_inputs(arrays.size(), topo, test);
  std::vector<double> input(static_cast<std::size_t>(topo.sizes[0]) + 1);
  input.back() = 1.0;
  long long correct = 0;
  for (int k = 0; k < test.count; ++k) {
    std::copy(test.image(k), test.image(k) + Dataset::kImageSize,
              input.begin());
    const ForwardTrace trace = forward(input, arrays, topo);
    const std::vector<double>& s = trace.s.back();
    int best = 0;
    for (std::size_t j = 1; j < s.size(); ++j) {
      if (s[j] > s[best]) best = static_cast<int>(j);
    }
    if (best == test.labels[k]) ++correct;
  }
  return static_cast<double>(correct) / test.count;
}

TrainResult train_online(const ExperimentConfig& config, const Dataset& train,
                         const Dataset& test) {
  config.validate();
  if (config.mode == RunMode::kSwReference) {
    throw std::invalid_argument(
        "train_online drives conductance arrays; use train_reference_sw");
  }
  if (train.count == 0) {
    throw std::invalid_argument("empty training set");
  }
  const Topology topo = config.topology();
  const DeviceParams params = config.device();
  const int num_layers = topo.weight_layers();
  // Off-chip protocol trains on ideal devices; variation enters only when
  // the learned weights are transferred (run_offchip_experiment).
  const double sigma =
      (config.mode == RunMode::kHwOffchip) ? 0.0 : config.sigma;

  Rng rng_init(derive_seed(config.seed, kStreamInit));
  Rng rng_var(derive_seed(config.seed, kStreamVariation));
  std::vector<Crossbar> arrays;
  arrays.reserve(static_cast<std::size_t>(num_layers));
  for (int l = 0; l < num_layers; ++l) {
    const auto [rows, cols] = topo.array_dims(l);
    Crossbar xb(rows, cols, params);
    xb.randomize(config.init, rng_init);
    xb.apply_variation(sigma, rng_var);
    arrays.push_back(std::move(xb));
  }

  Rng rng_shuffle(derive_seed(config.seed, kStreamShuffle));
  std::vector<int> order(static_cast<std::size_t>(train.count));
  std::iota(order.begin(), order.end(), 0);

  const bool direct = config.batch_size == 1;
  std::vector<std::vector<int16_t>> votes(static_cast<std::size_t>(num_layers));
  std::vector<std::vector<int32_t>> touched(
      static_cast<std::size_t>(num_layers));
  if (!direct) {
    for (int l = 0; l < num_layers; ++l) {
      votes[l].assign(
          static_cast<std::size_t>(arrays[l].rows()) * arrays[l].cols(), 0);
    }
  }
  // A mini-batch accumulates one signed vote per synapse per sample and the
  // flush replays the net count as that many identical pulses, so a batch of
  // size k moves a synapse by at most k steps. Keeping the count (rather
  // than collapsing it to its sign) is what makes large batches degrade:
  // near-unanimous batches land multi-step jumps that overshoot, which is
  // the instability the batch-size sweep is expected to show.
  auto flush_votes = [&]() {
    for (int l = 0; l < num_layers; ++l) {
      const int cols = arrays[l].cols();
      for (const int32_t flat : touched[l]) {
        const int16_t count = votes[l][flat];
        if (count == 0) continue;  // tie, or a duplicate touch entry
        votes[l][flat] = 0;
        const Direction dir =
            count > 0 ? Direction::kIncrease : Direction::kDecrease;
        const int pulses = count > 0 ? count : -count;
        for (int p = 0; p < pulses; ++p) {
          arrays[l].apply_update(flat / cols, flat % cols, dir, config.method);
        }
      }
      touched[l].clear();
    }
  };

  TrainResult result;
  auto checkpoint = [&](long long iter) {
    result.series.push_back({iter, evaluate(arrays, topo, test)});
  };
  checkpoint(0);

  std::vector<double> input(static_cast<std::size_t>(topo.sizes[0]) + 1);
  input.back() = 1.0;
  std::vector<double> target(10, 0.0);
  long long iter = 0;
  int pending = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      shuffle_in_place(order, rng_shuffle);
    }
    for (int n = 0; n < train.count; ++n) {
      const int sample = order[n];
      std::copy(train.image(sample), train.image(sample) + Dataset::kImageSize,
                input.begin());
      const ForwardTrace trace = forward(input, arrays, topo);
      const int label = train.labels[sample];
      target[label] = 1.0;
      const DeltaSet deltas = backward(trace, target, arrays, topo);
      target[label] = 0.0;

      for (int l = 0; l < num_layers; ++l) {
        const std::vector<double>& a = trace.a[l];
        const std::vector<double>& delta = deltas.delta[l];
        const int rows = static_cast<int>(a.size());
        const int cols = static_cast<int>(delta.size());
        if (direct) {
          for (int j = 0; j < cols; ++j) {
            if (delta[j] == 0.0) continue;
            const Direction dir =
                delta[j] < 0.0 ? Direction::kIncrease : Direction::kDecrease;
            for (int i = 0; i < rows; ++i) {
              if (a[i] != 0.0) {
                arrays[l].apply_update(i, j, dir, config.method);
              }
            }
          }
        } else {
          std::vector<int16_t>& v = votes[l];
          std::vector<int32_t>& t = touched[l];
          for (int j = 0; j < cols; ++j) {
            if (delta[j] == 0.0) continue;
            const int16_t sign = delta[j] < 0.0 ? int16_t{1} : int16_t{-1};
            for (int i = 0; i < rows; ++i) {
              if (a[i] == 0.0) continue;
              const int32_t flat = i * cols + j;
              if (v[flat] == 0) t.push_back(flat);
              v[flat] = static_cast<int16_t>(v[flat] + sign);
            }
          }
        }
      }

      ++iter;
      if (!direct && ++pending == config.batch_size) {
        flush_votes();
        pending = 0;
      }
      if (iter % config.eval_interval == 0) {
        checkpoint(iter);
      }
    }
    // Mini-batches never straddle epochs.
    if (!direct && pending > 0) {
      flush_votes();
      pending = 0;
    }
  }
  if (result.series.back().iteration != iter) {
    checkpoint(iter);
  }
  result.summary = final_window_summary(result.series);
  result.final_accuracy = result.series.back().accuracy;
  result.arrays = std::move(arrays);
  return result;
}

TrainResult train_reference_sw(const ExperimentConfig& config,
                               const Dataset& train, const Dataset& test) {
  config.validate();
  if (config.mode != RunMode::kSwReference) {
    throw std::invalid_argument("train_reference_sw needs sw_reference mode");
  }
  if (train.count == 0) {
    throw std::invalid_argument("empty training set");
  }
  const Topology topo = config.topology();
  const int num_layers = topo.weight_layers();

  // Initial weights drawn on the same low-pulse lattice distribution the
  // conductance arrays use, so both starts are statistically comparable.
  Rng rng(derive_seed(config.seed, kStreamSwInit));
  const std::uint32_t top = static_cast<std::uint32_t>(config.n_max / 8);
  const double step = 1.0 / config.n_max;
  std::vector<std::vector<double>> weights(
      static_cast<std::size_t>(num_layers));
  for (int l = 0; l < num_layers; ++l) {
    const auto [rows, cols] = topo.array_dims(l);
    weights[l].resize(static_cast<std::size_t>(rows) * cols);
    for (double& w : weights[l]) {
      const double k_plus = static_cast<double>(rng.uniform_int(top));
      const double k_minus = static_cast<double>(rng.uniform_int(top));
      w = (k_plus - k_minus) * step;
    }
  }

  Rng rng_shuffle(derive_seed(config.seed, kStreamShuffle));
  std::vector<int> order(static_cast<std::size_t>(train.count));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  auto checkpoint = [&](long long iter) {
    result.series.push_back({iter, evaluate_dense(weights, topo, test)});
  };
  checkpoint(0);

  // Per-layer workspaces: with-bias activations, sums, deltas.
  std::vector<std::vector<double>> a(static_cast<std::size_t>(num_layers));
  std::vector<std::vector<double>> s(static_cast<std::size_t>(num_layers));
  std::vector<std::vector<double>> delta(static_cast<std::size_t>(num_layers));
  for (int l = 0; l < num_layers; ++l) {
    a[l].resize(static_cast<std::size_t>(topo.sizes[l]) + 1);
    a[l].back() = 1.0;
    s[l].resize(static_cast<std::size_t>(topo.sizes[l + 1]));
    delta[l].resize(static_cast<std::size_t>(topo.sizes[l + 1]));
  }
  const double lr = config.learning_rate;
  long long iter = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      shuffle_in_place(order, rng_shuffle);
    }
    for (int n = 0; n < train.count; ++n) {
      const int sample = order[n];
      std::copy(train.image(sample), train.image(sample) + Dataset::kImageSize,
                a[0].begin());

      for (int l = 0; l < num_layers; ++l) {
        const auto [rows, cols] = topo.array_dims(l);
        kernels::forward_mvm_ref(weights[l].data(), rows, cols, a[l].data(),
                                 s[l].data());
        if (l + 1 < num_layers) {
          for (int j = 0; j < cols; ++j) {
            a[l + 1][j] = hard_sigmoid(s[l][j], topo.c[l]);
          }
        }
      }
      const std::vector<double> p = softmax(s[num_layers - 1]);
      const int label = train.labels[sample];
      for (int j = 0; j < 10; ++j) {
        delta[num_layers - 1][j] = p[j] - (j == label ? 1.0 : 0.0);
      }
      for (int l = num_layers - 2; l >= 0; --l) {
        const auto [rows, cols] = topo.array_dims(l + 1);
        std::vector<double> back(static_cast<std::size_t>(rows));
        kernels::backward_mvm_ref(weights[l + 1].data(), rows, cols,
                                  delta[l + 1].data(), back.data());
        const double cl = topo.c[l];
        const double slope = 1.0 / (2.0 * cl);
        for (int i = 0; i < topo.sizes[l + 1]; ++i) {
          const double si = s[l][i];
          delta[l][i] = (si >= 0.0 && si <= 2.0 * cl) ? back[i] * slope : 0.0;
        }
      }
      for (int l = 0; l < num_layers; ++l) {
        const auto [rows, cols] = topo.array_dims(l);
        double* w = weights[l].data();
        for (int i = 0; i < rows; ++i) {
          const double ai = a[l][i];
          if (ai == 0.0) continue;
          const double scale = lr * ai;
          double* wrow = w + static_cast<std::size_t>(i) * cols;
          const double* dl = delta[l].data();
          for (int j = 0; j < cols; ++j) {
            wrow[j] -= scale * dl[j];
          }
        }
      }

      ++iter;
      if (iter % config.eval_interval == 0) {
        checkpoint(iter);
      }
    }
  }
  if (result.series.back().iteration != iter) {
    checkpoint(iter);
  }
  result.summary = final_window_summary(result.series);
  result.final_accuracy = result.series.back().accuracy;
  result.sw_weights = std::move(weights);
  return result;
}

OffchipResult run_offchip_experiment(const ExperimentConfig& config,
                                     const Dataset& train,
                                     const Dataset& test) {
  if (config.mode != RunMode::kHwOffchip) {
    throw std::invalid_argument("run_offchip_experiment needs offchip mode");
  }
  OffchipResult result;
  result.ideal = train_online(config, train, test);

  const Topology topo = config.topology();
  const DeviceParams params = config.device();
  const int num_layers = topo.weight_layers();
  std::vector<std::vector<double>> targets(
      static_cast<std::size_t>(num_layers));
  for (int l = 0; l < num_layers; ++l) {
    const Crossbar& xb = result.ideal.arrays[l];
    targets[l].resize(static_cast<std::size_t>(xb.rows()) * xb.cols());
    for (int i = 0; i < xb.rows(); ++i) {
      for (int j = 0; j < xb.cols(); ++j) {
        targets[l][static_cast<std::size_t>(i) * xb.cols() + j] =
            xb.nominal_weight(i, j);
      }
    }
  }

  for (int r = 0; r < config.repeats; ++r) {
    Rng rng_var(derive_seed(config.seed + static_cast<std::uint64_t>(r),
                            kStreamVariation));
    std::vector<Crossbar> arrays;
    arrays.reserve(static_cast<std::size_t>(num_layers));
    for (int l = 0; l < num_layers; ++l) {
      const auto [rows, cols] = topo.array_dims(l);
      Crossbar xb(rows, cols, params);
      xb.apply_variation(config.sigma, rng_var);
      xb.program_weights(targets[l]);
      arrays.push_back(std::move(xb));
    }
    result.repeat_accuracy.push_back(evaluate(arrays, topo, test));
  }
  result.repeat_summary = summarize(result.repeat_accuracy.data(),
                                    static_cast<int>(config.repeats));
  return result;
}

TrainResult run_onchip_experiment(const ExperimentConfig& config,
                                  const Dataset& train, const Dataset& test) {
  if (config.mode != RunMode::kHwOnchip) {
    throw std::invalid_argument("run_onchip_experiment needs onchip mode");
  }
  return train_online(config, train, test);
}

}  // namespace xbar
