#include "xbar/network.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace xbar {

void Topology::validate() const {
  if (sizes.size() < 2) {
    throw std::invalid_argument("topology needs at least input and output");
  }
  for (int n : sizes) {
    if (n <= 0) {
      throw std::invalid_argument("topology layer sizes must be positive");
    }
  }
  if (c.size() != static_cast<std::size_t>(hidden_layers())) {
    throw std::invalid_argument(
        "topology needs one hard-sigmoid half-width per hidden layer (" +
        std::to_string(hidden_layers()) + "), got " +
        std::to_string(c.size()));
  }
  for (double ci : c) {
    if (!(ci > 0.0)) {
      throw std::invalid_argument(
          "hard-sigmoid half-width must be positive");
    }
  }
}

double hard_sigmoid(double s, double c) {
  if (s <= 0.0) return 0.0;
  if (s >= 2.0 * c) return 1.0;
  return s / (2.0 * c);
}

double hard_sigmoid_gate(double s, double c) {
  return (s >= 0.0 && s <= 2.0 * c) ? 1.0 : 0.0;
}

std::vector<double> softmax(const std::vector<double>& s) {
  std::vector<double> p(s.size());
  double top = s[0];
  for (double v : s) {
    if (v > top) top = v;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    p[k] = std::exp(s[k] - top);
    sum += p[k];
  }
  for (double& v : p) {
    v /= sum;
  }
  return p;
}

ForwardTrace forward(const std::vector<double>& input,
                     const std::vector<Crossbar>& arrays,
                     const Topology& topo) {
  const int layers = topo.weight_layers();
  if (arrays.size() != static_cast<std::size_t>(layers)) {
    throw std::invalid_argument("expected " + std::to_string(layers) +
                                " arrays, got " +
                                std::to_string(arrays.size()));
  }
  if (input.size() != static_cast<std::size_t>(topo.sizes[0] + 1)) {
    throw std::invalid_argument(
        "input must have " + std::to_string(topo.sizes[0] + 1) +
        " entries (pixels plus bias), got " + std::to_string(input.size()));
  }
  if (input.back() != 1.0) {
    throw std::invalid_argument("input bias slot must be 1");
  }

  ForwardTrace trace;
  trace.a.resize(layers);
  trace.s.resize(layers);
  trace.gate.resize(layers - 1);
  trace.a[0] = input;
  for (int l = 0; l < layers; ++l) {
    trace.s[l] = arrays[l].forward_mvm(trace.a[l]);
    if (l + 1 < layers) {
      const double c = topo.c[l];
      const std::vector<double>& s = trace.s[l];
      std::vector<double>& a = trace.a[l + 1];
      std::vector<double>& gate = trace.gate[l];
      a.resize(s.size() + 1);
      gate.resize(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) {
        a[j] = hard_sigmoid(s[j], c);
        gate[j] = hard_sigmoid_gate(s[j], c);
      }
      a.back() = 1.0;  // bias neuron
    }
  }
  trace.p = softmax(trace.s[layers - 1]);
  return trace;
}

std::vector<double> output_delta(const std::vector<double>& p,
                                 const std::vector<double>& target) {
  if (p.size() != target.size()) {
    throw std::invalid_argument("output delta: length mismatch");
  }
  std::vector<double> delta(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) {
    delta[k] = p[k] - target[k];
  }
  return delta;
}

std::vector<double> hidden_delta(const Crossbar& array,
                                 const std::vector<double>& delta_next,
                                 const std::vector<double>& gate) {
  if (gate.size() + 1 != static_cast<std::size_t>(array.rows())) {
    throw std::invalid_argument("hidden delta: gate/array size mismatch");
  }
  std::vector<double> sums = array.backward_mvm(delta_next);
  std::vector<double> delta(gate.size());
  for (std::size_t i = 0; i < gate.size(); ++i) {
    delta[i] = sums[i] * gate[i];  // bias row sums.back() is dropped
  }
  return delta;
}

DeltaSet backward(const ForwardTrace& trace,
                  const std::vector<double>& target,
                  const std::vector<Crossbar>& arrays, const Topology& topo) {
  const int layers = topo.weight_layers();
  DeltaSet deltas;
  deltas.delta.resize(layers);
  deltas.delta[layers - 1] = output_delta(trace.p, target);
  // Softmax probabilities are never exactly zero, so an unfiltered output
  // delta would step all ten columns on every sample -- nine decreases per
  // increase, a drift that rails the output arrays within a few hundred
  // samples and then stalls the front layers (equalized columns cancel in
  // the backward sums). The backward driver instead reads errors below
  // chance level (1 / outputs, strictly) as zero, so a column is pushed
  // only while the network is meaningfully wrong about it and the
  // single-step rule stays self-limiting.
  {
    std::vector<double>& d_out = deltas.delta[layers - 1];
    const double chance = 1.0 / static_cast<double>(d_out.size());
    for (double& d : d_out) {
      if (std::abs(d) < chance) d = 0.0;
    }
  }
  for (int l = layers - 2; l >= 0; --l) {
    deltas.delta[l] =
        hidden_delta(arrays[l + 1], deltas.delta[l + 1], trace.gate[l]);
  }
  return deltas;
}

std::vector<std::vector<int8_t>> update_signals(const ForwardTrace& trace,
                                                const DeltaSet& deltas) {
  const std::size_t layers = deltas.delta.size();
  std::vector<std::vector<int8_t>> grids(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const std::vector<double>& a = trace.a[l];
    const std::vector<double>& delta = deltas.delta[l];
    std::vector<int8_t>& grid = grids[l];
    grid.assign(a.size() * delta.size(), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) continue;
      for (std::size_t j = 0; j < delta.size(); ++j) {
        if (delta[j] < 0.0) {
          grid[i * delta.size() + j] = 1;
        } else if (delta[j] > 0.0) {
          grid[i * delta.size() + j] = -1;
        }
      }
    }
  }
  return grids;
}

}  // namespace xbar
