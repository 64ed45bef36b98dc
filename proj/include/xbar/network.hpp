#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "xbar/crossbar.hpp"

namespace xbar {

// Layer shape of the classifier MLP. Every non-output layer carries one
// extra bias neuron driven by a constant 1, so the weight array feeding
// layer l+1 has sizes[l] + 1 rows and sizes[l+1] columns.
struct Topology {
  std::vector<int> sizes;  // {input, hidden..., output}
  std::vector<double> c;   // hard-sigmoid half-width per hidden layer

  int weight_layers() const { return static_cast<int>(sizes.size()) - 1; }
  int hidden_layers() const { return static_cast<int>(sizes.size()) - 2; }
  // Rows (including bias) and columns of the array feeding layer l+1.
  std::pair<int, int> array_dims(int l) const {
    return {sizes[l] + 1, sizes[l + 1]};
  }
  void validate() const;  // throws std::invalid_argument
};

// Piecewise-linear sigmoid with a zero-based ramp: 0 for s <= 0, s / (2c) on
// the ramp, 1 from s = 2c up (ramp center c, half-width c). A unit at or
// below zero outputs exactly 0, so it emits no update signal as a
// pre-neuron; that sparsity is what keeps densely-fed interior layers from
// saturating under the one-pulse rule.
double hard_sigmoid(double s, double c);
// Hardware derivative: 1 inside the ramp (0 <= s <= 2c, boundaries
// included), 0 on the plateaus. Inclusive at s = 0 so a unit sitting
// exactly at the lower knee still passes error back and can be revived by
// its incoming weights.
double hard_sigmoid_gate(double s, double c);
// Max-shifted softmax; sums to 1, overflow-safe.
std::vector<double> softmax(const std::vector<double>& s);

// Everything the backward pass and the update rule need from one sample.
// With L weight layers: a[l] is the with-bias activation of layer l
// (l = 0..L-1, input first, trailing element always exactly 1); s[l] holds
// the weighted sums feeding layer l+1; gate[l] the hidden-layer derivative
// bits (l = 0..L-2); p the output softmax.
struct ForwardTrace {
  std::vector<std::vector<double>> a;
  std::vector<std::vector<double>> s;
  std::vector<std::vector<double>> gate;
  std::vector<double> p;
};

// delta[l] pairs with s[l]: delta[L-1] is the output delta with entries
// below chance level zeroed (see backward), earlier entries are the gated
// backward-weighted sums. Bias neurons never receive a delta (their rows
// are dropped in the backward pass).
struct DeltaSet {
  std::vector<std::vector<double>> delta;
};

// input must have sizes[0] + 1 entries with the trailing bias slot == 1.
ForwardTrace forward(const std::vector<double>& input,
                     const std::vector<Crossbar>& arrays,
                     const Topology& topo);

// Softmax / cross-entropy gradient with respect to the output sums: p - t.
std::vector<double> output_delta(const std::vector<double>& p,
                                 const std::vector<double>& target);

// delta_prev[i] = backward_mvm(delta_next)[i] * gate[i]; the array's bias
// row is excluded (bias neurons have no incoming synapses).
std::vector<double> hidden_delta(const Crossbar& array,
                                 const std::vector<double>& delta_next,
                                 const std::vector<double>& gate);

// Full backward pass; target is a one-hot 10-vector. Output-delta entries
// smaller in magnitude than chance level (1 / outputs) read as zero before
// they drive the backward sums or any pulses; without that floor the
// sign-only rule drifts every output column into saturation.
DeltaSet backward(const ForwardTrace& trace,
                  const std::vector<double>& target,
                  const std::vector<Crossbar>& arrays, const Topology& topo);

// Sign-only pulse directions per synapse: +1 potentiate the pair's weight,
// -1 depress, 0 skip. Zero pre-neuron activation or zero delta means no
// pulse; otherwise the direction is the descent direction -sgn(delta_j).
// grid[l] is row-major (sizes[l] + 1) x sizes[l+1].
std::vector<std::vector<int8_t>> update_signals(const ForwardTrace& trace,
                                                const DeltaSet& deltas);

}  // namespace xbar
