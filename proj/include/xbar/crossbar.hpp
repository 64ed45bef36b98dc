#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "xbar/device_model.hpp"
#include "xbar/rng.hpp"

namespace xbar {

// How a weight change is realized on the differential pair when the device
// to be potentiated is already saturated at g_max.
//   A: reset both devices, re-program G+ to the old weight, then apply the
//      pending pulse.
//   B: reset only the opposing device and re-program it one step short of
//      the old weight, so the pending update lands in the same pass.
//   C: depress the opposing device instead of potentiating past the rail.
// All methods share the dual-saturation reset: whenever both devices end up
// at g_max the pair is re-encoded as (g_min, g_min), preserving weight 0.
enum class UpdateMethod { kA, kB, kC };

enum class Direction { kIncrease, kDecrease };

enum class InitScheme { kZero, kRandomLowPulse };

// N x M array of differential conductance pairs. The effective weight of a
// pair is x_plus * g_plus - x_minus * g_minus, where x_* are static
// per-device scale factors modeling fabrication variation; programming
// pulses act on the nominal conductances only.
//
// A dense row-major mirror of the effective weights is kept in sync with
// every update so the MVM kernels run on flat memory. Devices that have
// only ever been potentiated (or reset) sit on the shared potentiation
// lattice; their index into it is tracked so pulses become table lookups
// instead of exp() evaluations.
class Crossbar {
 public:
  Crossbar(int rows, int cols, const DeviceParams& params);

  // Construction helpers. randomize() places each device at a uniformly
  // random pulse count in [0, n_max/8] (small near-zero weights);
  // apply_variation() draws x_plus then x_minus per pair in row-major order.
  void randomize(InitScheme scheme, Rng& rng);
  void apply_variation(double sigma, Rng& rng);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const DeviceParams& params() const { return params_; }

  double g_plus(int i, int j) const { return gp_[index(i, j)]; }
  double g_minus(int i, int j) const { return gd_[index(i, j)]; }
  double x_plus(int i, int j) const { return xp_[index(i, j)]; }
  double x_minus(int i, int j) const { return xd_[index(i, j)]; }

  // Effective (readout) weight, including variation.
  double read_weight(int i, int j) const { return w_[index(i, j)]; }
  // Programmed weight g_plus - g_minus, ignoring variation.
  double nominal_weight(int i, int j) const {
    const std::size_t idx = index(i, j);
    return gp_[idx] - gd_[idx];
  }

  // Dense row-major effective weight matrix backing the MVM kernels.
  const double* weights() const { return w_.data(); }

  // currents[j] = sum_i W_ij * voltages[i] (voltages driven on rows).
  std::vector<double> forward_mvm(const std::vector<double>& voltages) const;
  // currents[i] = sum_j W_ij * voltages[j] (voltages driven on columns).
  std::vector<double> backward_mvm(const std::vector<double>& voltages) const;

  // One signed unit update on pair (i, j); see UpdateMethod.
  void apply_update(int i, int j, Direction direction, UpdateMethod method);

  // Off-chip transfer: program nominal conductances toward a target weight
  // matrix assuming ideal devices (no variation knowledge). Positive target:
  // G+ potentiated from g_min until the nominal weight reaches the target,
  // G- left at g_min; negative target mirrored.
  void program_weights(const std::vector<double>& targets);

  // Snapshot: one text header line ("xbar <rows> <cols> <alpha_p> <beta_p>
  // <alpha_d> <beta_d> <g_min> <g_max> <n_max>") followed by little-endian
  // 64-bit floats (g_plus, g_minus, x_plus, x_minus) per pair, row-major.
  void save(std::ostream& out) const;
  static Crossbar load(std::istream& in);

 private:
  std::size_t index(int i, int j) const;  // bounds-checked

  void reset_device(std::vector<double>& g, std::vector<int16_t>& k,
                    std::size_t idx);
  void potentiate_device(std::vector<double>& g, std::vector<int16_t>& k,
                         std::size_t idx);
  void depress_device(std::vector<double>& g, std::vector<int16_t>& k,
                      std::size_t idx);
  // Raise device "up" of pair idx by one unit of weight "up - dn", handling
  // the saturated re-programming paths.
  void raise_device(std::vector<double>& g_up, std::vector<int16_t>& k_up,
                    std::vector<double>& g_dn, std::vector<int16_t>& k_dn,
                    std::size_t idx, UpdateMethod method);
  bool saturated(double g) const;
  void refresh_weight(std::size_t idx);
  void refresh_all_weights();
  void rebuild_ladder_indices();

  int rows_ = 0;
  int cols_ = 0;
  DeviceParams params_;
  std::vector<double> ladder_;   // potentiation lattice, size n_max + 1
  std::vector<double> gp_, gd_;  // nominal conductances
  std::vector<int16_t> kp_, kd_;  // lattice index, -1 once off-lattice
  std::vector<double> xp_, xd_;  // variation scale factors
  std::vector<double> w_;        // effective weight mirror, row-major
};

}  // namespace xbar
