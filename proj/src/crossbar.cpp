#include "xbar/crossbar.hpp"

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "xbar/kernels.hpp"

namespace xbar {

namespace {

constexpr double kSaturationTol = 1e-9;

double swap_if_big_endian(double v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bits = __builtin_bswap64(bits);
    std::memcpy(&v, &bits, sizeof v);
  }
  return v;
}

}  // namespace

Crossbar::Crossbar(int rows, int cols, const DeviceParams& params)
    : rows_(rows), cols_(cols), params_(params) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("crossbar dimensions must be positive");
  }
  params_.validate();
  ladder_ = potentiation_ladder(params_);
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  gp_.assign(n, params_.g_min);
  gd_.assign(n, params_.g_min);
  kp_.assign(n, 0);
  kd_.assign(n, 0);
  xp_.assign(n, 1.0);
  xd_.assign(n, 1.0);
  w_.assign(n, 0.0);
}

std::size_t Crossbar::index(int i, int j) const {
  if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
    throw std::out_of_range("crossbar pair index (" + std::to_string(i) +
                            ", " + std::to_string(j) + ") outside " +
                            std::to_string(rows_) + "x" +
                            std::to_string(cols_));
  }
  return static_cast<std::size_t>(i) * cols_ + j;
}

bool Crossbar::saturated(double g) const {
  return g >= params_.g_max - kSaturationTol;
}

void Crossbar::refresh_weight(std::size_t idx) {
  w_[idx] = xp_[idx] * gp_[idx] - xd_[idx] * gd_[idx];
}

void Crossbar::refresh_all_weights() {
  for (std::size_t idx = 0; idx < w_.size(); ++idx) {
    refresh_weight(idx);
  }
}

void Crossbar::reset_device(std::vector<double>& g, std::vector<int16_t>& k,
                            std::size_t idx) {
  g[idx] = params_.g_min;
  k[idx] = 0;
}

void Crossbar::potentiate_device(std::vector<double>& g,
                                 std::vector<int16_t>& k, std::size_t idx) {
  const int16_t ki = k[idx];
  if (ki >= 0) {
    // On the lattice: the next pulse lands on the precomputed value; at the
    // top the pulse is clamped to g_max, a no-op.
    if (ki < params_.n_max) {
      g[idx] = ladder_[ki + 1];
      k[idx] = static_cast<int16_t>(ki + 1);
    }
    return;
  }
  const double gn = potentiate(g[idx], params_);
  g[idx] = gn;
  if (gn >= params_.g_max) {
    k[idx] = static_cast<int16_t>(params_.n_max);  // clamped onto the top
  }
}

void Crossbar::depress_device(std::vector<double>& g, std::vector<int16_t>& k,
                              std::size_t idx) {
  const double gn = depress(g[idx], params_);
  g[idx] = gn;
  // Depression leaves the potentiation lattice except when clamped to the
  // floor, which is lattice point 0.
  k[idx] = (gn <= params_.g_min) ? int16_t{0} : int16_t{-1};
}

void Crossbar::raise_device(std::vector<double>& g_up,
                            std::vector<int16_t>& k_up,
                            std::vector<double>& g_dn,
                            std::vector<int16_t>& k_dn, std::size_t idx,
                            UpdateMethod method) {
  if (!saturated(g_up[idx])) {
    potentiate_device(g_up, k_up, idx);
    return;
  }
  switch (method) {
    case UpdateMethod::kA: {
      // Reset the pair and re-program the potentiated device up to the old
      // weight, then apply the pending pulse on top.
      const double w_old = g_up[idx] - g_dn[idx];
      reset_device(g_up, k_up, idx);
      reset_device(g_dn, k_dn, idx);
      while (g_up[idx] - g_dn[idx] < w_old && !saturated(g_up[idx])) {
        potentiate_device(g_up, k_up, idx);
      }
      potentiate_device(g_up, k_up, idx);
      break;
    }
    case UpdateMethod::kB: {
      // Reset only the opposing device and re-program it one step short of
      // the old weight: pulse while one more still leaves the weight above
      // w_old. The final weight lies in (w_old, w_old + one step].
      const double w_old = g_up[idx] - g_dn[idx];
      reset_device(g_dn, k_dn, idx);
      while (k_dn[idx] < params_.n_max &&
             g_up[idx] - ladder_[k_dn[idx] + 1] > w_old) {
        potentiate_device(g_dn, k_dn, idx);
      }
      break;
    }
    case UpdateMethod::kC:
      depress_device(g_dn, k_dn, idx);
      break;
  }
}

void Crossbar::apply_update(int i, int j, Direction direction,
                            UpdateMethod method) {
  const std::size_t idx = index(i, j);
  if (saturated(gp_[idx]) && saturated(gd_[idx])) {
    // A pair already pinned at both rails encodes weight 0 with no headroom;
    // the update is absorbed by re-encoding it as (g_min, g_min). Training
    // never rests in this state (see the check below), but loaded snapshots
    // can start here.
    reset_device(gp_, kp_, idx);
    reset_device(gd_, kd_, idx);
    refresh_weight(idx);
    return;
  }
  if (direction == Direction::kIncrease) {
    raise_device(gp_, kp_, gd_, kd_, idx, method);
  } else {
    raise_device(gd_, kd_, gp_, kp_, idx, method);
  }
  // Both devices pinned at g_max encode weight 0 with no headroom left;
  // re-encode as (g_min, g_min).
  if (saturated(gp_[idx]) && saturated(gd_[idx])) {
    reset_device(gp_, kp_, idx);
    reset_device(gd_, kd_, idx);
  }
  refresh_weight(idx);
}

void Crossbar::randomize(InitScheme scheme, Rng& rng) {
  const std::size_t n = gp_.size();
  switch (scheme) {
    case InitScheme::kZero:
      for (std::size_t idx = 0; idx < n; ++idx) {
        reset_device(gp_, kp_, idx);
        reset_device(gd_, kd_, idx);
      }
      break;
    case InitScheme::kRandomLowPulse: {
      const std::uint64_t top = static_cast<std::uint64_t>(params_.n_max / 8);
      for (std::size_t idx = 0; idx < n; ++idx) {
        const int k_plus = static_cast<int>(rng.uniform_int(top));
        const int k_minus = static_cast<int>(rng.uniform_int(top));
        gp_[idx] = ladder_[k_plus];
        kp_[idx] = static_cast<int16_t>(k_plus);
        gd_[idx] = ladder_[k_minus];
        kd_[idx] = static_cast<int16_t>(k_minus);
      }
      break;
    }
  }
  refresh_all_weights();
}

void Crossbar::apply_variation(double sigma, Rng& rng) {
  if (sigma < 0.0) {
    throw std::invalid_argument("variation sigma must be non-negative");
  }
  for (std::size_t idx = 0; idx < xp_.size(); ++idx) {
    xp_[idx] = sample_variation(sigma, rng);
    xd_[idx] = sample_variation(sigma, rng);
  }
  refresh_all_weights();
}

std::vector<double> Crossbar::forward_mvm(
    const std::vector<double>& voltages) const {
  if (voltages.size() != static_cast<std::size_t>(rows_)) {
    throw std::invalid_argument(
        "forward_mvm expects " + std::to_string(rows_) + " voltages, got " +
        std::to_string(voltages.size()));
  }
  std::vector<double> currents(static_cast<std::size_t>(cols_));
  kernels::forward_mvm_omp(w_.data(), rows_, cols_, voltages.data(),
                           currents.data());
  return currents;
}

std::vector<double> Crossbar::backward_mvm(
    const std::vector<double>& voltages) const {
  if (voltages.size() != static_cast<std::size_t>(cols_)) {
    throw std::invalid_argument(
        "backward_mvm expects " + std::to_string(cols_) + " voltages, got " +
        std::to_string(voltages.size()));
  }
  std::vector<double> currents(static_cast<std::size_t>(rows_));
  kernels::backward_mvm_omp(w_.data(), rows_, cols_, voltages.data(),
                            currents.data());
  return currents;
}

void Crossbar::program_weights(const std::vector<double>& targets) {
  const std::size_t n = gp_.size();
  if (targets.size() != n) {
    throw std::invalid_argument("program_weights expects " +
                                std::to_string(n) + " targets, got " +
                                std::to_string(targets.size()));
  }
  const double range = params_.g_max - params_.g_min;
  for (std::size_t idx = 0; idx < n; ++idx) {
    const double target = targets[idx];
    if (target > range || target < -range) {
      throw std::invalid_argument(
          "weight target " + std::to_string(target) +
          " outside representable range +/-" + std::to_string(range));
    }
    reset_device(gp_, kp_, idx);
    reset_device(gd_, kd_, idx);
    if (target > 0.0) {
      while (gp_[idx] - params_.g_min < target && kp_[idx] < params_.n_max) {
        potentiate_device(gp_, kp_, idx);
      }
    } else if (target < 0.0) {
      while (gd_[idx] - params_.g_min < -target && kd_[idx] < params_.n_max) {
        potentiate_device(gd_, kd_, idx);
      }
    }
  }
  refresh_all_weights();
}

void Crossbar::rebuild_ladder_indices() {
  const std::size_t n = gp_.size();
  for (std::size_t idx = 0; idx < n; ++idx) {
    kp_[idx] = -1;
    kd_[idx] = -1;
    for (int k = 0; k <= params_.n_max; ++k) {
      if (gp_[idx] == ladder_[k]) {
        kp_[idx] = static_cast<int16_t>(k);
      }
      if (gd_[idx] == ladder_[k]) {
        kd_[idx] = static_cast<int16_t>(k);
      }
    }
  }
}

void Crossbar::save(std::ostream& out) const {
  std::ostringstream header;
  header.precision(17);
  header << "xbar " << rows_ << ' ' << cols_ << ' ' << params_.alpha_p << ' '
         << params_.beta_p << ' ' << params_.alpha_d << ' ' << params_.beta_d
         << ' ' << params_.g_min << ' ' << params_.g_max << ' '
         << params_.n_max << '\n';
  out << header.str();
  const std::size_t n = gp_.size();
  std::vector<double> record(4);
  for (std::size_t idx = 0; idx < n; ++idx) {
    record[0] = swap_if_big_endian(gp_[idx]);
    record[1] = swap_if_big_endian(gd_[idx]);
    record[2] = swap_if_big_endian(xp_[idx]);
    record[3] = swap_if_big_endian(xd_[idx]);
    out.write(reinterpret_cast<const char*>(record.data()),
              4 * sizeof(double));
  }
  if (!out) {
    throw std::runtime_error("crossbar snapshot write failed");
  }
}

Crossbar Crossbar::load(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("crossbar snapshot: missing header line");
  }
  std::istringstream header(line);
  std::string magic;
  int rows = 0;
  int cols = 0;
  DeviceParams params;
  header >> magic >> rows >> cols >> params.alpha_p >> params.beta_p >>
      params.alpha_d >> params.beta_d >> params.g_min >> params.g_max >>
      params.n_max;
  if (!header || magic != "xbar") {
    throw std::runtime_error("crossbar snapshot: malformed header \"" + line +
                             "\"");
  }
  Crossbar xb(rows, cols, params);
  const std::size_t n = xb.gp_.size();
  std::vector<double> record(4);
  for (std::size_t idx = 0; idx < n; ++idx) {
    in.read(reinterpret_cast<char*>(record.data()), 4 * sizeof(double));
    if (!in) {
      throw std::runtime_error(
          "crossbar snapshot: truncated at pair " + std::to_string(idx) +
          " of " + std::to_string(n));
    }
    xb.gp_[idx] = swap_if_big_endian(record[0]);
    xb.gd_[idx] = swap_if_big_endian(record[1]);
    xb.xp_[idx] = swap_if_big_endian(record[2]);
    xb.xd_[idx] = swap_if_big_endian(record[3]);
  }
  xb.rebuild_ladder_indices();
  xb.refresh_all_weights();
  return xb;
}

}  // namespace xbar
