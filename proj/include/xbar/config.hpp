#pragma once

#include <string>
#include <vector>

#include "xbar/trainer.hpp"

namespace xbar {

// Thrown by parse_config after printing help text; callers exit cleanly.
struct HelpRequested {};

// Grid axes swept by a run. Singleton axes hold the resolved flag value, so
// a preset-free invocation is a one-cell grid.
struct GridAxes {
  std::vector<RunMode> mode;
  std::vector<std::vector<int>> hidden;
  std::vector<double> beta;
  std::vector<int> n_max;
  std::vector<UpdateMethod> method;
  std::vector<int> batch_size;
  std::vector<double> sigma;
};

struct RunManifest {
  ExperimentConfig base;  // defaults overridden by config file, then flags
  GridAxes axes;
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::string out_dir = "out";
  int jobs = 0;  // 0 -> all available cores
  bool save_arrays = false;

  // Cartesian expansion (mode, hidden, beta, n_max, method, batch, sigma),
  // each cell validated.
  std::vector<ExperimentConfig> cells() const;
};

std::string to_string(RunMode mode);
std::string to_string(UpdateMethod method);

// Filesystem-safe cell identifier built from the distinguishing parameters,
// e.g. "onchip_beta2_n64_methodb_batch1_sigma0_h200_ep1_seed1".
std::string cell_name(const ExperimentConfig& config);

// Summary-JSON config block (flag-named keys) and its inverse; the decoder
// rejects unknown keys so stale or hand-edited summaries fail loudly.
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);

// Parses command-line flags plus an optional config file (flags win; unknown
// keys in either are errors) into a manifest; expands --preset grids and
// resolves dataset paths, falling back to $CROSSBAR_BP_DATA and ./data/mnist.
// Throws std::invalid_argument with the offending key on bad input.
// `need_datasets` skips path resolution (device-curve runs have no dataset).
RunManifest parse_config(const std::vector<std::string>& args,
                         bool need_datasets = true);

}  // namespace xbar
