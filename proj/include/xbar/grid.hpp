#pragma once

#include <string>
#include <vector>

#include "xbar/config.hpp"

namespace xbar {

// CSV with header "iteration,accuracy", one row per checkpoint, full double
// precision (byte-stable across reruns of the same seed).
std::string metrics_csv(const std::vector<MetricsPoint>& series);

// Summary JSON: final-window stats, final accuracy, seed, wall-clock, and a
// config echo that config_from_json() parses back verbatim. Off-chip cells
// append their per-repeat accuracies.
std::string summary_json(const ExperimentConfig& config,
                         const Summary& summary, double final_accuracy,
                         double wall_seconds,
                         const std::vector<double>* repeat_accuracy = nullptr);

// Pulse-response curves for a list of betas at one n_max. A single beta
// emits the canonical pulse_index,g_potentiation,g_depression columns; a
// list emits one potentiation and one depression column per beta.
std::string device_curves_csv(const std::vector<double>& betas, int n_max);

// Writes through a temp file + rename so readers never see partial content.
void write_file_atomic(const std::string& path, const std::string& content);

struct CellOutcome {
  std::string name;
  bool ok = false;
  std::string error;
  Summary summary;
  double final_accuracy = 0.0;
};

// Runs every cell of the manifest on a worker pool (--jobs), writing
// <name>.csv, <name>_summary.json, optional array snapshots, and index.json
// into the output directory. A failed cell is recorded and does not stop
// the others.
std::vector<CellOutcome> run_grid(const RunManifest& manifest);

// Command-line entry point ("curves" subcommand or experiment run).
// Returns 0 on success, 1 if any cell failed, 2 on configuration errors.
int run_main(const std::vector<std::string>& args);

}  // namespace xbar
