#include "xbar/grid.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "xbar/device_model.hpp"

namespace xbar {

namespace {

using nlohmann::ordered_json;

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

CellOutcome run_cell(const ExperimentConfig& config, const RunManifest& m,
                     const Dataset& train, const Dataset& test) {
  CellOutcome outcome;
  outcome.name = cell_name(config);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::string base = m.out_dir + "/" + outcome.name;
    std::string csv;
    std::string summary;
    const std::vector<Crossbar>* snapshot_arrays = nullptr;
    TrainResult train_result;
    OffchipResult offchip_result;
    switch (config.mode) {
      case RunMode::kSwReference: {
        train_result = train_reference_sw(config, train, test);
        outcome.summary = train_result.summary;
        outcome.final_accuracy = train_result.final_accuracy;
        csv = metrics_csv(train_result.series);
        break;
      }
      case RunMode::kHwOnchip: {
        train_result = train_online(config, train, test);
        outcome.summary = train_result.summary;
        outcome.final_accuracy = train_result.final_accuracy;
        csv = metrics_csv(train_result.series);
        snapshot_arrays = &train_result.arrays;
        break;
      }
      case RunMode::kHwOffchip: {
        offchip_result = run_offchip_experiment(config, train, test);
        outcome.summary = offchip_result.repeat_summary;
        outcome.final_accuracy = offchip_result.repeat_summary.mean;
        // Primary series: one row per re-programmed array.
        std::vector<MetricsPoint> rows;
        for (std::size_t r = 0; r < offchip_result.repeat_accuracy.size();
             ++r) {
          rows.push_back({static_cast<long long>(r),
                          offchip_result.repeat_accuracy[r]});
        }
        csv = metrics_csv(rows);
        write_file_atomic(base + "_training.csv",
                          metrics_csv(offchip_result.ideal.series));
        snapshot_arrays = &offchip_result.ideal.arrays;
        break;
      }
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const std::vector<double>* repeats =
        config.mode == RunMode::kHwOffchip ? &offchip_result.repeat_accuracy
                                           : nullptr;
    summary = summary_json(config, outcome.summary, outcome.final_accuracy,
                           wall, repeats);
    write_file_atomic(base + ".csv", csv);
    write_file_atomic(base + "_summary.json", summary);
    if (m.save_arrays && snapshot_arrays != nullptr) {
      for (std::size_t l = 0; l < snapshot_arrays->size(); ++l) {
        std::ostringstream blob(std::ios::binary);
        (*snapshot_arrays)[l].save(blob);
        write_file_atomic(base + "_layer" + std::to_string(l) + ".xbar",
                          blob.str());
      }
    }
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.ok = false;
    outcome.error = e.what();
  }
  return outcome;
}

int run_curves(const std::vector<std::string>& args) {
  CLI::App app{"Emit device pulse-response curves as CSV"};
  std::vector<double> betas{0.0, 1.0, 2.0, 3.0};
  int n_max = 64;
  std::string out = "device_curves.csv";
  app.add_option("--beta", betas, "Nonlinearity values")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--nmax", n_max, "Pulses spanning the conductance range")
      ->capture_default_str();
  app.add_option("--out", out, "Output CSV path")->capture_default_str();
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << std::flush;
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    write_file_atomic(out, device_curves_csv(betas, n_max));
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

std::string metrics_csv(const std::vector<MetricsPoint>& series) {
  std::string out = "iteration,accuracy\n";
  for (const MetricsPoint& p : series) {
    out += std::to_string(p.iteration);
    out += ',';
    out += fmt_full(p.accuracy);
    out += '\n';
  }
  return out;
}

std::string summary_json(const ExperimentConfig& config,
                         const Summary& summary, double final_accuracy,
                         double wall_seconds,
                         const std::vector<double>* repeat_accuracy) {
  ordered_json j;
  j["mean_final_window"] = summary.mean;
  j["min_final_window"] = summary.min;
  j["max_final_window"] = summary.max;
  j["final_window"] = summary.window;
  j["final_accuracy"] = final_accuracy;
  j["seed"] = config.seed;
  j["wall_clock_seconds"] = wall_seconds;
  j["config"] = ordered_json::parse(config_to_json(config));
  if (repeat_accuracy != nullptr) {
    j["repeat_accuracy"] = *repeat_accuracy;
  }
  return j.dump(2) + "\n";
}

std::string device_curves_csv(const std::vector<double>& betas, int n_max) {
  if (betas.empty()) {
    throw std::invalid_argument("device curves need at least one beta");
  }
  std::vector<DeviceParams> params;
  std::vector<PulseTrace> traces;
  for (const double beta : betas) {
    params.push_back(DeviceParams::symmetric(beta, n_max));
    traces.push_back(trace_response(params.back(), n_max));
  }
  std::string out = "pulse_index";
  if (betas.size() == 1) {
    out += ",g_potentiation,g_depression";
  } else {
    for (const double beta : betas) {
      out += ",potentiation_beta" + fmt_short(beta);
      out += ",depression_beta" + fmt_short(beta);
    }
  }
  out += '\n';
  for (int k = 0; k <= n_max; ++k) {
    out += std::to_string(k);
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const double pot = k == 0 ? params[b].g_min : traces[b].potentiation[k - 1];
      const double dep = k == 0 ? params[b].g_max : traces[b].depression[k - 1];
      out += ',';
      out += fmt_full(pot);
      out += ',';
      out += fmt_full(dep);
    }
    out += '\n';
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open " + tmp + " for writing");
    }
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw std::runtime_error("write failed for " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<CellOutcome> run_grid(const RunManifest& manifest) {
  const std::vector<ExperimentConfig> cells = manifest.cells();
  std::filesystem::create_directories(manifest.out_dir);
  const Dataset train =
      load_dataset(manifest.train_images, manifest.train_labels);
  const Dataset test = load_dataset(manifest.test_images, manifest.test_labels);

  std::vector<CellOutcome> outcomes(cells.size());
  std::size_t jobs = manifest.jobs > 0
                         ? static_cast<std::size_t>(manifest.jobs)
                         : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      outcomes[i] = run_cell(cells[i], manifest, train, test);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }

  ordered_json index;
  index["cells"] = ordered_json::array();
  for (const CellOutcome& o : outcomes) {
    ordered_json cell;
    cell["name"] = o.name;
    cell["ok"] = o.ok;
    if (!o.ok) {
      cell["error"] = o.error;
    } else {
      cell["mean_final_window"] = o.summary.mean;
      cell["min_final_window"] = o.summary.min;
      cell["max_final_window"] = o.summary.max;
      cell["final_accuracy"] = o.final_accuracy;
      cell["metrics"] = o.name + ".csv";
      cell["summary"] = o.name + "_summary.json";
    }
    index["cells"].push_back(std::move(cell));
  }
  write_file_atomic(manifest.out_dir + "/index.json", index.dump(2) + "\n");
  return outcomes;
}

int run_main(const std::vector<std::string>& args) {
  try {
    if (!args.empty() && args[0] == "curves") {
      return run_curves({args.begin() + 1, args.end()});
    }
    const RunManifest manifest = parse_config(args, true);
    const std::vector<CellOutcome> outcomes = run_grid(manifest);
    bool all_ok = true;
    for (const CellOutcome& o : outcomes) {
      if (o.ok) {
        std::cout << o.name << ": final-window mean "
                  << fmt_short(o.summary.mean * 100.0) << "% (min "
                  << fmt_short(o.summary.min * 100.0) << "%, max "
                  << fmt_short(o.summary.max * 100.0) << "%)\n";
      } else {
        std::cout << o.name << ": FAILED: " << o.error << "\n";
        all_ok = false;
      }
    }
    std::cout << "index: " << manifest.out_dir << "/index.json\n";
    return all_ok ? 0 : 1;
  } catch (const HelpRequested&) {
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace xbar
