#include "xbar/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

namespace xbar {

namespace {

using nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

UpdateMethod method_from_string(const std::string& s) {
  if (s == "a") return UpdateMethod::kA;
  if (s == "b") return UpdateMethod::kB;
  if (s == "c") return UpdateMethod::kC;
  throw std::invalid_argument("method must be one of a, b, c (got \"" + s +
                              "\")");
}

RunMode mode_from_string(const std::string& s) {
  if (s == "onchip") return RunMode::kHwOnchip;
  if (s == "offchip") return RunMode::kHwOffchip;
  if (s == "sw") return RunMode::kSwReference;
  throw std::invalid_argument(
      "mode must be one of onchip, offchip, sw (got \"" + s + "\")");
}

InitScheme init_from_string(const std::string& s) {
  if (s == "default") return InitScheme::kRandomLowPulse;
  if (s == "zero") return InitScheme::kZero;
  throw std::invalid_argument("init must be default or zero (got \"" + s +
                              "\")");
}

std::string init_to_string(InitScheme scheme) {
  return scheme == InitScheme::kZero ? "zero" : "default";
}

void apply_preset(RunManifest& m, const std::string& preset) {
  GridAxes& ax = m.axes;
  if (preset == "fig7" || preset == "fig8") {
    // Nonlinearity x saturation-handling sweep.
    ax.mode = {RunMode::kHwOnchip};
    ax.hidden = {{200}};
    ax.beta = {0.0, 1.0, 2.0, 3.0};
    ax.n_max = {64};
    ax.method = {UpdateMethod::kA, UpdateMethod::kB, UpdateMethod::kC};
    ax.batch_size = {1};
    ax.sigma = {0.0};
  } else if (preset == "fig9") {
    // Dynamic-range sweep.
    ax.mode = {RunMode::kHwOnchip};
    ax.hidden = {{200}};
    ax.beta = {2.0};
    ax.n_max = {32, 64, 128};
    ax.method = {UpdateMethod::kB};
    ax.batch_size = {1};
    ax.sigma = {0.0};
  } else if (preset == "fig10") {
    // Mini-batch sweep.
    ax.mode = {RunMode::kHwOnchip};
    ax.hidden = {{200}};
    ax.beta = {2.0};
    ax.n_max = {64};
    ax.method = {UpdateMethod::kB};
    ax.batch_size = {1, 2, 5, 10};
    ax.sigma = {0.0};
  } else if (preset == "fig12") {
    // Depth sweep: continuous-weight baseline vs pulse-based training.
    ax.mode = {RunMode::kSwReference, RunMode::kHwOnchip};
    ax.hidden = {{200}, {300, 100}, {400, 200, 100}};
    ax.beta = {0.0};
    ax.n_max = {64};
    ax.method = {UpdateMethod::kB};
    ax.batch_size = {1};
    ax.sigma = {0.0};
  } else if (preset == "fig14") {
    // Device-variation robustness, on-chip vs off-chip transfer.
    ax.mode = {RunMode::kHwOnchip, RunMode::kHwOffchip};
    ax.hidden = {{200}};
    ax.beta = {2.0};
    ax.n_max = {64};
    ax.method = {UpdateMethod::kB};
    ax.batch_size = {1};
    ax.sigma = {0.0, 0.5, 1.0};
  } else {
    throw std::invalid_argument(
        "preset must be one of fig7, fig8, fig9, fig10, fig12, fig14 (got "
        "\"" + preset + "\")");
  }
}

std::string resolve_dataset_file(const std::string& explicit_path,
                                 const std::string& flag,
                                 const std::string& dir,
                                 const std::string& canonical) {
  namespace fs = std::filesystem;
  if (!explicit_path.empty()) {
    if (!fs::exists(explicit_path)) {
      throw std::invalid_argument(flag + ": file not found: " +
                                  explicit_path);
    }
    return explicit_path;
  }
  for (const std::string& candidate :
       {dir + "/" + canonical + ".gz", dir + "/" + canonical}) {
    if (fs::exists(candidate)) {
      return candidate;
    }
  }
  throw std::invalid_argument(
      flag + ": no file named " + canonical + "[.gz] under " + dir +
      " (pass " + flag + " or set CROSSBAR_BP_DATA)");
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::kHwOnchip:
      return "onchip";
    case RunMode::kHwOffchip:
      return "offchip";
    case RunMode::kSwReference:
      return "sw";
  }
  return "?";
}

std::string to_string(UpdateMethod method) {
  switch (method) {
    case UpdateMethod::kA:
      return "a";
    case UpdateMethod::kB:
      return "b";
    case UpdateMethod::kC:
      return "c";
  }
  return "?";
}

std::string cell_name(const ExperimentConfig& config) {
  std::string h;
  for (std::size_t i = 0; i < config.hidden.size(); ++i) {
    if (i > 0) h += '-';
    h += std::to_string(config.hidden[i]);
  }
  return to_string(config.mode) + "_beta" + fmt_double(config.beta) + "_n" +
         std::to_string(config.n_max) + "_method" + to_string(config.method) +
         "_batch" + std::to_string(config.batch_size) + "_sigma" +
         fmt_double(config.sigma) + "_h" + h + "_ep" +
         std::to_string(config.epochs) + "_seed" +
         std::to_string(config.seed);
}

std::string config_to_json(const ExperimentConfig& config) {
  ordered_json j;
  j["beta"] = config.beta;
  j["nmax"] = config.n_max;
  j["method"] = to_string(config.method);
  j["batch_size"] = config.batch_size;
  j["sigma"] = config.sigma;
  j["mode"] = to_string(config.mode);
  j["hidden"] = config.hidden;
  j["epochs"] = config.epochs;
  j["seed"] = config.seed;
  j["eval_interval"] = config.eval_interval;
  j["c"] = config.c;
  j["lr"] = config.learning_rate;
  j["repeats"] = config.repeats;
  j["init"] = init_to_string(config.init);
  j["shuffle"] = config.shuffle;
  return j.dump();
}

ExperimentConfig config_from_json(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  ExperimentConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "beta") {
      config.beta = value.get<double>();
    } else if (key == "nmax") {
      config.n_max = value.get<int>();
    } else if (key == "method") {
      config.method = method_from_string(value.get<std::string>());
    } else if (key == "batch_size") {
      config.batch_size = value.get<int>();
    } else if (key == "sigma") {
      config.sigma = value.get<double>();
    } else if (key == "mode") {
      config.mode = mode_from_string(value.get<std::string>());
    } else if (key == "hidden") {
      config.hidden = value.get<std::vector<int>>();
    } else if (key == "epochs") {
      config.epochs = value.get<int>();
    } else if (key == "seed") {
      config.seed = value.get<std::uint64_t>();
    } else if (key == "eval_interval") {
      config.eval_interval = value.get<int>();
    } else if (key == "c") {
      config.c = value.get<std::vector<double>>();
    } else if (key == "lr") {
      config.learning_rate = value.get<double>();
    } else if (key == "repeats") {
      config.repeats = value.get<int>();
    } else if (key == "init") {
      config.init = init_from_string(value.get<std::string>());
    } else if (key == "shuffle") {
      config.shuffle = value.get<bool>();
    } else {
      throw std::invalid_argument("unknown config key \"" + key + "\"");
    }
  }
  config.validate();
  return config;
}

std::vector<ExperimentConfig> RunManifest::cells() const {
  std::vector<ExperimentConfig> out;
  for (const RunMode mode : axes.mode) {
    for (const std::vector<int>& hidden : axes.hidden) {
      for (const double beta : axes.beta) {
        for (const int n_max : axes.n_max) {
          for (const UpdateMethod method : axes.method) {
            for (const int batch : axes.batch_size) {
              for (const double sigma : axes.sigma) {
                ExperimentConfig cfg = base;
                cfg.mode = mode;
                cfg.hidden = hidden;
                cfg.beta = beta;
                cfg.n_max = n_max;
                cfg.method = method;
                cfg.batch_size = batch;
                cfg.sigma = sigma;
                cfg.validate();
                out.push_back(std::move(cfg));
              }
            }
          }
        }
      }
    }
  }
  return out;
}

RunManifest parse_config(const std::vector<std::string>& args,
                         bool need_datasets) {
  RunManifest m;
  ExperimentConfig& cfg = m.base;

  CLI::App app{"Pulse-based training of MLPs on differential conductance "
               "arrays"};
  app.allow_config_extras(false);
  app.set_config("--config", "",
                 "Config file (ini/toml keys matching the flags; "
                 "command-line flags override it)");

  std::string method_str = "b";
  std::string mode_str = "onchip";
  std::string init_str = "default";
  std::string preset;

  app.add_option("--beta", cfg.beta, "Device nonlinearity (0 = linear)")
      ->capture_default_str();
  app.add_option("--nmax", cfg.n_max,
                 "Pulses spanning the conductance range (weight resolution)")
      ->capture_default_str();
  app.add_option("--method", method_str,
                 "Saturation handling: a (reset both, reprogram), b (reset "
                 "opposing, reprogram one short), c (depress opposing)")
      ->capture_default_str()
      ->check([](const std::string& v) -> std::string {
        if (v == "a" || v == "b" || v == "c") return {};
        if (v == "d") {
          return "d is the dual-saturation reset rule, applied under every "
                 "method; pick a, b, or c";
        }
        return "method must be one of a, b, c";
      });
  app.add_option("--batch-size", cfg.batch_size,
                 "Samples per synapse-vote flush")
      ->capture_default_str();
  app.add_option("--sigma", cfg.sigma,
                 "Std dev of the per-device conductance scale")
      ->capture_default_str();
  app.add_option("--mode", mode_str, "onchip | offchip | sw")
      ->capture_default_str()
      ->check(CLI::IsMember({"onchip", "offchip", "sw"}));
  app.add_option("--hidden", cfg.hidden, "Hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--epochs", cfg.epochs, "Passes over the training set")
      ->capture_default_str();
  app.add_option("--seed", cfg.seed, "Experiment seed")
      ->capture_default_str();
  app.add_option("--eval-interval", cfg.eval_interval,
                 "Samples between test evaluations")
      ->capture_default_str();
  app.add_option("--c", cfg.c,
                 "Hard-sigmoid half-width, one value or one per hidden layer")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--lr", cfg.learning_rate,
                 "Learning rate (sw reference only)")
      ->capture_default_str();
  app.add_option("--repeats", cfg.repeats,
                 "Re-programmed arrays in the off-chip protocol")
      ->capture_default_str();
  app.add_option("--init", init_str,
                 "Array initialization: default (random low pulses) | zero")
      ->capture_default_str()
      ->check(CLI::IsMember({"default", "zero"}));
  app.add_flag("--shuffle", cfg.shuffle,
               "Seeded per-epoch shuffle of the training order");

  std::string train_images, train_labels, test_images, test_labels;
  app.add_option("--train-images", train_images, "Training images IDX file");
  app.add_option("--train-labels", train_labels, "Training labels IDX file");
  app.add_option("--test-images", test_images, "Test images IDX file");
  app.add_option("--test-labels", test_labels, "Test labels IDX file");
  app.add_option("--out", m.out_dir, "Output directory")
      ->capture_default_str();
  app.add_option("--preset", preset,
                 "Named grid: fig7|fig8|fig9|fig10|fig12|fig14")
      ->check(CLI::IsMember({"fig7", "fig8", "fig9", "fig10", "fig12",
                             "fig14"}));
  app.add_option("--jobs", m.jobs,
                 "Grid worker threads (0 = all available cores)")
      ->capture_default_str();
  app.add_flag("--save-arrays", m.save_arrays,
               "Write final array snapshots per cell");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help() << std::flush;
    throw HelpRequested{};
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All) << std::flush;
    throw HelpRequested{};
  } catch (const CLI::ParseError& e) {
    throw std::invalid_argument(e.what());
  }

  cfg.method = method_from_string(method_str);
  cfg.mode = mode_from_string(mode_str);
  cfg.init = init_from_string(init_str);

  m.axes.mode = {cfg.mode};
  m.axes.hidden = {cfg.hidden};
  m.axes.beta = {cfg.beta};
  m.axes.n_max = {cfg.n_max};
  m.axes.method = {cfg.method};
  m.axes.batch_size = {cfg.batch_size};
  m.axes.sigma = {cfg.sigma};
  if (!preset.empty()) {
    apply_preset(m, preset);
  }
  if (m.jobs < 0) {
    throw std::invalid_argument("--jobs must be >= 0");
  }

  if (need_datasets) {
    const char* env_dir = std::getenv("CROSSBAR_BP_DATA");
    const std::string dir = env_dir ? env_dir : "data/mnist";
    m.train_images = resolve_dataset_file(train_images, "--train-images", dir,
                                          "train-images-idx3-ubyte");
    m.train_labels = resolve_dataset_file(train_labels, "--train-labels", dir,
                                          "train-labels-idx1-ubyte");
    m.test_images = resolve_dataset_file(test_images, "--test-images", dir,
                                         "t10k-images-idx3-ubyte");
    m.test_labels = resolve_dataset_file(test_labels, "--test-labels", dir,
                                         "t10k-labels-idx1-ubyte");
  }

  // Surface bad numeric combinations now, before any training starts.
  for (const ExperimentConfig& cell : m.cells()) {
    (void)cell;
  }
  return m;
}

}  // namespace xbar
