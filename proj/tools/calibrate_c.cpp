// Pilot sweep fixing the hard-sigmoid half-width for a topology: trains on
// the first 5,000 training samples for each candidate c and scores on the
// next 5,000 (held out from the pilot; the real test set stays untouched).
// The winner for the default one-hidden-layer network is pinned as the
// shipped default; deeper presets pin their own winners the same way.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xbar/mnist_io.hpp"
#include "xbar/trainer.hpp"

int main(int argc, char** argv) {
  const char* env_dir = std::getenv("CROSSBAR_BP_DATA");
  std::string dir = env_dir ? env_dir : "data/mnist";
  std::vector<int> hidden{200};
  std::string mode = "onchip";
  double beta = 2.0;
  std::vector<double> candidates{1.0, 2.0, 5.0, 10.0, 20.0};

  CLI::App app{"Half-width pilot sweep on a 5,000-sample training subset"};
  app.add_option("dir", dir, "Dataset directory")->capture_default_str();
  app.add_option("--hidden", hidden, "Hidden layer sizes")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--mode", mode, "onchip or sw")
      ->check(CLI::IsMember({"onchip", "sw"}))
      ->capture_default_str();
  app.add_option("--beta", beta, "Nonlinearity")->capture_default_str();
  app.add_option("--candidates", candidates, "Half-width values to try")
      ->delimiter(',')
      ->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  xbar::Dataset full;
  try {
    full = xbar::load_dataset(dir + "/train-images-idx3-ubyte.gz",
                              dir + "/train-labels-idx1-ubyte.gz");
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cannot load training data: %s\n", e.what());
    return 2;
  }
  const xbar::Dataset pilot = xbar::head(full, 5000);
  const xbar::Dataset heldout = xbar::slice(full, 5000, 5000);

  std::printf("%8s %14s %14s\n", "c", "final-window", "final");
  double best_c = 0.0;
  double best_acc = -1.0;
  for (const double c : candidates) {
    xbar::ExperimentConfig config;
    config.hidden = hidden;
    config.beta = beta;
    config.c = {c};
    config.eval_interval = 1000;
    xbar::TrainResult r;
    if (mode == "sw") {
      config.mode = xbar::RunMode::kSwReference;
      r = xbar::train_reference_sw(config, pilot, heldout);
    } else {
      r = xbar::train_online(config, pilot, heldout);
    }
    std::printf("%8g %13.2f%% %13.2f%%\n", c, r.summary.mean * 100.0,
                r.final_accuracy * 100.0);
    if (r.summary.mean > best_acc) {
      best_acc = r.summary.mean;
      best_c = c;
    }
  }
  std::printf("winner: c=%g (held-out final-window mean %.2f%%)\n", best_c,
              best_acc * 100.0);
  return 0;
}
