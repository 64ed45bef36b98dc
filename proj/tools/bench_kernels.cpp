// Times the OpenMP kernels against their serial references on the shapes the
// trainer actually uses, and checks the contract that both produce bitwise
// identical results.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "xbar/kernels.hpp"
#include "xbar/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct Shape {
  int n;
  int m;
  const char* note;
};

bool bitwise_equal(const std::vector<double>& a,
                   const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 200;
  if (argc > 1) {
    reps = std::atoi(argv[1]);
    if (reps <= 0) {
      std::fprintf(stderr, "usage: %s [reps]\n", argv[0]);
      return 2;
    }
  }
  const Shape shapes[] = {
      {785, 200, "input -> hidden"},
      {201, 10, "hidden -> output"},
      {1024, 1024, "square stress"},
  };
  const int batch = 16;
  std::printf("threads=%d reps=%d\n", omp_get_max_threads(), reps);
  std::printf("%-18s %-10s %12s %12s %9s  %s\n", "shape", "kernel",
              "serial(ms)", "openmp(ms)", "speedup", "bitwise");

  bool all_equal = true;
  for (const Shape& s : shapes) {
    xbar::Rng rng(42);
    std::vector<double> w(static_cast<std::size_t>(s.n) * s.m);
    std::vector<double> v_fwd(s.n), v_bwd(s.m), vt(static_cast<std::size_t>(s.n) * batch);
    for (double& x : w) x = rng.uniform01() - 0.5;
    for (double& x : v_fwd) x = rng.uniform01();
    for (double& x : v_bwd) x = rng.uniform01() - 0.5;
    for (double& x : vt) x = rng.uniform01();

    std::vector<double> out_ref(std::max(s.n, s.m));
    std::vector<double> out_omp(std::max(s.n, s.m));
    std::vector<double> batch_ref(static_cast<std::size_t>(batch) * s.m);
    std::vector<double> batch_omp(static_cast<std::size_t>(batch) * s.m);
    char label[32];
    std::snprintf(label, sizeof(label), "%dx%d", s.n, s.m);

    struct Row {
      const char* kernel;
      double serial_ms;
      double omp_ms;
      bool equal;
    };
    std::vector<Row> rows;

    auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) {
      xbar::kernels::forward_mvm_ref(w.data(), s.n, s.m, v_fwd.data(),
                                     out_ref.data());
    }
    double serial = ms_since(t0);
    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) {
      xbar::kernels::forward_mvm_omp(w.data(), s.n, s.m, v_fwd.data(),
                                     out_omp.data());
    }
    rows.push_back({"forward", serial, ms_since(t0),
                    bitwise_equal(std::vector<double>(out_ref.begin(),
                                                      out_ref.begin() + s.m),
                                  std::vector<double>(out_omp.begin(),
                                                      out_omp.begin() + s.m))});

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) {
      xbar::kernels::backward_mvm_ref(w.data(), s.n, s.m, v_bwd.data(),
                                      out_ref.data());
    }
    serial = ms_since(t0);
    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) {
      xbar::kernels::backward_mvm_omp(w.data(), s.n, s.m, v_bwd.data(),
                                      out_omp.data());
    }
    rows.push_back({"backward", serial, ms_since(t0),
                    bitwise_equal(std::vector<double>(out_ref.begin(),
                                                      out_ref.begin() + s.n),
                                  std::vector<double>(out_omp.begin(),
                                                      out_omp.begin() + s.n))});

    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) {
      xbar::kernels::forward_mvm_batch_ref(w.data(), s.n, s.m, vt.data(),
                                           batch, batch_ref.data());
    }
    serial = ms_since(t0);
    t0 = Clock::now();
    for (int r = 0; r < reps; ++r) {
      xbar::kernels::forward_mvm_batch_omp(w.data(), s.n, s.m, vt.data(),
                                           batch, batch_omp.data());
    }
    rows.push_back(
        {"batch16", serial, ms_since(t0), bitwise_equal(batch_ref, batch_omp)});

    for (const Row& row : rows) {
      all_equal = all_equal && row.equal;
      std::printf("%-18s %-10s %12.3f %12.3f %8.2fx  %s\n", label, row.kernel,
                  row.serial_ms, row.omp_ms,
                  row.omp_ms > 0 ? row.serial_ms / row.omp_ms : 0.0,
                  row.equal ? "yes" : "NO");
    }
  }
  if (!all_equal) {
    std::fprintf(stderr, "kernel outputs diverged from the reference\n");
    return 1;
  }
  return 0;
}
