#include "xbar/kernels.hpp"

#include <cstring>
#include <vector>

#include "doctest.h"
#include "xbar/rng.hpp"

using namespace xbar;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.gaussian(0.0, 1.0);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("forward kernel matches a naive dot product") {
  // 2x3 probe worked out by hand: columns of w dotted with v.
  const std::vector<double> w = {1, 2, 3,   // row 0
                                 4, 5, 6};  // row 1
  const std::vector<double> v = {0.5, -1.0};
  std::vector<double> out(3);
  kernels::forward_mvm_ref(w.data(), 2, 3, v.data(), out.data());
  CHECK(out[0] == doctest::Approx(0.5 * 1 - 1.0 * 4).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.5 * 2 - 1.0 * 5).epsilon(1e-12));
  CHECK(out[2] == doctest::Approx(0.5 * 3 - 1.0 * 6).epsilon(1e-12));
}

TEST_CASE("backward kernel matches a naive dot product") {
  const std::vector<double> w = {1, 2, 3, 4, 5, 6};
  const std::vector<double> v = {1.0, 0.0, -2.0};
  std::vector<double> out(2);
  kernels::backward_mvm_ref(w.data(), 2, 3, v.data(), out.data());
  CHECK(out[0] == doctest::Approx(1.0 - 6.0).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(4.0 - 12.0).epsilon(1e-12));
}

TEST_CASE("parallel kernels are bitwise identical to the serial references") {
  Rng rng(2024);
  // Shapes chosen to exercise uneven thread splits and tiny edges.
  const int shapes[][2] = {{1, 1},   {1, 7},    {7, 1},    {3, 5},
                           {17, 13}, {128, 64}, {785, 200}, {201, 10}};
  for (const auto& s : shapes) {
    const int n = s[0];
    const int m = s[1];
    CAPTURE(n);
    CAPTURE(m);
    const std::vector<double> w = random_vec(
        static_cast<std::size_t>(n) * static_cast<std::size_t>(m), rng);
    const std::vector<double> vr = random_vec(static_cast<std::size_t>(n), rng);
    const std::vector<double> vc = random_vec(static_cast<std::size_t>(m), rng);

    std::vector<double> f_ref(m), f_omp(m);
    kernels::forward_mvm_ref(w.data(), n, m, vr.data(), f_ref.data());
    kernels::forward_mvm_omp(w.data(), n, m, vr.data(), f_omp.data());
    CHECK(bitwise_equal(f_ref, f_omp));

    std::vector<double> b_ref(n), b_omp(n);
    kernels::backward_mvm_ref(w.data(), n, m, vc.data(), b_ref.data());
    kernels::backward_mvm_omp(w.data(), n, m, vc.data(), b_omp.data());
    CHECK(bitwise_equal(b_ref, b_omp));
  }
}

TEST_CASE("batched forward matches per-sample forward bitwise") {
  Rng rng(7);
  const int n = 61;
  const int m = 23;
  const std::vector<double> w = random_vec(
      static_cast<std::size_t>(n) * static_cast<std::size_t>(m), rng);
  for (const int b : {1, 2, 16, 17}) {
    CAPTURE(b);
    // Column-interleaved batch: vt[i*b + k] is element i of sample k.
    std::vector<double> vt(static_cast<std::size_t>(n) * b);
    std::vector<std::vector<double>> samples(b);
    for (int k = 0; k < b; ++k) {
      samples[k] = random_vec(static_cast<std::size_t>(n), rng);
      for (int i = 0; i < n; ++i) vt[static_cast<std::size_t>(i) * b + k] = samples[k][i];
    }

    std::vector<double> batch_ref(static_cast<std::size_t>(b) * m);
    std::vector<double> batch_omp(batch_ref.size());
    kernels::forward_mvm_batch_ref(w.data(), n, m, vt.data(), b,
                                   batch_ref.data());
    kernels::forward_mvm_batch_omp(w.data(), n, m, vt.data(), b,
                                   batch_omp.data());
    CHECK(bitwise_equal(batch_ref, batch_omp));

    for (int k = 0; k < b; ++k) {
      std::vector<double> single(m);
      kernels::forward_mvm_ref(w.data(), n, m, samples[k].data(),
                               single.data());
      CHECK(std::memcmp(single.data(), batch_ref.data() + static_cast<std::size_t>(k) * m,
                        static_cast<std::size_t>(m) * sizeof(double)) == 0);
    }
  }
}
