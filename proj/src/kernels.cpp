#include "xbar/kernels.hpp"

#include <omp.h>

#include <cstddef>
#include <cstring>

namespace xbar::kernels {

namespace {

// Contiguous column slice [j0, j1) of the forward product.
inline void forward_slice(const double* w, int n, int m, const double* v,
                          double* out, int j0, int j1) {
  for (int j = j0; j < j1; ++j) {
    out[j] = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    const double vi = v[i];
    const double* row = w + static_cast<std::size_t>(i) * m;
    for (int j = j0; j < j1; ++j) {
      out[j] += vi * row[j];
    }
  }
}

inline void forward_batch_slice(const double* w, int n, int m,
                                const double* vt, int b, double* out, int j0,
                                int j1) {
  for (int k = 0; k < b; ++k) {
    double* ok = out + static_cast<std::size_t>(k) * m;
    for (int j = j0; j < j1; ++j) {
      ok[j] = 0.0;
    }
  }
  for (int i = 0; i < n; ++i) {
    const double* row = w + static_cast<std::size_t>(i) * m;
    const double* vi = vt + static_cast<std::size_t>(i) * b;
    for (int k = 0; k < b; ++k) {
      const double vik = vi[k];
      double* ok = out + static_cast<std::size_t>(k) * m;
      for (int j = j0; j < j1; ++j) {
        ok[j] += vik * row[j];
      }
    }
  }
}

}  // namespace

void forward_mvm_ref(const double* w, int n, int m, const double* v,
                     double* out) {
  forward_slice(w, n, m, v, out, 0, m);
}

void forward_mvm_omp(const double* w, int n, int m, const double* v,
                     double* out) {
#pragma omp parallel
  {
    const int t = omp_get_thread_num();
    const int nt = omp_get_num_threads();
    const int j0 = static_cast<int>(static_cast<long long>(m) * t / nt);
    const int j1 = static_cast<int>(static_cast<long long>(m) * (t + 1) / nt);
    forward_slice(w, n, m, v, out, j0, j1);
  }
}

void backward_mvm_ref(const double* w, int n, int m, const double* v,
                      double* out) {
  for (int i = 0; i < n; ++i) {
    const double* row = w + static_cast<std::size_t>(i) * m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      acc += row[j] * v[j];
    }
    out[i] = acc;
  }
}

void backward_mvm_omp(const double* w, int n, int m, const double* v,
                      double* out) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* row = w + static_cast<std::size_t>(i) * m;
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      acc += row[j] * v[j];
    }
    out[i] = acc;
  }
}

void forward_mvm_batch_ref(const double* w, int n, int m, const double* vt,
                           int b, double* out) {
  forward_batch_slice(w, n, m, vt, b, out, 0, m);
}

void forward_mvm_batch_omp(const double* w, int n, int m, const double* vt,
                           int b, double* out) {
#pragma omp parallel
  {
    const int t = omp_get_thread_num();
    const int nt = omp_get_num_threads();
    const int j0 = static_cast<int>(static_cast<long long>(m) * t / nt);
    const int j1 = static_cast<int>(static_cast<long long>(m) * (t + 1) / nt);
    forward_batch_slice(w, n, m, vt, b, out, j0, j1);
  }
}

}  // namespace xbar::kernels
