#pragma once

#include <cstdint>

namespace xbar::kernels {

// Dense kernels over a row-major n x m weight matrix. Each output element is
// accumulated in ascending index order with a single accumulator, so the
// parallel variants are bitwise identical to the serial references no matter
// how the work is split across threads.

// out[j] = sum_i w[i*m + j] * v[i]   (forward: voltages on rows)
void forward_mvm_ref(const double* w, int n, int m, const double* v,
                     double* out);
void forward_mvm_omp(const double* w, int n, int m, const double* v,
                     double* out);

// out[i] = sum_j w[i*m + j] * v[j]   (backward: voltages on columns)
void backward_mvm_ref(const double* w, int n, int m, const double* v,
                      double* out);
void backward_mvm_omp(const double* w, int n, int m, const double* v,
                      double* out);

// Batched forward over `b` input vectors stored column-interleaved:
// vt[i*b + k] is element i of sample k. out[k*m + j] matches the single-sample
// kernels bitwise. Used by test-set evaluation where weight reuse dominates.
void forward_mvm_batch_ref(const double* w, int n, int m, const double* vt,
                           int b, double* out);
void forward_mvm_batch_omp(const double* w, int n, int m, const double* vt,
                           int b, double* out);

}  // namespace xbar::kernels
