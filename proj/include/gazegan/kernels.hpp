// SPDX-License-Identifier: Apache-2.0
//
// Low-level numeric kernels behind the layer ops. Every kernel exists twice
// with identical semantics: gaze::nn::serial is the plain reference used by
// tests and as the benchmark baseline, gaze::nn::par is the OpenMP version.
// Both call the same per-output-row inner routines, so their results are
// bit-identical regardless of thread count. gaze::nn::kernels dispatches to
// one of the two based on problem size.
//
// All kernels accumulate (+=) into their output buffer; callers pass freshly
// zeroed buffers for forward passes and gradient buffers for backward passes.
#pragma once

#include <cstdint>

namespace gaze::nn {

inline int64_t conv_out_len(int64_t t, int64_t k, int64_t stride, int64_t pad) {
  return (t + 2 * pad - k) / stride + 1;
}

inline int64_t tconv_out_len(int64_t t, int64_t k, int64_t stride, int64_t pad) {
  return (t - 1) * stride - 2 * pad + k;
}

namespace serial {

// out[b,co,t] += sum_{ci,k} in[b,ci,t*stride+k-pad] * w[co,ci,k]
void xcorr_acc(const double* in, const double* w, double* out,
               int64_t b_count, int64_t c_in, int64_t t_in,
               int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
               int64_t t_out);

// gin[b,ci,x] += sum over valid (co,k) of gout[b,co,(x+pad-k)/stride] * w[co,ci,k]
void xcorr_adjoint_acc(const double* gout, const double* w, double* gin,
                       int64_t b_count, int64_t c_in, int64_t t_in,
                       int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                       int64_t t_out);

// gw[co,ci,k] += sum_{b,t} gout[b,co,t] * in[b,ci,t*stride+k-pad]
void xcorr_weight_acc(const double* in, const double* gout, double* gw,
                      int64_t b_count, int64_t c_in, int64_t t_in,
                      int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                      int64_t t_out);

// gbias[c] += sum_{b,t} g[b,c,t]
void channel_sum_acc(const double* g, double* gbias,
                     int64_t b_count, int64_t c_count, int64_t t_len);

// out[b,m] += sum_n w[m,n] * x[b,n]
void matvec_acc(const double* x, const double* w, double* out,
                int64_t b_count, int64_t n_in, int64_t m_out);

// gx[b,n] += sum_m w[m,n] * g[b,m]
void matvec_adjoint_acc(const double* g, const double* w, double* gx,
                        int64_t b_count, int64_t n_in, int64_t m_out);

// gw[m,n] += sum_b g[b,m] * x[b,n]; gbias[m] += sum_b g[b,m] (gbias nullable)
void matvec_weight_acc(const double* x, const double* g, double* gw, double* gbias,
                       int64_t b_count, int64_t n_in, int64_t m_out);

}  // namespace serial

namespace par {

void xcorr_acc(const double* in, const double* w, double* out,
               int64_t b_count, int64_t c_in, int64_t t_in,
               int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
               int64_t t_out);
void xcorr_adjoint_acc(const double* gout, const double* w, double* gin,
                       int64_t b_count, int64_t c_in, int64_t t_in,
                       int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                       int64_t t_out);
void xcorr_weight_acc(const double* in, const double* gout, double* gw,
                      int64_t b_count, int64_t c_in, int64_t t_in,
                      int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                      int64_t t_out);
void channel_sum_acc(const double* g, double* gbias,
                     int64_t b_count, int64_t c_count, int64_t t_len);
void matvec_acc(const double* x, const double* w, double* out,
                int64_t b_count, int64_t n_in, int64_t m_out);
void matvec_adjoint_acc(const double* g, const double* w, double* gx,
                        int64_t b_count, int64_t n_in, int64_t m_out);
void matvec_weight_acc(const double* x, const double* g, double* gw, double* gbias,
                       int64_t b_count, int64_t n_in, int64_t m_out);

}  // namespace par

namespace kernels {

void xcorr_acc(const double* in, const double* w, double* out,
               int64_t b_count, int64_t c_in, int64_t t_in,
               int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
               int64_t t_out);
void xcorr_adjoint_acc(const double* gout, const double* w, double* gin,
                       int64_t b_count, int64_t c_in, int64_t t_in,
                       int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                       int64_t t_out);
void xcorr_weight_acc(const double* in, const double* gout, double* gw,
                      int64_t b_count, int64_t c_in, int64_t t_in,
                      int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                      int64_t t_out);
void channel_sum_acc(const double* g, double* gbias,
                     int64_t b_count, int64_t c_count, int64_t t_len);
void matvec_acc(const double* x, const double* w, double* out,
                int64_t b_count, int64_t n_in, int64_t m_out);
void matvec_adjoint_acc(const double* g, const double* w, double* gx,
                        int64_t b_count, int64_t n_in, int64_t m_out);
void matvec_weight_acc(const double* x, const double* g, double* gw, double* gbias,
                       int64_t b_count, int64_t n_in, int64_t m_out);

}  // namespace kernels

}  // namespace gaze::nn
