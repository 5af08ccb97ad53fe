// SPDX-License-Identifier: Apache-2.0
#include "gazegan/kernels.hpp"

namespace gaze::nn {

namespace {

// Per-output-row routines shared by the serial and OpenMP variants. Each one
// touches a disjoint slice of the output, and its internal summation order is
// fixed, which is what makes the two variants bit-identical.

inline void xcorr_row(const double* in_b, const double* w_co, double* out_row,
                      int64_t c_in, int64_t t_in, int64_t k_len,
                      int64_t stride, int64_t pad, int64_t t_out) {
  for (int64_t t = 0; t < t_out; ++t) {
    const int64_t base = t * stride - pad;
    double acc = 0.0;
    for (int64_t ci = 0; ci < c_in; ++ci) {
      const double* in_c = in_b + ci * t_in;
      const double* w_c = w_co + ci * k_len;
      for (int64_t k = 0; k < k_len; ++k) {
        const int64_t x = base + k;
        if (x >= 0 && x < t_in) acc += in_c[x] * w_c[k];
      }
    }
    out_row[t] += acc;
  }
}

inline void xcorr_adjoint_row(const double* gout_b, const double* w, double* gin_row,
                              int64_t ci, int64_t c_in, int64_t t_in,
                              int64_t c_out, int64_t k_len,
                              int64_t stride, int64_t pad, int64_t t_out) {
  for (int64_t x = 0; x < t_in; ++x) {
    const int64_t base = x + pad;
    // only k with (base - k) divisible by stride contribute
    const int64_t k_first = base % stride;
    double acc = 0.0;
    for (int64_t co = 0; co < c_out; ++co) {
      const double* gout_c = gout_b + co * t_out;
      const double* w_c = w + (co * c_in + ci) * k_len;
      for (int64_t k = k_first; k < k_len; k += stride) {
        const int64_t u = (base - k) / stride;
        if (base >= k && u < t_out) acc += gout_c[u] * w_c[k];
      }
    }
    gin_row[x] += acc;
  }
}

inline void xcorr_weight_cell(const double* in, const double* gout, double* gw_cell,
                              int64_t co, int64_t ci,
                              int64_t b_count, int64_t c_in, int64_t t_in,
                              int64_t c_out, int64_t k_len,
                              int64_t stride, int64_t pad, int64_t t_out) {
  for (int64_t k = 0; k < k_len; ++k) {
    double acc = 0.0;
    for (int64_t b = 0; b < b_count; ++b) {
      const double* in_c = in + (b * c_in + ci) * t_in;
      const double* gout_c = gout + (b * c_out + co) * t_out;
      for (int64_t t = 0; t < t_out; ++t) {
        const int64_t x = t * stride + k - pad;
        if (x >= 0 && x < t_in) acc += gout_c[t] * in_c[x];
      }
    }
    gw_cell[k] += acc;
  }
}

inline void channel_sum_cell(const double* g, double* gbias_c, int64_t c,
                             int64_t b_count, int64_t c_count, int64_t t_len) {
  double acc = 0.0;
  for (int64_t b = 0; b < b_count; ++b) {
    const double* g_c = g + (b * c_count + c) * t_len;
    for (int64_t t = 0; t < t_len; ++t) acc += g_c[t];
  }
  *gbias_c += acc;
}

inline void matvec_cell(const double* x_b, const double* w_m, double* out_cell,
                        int64_t n_in) {
  double acc = 0.0;
  for (int64_t n = 0; n < n_in; ++n) acc += w_m[n] * x_b[n];
  *out_cell += acc;
}

inline void matvec_adjoint_cell(const double* g_b, const double* w, double* gx_cell,
                                int64_t n, int64_t n_in, int64_t m_out) {
  double acc = 0.0;
  for (int64_t m = 0; m < m_out; ++m) acc += w[m * n_in + n] * g_b[m];
  *gx_cell += acc;
}

inline void matvec_weight_row(const double* x, const double* g, double* gw_row,
                              double* gbias_m, int64_t m,
                              int64_t b_count, int64_t n_in, int64_t m_out) {
  double bias_acc = 0.0;
  for (int64_t b = 0; b < b_count; ++b) {
    const double gm = g[b * m_out + m];
    const double* x_b = x + b * n_in;
    for (int64_t n = 0; n < n_in; ++n) gw_row[n] += gm * x_b[n];
    bias_acc += gm;
  }
  if (gbias_m) *gbias_m += bias_acc;
}

// Work below this many multiply-adds is not worth a parallel region.
constexpr int64_t kParallelCutoff = 1 << 15;

}  // namespace

namespace serial {

void xcorr_acc(const double* in, const double* w, double* out,
               int64_t b_count, int64_t c_in, int64_t t_in,
               int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
               int64_t t_out) {
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t co = 0; co < c_out; ++co)
      xcorr_row(in + b * c_in * t_in, w + co * c_in * k_len,
                out + (b * c_out + co) * t_out,
                c_in, t_in, k_len, stride, pad, t_out);
}

void xcorr_adjoint_acc(const double* gout, const double* w, double* gin,
                       int64_t b_count, int64_t c_in, int64_t t_in,
                       int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                       int64_t t_out) {
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t ci = 0; ci < c_in; ++ci)
      xcorr_adjoint_row(gout + b * c_out * t_out, w,
                        gin + (b * c_in + ci) * t_in,
                        ci, c_in, t_in, c_out, k_len, stride, pad, t_out);
}

void xcorr_weight_acc(const double* in, const double* gout, double* gw,
                      int64_t b_count, int64_t c_in, int64_t t_in,
                      int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                      int64_t t_out) {
  for (int64_t co = 0; co < c_out; ++co)
    for (int64_t ci = 0; ci < c_in; ++ci)
      xcorr_weight_cell(in, gout, gw + (co * c_in + ci) * k_len,
                        co, ci, b_count, c_in, t_in, c_out, k_len,
                        stride, pad, t_out);
}

void channel_sum_acc(const double* g, double* gbias,
                     int64_t b_count, int64_t c_count, int64_t t_len) {
  for (int64_t c = 0; c < c_count; ++c)
    channel_sum_cell(g, gbias + c, c, b_count, c_count, t_len);
}

void matvec_acc(const double* x, const double* w, double* out,
                int64_t b_count, int64_t n_in, int64_t m_out) {
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t m = 0; m < m_out; ++m)
      matvec_cell(x + b * n_in, w + m * n_in, out + b * m_out + m, n_in);
}

void matvec_adjoint_acc(const double* g, const double* w, double* gx,
                        int64_t b_count, int64_t n_in, int64_t m_out) {
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t n = 0; n < n_in; ++n)
      matvec_adjoint_cell(g + b * m_out, w, gx + b * n_in + n, n, n_in, m_out);
}

void matvec_weight_acc(const double* x, const double* g, double* gw, double* gbias,
                       int64_t b_count, int64_t n_in, int64_t m_out) {
  for (int64_t m = 0; m < m_out; ++m)
    matvec_weight_row(x, g, gw + m * n_in, gbias ? gbias + m : nullptr,
                      m, b_count, n_in, m_out);
}

}  // namespace serial

namespace par {

void xcorr_acc(const double* in, const double* w, double* out,
               int64_t b_count, int64_t c_in, int64_t t_in,
               int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
               int64_t t_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t co = 0; co < c_out; ++co)
      xcorr_row(in + b * c_in * t_in, w + co * c_in * k_len,
                out + (b * c_out + co) * t_out,
                c_in, t_in, k_len, stride, pad, t_out);
}

void xcorr_adjoint_acc(const double* gout, const double* w, double* gin,
                       int64_t b_count, int64_t c_in, int64_t t_in,
                       int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                       int64_t t_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t ci = 0; ci < c_in; ++ci)
      xcorr_adjoint_row(gout + b * c_out * t_out, w,
                        gin + (b * c_in + ci) * t_in,
                        ci, c_in, t_in, c_out, k_len, stride, pad, t_out);
}

void xcorr_weight_acc(const double* in, const double* gout, double* gw,
                      int64_t b_count, int64_t c_in, int64_t t_in,
                      int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                      int64_t t_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t co = 0; co < c_out; ++co)
    for (int64_t ci = 0; ci < c_in; ++ci)
      xcorr_weight_cell(in, gout, gw + (co * c_in + ci) * k_len,
                        co, ci, b_count, c_in, t_in, c_out, k_len,
                        stride, pad, t_out);
}

void channel_sum_acc(const double* g, double* gbias,
                     int64_t b_count, int64_t c_count, int64_t t_len) {
#pragma omp parallel for schedule(static)
  for (int64_t c = 0; c < c_count; ++c)
    channel_sum_cell(g, gbias + c, c, b_count, c_count, t_len);
}

void matvec_acc(const double* x, const double* w, double* out,
                int64_t b_count, int64_t n_in, int64_t m_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t m = 0; m < m_out; ++m)
      matvec_cell(x + b * n_in, w + m * n_in, out + b * m_out + m, n_in);
}

void matvec_adjoint_acc(const double* g, const double* w, double* gx,
                        int64_t b_count, int64_t n_in, int64_t m_out) {
#pragma omp parallel for collapse(2) schedule(static)
  for (int64_t b = 0; b < b_count; ++b)
    for (int64_t n = 0; n < n_in; ++n)
      matvec_adjoint_cell(g + b * m_out, w, gx + b * n_in + n, n, n_in, m_out);
}

void matvec_weight_acc(const double* x, const double* g, double* gw, double* gbias,
                       int64_t b_count, int64_t n_in, int64_t m_out) {
#pragma omp parallel for schedule(static)
  for (int64_t m = 0; m < m_out; ++m)
    matvec_weight_row(x, g, gw + m * n_in, gbias ? gbias + m : nullptr,
                      m, b_count, n_in, m_out);
}

}  // namespace par

namespace kernels {

void xcorr_acc(const double* in, const double* w, double* out,
               int64_t b_count, int64_t c_in, int64_t t_in,
               int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
               int64_t t_out) {
  const int64_t work = b_count * c_out * t_out * c_in * k_len;
  if (work < kParallelCutoff)
    serial::xcorr_acc(in, w, out, b_count, c_in, t_in, c_out, k_len, stride, pad, t_out);
  else
    par::xcorr_acc(in, w, out, b_count, c_in, t_in, c_out, k_len, stride, pad, t_out);
}

void xcorr_adjoint_acc(const double* gout, const double* w, double* gin,
                       int64_t b_count, int64_t c_in, int64_t t_in,
                       int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                       int64_t t_out) {
  const int64_t work = b_count * c_in * t_in * c_out * k_len;
  if (work < kParallelCutoff)
    serial::xcorr_adjoint_acc(gout, w, gin, b_count, c_in, t_in, c_out, k_len, stride, pad, t_out);
  else
    par::xcorr_adjoint_acc(gout, w, gin, b_count, c_in, t_in, c_out, k_len, stride, pad, t_out);
}

void xcorr_weight_acc(const double* in, const double* gout, double* gw,
                      int64_t b_count, int64_t c_in, int64_t t_in,
                      int64_t c_out, int64_t k_len, int64_t stride, int64_t pad,
                      int64_t t_out) {
  const int64_t work = b_count * c_out * t_out * c_in * k_len;
  if (work < kParallelCutoff)
    serial::xcorr_weight_acc(in, gout, gw, b_count, c_in, t_in, c_out, k_len, stride, pad, t_out);
  else
    par::xcorr_weight_acc(in, gout, gw, b_count, c_in, t_in, c_out, k_len, stride, pad, t_out);
}

void channel_sum_acc(const double* g, double* gbias,
                     int64_t b_count, int64_t c_count, int64_t t_len) {
  const int64_t work = b_count * c_count * t_len;
  if (work < kParallelCutoff)
    serial::channel_sum_acc(g, gbias, b_count, c_count, t_len);
  else
    par::channel_sum_acc(g, gbias, b_count, c_count, t_len);
}

void matvec_acc(const double* x, const double* w, double* out,
                int64_t b_count, int64_t n_in, int64_t m_out) {
  const int64_t work = b_count * n_in * m_out;
  if (work < kParallelCutoff)
    serial::matvec_acc(x, w, out, b_count, n_in, m_out);
  else
    par::matvec_acc(x, w, out, b_count, n_in, m_out);
}

void matvec_adjoint_acc(const double* g, const double* w, double* gx,
                        int64_t b_count, int64_t n_in, int64_t m_out) {
  const int64_t work = b_count * n_in * m_out;
  if (work < kParallelCutoff)
    serial::matvec_adjoint_acc(g, w, gx, b_count, n_in, m_out);
  else
    par::matvec_adjoint_acc(g, w, gx, b_count, n_in, m_out);
}

void matvec_weight_acc(const double* x, const double* g, double* gw, double* gbias,
                       int64_t b_count, int64_t n_in, int64_t m_out) {
  const int64_t work = b_count * n_in * m_out;
  if (work < kParallelCutoff)
    serial::matvec_weight_acc(x, g, gw, gbias, b_count, n_in, m_out);
  else
    par::matvec_weight_acc(x, g, gw, gbias, b_count, n_in, m_out);
}

}  // namespace kernels

}  // namespace gaze::nn
