// SPDX-License-Identifier: Apache-2.0
//
// Kernel benchmark: serial reference vs OpenMP variants on the shapes the
// networks actually run. Prints throughput, speedup and the max absolute
// difference between the two results (expected to be exactly zero).
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "gazegan/kernels.hpp"
#include "gazegan/rng.hpp"

using namespace gaze;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct BenchResult {
  double serial_s = 0.0;
  double parallel_s = 0.0;
  double max_diff = 0.0;
};

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e100;
  for (int r = 0; r < reps; ++r) {
    const auto start = Clock::now();
    fn();
    best = std::min(best, seconds_since(start));
  }
  return best;
}

void report(const std::string& name, double flops, const BenchResult& r) {
  std::printf("%-28s serial %8.3f ms  omp %8.3f ms  speedup %5.2fx  %7.2f MFLOP/s  max|diff| %g\n",
              name.c_str(), r.serial_s * 1e3, r.parallel_s * 1e3, r.serial_s / r.parallel_s,
              flops / r.parallel_s / 1e6, r.max_diff);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; par variants run serially\n");
#endif

  nn::Rng rng(12345);
  const int reps = 5;

  // discriminator stage-2 conv: [64,64,150] -> [64,128,75], k=4
  {
    const int64_t b = 64, ci = 64, t = 150, co = 128, k = 4, s = 2, p = 1;
    const int64_t to = nn::conv_out_len(t, k, s, p);
    std::vector<double> in(static_cast<size_t>(b * ci * t)), w(static_cast<size_t>(co * ci * k));
    nn::Rng fill(1);
    for (auto& v : in) v = fill.normal();
    for (auto& v : w) v = fill.normal();
    std::vector<double> out_s(static_cast<size_t>(b * co * to), 0.0), out_p = out_s;

    BenchResult r;
    r.serial_s = time_best_of(reps, [&] {
      std::fill(out_s.begin(), out_s.end(), 0.0);
      nn::serial::xcorr_acc(in.data(), w.data(), out_s.data(), b, ci, t, co, k, s, p, to);
    });
    r.parallel_s = time_best_of(reps, [&] {
      std::fill(out_p.begin(), out_p.end(), 0.0);
      nn::par::xcorr_acc(in.data(), w.data(), out_p.data(), b, ci, t, co, k, s, p, to);
    });
    r.max_diff = max_abs_diff(out_s, out_p);
    report("conv fwd 64x[64,150]->128", 2.0 * b * co * to * ci * k, r);
  }

  // generator stage-1 tconv backward-input shape: adjoint on [64,128,75]
  {
    const int64_t b = 64, ci = 64, t = 150, co = 128, k = 4, s = 2, p = 1;
    const int64_t to = nn::conv_out_len(t, k, s, p);
    std::vector<double> gout(static_cast<size_t>(b * co * to)), w(static_cast<size_t>(co * ci * k));
    nn::Rng fill(2);
    for (auto& v : gout) v = fill.normal();
    for (auto& v : w) v = fill.normal();
    std::vector<double> gin_s(static_cast<size_t>(b * ci * t), 0.0), gin_p = gin_s;

    BenchResult r;
    r.serial_s = time_best_of(reps, [&] {
      std::fill(gin_s.begin(), gin_s.end(), 0.0);
      nn::serial::xcorr_adjoint_acc(gout.data(), w.data(), gin_s.data(), b, ci, t, co, k, s, p, to);
    });
    r.parallel_s = time_best_of(reps, [&] {
      std::fill(gin_p.begin(), gin_p.end(), 0.0);
      nn::par::xcorr_adjoint_acc(gout.data(), w.data(), gin_p.data(), b, ci, t, co, k, s, p, to);
    });
    r.max_diff = max_abs_diff(gin_s, gin_p);
    report("conv adjoint 64x[128,75]", 2.0 * b * co * to * ci * k, r);
  }

  // conv weight gradient on the same shape
  {
    const int64_t b = 64, ci = 64, t = 150, co = 128, k = 4, s = 2, p = 1;
    const int64_t to = nn::conv_out_len(t, k, s, p);
    std::vector<double> in(static_cast<size_t>(b * ci * t)), gout(static_cast<size_t>(b * co * to));
    nn::Rng fill(3);
    for (auto& v : in) v = fill.normal();
    for (auto& v : gout) v = fill.normal();
    std::vector<double> gw_s(static_cast<size_t>(co * ci * k), 0.0), gw_p = gw_s;

    BenchResult r;
    r.serial_s = time_best_of(reps, [&] {
      std::fill(gw_s.begin(), gw_s.end(), 0.0);
      nn::serial::xcorr_weight_acc(in.data(), gout.data(), gw_s.data(), b, ci, t, co, k, s, p, to);
    });
    r.parallel_s = time_best_of(reps, [&] {
      std::fill(gw_p.begin(), gw_p.end(), 0.0);
      nn::par::xcorr_weight_acc(in.data(), gout.data(), gw_p.data(), b, ci, t, co, k, s, p, to);
    });
    r.max_diff = max_abs_diff(gw_s, gw_p);
    report("conv weight grad", 2.0 * b * co * to * ci * k, r);
  }

  // generator projection dense: [64,150] x [9600,150]
  {
    const int64_t b = 64, n = 150, m = 9600;
    std::vector<double> x(static_cast<size_t>(b * n)), w(static_cast<size_t>(m * n));
    nn::Rng fill(4);
    for (auto& v : x) v = fill.normal();
    for (auto& v : w) v = fill.normal();
    std::vector<double> out_s(static_cast<size_t>(b * m), 0.0), out_p = out_s;

    BenchResult r;
    r.serial_s = time_best_of(reps, [&] {
      std::fill(out_s.begin(), out_s.end(), 0.0);
      nn::serial::matvec_acc(x.data(), w.data(), out_s.data(), b, n, m);
    });
    r.parallel_s = time_best_of(reps, [&] {
      std::fill(out_p.begin(), out_p.end(), 0.0);
      nn::par::matvec_acc(x.data(), w.data(), out_p.data(), b, n, m);
    });
    r.max_diff = max_abs_diff(out_s, out_p);
    report("dense fwd 64x150->9600", 2.0 * b * n * m, r);
  }

  // dense weight gradient, same shape
  {
    const int64_t b = 64, n = 150, m = 9600;
    std::vector<double> x(static_cast<size_t>(b * n)), g(static_cast<size_t>(b * m));
    nn::Rng fill(5);
    for (auto& v : x) v = fill.normal();
    for (auto& v : g) v = fill.normal();
    std::vector<double> gw_s(static_cast<size_t>(m * n), 0.0), gw_p = gw_s;
    std::vector<double> gb_s(static_cast<size_t>(m), 0.0), gb_p = gb_s;

    BenchResult r;
    r.serial_s = time_best_of(reps, [&] {
      std::fill(gw_s.begin(), gw_s.end(), 0.0);
      std::fill(gb_s.begin(), gb_s.end(), 0.0);
      nn::serial::matvec_weight_acc(x.data(), g.data(), gw_s.data(), gb_s.data(), b, n, m);
    });
    r.parallel_s = time_best_of(reps, [&] {
      std::fill(gw_p.begin(), gw_p.end(), 0.0);
      std::fill(gb_p.begin(), gb_p.end(), 0.0);
      nn::par::matvec_weight_acc(x.data(), g.data(), gw_p.data(), gb_p.data(), b, n, m);
    });
    r.max_diff = std::max(max_abs_diff(gw_s, gw_p), max_abs_diff(gb_s, gb_p));
    report("dense weight grad", 2.0 * b * n * m, r);
  }

  return 0;
}
