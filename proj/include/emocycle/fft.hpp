#pragma once

#include <complex>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace emocycle {

namespace detail {

// FFTW's planner is not re-entrant; execution on distinct buffers is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

enum class FftDirection { Forward, Backward };

// Unnormalized complex DFT: X_k = sum_t x_t exp(-+2 pi i k t / n).
inline std::vector<std::complex<double>> dft(std::span<const std::complex<double>> in,
                                             FftDirection dir = FftDirection::Forward) {
  const int n = static_cast<int>(in.size());
  std::vector<std::complex<double>> out(in.begin(), in.end());
  if (n <= 1) return out;
  auto* buf = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_1d(n, buf, buf, dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                            FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

inline std::vector<std::complex<double>> dft_real(std::span<const double> in) {
  std::vector<std::complex<double>> c(in.begin(), in.end());
  return dft(c);
}

}  // namespace emocycle
