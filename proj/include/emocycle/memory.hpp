#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "emocycle/error.hpp"
#include "emocycle/fft.hpp"
#include "emocycle/nulls.hpp"
#include "emocycle/series.hpp"

namespace emocycle {

enum class CovEstimator {
  Biased,    // divide every lag by the number of valid samples
  Pairwise,  // divide by the number of valid pairs at that lag
};

inline std::string_view to_string(CovEstimator e) {
  return e == CovEstimator::Biased ? "biased" : "pairwise";
}

struct CorrelationEstimate {
  std::vector<double> cov;  // Cov(tau), tau = 0..max_lag
  std::vector<double> rho;  // Cov(tau) / Cov(0)
  std::size_t n = 0;        // valid samples
  CovEstimator estimator = CovEstimator::Biased;

  std::size_t max_lag() const { return cov.empty() ? 0 : cov.size() - 1; }
};

// Autocovariance about the temporal mean. NaN entries are gaps: they drop
// out of the mean and out of every pair they would belong to.
inline CorrelationEstimate autocovariance(std::span<const double> z, std::size_t max_lag,
                                          CovEstimator estimator = CovEstimator::Biased) {
  if (max_lag >= z.size())
    throw ValidationError(fmt::format("max lag {} needs more than {} samples", max_lag, z.size()));
  auto ms = mean_std(z);
  if (ms.count < 2) throw AnalysisError("autocovariance needs at least 2 valid samples");
  std::vector<double> d(z.size());
  for (std::size_t t = 0; t < z.size(); ++t) d[t] = is_gap(z[t]) ? kGap : z[t] - ms.mean;

  CorrelationEstimate out;
  out.n = ms.count;
  out.estimator = estimator;
  out.cov.assign(max_lag + 1, 0.0);
  for (std::size_t tau = 0; tau <= max_lag; ++tau) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t t = tau; t < d.size(); ++t) {
      if (is_gap(d[t]) || is_gap(d[t - tau])) continue;
      sum += d[t] * d[t - tau];
      ++pairs;
    }
    if (estimator == CovEstimator::Biased)
      out.cov[tau] = sum / static_cast<double>(ms.count);
    else
      out.cov[tau] = pairs ? sum / static_cast<double>(pairs) : kGap;
  }
  if (!(out.cov[0] > 0.0)) throw AnalysisError("constant series");
  out.rho.resize(out.cov.size());
  for (std::size_t tau = 0; tau < out.cov.size(); ++tau) out.rho[tau] = out.cov[tau] / out.cov[0];
  out.rho[0] = 1.0;
  return out;
}

// Running sums of |rho(tau)| for tau = 0..max_lag. They keep growing for
// long memory and level off for short memory.
inline std::vector<double> cumulative_abs_correlation(const CorrelationEstimate& c) {
  std::vector<double> out(c.rho.size());
  double s = 0.0;
  for (std::size_t i = 0; i < c.rho.size(); ++i) {
    if (!is_gap(c.rho[i])) s += std::abs(c.rho[i]);
    out[i] = s;
  }
  return out;
}

struct StationarityOptions {
  double mean_tolerance = 0.5;  // in units of the pooled standard deviation
  double ratio_low = 0.5;
  double ratio_high = 2.0;
};

struct StationarityResult {
  bool pass = false;
  double mean_difference = 0.0;  // |mean(first half) - mean(second half)|
  double pooled_std = 0.0;
  double variance_ratio = 0.0;   // var(first half) / var(second half)
  std::string reason;
};

// Split-half check: both halves must agree in mean (relative to the pooled
// standard deviation) and in variance.
inline StationarityResult stationarity_filter(std::span<const double> segment,
                                              const StationarityOptions& options = {}) {
  if (segment.size() < 30)
    throw ValidationError(fmt::format("stationarity check needs at least 30 samples, got {}", segment.size()));
  const std::size_t half = segment.size() / 2;
  auto a = mean_std(segment.subspan(0, half));
  auto b = mean_std(segment.subspan(segment.size() - half, half));
  StationarityResult r;
  r.mean_difference = std::abs(a.mean - b.mean);
  r.pooled_std = std::sqrt(0.5 * (a.std * a.std + b.std * b.std));
  if (a.count < 2 || b.count < 2) {
    r.reason = "too few valid samples in a half";
    return r;
  }
  if (a.std == 0.0 || b.std == 0.0) {
    r.variance_ratio = kGap;
    r.reason = "variance ratio undefined (constant half)";
    return r;
  }
  r.variance_ratio = (a.std * a.std) / (b.std * b.std);
  bool means_ok = r.mean_difference < options.mean_tolerance * r.pooled_std;
  bool ratio_ok = r.variance_ratio >= options.ratio_low && r.variance_ratio <= options.ratio_high;
  r.pass = means_ok && ratio_ok;
  if (!means_ok)
    r.reason = fmt::format("half means differ by {:.4g} >= {:.4g}", r.mean_difference,
                           options.mean_tolerance * r.pooled_std);
  else if (!ratio_ok)
    r.reason = fmt::format("variance ratio {:.4g} outside [{}, {}]", r.variance_ratio, options.ratio_low,
                           options.ratio_high);
  return r;
}

struct YearlyAcfOptions {
  std::size_t segment = 365;
  std::size_t max_lag = 365;  // clipped to segment - 1
  StationarityOptions stationarity;
};

struct YearlyAcf {
  CorrelationEstimate averaged;
  std::size_t segments_total = 0;
  std::size_t segments_used = 0;
  std::vector<Date> segment_starts;
  std::vector<StationarityResult> diagnostics;
};

// Autocorrelation averaged over consecutive one-year segments, keeping only
// the segments that pass the stationarity check.
inline YearlyAcf yearly_acf(const DailySeries& z, const YearlyAcfOptions& options = {}) {
  if (z.size() < options.segment)
    throw AnalysisError(fmt::format("yearly ACF needs at least {} days, got {}", options.segment, z.size()));
  const std::size_t lag = std::min(options.max_lag, options.segment - 1);
  YearlyAcf out;
  out.averaged.cov.assign(lag + 1, 0.0);
  out.averaged.rho.assign(lag + 1, 0.0);
  for (std::size_t begin = 0; begin + options.segment <= z.size(); begin += options.segment) {
    ++out.segments_total;
    auto seg = z.span().subspan(begin, options.segment);
    out.segment_starts.push_back(z.date_at(begin));
    auto check = stationarity_filter(seg, options.stationarity);
    out.diagnostics.push_back(check);
    if (!check.pass) continue;
    auto c = autocovariance(seg, lag);
    for (std::size_t t = 0; t <= lag; ++t) {
      out.averaged.cov[t] += c.cov[t];
      out.averaged.rho[t] += c.rho[t];
    }
    out.averaged.n = std::max(out.averaged.n, c.n);
    ++out.segments_used;
  }
  if (out.segments_used == 0)
    throw AnalysisError(fmt::format("none of {} yearly segments passed the stationarity check", out.segments_total));
  for (std::size_t t = 0; t <= lag; ++t) {
    out.averaged.cov[t] /= static_cast<double>(out.segments_used);
    out.averaged.rho[t] /= static_cast<double>(out.segments_used);
  }
  return out;
}

enum class SpectralMethod { WienerKhinchin, Welch };

inline std::string_view to_string(SpectralMethod m) {
  return m == SpectralMethod::WienerKhinchin ? "wiener-khinchin" : "welch";
}

enum class Window { Hann, Rectangular };

inline std::string_view to_string(Window w) { return w == Window::Hann ? "hann" : "rectangular"; }

struct SpectralEstimate {
  std::vector<double> freq;  // cycles per day
  std::vector<double> psd;
  SpectralMethod method = SpectralMethod::WienerKhinchin;
  std::size_t segment_length = 0;
  double overlap = 0.0;
  Window window = Window::Rectangular;
  std::size_t segments = 1;
};

// S(f) = Cov(0) + 2 sum_tau Cov(tau) cos(2 pi tau f).
inline double wiener_khinchin_at(const CorrelationEstimate& c, double f) {
  double s = c.cov[0];
  for (std::size_t tau = 1; tau < c.cov.size(); ++tau)
    s += 2.0 * c.cov[tau] * std::cos(2.0 * std::numbers::pi * static_cast<double>(tau) * f);
  return s;
}

// Cosine transform of the autocovariance at the Fourier frequencies j/n,
// j = 1..n/2, where n is the sample size behind the estimate.
inline SpectralEstimate psd_wiener_khinchin(const CorrelationEstimate& c) {
  const std::size_t n = c.n;
  if (n < 2) throw AnalysisError("spectrum needs at least 2 samples");
  SpectralEstimate out;
  out.method = SpectralMethod::WienerKhinchin;
  out.segment_length = n;
  for (std::size_t j = 1; j <= n / 2; ++j) {
    double s = c.cov[0];
    for (std::size_t tau = 1; tau < c.cov.size(); ++tau) {
      // Reduce tau*j modulo n so the cosine argument stays in [0, 2 pi).
      std::size_t k = (tau * j) % n;
      s += 2.0 * c.cov[tau] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }
    out.freq.push_back(static_cast<double>(j) / static_cast<double>(n));
    out.psd.push_back(s);
  }
  return out;
}

struct WelchOptions {
  std::size_t segment = 365;
  double overlap = 0.5;
  Window window = Window::Hann;
};

// Averaged modified periodograms of mean-removed, windowed segments, scaled
// by the window power so unit-variance white noise has S = 1. Segments that
// contain a gap are skipped.
inline SpectralEstimate psd_welch(std::span<const double> z, const WelchOptions& options = {}) {
  const std::size_t m = options.segment;
  if (m < 2) throw ValidationError("Welch segment must be at least 2 samples");
  if (!(options.overlap >= 0.0 && options.overlap < 1.0))
    throw ValidationError(fmt::format("Welch overlap must lie in [0, 1), got {}", options.overlap));
  if (z.size() < m)
    throw AnalysisError(fmt::format("series of {} samples is shorter than the Welch segment {}; use a smaller segment",
                                    z.size(), m));
  std::vector<double> w(m, 1.0);
  if (options.window == Window::Hann)
    for (std::size_t i = 0; i < m; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m));
  double power = 0.0;
  for (double v : w) power += v * v;

  const std::size_t step = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(static_cast<double>(m) * (1.0 - options.overlap))));
  SpectralEstimate out;
  out.method = SpectralMethod::Welch;
  out.segment_length = m;
  out.overlap = options.overlap;
  out.window = options.window;
  out.segments = 0;
  std::vector<double> acc(m / 2, 0.0);
  std::vector<std::complex<double>> buf(m);
  for (std::size_t begin = 0; begin + m <= z.size(); begin += step) {
    auto seg = z.subspan(begin, m);
    bool gap = false;
    double mean = 0.0;
    for (double v : seg) {
      gap = gap || is_gap(v);
      mean += v;
    }
    if (gap) continue;
    mean /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) buf[i] = w[i] * (seg[i] - mean);
    auto X = dft(buf);
    for (std::size_t j = 1; j <= m / 2; ++j) acc[j - 1] += std::norm(X[j]) / power;
    ++out.segments;
  }
  if (out.segments == 0) throw AnalysisError("no gap-free Welch segment");
  for (std::size_t j = 1; j <= m / 2; ++j) {
    out.freq.push_back(static_cast<double>(j) / static_cast<double>(m));
    out.psd.push_back(acc[j - 1] / static_cast<double>(out.segments));
  }
  return out;
}

struct FitRange {
  double lo;
  double hi;
};

// Defaults for the exponent fits. The ACF range stays at short lags where
// the estimate is dominated by signal rather than by sample-mean bias.
inline constexpr FitRange kDefaultAcfRange{2.0, 10.0};
inline constexpr FitRange kDefaultPsdRange{1.0 / 365.0, 1.0 / 14.0};

struct MemoryFit {
  double exponent = 0.0;   // minus the log-log slope
  double intercept = 0.0;  // log-log intercept
  double r2 = 0.0;
  FitRange range{0.0, 0.0};
  std::size_t points = 0;
  bool mean_bias_corrected = false;
  double bias_offset = 0.0;  // v in rho_c = rho (1 - v) + v
};

// Ordinary least squares on (log x, log y) over range, positive y only.
inline MemoryFit fit_power_law(std::span<const double> x, std::span<const double> y, FitRange range) {
  if (x.size() != y.size()) throw ValidationError("fit abscissa and ordinate differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= range.lo && x[i] <= range.hi)) continue;
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 5)
    throw AnalysisError(fmt::format("power-law fit on [{}, {}] has {} positive points, need 5", range.lo,
                                    range.hi, lx.size()));
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw AnalysisError("power-law fit abscissa is degenerate");
  MemoryFit fit;
  double slope = sxy / sxx;
  fit.exponent = -slope;
  fit.intercept = my - slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.range = range;
  fit.points = lx.size();
  return fit;
}

struct AcfFitOptions {
  FitRange range = kDefaultAcfRange;
  bool correct_mean_bias = true;
  int max_iterations = 200;
};

// Exponent alpha of rho(tau) ~ A tau^-alpha. Subtracting the sample mean
// lowers every rho by about v = Var(mean)/Var, which for that power law is
// 2A n^-alpha / ((1 - alpha)(2 - alpha)). With correction on, the fit is
// iterated on rho (1 - v) + v until alpha settles; if alpha leaves (0, 1)
// the plain fit is returned.
inline MemoryFit fit_acf_exponent(const CorrelationEstimate& c, const AcfFitOptions& options = {}) {
  std::vector<double> lags(c.rho.size());
  for (std::size_t i = 0; i < lags.size(); ++i) lags[i] = static_cast<double>(i);
  MemoryFit plain = fit_power_law(lags, c.rho, options.range);
  if (!options.correct_mean_bias || !(plain.exponent > 0.0 && plain.exponent < 1.0)) return plain;

  const double n = static_cast<double>(c.n);
  MemoryFit fit = plain;
  std::vector<double> corrected(c.rho.size());
  for (int it = 0; it < options.max_iterations; ++it) {
    const double a = fit.exponent;
    const double amp = std::exp(fit.intercept);
    const double v = 2.0 * amp * std::pow(n, -a) / ((1.0 - a) * (2.0 - a));
    if (!(v >= 0.0 && v < 1.0)) return plain;
    for (std::size_t i = 0; i < c.rho.size(); ++i) corrected[i] = c.rho[i] * (1.0 - v) + v;
    MemoryFit next = fit_power_law(lags, corrected, options.range);
    next.mean_bias_corrected = true;
    next.bias_offset = v;
    if (!(next.exponent > 0.0 && next.exponent < 1.0)) return plain;
    bool settled = std::abs(next.exponent - fit.exponent) < 1e-12;
    fit = next;
    if (settled) break;
  }
  return fit;
}

// Exponent beta of S(f) ~ f^-beta.
inline MemoryFit fit_psd_exponent(const SpectralEstimate& s, FitRange range = kDefaultPsdRange) {
  return fit_power_law(s.freq, s.psd, range);
}

// Autocorrelation averaged pointwise over spec.repetitions shuffles of z.
inline CorrelationEstimate surrogate_acf(const DailySeries& z, const SurrogateSpec& spec, std::size_t max_lag) {
  CorrelationEstimate avg;
  for (const auto& s : surrogates(z, spec)) {
    auto c = autocovariance(s.span(), max_lag);
    if (avg.cov.empty()) {
      avg = c;
      continue;
    }
    for (std::size_t t = 0; t <= max_lag; ++t) {
      avg.cov[t] += c.cov[t];
      avg.rho[t] += c.rho[t];
    }
  }
  const double r = static_cast<double>(spec.repetitions);
  for (std::size_t t = 0; t <= max_lag; ++t) {
    avg.cov[t] /= r;
    avg.rho[t] /= r;
  }
  return avg;
}

// Largest lag h such that the surrogate keeps at least `fraction` of the
// original correlation at every lag 1..h. Zero when lag 1 already fails.
inline std::size_t preservation_horizon(const CorrelationEstimate& original, const CorrelationEstimate& surrogate,
                                        double fraction = 0.5) {
  const std::size_t n = std::min(original.rho.size(), surrogate.rho.size());
  std::size_t h = 0;
  for (std::size_t t = 1; t < n; ++t) {
    if (!(original.rho[t] > 0.0) || !(surrogate.rho[t] >= fraction * original.rho[t])) break;
    h = t;
  }
  return h;
}

}  // namespace emocycle
