#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "emocycle/date.hpp"
#include "emocycle/error.hpp"
#include "emocycle/fft.hpp"
#include "emocycle/rng.hpp"
#include "emocycle/series.hpp"

namespace emocycle {

// Exact autocovariance of unit-variance fractional Gaussian noise.
inline double fgn_autocovariance(double hurst, double lag) {
  const double h2 = 2.0 * hurst;
  lag = std::abs(lag);
  return 0.5 * (std::pow(lag + 1.0, h2) - 2.0 * std::pow(lag, h2) + std::pow(std::abs(lag - 1.0), h2));
}

// Fractional Gaussian noise by circulant embedding (Davies-Harte). The
// embedding of the fGn autocovariance is non-negative for every H in (0,1);
// if rounding ever produces a materially negative eigenvalue it is truncated
// to zero and `warning` is filled in.
inline std::vector<double> generate_fgn(double hurst, std::size_t n, std::uint64_t seed,
                                        std::string* warning = nullptr) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw ValidationError(fmt::format("Hurst exponent must lie in (0, 1), got {}", hurst));
  if (n < 2) throw ValidationError("fGn length must be at least 2");

  const std::size_t m = 2 * n;
  std::vector<std::complex<double>> row(m);
  for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(hurst, static_cast<double>(k));
  for (std::size_t k = n + 1; k < m; ++k) row[k] = row[m - k];
  auto eig = dft(row);

  double largest = 0.0;
  for (const auto& e : eig) largest = std::max(largest, std::abs(e.real()));
  std::size_t negative = 0;
  std::vector<double> scale(m);
  for (std::size_t k = 0; k < m; ++k) {
    double lambda = eig[k].real();
    if (lambda < -1e-10 * largest) ++negative;
    scale[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
  }
  if (negative > 0 && warning != nullptr)
    *warning = fmt::format("circulant embedding had {} negative eigenvalues; truncated to zero", negative);

  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::complex<double>> w(m);
  for (std::size_t k = 0; k < m; ++k) {
    double re = normal(rng);
    double im = normal(rng);
    w[k] = scale[k] * std::complex<double>(re, im);
  }
  auto out = dft(w);
  std::vector<double> series(n);
  for (std::size_t t = 0; t < n; ++t) series[t] = out[t].real();
  return series;
}

struct SpikeSpec {
  std::size_t day = 0;       // index into the series
  double multiplier = 1.0;
  std::size_t duration = 1;  // days
};

// Generator for synthetic daily series with known ground truth:
// level * (1 + noise * fGn(t)) * weekly(weekday) * yearly(day of year) * spike(t).
struct SynthSpec {
  Date start = make_date(2006, 11, 1);
  std::size_t length = 3653;
  double hurst = 0.5;
  std::vector<double> weekly;  // empty, or 7 factors Monday-first with mean 1
  std::vector<double> yearly;  // empty, or 365 factors Jan 1 first with mean 1
  std::vector<SpikeSpec> spikes;
  double base_level = 1.0;
  double noise_scale = 0.1;
  std::uint64_t seed = 1;
};

namespace detail {

inline void validate_profile(std::span<const double> p, std::size_t period, std::string_view what) {
  if (p.empty()) return;
  if (p.size() != period)
    throw ValidationError(fmt::format("{} profile needs {} factors, got {}", what, period, p.size()));
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0)) throw ValidationError(fmt::format("{} profile factors must be positive", what));
    sum += v;
  }
  double mean = sum / static_cast<double>(period);
  if (std::abs(mean - 1.0) > 1e-6)
    throw ValidationError(fmt::format("{} profile must have mean 1, got {}", what, mean));
}

}  // namespace detail

inline void validate(const SynthSpec& spec) {
  if (spec.length < 2) throw ValidationError("synthetic series length must be at least 2");
  if (!(spec.hurst > 0.0 && spec.hurst < 1.0))
    throw ValidationError(fmt::format("Hurst exponent must lie in (0, 1), got {}", spec.hurst));
  if (!(spec.base_level > 0.0)) throw ValidationError("base level must be positive");
  if (!(spec.noise_scale >= 0.0)) throw ValidationError("noise scale must be non-negative");
  detail::validate_profile(spec.weekly, 7, "weekly");
  detail::validate_profile(spec.yearly, 365, "yearly");
  for (const auto& s : spec.spikes) {
    if (!(s.multiplier > 0.0)) throw ValidationError("spike multiplier must be positive");
    if (s.duration == 0) throw ValidationError("spike duration must be at least one day");
  }
}

inline DailySeries inject(std::span<const double> base, const SynthSpec& spec) {
  validate(spec);
  DailySeries out(spec.start, std::vector<double>(base.size()));
  for (std::size_t t = 0; t < base.size(); ++t) {
    Date d = out.date_at(t);
    double v = spec.base_level * (1.0 + spec.noise_scale * base[t]);
    if (!spec.weekly.empty()) v *= spec.weekly[static_cast<std::size_t>(weekday_index(d))];
    if (!spec.yearly.empty()) v *= spec.yearly[static_cast<std::size_t>(day_of_year_noleap(d))];
    for (const auto& s : spec.spikes)
      if (t >= s.day && t < s.day + s.duration) v *= s.multiplier;
    if (!(v > 0.0))
      throw AnalysisError(fmt::format(
          "synthetic value {} on {} is not positive; use a smaller noise scale", v, format_date(d)));
    out.values[t] = v;
  }
  return out;
}

inline DailySeries synthesize(const SynthSpec& spec) {
  validate(spec);
  auto noise = generate_fgn(spec.hurst, spec.length, derive_seed(spec.seed, "fgn"));
  return inject(noise, spec);
}

enum class ShuffleScheme { Daily, Weekly, Monthly };

inline std::string_view to_string(ShuffleScheme s) {
  switch (s) {
    case ShuffleScheme::Daily: return "daily";
    case ShuffleScheme::Weekly: return "weekly";
    case ShuffleScheme::Monthly: return "monthly";
  }
  return "?";
}

inline ShuffleScheme parse_shuffle_scheme(std::string_view s) {
  if (s == "daily") return ShuffleScheme::Daily;
  if (s == "weekly") return ShuffleScheme::Weekly;
  if (s == "monthly") return ShuffleScheme::Monthly;
  throw ValidationError(fmt::format("unknown shuffle scheme '{}' (daily|weekly|monthly)", s));
}

struct SurrogateSpec {
  ShuffleScheme scheme = ShuffleScheme::Daily;
  std::uint64_t seed = 1;
  std::size_t repetitions = 10;
};

namespace detail {

struct Block {
  std::size_t begin;
  std::size_t end;
};

// Blocks that get permuted, plus the index of the first day left in place.
inline std::vector<Block> shuffle_blocks(const DailySeries& z, ShuffleScheme scheme,
                                         std::size_t& fixed_tail) {
  std::vector<Block> blocks;
  const std::size_t n = z.size();
  fixed_tail = n;
  switch (scheme) {
    case ShuffleScheme::Daily:
      for (std::size_t i = 0; i < n; ++i) blocks.push_back({i, i + 1});
      break;
    case ShuffleScheme::Weekly: {
      // 7-day blocks from the series start; a trailing partial week stays put.
      std::size_t full = n / 7;
      for (std::size_t w = 0; w < full; ++w) blocks.push_back({7 * w, 7 * w + 7});
      fixed_tail = 7 * full;
      break;
    }
    case ShuffleScheme::Monthly: {
      std::size_t begin = 0;
      for (std::size_t i = 1; i <= n; ++i) {
        if (i == n || month_index(z.date_at(i)) != month_index(z.date_at(i - 1))) {
          blocks.push_back({begin, i});
          begin = i;
        }
      }
      break;
    }
  }
  return blocks;
}

}  // namespace detail

// Block permutation surrogate. Daily permutes days, weekly permutes 7-day
// blocks counted from the series start, monthly permutes calendar months
// across years. Order inside a block is preserved.
inline DailySeries shuffle(const DailySeries& z, ShuffleScheme scheme, std::uint64_t seed) {
  std::size_t fixed_tail = 0;
  auto blocks = detail::shuffle_blocks(z, scheme, fixed_tail);
  if (blocks.size() < 2)
    throw AnalysisError(fmt::format("{} shuffle needs at least 2 blocks, series has {}",
                                    to_string(scheme), blocks.size()));
  Rng rng(seed);
  std::vector<std::size_t> order(blocks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  DailySeries out(z.start, {});
  out.values.reserve(z.size());
  for (std::size_t b : order)
    out.values.insert(out.values.end(), z.values.begin() + static_cast<long>(blocks[b].begin),
                      z.values.begin() + static_cast<long>(blocks[b].end));
  out.values.insert(out.values.end(), z.values.begin() + static_cast<long>(fixed_tail), z.values.end());
  return out;
}

inline std::vector<DailySeries> surrogates(const DailySeries& z, const SurrogateSpec& spec) {
  if (spec.repetitions < 1) throw ValidationError("surrogate repetitions must be at least 1");
  std::vector<DailySeries> out;
  out.reserve(spec.repetitions);
  for (std::size_t r = 0; r < spec.repetitions; ++r)
    out.push_back(shuffle(z, spec.scheme, derive_seed(spec.seed, r)));
  return out;
}

}  // namespace emocycle
