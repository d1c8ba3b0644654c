#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "emocycle/date.hpp"
#include "emocycle/error.hpp"
#include "emocycle/nulls.hpp"
#include "emocycle/series.hpp"

namespace emocycle {

struct BlockMatrix {
  std::vector<Date> block_starts;
  Eigen::MatrixXd values;  // blocks x series
};

// Means of each series over consecutive six-month blocks. The first block
// starts on the first month boundary at or after the series start; only
// blocks that fit entirely inside the series are kept.
inline BlockMatrix six_month_blocks(const std::vector<DailySeries>& series) {
  using namespace std::chrono;
  if (series.empty()) throw ValidationError("six-month blocks need at least one series");
  const Date start = series.front().start;
  const std::size_t n = series.front().size();
  for (const auto& s : series)
    if (s.start != start || s.size() != n) throw ValidationError("series passed to PCA differ in calendar range");

  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  auto ymd = ymd_of(start);
  year_month ym = ymd.year() / ymd.month();
  if (ymd.day() != day{1}) ym += months{1};
  for (;;) {
    Date first = sys_days{ym / 1};
    Date next = sys_days{(ym + months{6}) / 1};
    auto b = static_cast<std::size_t>((first - start).count());
    auto e = static_cast<std::size_t>((next - start).count());
    if (e > n) break;
    ranges.emplace_back(b, e);
    ym += months{6};
  }
  if (ranges.size() < 2)
    throw AnalysisError(fmt::format("PCA needs at least 2 complete six-month blocks, series has {}", ranges.size()));

  BlockMatrix out;
  out.values.resize(static_cast<Eigen::Index>(ranges.size()), static_cast<Eigen::Index>(series.size()));
  for (std::size_t b = 0; b < ranges.size(); ++b) {
    out.block_starts.push_back(start + days{static_cast<long>(ranges[b].first)});
    for (std::size_t k = 0; k < series.size(); ++k) {
      auto ms = mean_std(series[k].span().subspan(ranges[b].first, ranges[b].second - ranges[b].first));
      if (ms.count == 0)
        throw AnalysisError(fmt::format("six-month block starting {} is entirely gaps", format_date(out.block_starts[b])));
      out.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(k)) = ms.mean;
    }
  }
  return out;
}

struct PcaResult {
  Eigen::VectorXd means;         // column means removed before the fit
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // column j is component j
  Eigen::MatrixXd scores;        // rows x components
  Eigen::VectorXd contribution;
  Eigen::VectorXd cumulative;
};

// Covariance PCA of the column-centered data. Each eigenvector is signed so
// that its largest-magnitude entry is positive.
inline PcaResult pca_fit(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw ValidationError(fmt::format("PCA needs at least 2 rows, got {}", data.rows()));
  if (data.cols() < 1) throw ValidationError("PCA needs at least one column");
  PcaResult r;
  r.means = data.colwise().mean().transpose();
  Eigen::MatrixXd centered = data.rowwise() - r.means.transpose();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw AnalysisError("eigendecomposition failed");
  const Eigen::Index k = cov.rows();
  r.eigenvalues.resize(k);
  r.eigenvectors.resize(k, k);
  // Eigen returns ascending eigenvalues.
  for (Eigen::Index j = 0; j < k; ++j) {
    r.eigenvalues(j) = solver.eigenvalues()(k - 1 - j);
    Eigen::VectorXd v = solver.eigenvectors().col(k - 1 - j);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < k; ++i)
      if (std::abs(v(i)) > std::abs(v(arg))) arg = i;
    if (v(arg) < 0.0) v = -v;
    r.eigenvectors.col(j) = v;
  }
  const double total = r.eigenvalues.sum();
  if (!(total > 0.0)) throw AnalysisError("PCA input has zero total variance");
  r.contribution = r.eigenvalues / total;
  r.cumulative.resize(k);
  double run = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) r.cumulative(j) = (run += r.contribution(j));
  r.scores = centered * r.eigenvectors;
  return r;
}

// Mean distance between consecutive points over mean distance between all
// pairs, using the first two columns. Small values mean the points drift
// gradually rather than jump around.
inline double trajectory_smoothness(const Eigen::MatrixXd& scores) {
  if (scores.rows() < 3) throw ValidationError(fmt::format("smoothness needs at least 3 points, got {}", scores.rows()));
  const Eigen::Index dims = std::min<Eigen::Index>(2, scores.cols());
  if (dims < 1) throw ValidationError("smoothness needs at least one coordinate");
  auto dist = [&](Eigen::Index a, Eigen::Index b) {
    return (scores.row(a).head(dims) - scores.row(b).head(dims)).norm();
  };
  const Eigen::Index n = scores.rows();
  double consecutive = 0.0;
  for (Eigen::Index i = 1; i < n; ++i) consecutive += dist(i - 1, i);
  consecutive /= static_cast<double>(n - 1);
  double pairs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) pairs += dist(i, j);
  pairs /= static_cast<double>(n * (n - 1) / 2);
  if (!(pairs > 0.0)) throw AnalysisError("degenerate scores");
  return consecutive / pairs;
}

struct SmoothnessComparison {
  double original = 0.0;
  std::vector<double> shuffled;
  double shuffled_mean = 0.0;
};

// Smoothness of the six-month PCA trajectory against the same analysis on
// jointly shuffled inputs. Every repetition applies one block permutation
// to all series so days stay aligned across emotions.
inline SmoothnessComparison compare_smoothness(const std::vector<DailySeries>& series, const SurrogateSpec& spec) {
  SmoothnessComparison out;
  out.original = trajectory_smoothness(pca_fit(six_month_blocks(series).values).scores);
  for (std::size_t r = 0; r < spec.repetitions; ++r) {
    const std::uint64_t seed = derive_seed(spec.seed, r);
    std::vector<DailySeries> shuffled;
    for (const auto& s : series) shuffled.push_back(shuffle(s, spec.scheme, seed));
    out.shuffled.push_back(trajectory_smoothness(pca_fit(six_month_blocks(shuffled).values).scores));
    out.shuffled_mean += out.shuffled.back();
  }
  if (!out.shuffled.empty()) out.shuffled_mean /= static_cast<double>(out.shuffled.size());
  return out;
}

}  // namespace emocycle
