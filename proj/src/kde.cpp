// SPDX-License-Identifier: Apache-2.0

#include "driftguard/kde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftguard/stats.hpp"

namespace driftguard {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double silverman_bandwidth(std::vector<double>& sorted) {
  const auto n = static_cast<double>(sorted.size());
  const MeanSd ms = mean_sd(sorted);
  if (ms.sd == 0.0) {
    throw ValidationError("KDE fit: zero sample variance, bandwidth undefined");
  }
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  // Robust variant; a zero IQR (heavily tied data) falls back to the sd.
  const double scale = iqr > 0.0 ? std::min(ms.sd, iqr / 1.34) : ms.sd;
  return 0.9 * scale * std::pow(n, -0.2);
}

}  // namespace

KdeModel fit_kde(std::span<const double> scores, std::optional<double> bandwidth,
                 std::size_t grid_points) {
  if (scores.size() < 10) {
    throw ValidationError("KDE fit needs at least 10 scores, got " +
                          std::to_string(scores.size()));
  }
  if (grid_points < 2) throw ValidationError("KDE fit: grid_points must be >= 2");
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("KDE fit: non-finite score");
  }
  if (bandwidth && !(*bandwidth > 0.0)) {
    throw ValidationError("KDE fit: bandwidth must be positive");
  }

  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(sorted);

  KdeModel model;
  model.bandwidth = h;
  model.n_samples = sorted.size();
  model.grid.resize(grid_points);
  model.density.resize(grid_points);

  const double lo = sorted.front() - 3.0 * h;
  const double hi = sorted.back() + 3.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  const double norm = kInvSqrt2Pi / (static_cast<double>(sorted.size()) * h);
  for (std::size_t j = 0; j < grid_points; ++j) {
    const double x = lo + step * static_cast<double>(j);
    model.grid[j] = x;
    double sum = 0.0;
    for (double s : sorted) {
      const double z = (x - s) / h;
      sum += std::exp(-0.5 * z * z);
    }
    model.density[j] = norm * sum;
  }
  return model;
}

ModeStructure extract_modes(const KdeModel& model) {
  const auto& d = model.density;
  ModeStructure modes;
  if (d.size() < 3) return modes;

  struct Extremum {
    std::size_t index;
    double value;
    bool is_peak;
  };
  std::vector<Extremum> found;

  // Compress plateaus to runs; an interior run strictly above (below)
  // both neighboring runs is a peak (valley) at its leftmost point.
  std::size_t i = 1;
  while (i + 1 < d.size()) {
    std::size_t j = i;
    while (j + 1 < d.size() && d[j + 1] == d[i]) ++j;
    if (j + 1 < d.size()) {
      if (d[i - 1] < d[i] && d[j + 1] < d[i]) found.push_back({i, d[i], true});
      if (d[i - 1] > d[i] && d[j + 1] > d[i]) found.push_back({i, d[i], false});
    }
    i = j + 1;
  }

  // Enforce alternation: adjacent same-type extrema keep the more
  // extreme one (leftmost on ties).
  std::vector<Extremum> alternating;
  for (const Extremum& e : found) {
    if (!alternating.empty() && alternating.back().is_peak == e.is_peak) {
      const Extremum& prev = alternating.back();
      const bool replace = e.is_peak ? e.value > prev.value : e.value < prev.value;
      if (replace) alternating.back() = e;
      continue;
    }
    alternating.push_back(e);
  }

  for (const Extremum& e : alternating) {
    if (e.is_peak) {
      modes.peaks.emplace_back(e.index, e.value);
    } else {
      modes.valleys.emplace_back(e.index, e.value);
    }
  }
  return modes;
}

std::optional<double> kde_threshold(const KdeModel& model) {
  const ModeStructure modes = extract_modes(model);
  if (modes.peaks.size() < 2) return std::nullopt;

  double max_peak = 0.0;
  for (const auto& [idx, dens] : modes.peaks) max_peak = std::max(max_peak, dens);

  // Keep peaks tall enough to represent a population rather than a few
  // stray tail samples.
  std::vector<std::pair<std::size_t, double>> material;
  for (const auto& peak : modes.peaks) {
    if (peak.second >= kPeakMaterialityRatio * max_peak) material.push_back(peak);
  }
  if (material.size() < 2) return std::nullopt;

  // Two highest-density material peaks (ties resolved to the leftmost).
  auto higher = [](const auto& a, const auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  };
  std::partial_sort(material.begin(), material.begin() + 2, material.end(), higher);
  std::size_t left = material[0].first;
  std::size_t right = material[1].first;
  if (left > right) std::swap(left, right);
  const double lower_peak = std::min(material[0].second, material[1].second);

  // Deepest valley strictly between the two peaks (leftmost on ties).
  std::optional<std::pair<std::size_t, double>> deepest;
  for (const auto& valley : modes.valleys) {
    if (valley.first <= left || valley.first >= right) continue;
    if (!deepest || valley.second < deepest->second) deepest = valley;
  }
  if (!deepest) return std::nullopt;

  // A valley that barely dips below the peaks is sampling noise on a
  // unimodal hump, not a boundary between two populations.
  if (deepest->second > kValleyProminenceRatio * lower_peak) return std::nullopt;

  return model.grid[deepest->first];
}

}  // namespace driftguard
