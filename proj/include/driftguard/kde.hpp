// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "driftguard/types.hpp"

namespace driftguard {

/// Gaussian kernel density estimate on a uniform grid.
struct KdeModel {
  std::vector<double> grid;     // strictly increasing
  std::vector<double> density;  // same length, nonnegative
  double bandwidth = 0.0;
  std::size_t n_samples = 0;

  KdeSummary summary() const { return KdeSummary{grid, density, bandwidth}; }
};

/// Fit a Gaussian KDE. The grid spans [min - 3h, max + 3h] with
/// grid_points uniform points. When bandwidth is not given it defaults
/// to Silverman's robust rule 0.9 * min(sd, IQR/1.34) * n^(-1/5)
/// (falling back to sd when the IQR is zero). Requires at least 10
/// finite scores; zero sample variance or a non-positive explicit
/// bandwidth is an error.
KdeModel fit_kde(std::span<const double> scores,
                 std::optional<double> bandwidth = std::nullopt,
                 std::size_t grid_points = 512);

/// Local extrema of the density sequence, as (grid index, density).
/// Peaks and valleys strictly alternate by index.
struct ModeStructure {
  std::vector<std::pair<std::size_t, double>> peaks;
  std::vector<std::pair<std::size_t, double>> valleys;
};

/// A grid point is a peak when its density strictly exceeds both
/// neighbors; plateaus resolve to their leftmost point; valleys are
/// symmetric. Adjacent same-type extrema are merged keeping the more
/// extreme one, so the output alternates.
ModeStructure extract_modes(const KdeModel& model);

// Selection rules for kde_threshold. A secondary peak must reach 5% of
// the tallest peak's density to count as structure, and the valley
// between the chosen peaks must dip below 80% of the lower peak;
// anything weaker is sampling noise, not a second population.
inline constexpr double kPeakMaterialityRatio = 0.05;
inline constexpr double kValleyProminenceRatio = 0.80;

/// Threshold for a bimodal density: the deepest valley between the two
/// highest material peaks. The lower-mean side of the valley is the
/// clean population. Returns nullopt when no bimodal structure exists
/// (fewer than two material peaks, or no sufficiently deep valley).
std::optional<double> kde_threshold(const KdeModel& model);

}  // namespace driftguard
