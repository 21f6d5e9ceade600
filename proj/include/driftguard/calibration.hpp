// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "driftguard/types.hpp"

namespace driftguard {

/// Threshold interval the calibrator may search: the lower end is the
/// clean-distribution tail at the false-positive cap, the upper end the
/// maximum observed score.
struct FeasibleRange {
  double lower = 0.0;
  double upper = 0.0;
};

/// Quantile of a Gaussian clean model at (1 - fpr_cap): the lowest
/// threshold whose predicted clean false-positive rate respects the cap.
double clean_tail_bound(double clean_mean, double clean_sd, double fpr_cap);
double clean_tail_bound(const GmmFit& fit, double fpr_cap);

/// Predicted fraction of the clean component above the threshold,
/// 1 - Phi((threshold - mu) / sigma).
double predicted_clean_fpr(double clean_mean, double clean_sd, double threshold);
double predicted_clean_fpr(const GmmFit& fit, double threshold);

/// Calibrate a decision threshold on drift scores.
///
/// GMM first: when the fit is stable the candidate threshold is the
/// weighted-density intersection (or a sigma-weighted midpoint of the
/// means when no separating root exists). When the fit is unstable the
/// KDE valley is used instead, and when the KDE shows no bimodal
/// structure the empirical (1 - target_flag_rate) quantile is the last
/// resort. The candidate is clamped into the feasible range, then a
/// binary search moves it toward the target flag rate; the cap is a
/// hard constraint (the threshold never drops below the tail bound),
/// the flag-rate target a soft one.
///
/// created_at defaults to the current UTC time when empty; pass a fixed
/// timestamp for reproducible artifacts.
///
/// Throws CalibrationError when all scores are equal or the feasible
/// range is empty (tail bound above the maximum score).
CalibratedModel calibrate(std::span<const double> scores, const CalibrationConfig& config,
                          const std::string& encoder_id = "",
                          const std::string& created_at = "");

/// flag_i = score_i > model.threshold (strict, so a score exactly at
/// the threshold is not flagged).
std::vector<bool> apply_threshold(std::span<const double> scores,
                                  const CalibratedModel& model);

}  // namespace driftguard
