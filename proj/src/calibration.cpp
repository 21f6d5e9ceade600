// SPDX-License-Identifier: Apache-2.0

#include "driftguard/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftguard/io_util.hpp"
#include "driftguard/kde.hpp"
#include "driftguard/mixture.hpp"
#include "driftguard/stats.hpp"

namespace driftguard {

namespace {

constexpr std::uint32_t kMaxSearchIters = 50;

// Gaussian stand-in for the clean population when the GMM fit itself
// cannot be trusted.
struct CleanEstimate {
  double mean = 0.0;
  double sd = kSigmaFloor;
};

CleanEstimate estimate_clean(std::span<const double> subset) {
  const MeanSd ms = mean_sd(subset);
  return {ms.mean, std::max(ms.sd, kSigmaFloor)};
}

double flag_rate(std::span<const double> sorted, double threshold) {
  // Fraction strictly greater than the threshold.
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), threshold);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

}  // namespace

double clean_tail_bound(double clean_mean, double clean_sd, double fpr_cap) {
  if (!(fpr_cap > 0.0 && fpr_cap < 1.0)) {
    throw ValidationError("fpr_cap must lie in (0, 1), got " + std::to_string(fpr_cap));
  }
  return clean_mean + std_normal_quantile(1.0 - fpr_cap) * clean_sd;
}

double clean_tail_bound(const GmmFit& fit, double fpr_cap) {
  fit.validate();
  return clean_tail_bound(fit.mu_clean, fit.sigma_clean, fpr_cap);
}

double predicted_clean_fpr(double clean_mean, double clean_sd, double threshold) {
  return 1.0 - std_normal_cdf((threshold - clean_mean) / clean_sd);
}

double predicted_clean_fpr(const GmmFit& fit, double threshold) {
  fit.validate();
  return predicted_clean_fpr(fit.mu_clean, fit.sigma_clean, threshold);
}

CalibratedModel calibrate(std::span<const double> scores, const CalibrationConfig& config,
                          const std::string& encoder_id, const std::string& created_at) {
  config.validate();
  if (scores.size() < 10) {
    throw ValidationError("calibration needs at least 10 scores, got " +
                          std::to_string(scores.size()));
  }
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("calibration: non-finite score");
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) {
    throw CalibrationError("degenerate scores: all " + std::to_string(scores.size()) +
                           " values equal " + std::to_string(sorted.front()));
  }

  const GmmFit fit = fit_gmm_1d(sorted, config);
  const StabilityReport stability = stability_check(fit, config);

  CalibratedModel model;
  model.config = config;
  model.encoder_id = encoder_id;
  model.created_at = created_at.empty() ? rfc3339_now() : created_at;

  double candidate = 0.0;
  CleanEstimate clean;
  if (stability.stable) {
    model.method = ThresholdMethod::gmm;
    model.gmm = fit;
    clean = {fit.mu_clean, fit.sigma_clean};
    if (auto x = density_intersection(fit)) {
      candidate = *x;
    } else {
      // No separating root: fall back to the point equidistant from the
      // means in per-component sigma units.
      candidate = (fit.sigma_injected * fit.mu_clean + fit.sigma_clean * fit.mu_injected) /
                  (fit.sigma_clean + fit.sigma_injected);
    }
  } else {
    const KdeModel kde = fit_kde(sorted, std::nullopt, config.kde_grid_points);
    model.kde_summary = kde.summary();
    if (auto valley = kde_threshold(kde)) {
      model.method = ThresholdMethod::kde;
      candidate = *valley;
      // The mass below the valley is the best available clean estimate.
      const auto below = std::span(sorted).first(static_cast<std::size_t>(
          std::lower_bound(sorted.begin(), sorted.end(), *valley) - sorted.begin()));
      clean = below.size() >= 2 ? estimate_clean(below) : estimate_clean(sorted);
    } else {
      // No bimodal structure anywhere: quantile fallback, with the whole
      // sample standing in for the clean population.
      model.method = ThresholdMethod::quantile;
      candidate = sorted_quantile(sorted, 1.0 - config.target_flag_rate);
      clean = estimate_clean(sorted);
    }
  }

  const FeasibleRange range{clean_tail_bound(clean.mean, clean.sd, config.fpr_cap),
                            sorted.back()};
  if (range.lower > range.upper) {
    throw CalibrationError(
        "infeasible range: clean tail bound " + std::to_string(range.lower) +
        " exceeds max score " + std::to_string(range.upper) + " (clean mean " +
        std::to_string(clean.mean) + ", sd " + std::to_string(clean.sd) + ", cap " +
        std::to_string(config.fpr_cap) + ")");
  }
  candidate = std::clamp(candidate, range.lower, range.upper);

  // Binary search toward the target flag rate. The candidate splits the
  // interval first; the tail bound is a hard floor throughout. Ties in
  // the objective keep the higher (more conservative) threshold.
  double best = candidate;
  double best_gap = std::abs(flag_rate(sorted, candidate) - config.target_flag_rate);
  double lo = range.lower;
  double hi = range.upper;
  double probe = candidate;
  for (std::uint32_t iter = 0; iter < kMaxSearchIters && best_gap >= config.search_tol;
       ++iter) {
    const double rate = flag_rate(sorted, probe);
    const double gap = std::abs(rate - config.target_flag_rate);
    if (gap < best_gap || (gap == best_gap && probe > best)) {
      best = probe;
      best_gap = gap;
    }
    if (rate > config.target_flag_rate) {
      lo = probe;  // flagging too much: raise the threshold
    } else {
      hi = probe;
    }
    probe = 0.5 * (lo + hi);
  }

  model.threshold = best;
  model.predicted_clean_fpr = predicted_clean_fpr(clean.mean, clean.sd, best);
  model.observed_flag_rate = flag_rate(sorted, best);
  model.format_version = kModelFormatVersion;
  model.validate();
  return model;
}

std::vector<bool> apply_threshold(std::span<const double> scores,
                                  const CalibratedModel& model) {
  model.validate();
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    flags[i] = scores[i] > model.threshold;
  }
  return flags;
}

}  // namespace driftguard
