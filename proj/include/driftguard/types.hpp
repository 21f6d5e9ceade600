// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "driftguard/errors.hpp"

namespace driftguard {

// Variance floor applied in the GMM M-step and when re-estimating a
// clean component from a sub-population (drift units squared).
inline constexpr double kVarianceFloor = 1e-8;
// Corresponding standard-deviation floor.
inline constexpr double kSigmaFloor = 1e-4;

/// Attack categories, plus "clean". Declaration order matches the
/// report column order (C, EM, J, PC, SL, TO).
enum class CategoryLabel {
  clean,
  encoding_manipulation,
  jailbreak,
  prompt_confusion,
  system_leak,
  task_override,
};

inline constexpr std::size_t kCategoryCount = 6;

constexpr std::array<CategoryLabel, kCategoryCount> all_categories() {
  return {CategoryLabel::clean,
          CategoryLabel::encoding_manipulation,
          CategoryLabel::jailbreak,
          CategoryLabel::prompt_confusion,
          CategoryLabel::system_leak,
          CategoryLabel::task_override};
}

/// Canonical lower_snake_case wire spelling.
std::string_view to_string(CategoryLabel label);

/// Inverse of to_string. Throws ValidationError for any other spelling.
CategoryLabel parse_category(std::string_view text);

/// Which side of a prompt pair an embedding belongs to.
enum class PairSide { a, b };

std::string_view to_string(PairSide side);
PairSide parse_side(std::string_view text);

/// A candidate text and its clean reference counterpart; the unit of
/// detection.
struct PromptPair {
  std::string id;
  std::string prompt_a;  // candidate, possibly injected
  std::string prompt_b;  // clean reference
  CategoryLabel category = CategoryLabel::clean;
  // 1 = similar (clean-clean pair), 0 = not similar (injected-clean pair)
  std::optional<int> similarity_label;

  void validate() const;

  bool operator==(const PromptPair&) const = default;
};

/// Fixed-dimension real vector produced by an external encoder.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }

  // all entries finite, dimension >= 1
  void validate() const;

  bool operator==(const EmbeddingVector&) const = default;
};

/// One scored pair: input to calibration and evaluation.
struct DriftRecord {
  std::string pair_id;
  double drift = 0.0;  // in [0, 2]
  CategoryLabel category = CategoryLabel::clean;
  std::optional<int> similarity_label;

  void validate() const;

  bool operator==(const DriftRecord&) const = default;
};

/// Knobs for the threshold calibration procedure. Defaults mirror the
/// standard operating point (3% clean false-positive cap, 50% target
/// flag rate).
struct CalibrationConfig {
  double fpr_cap = 0.03;
  double target_flag_rate = 0.50;
  std::uint32_t em_max_iters = 200;
  // Per-sample log-likelihood improvement tolerance; EM stops when the
  // total improvement drops below em_tol * n.
  double em_tol = 1e-8;
  std::uint32_t kde_grid_points = 512;
  double search_tol = 0.005;
  std::uint64_t seed = 0;

  void validate() const;

  bool operator==(const CalibrationConfig&) const = default;
};

/// Two-component 1-D Gaussian mixture fit. Components are ordered so
/// the clean component has the lower mean.
struct GmmFit {
  double w_clean = 0.0;
  double mu_clean = 0.0;
  double sigma_clean = 0.0;
  double w_injected = 0.0;
  double mu_injected = 0.0;
  double sigma_injected = 0.0;
  double log_likelihood = 0.0;
  bool converged = false;
  std::uint32_t iterations = 0;

  void validate() const;

  bool operator==(const GmmFit&) const = default;
};

/// Persisted form of a fitted KDE: bounded size independent of the
/// number of training scores.
struct KdeSummary {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;

  void validate() const;

  bool operator==(const KdeSummary&) const = default;
};

/// Provenance of a calibrated threshold: GMM density intersection,
/// KDE valley, or the empirical-quantile fallback when neither
/// produced a usable structure.
enum class ThresholdMethod { gmm, kde, quantile };

std::string_view to_string(ThresholdMethod method);
ThresholdMethod parse_method(std::string_view text);

inline constexpr int kModelFormatVersion = 1;

/// The detector artifact: a threshold plus how it was chosen, reusable
/// by the CLI and the HTTP service. Immutable after construction.
struct CalibratedModel {
  double threshold = 0.0;
  ThresholdMethod method = ThresholdMethod::gmm;
  std::optional<GmmFit> gmm;
  std::optional<KdeSummary> kde_summary;
  CalibrationConfig config;
  double predicted_clean_fpr = 0.0;
  double observed_flag_rate = 0.0;
  std::string encoder_id;
  std::string created_at;  // RFC 3339
  int format_version = kModelFormatVersion;

  void validate() const;

  bool operator==(const CalibratedModel&) const = default;
};

}  // namespace driftguard
