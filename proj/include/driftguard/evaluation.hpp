// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftguard/types.hpp"

namespace driftguard {

/// Contingency counts with "injected and flagged" as the true positive.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }

  bool operator==(const ConfusionCounts&) const = default;
};

/// Count outcomes. labels use the pair-labeling convention: 1 = clean
/// pair, 0 = injected pair. Throws ValidationError on length mismatch
/// or a label outside {0, 1}.
ConfusionCounts confusion(const std::vector<bool>& flags, const std::vector<int>& labels);

/// Harmonic mean of precision and recall.
double f1_score(double precision, double recall);

/// Operating-point metrics plus per-category flag rates. Metrics whose
/// denominator is zero are absent (rendered "n/a"), never silently 0.
struct MetricsReport {
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> clean_fpr;
  std::map<CategoryLabel, std::optional<double>> per_category_flag_rate;
  std::map<CategoryLabel, std::size_t> category_counts;
  std::map<CategoryLabel, std::size_t> category_flagged;
  std::size_t n_clean = 0;
  std::size_t n_injected = 0;
};

/// Derive the report from counts plus per-record categories and flags.
/// The two views must agree: categories/flags recount to the same
/// confusion table (clean category = clean label).
MetricsReport metrics(const ConfusionCounts& counts,
                      const std::vector<CategoryLabel>& categories,
                      const std::vector<bool>& flags);

enum class CiLevel { p90, p95, p99 };

double ci_z_value(CiLevel level);
std::string_view to_string(CiLevel level);

/// Binomial proportion interval, normal approximation:
/// margin = z * sqrt(p (1-p) / n).
struct ConfidenceInterval {
  double point = 0.0;
  double margin = 0.0;
  CiLevel level = CiLevel::p95;
  std::size_t n = 1;

  // interval endpoints clipped to [0, 1] for rendering
  double lower() const;
  double upper() const;
};

ConfidenceInterval wald_ci(double p, std::size_t n, CiLevel level);

/// One calibrate+evaluate cycle of a cap sweep. error is set (and
/// report absent) when calibration failed for that cap.
struct SweepEntry {
  double cap = 0.0;
  std::optional<MetricsReport> report;
  std::optional<double> threshold;
  std::string method;
  std::string error;
};

/// Re-calibrate and evaluate once per cap (caps strictly increasing),
/// sharing scores, labels, and config. Per-cap failures are recorded in
/// the entry and the sweep continues.
std::vector<SweepEntry> ablation_sweep(std::span<const double> scores,
                                       const std::vector<int>& labels,
                                       const std::vector<CategoryLabel>& categories,
                                       std::span<const double> caps,
                                       const CalibrationConfig& config);

enum class ReportFormat { json, csv, markdown };

ReportFormat parse_report_format(std::string_view text);

/// Render a report. markdown mirrors the per-category table (rows in
/// C, EM, J, PC, SL, TO order) followed by the operating-point table;
/// csv emits one row per category and per metric; json is lossless.
/// When ci is set, Wald margins at that level accompany every rate.
std::string render_report(const MetricsReport& report, ReportFormat format,
                          std::optional<CiLevel> ci = std::nullopt);

}  // namespace driftguard
