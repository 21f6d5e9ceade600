// SPDX-License-Identifier: Apache-2.0

#include "driftguard/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "driftguard/calibration.hpp"

namespace driftguard {

using nlohmann::json;

ConfusionCounts confusion(const std::vector<bool>& flags, const std::vector<int>& labels) {
  if (flags.size() != labels.size()) {
    throw ValidationError("confusion: " + std::to_string(flags.size()) + " flags vs " +
                          std::to_string(labels.size()) + " labels");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const int label = labels[i];
    if (label != 0 && label != 1) {
      throw ValidationError("confusion: label at index " + std::to_string(i) +
                            " must be 0 (injected) or 1 (clean)");
    }
    const bool injected = label == 0;
    if (injected) {
      flags[i] ? ++c.tp : ++c.fn;
    } else {
      flags[i] ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

double f1_score(double precision, double recall) {
  if (precision + recall == 0.0) {
    throw ValidationError("f1 undefined when precision + recall is 0");
  }
  return 2.0 * precision * recall / (precision + recall);
}

MetricsReport metrics(const ConfusionCounts& counts,
                      const std::vector<CategoryLabel>& categories,
                      const std::vector<bool>& flags) {
  if (categories.size() != flags.size()) {
    throw ValidationError("metrics: categories and flags lengths differ");
  }
  if (counts.total() != categories.size()) {
    throw ValidationError("metrics: confusion total " + std::to_string(counts.total()) +
                          " does not match " + std::to_string(categories.size()) +
                          " records");
  }

  MetricsReport report;
  for (CategoryLabel label : all_categories()) {
    report.category_counts[label] = 0;
    report.category_flagged[label] = 0;
  }
  for (std::size_t i = 0; i < categories.size(); ++i) {
    ++report.category_counts[categories[i]];
    if (flags[i]) ++report.category_flagged[categories[i]];
  }
  report.n_clean = report.category_counts[CategoryLabel::clean];
  report.n_injected = categories.size() - report.n_clean;

  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };

  report.accuracy = ratio(counts.tp + counts.tn, counts.total());
  report.precision = ratio(counts.tp, counts.tp + counts.fp);
  report.recall = ratio(counts.tp, counts.tp + counts.fn);
  if (report.precision && report.recall && *report.precision + *report.recall > 0.0) {
    report.f1 = f1_score(*report.precision, *report.recall);
  }
  for (CategoryLabel label : all_categories()) {
    report.per_category_flag_rate[label] =
        ratio(report.category_flagged[label], report.category_counts[label]);
  }
  report.clean_fpr = report.per_category_flag_rate[CategoryLabel::clean];
  return report;
}

double ci_z_value(CiLevel level) {
  switch (level) {
    case CiLevel::p90: return 1.6449;
    case CiLevel::p95: return 1.9600;
    case CiLevel::p99: return 2.5758;
  }
  throw ValidationError("unknown CiLevel value");
}

std::string_view to_string(CiLevel level) {
  switch (level) {
    case CiLevel::p90: return "0.90";
    case CiLevel::p95: return "0.95";
    case CiLevel::p99: return "0.99";
  }
  throw ValidationError("unknown CiLevel value");
}

double ConfidenceInterval::lower() const { return std::max(0.0, point - margin); }
double ConfidenceInterval::upper() const { return std::min(1.0, point + margin); }

ConfidenceInterval wald_ci(double p, std::size_t n, CiLevel level) {
  if (n == 0) throw ValidationError("wald_ci: n must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("wald_ci: p outside [0, 1]");
  ConfidenceInterval ci;
  ci.point = p;
  ci.margin = ci_z_value(level) * std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  ci.level = level;
  ci.n = n;
  return ci;
}

std::vector<SweepEntry> ablation_sweep(std::span<const double> scores,
                                       const std::vector<int>& labels,
                                       const std::vector<CategoryLabel>& categories,
                                       std::span<const double> caps,
                                       const CalibrationConfig& config) {
  if (scores.size() != labels.size() || scores.size() != categories.size()) {
    throw ValidationError("ablation_sweep: scores, labels, categories lengths differ");
  }
  for (std::size_t i = 1; i < caps.size(); ++i) {
    if (!(caps[i] > caps[i - 1])) {
      throw ValidationError("ablation_sweep: caps must be strictly increasing");
    }
  }

  std::vector<SweepEntry> entries;
  entries.reserve(caps.size());
  for (double cap : caps) {
    SweepEntry entry;
    entry.cap = cap;
    try {
      CalibrationConfig cfg = config;
      cfg.fpr_cap = cap;
      cfg.validate();
      const CalibratedModel model = calibrate(scores, cfg);
      const std::vector<bool> flags = apply_threshold(scores, model);
      entry.report = metrics(confusion(flags, labels), categories, flags);
      entry.threshold = model.threshold;
      entry.method = std::string(to_string(model.method));
    } catch (const Error& e) {
      entry.error = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::json;
  if (text == "csv") return ReportFormat::csv;
  if (text == "markdown") return ReportFormat::markdown;
  throw ValidationError("unknown report format: \"" + std::string(text) + "\"");
}

namespace {

std::string format_rate(const std::optional<double>& value) {
  if (!value) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", *value);
  return buf;
}

std::string format_rate_with_ci(const std::optional<double>& value, std::size_t n,
                                std::optional<CiLevel> ci) {
  if (!value) return "n/a";
  if (!ci || n == 0) return format_rate(value);
  const ConfidenceInterval interval = wald_ci(*value, n, *ci);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f ± %.4f", interval.point, interval.margin);
  return buf;
}

json report_to_json(const MetricsReport& r, std::optional<CiLevel> ci) {
  auto opt = [](const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
  };
  json categories = json::object();
  for (CategoryLabel label : all_categories()) {
    const auto n = r.category_counts.at(label);
    json entry{{"count", n},
               {"flagged", r.category_flagged.at(label)},
               {"flag_rate", opt(r.per_category_flag_rate.at(label))}};
    if (ci && r.per_category_flag_rate.at(label) && n > 0) {
      entry["margin"] = wald_ci(*r.per_category_flag_rate.at(label), n, *ci).margin;
    }
    categories[std::string(to_string(label))] = std::move(entry);
  }
  json doc{{"accuracy", opt(r.accuracy)},
           {"precision", opt(r.precision)},
           {"recall", opt(r.recall)},
           {"f1", opt(r.f1)},
           {"clean_fpr", opt(r.clean_fpr)},
           {"n_clean", r.n_clean},
           {"n_injected", r.n_injected},
           {"categories", std::move(categories)}};
  if (ci) doc["ci_level"] = std::string(to_string(*ci));
  return doc;
}

}  // namespace

std::string render_report(const MetricsReport& report, ReportFormat format,
                          std::optional<CiLevel> ci) {
  const std::size_t total = report.n_clean + report.n_injected;
  switch (format) {
    case ReportFormat::json:
      return report_to_json(report, ci).dump(2) + "\n";

    case ReportFormat::csv: {
      std::ostringstream out;
      out << "row,name,count,value\n";
      for (CategoryLabel label : all_categories()) {
        out << "category," << to_string(label) << ','
            << report.category_counts.at(label) << ','
            << format_rate(report.per_category_flag_rate.at(label)) << '\n';
      }
      out << "metric,accuracy," << total << ',' << format_rate(report.accuracy) << '\n';
      out << "metric,precision," << total << ',' << format_rate(report.precision) << '\n';
      out << "metric,recall," << total << ',' << format_rate(report.recall) << '\n';
      out << "metric,f1," << total << ',' << format_rate(report.f1) << '\n';
      out << "metric,clean_fpr," << report.n_clean << ','
          << format_rate(report.clean_fpr) << '\n';
      return out.str();
    }

    case ReportFormat::markdown: {
      std::ostringstream out;
      out << "## Flag rate by category\n\n";
      out << "| Category | Count | Flagged | Flag rate |\n";
      out << "|---|---|---|---|\n";
      for (CategoryLabel label : all_categories()) {
        const auto n = report.category_counts.at(label);
        out << "| " << to_string(label) << " | " << n << " | "
            << report.category_flagged.at(label) << " | "
            << format_rate_with_ci(report.per_category_flag_rate.at(label), n, ci)
            << " |\n";
      }
      out << "\n## Operating point\n\n";
      out << "| Accuracy | Precision | Recall (adv) | F1 | Clean FPR |\n";
      out << "|---|---|---|---|---|\n";
      out << "| " << format_rate_with_ci(report.accuracy, total, ci) << " | "
          << format_rate(report.precision) << " | " << format_rate(report.recall)
          << " | " << format_rate(report.f1) << " | "
          << format_rate_with_ci(report.clean_fpr, report.n_clean, ci) << " |\n";
      return out.str();
    }
  }
  throw ValidationError("unknown report format");
}

}  // namespace driftguard
