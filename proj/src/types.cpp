// SPDX-License-Identifier: Apache-2.0

#include "driftguard/types.hpp"

#include <cmath>
#include <sstream>

#include "driftguard/io_util.hpp"

namespace driftguard {

std::string_view to_string(CategoryLabel label) {
  switch (label) {
    case CategoryLabel::clean: return "clean";
    case CategoryLabel::encoding_manipulation: return "encoding_manipulation";
    case CategoryLabel::jailbreak: return "jailbreak";
    case CategoryLabel::prompt_confusion: return "prompt_confusion";
    case CategoryLabel::system_leak: return "system_leak";
    case CategoryLabel::task_override: return "task_override";
  }
  throw ValidationError("unknown CategoryLabel value");
}

CategoryLabel parse_category(std::string_view text) {
  for (CategoryLabel label : all_categories()) {
    if (text == to_string(label)) return label;
  }
  throw ValidationError("unknown category: \"" + std::string(text) + "\"");
}

std::string_view to_string(PairSide side) {
  return side == PairSide::a ? "a" : "b";
}

PairSide parse_side(std::string_view text) {
  if (text == "a") return PairSide::a;
  if (text == "b") return PairSide::b;
  throw ValidationError("unknown pair side: \"" + std::string(text) + "\"");
}

void PromptPair::validate() const {
  if (id.empty()) throw ValidationError("pair id must be nonempty");
  if (prompt_a.empty()) throw ValidationError("pair " + id + ": prompt_a is empty");
  if (prompt_b.empty()) throw ValidationError("pair " + id + ": prompt_b is empty");
  if (similarity_label) {
    if (*similarity_label != 0 && *similarity_label != 1) {
      throw ValidationError("pair " + id + ": similarity_label must be 0 or 1");
    }
    const int expected = category == CategoryLabel::clean ? 1 : 0;
    if (*similarity_label != expected) {
      throw ValidationError("pair " + id + ": similarity_label " +
                            std::to_string(*similarity_label) +
                            " inconsistent with category " +
                            std::string(to_string(category)));
    }
  }
}

void EmbeddingVector::validate() const {
  if (values.empty()) throw ValidationError("embedding dimension must be >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("embedding contains a non-finite entry");
  }
}

void DriftRecord::validate() const {
  if (pair_id.empty()) throw ValidationError("drift record pair_id must be nonempty");
  if (!std::isfinite(drift) || drift < 0.0 || drift > 2.0) {
    throw ValidationError("drift record " + pair_id + ": drift " +
                          std::to_string(drift) + " outside [0, 2]");
  }
  if (similarity_label && *similarity_label != 0 && *similarity_label != 1) {
    throw ValidationError("drift record " + pair_id + ": similarity_label must be 0 or 1");
  }
}

void CalibrationConfig::validate() const {
  if (!(fpr_cap > 0.0 && fpr_cap < 1.0)) {
    throw ValidationError("fpr_cap must lie in (0, 1), got " + std::to_string(fpr_cap));
  }
  if (!(target_flag_rate > 0.0 && target_flag_rate < 1.0)) {
    throw ValidationError("target_flag_rate must lie in (0, 1), got " +
                          std::to_string(target_flag_rate));
  }
  if (!(fpr_cap < target_flag_rate)) {
    throw ValidationError("fpr_cap must be below target_flag_rate");
  }
  if (em_max_iters == 0) throw ValidationError("em_max_iters must be positive");
  if (!(em_tol > 0.0)) throw ValidationError("em_tol must be positive");
  if (kde_grid_points < 2) throw ValidationError("kde_grid_points must be >= 2");
  if (!(search_tol > 0.0)) throw ValidationError("search_tol must be positive");
}

void GmmFit::validate() const {
  auto check_weight = [](double w, const char* name) {
    if (!(w > 0.0 && w < 1.0)) {
      throw ValidationError(std::string(name) + " must lie in (0, 1)");
    }
  };
  check_weight(w_clean, "w_clean");
  check_weight(w_injected, "w_injected");
  if (std::abs(w_clean + w_injected - 1.0) > 1e-12) {
    throw ValidationError("mixture weights must sum to 1");
  }
  if (!(mu_clean <= mu_injected)) {
    throw ValidationError("components must be ordered with mu_clean <= mu_injected");
  }
  if (sigma_clean < kSigmaFloor || sigma_injected < kSigmaFloor) {
    throw ValidationError("component sigma below the variance floor");
  }
  for (double v : {mu_clean, mu_injected, sigma_clean, sigma_injected, log_likelihood}) {
    if (!std::isfinite(v)) throw ValidationError("GMM fit contains a non-finite value");
  }
}

void KdeSummary::validate() const {
  if (grid.size() < 2) throw ValidationError("kde_summary grid needs >= 2 points");
  if (grid.size() != density.size()) {
    throw ValidationError("kde_summary grid and density lengths differ");
  }
  if (!(bandwidth > 0.0)) throw ValidationError("kde_summary bandwidth must be positive");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(density[i])) {
      throw ValidationError("kde_summary contains a non-finite value");
    }
    if (density[i] < 0.0) throw ValidationError("kde_summary density must be nonnegative");
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ValidationError("kde_summary grid must be strictly increasing");
    }
  }
}

std::string_view to_string(ThresholdMethod method) {
  switch (method) {
    case ThresholdMethod::gmm: return "gmm";
    case ThresholdMethod::kde: return "kde";
    case ThresholdMethod::quantile: return "quantile";
  }
  throw ValidationError("unknown ThresholdMethod value");
}

ThresholdMethod parse_method(std::string_view text) {
  if (text == "gmm") return ThresholdMethod::gmm;
  if (text == "kde") return ThresholdMethod::kde;
  if (text == "quantile") return ThresholdMethod::quantile;
  throw ValidationError("unknown threshold method: \"" + std::string(text) + "\"");
}

void CalibratedModel::validate() const {
  if (format_version != kModelFormatVersion) {
    throw ValidationError("unsupported model format_version " +
                          std::to_string(format_version));
  }
  config.validate();
  if (!std::isfinite(threshold)) throw ValidationError("model threshold must be finite");
  if (method == ThresholdMethod::gmm && !gmm) {
    throw ValidationError("method gmm requires a gmm fit in the model");
  }
  if (method == ThresholdMethod::kde && !kde_summary) {
    throw ValidationError("method kde requires a kde_summary in the model");
  }
  if (gmm) gmm->validate();
  if (kde_summary) kde_summary->validate();
  if (!(predicted_clean_fpr >= 0.0 && predicted_clean_fpr <= 1.0)) {
    throw ValidationError("predicted_clean_fpr outside [0, 1]");
  }
  if (predicted_clean_fpr > config.fpr_cap + 1e-12) {
    throw ValidationError("predicted_clean_fpr " + std::to_string(predicted_clean_fpr) +
                          " exceeds fpr_cap " + std::to_string(config.fpr_cap));
  }
  if (!(observed_flag_rate >= 0.0 && observed_flag_rate <= 1.0)) {
    throw ValidationError("observed_flag_rate outside [0, 1]");
  }
  if (!looks_like_rfc3339(created_at)) {
    throw ValidationError("created_at is not an RFC 3339 timestamp: \"" + created_at + "\"");
  }
}

}  // namespace driftguard
