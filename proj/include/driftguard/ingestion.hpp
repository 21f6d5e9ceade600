// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string_view>
#include <vector>

#include "driftguard/providers.hpp"
#include "driftguard/types.hpp"

namespace driftguard {

struct PairDataset {
  std::vector<PromptPair> pairs;
  std::map<CategoryLabel, std::size_t> category_counts;

  std::size_t size() const { return pairs.size(); }
};

/// Build a dataset from validated pairs: recounts categories and
/// rejects duplicate ids.
PairDataset make_dataset(std::vector<PromptPair> pairs);

/// Read a JSONL pairs file, one object per line:
/// {"id", "prompt_a", "prompt_b", "category", "similarity_label"?}.
/// Every validation error names its line number.
PairDataset load_pairs(const std::filesystem::path& path);

void save_pairs(const PairDataset& dataset, const std::filesystem::path& path);

/// Keep pairs accepted by the predicate. This is the pluggable slot for
/// language identification; the default keeps everything.
using PairPredicate = std::function<bool(const PromptPair&)>;
PairDataset language_filter(const PairDataset& dataset, const PairPredicate& keep);

/// Keep the first occurrence of each whitespace-trimmed prompt_a
/// (exact match, no case folding); order otherwise preserved.
PairDataset dedup(const PairDataset& dataset);

/// Keep pairs whose prompt_a contains the keyword as a case-insensitive
/// substring (so "ecosystem" matches keyword "system").
PairDataset keyword_filter(const PairDataset& dataset, std::string_view keyword);

struct SplitSpec {
  double train_fraction = 0.70;
  double finetune_fraction = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitResult {
  PairDataset train;
  PairDataset test;
};

/// Per-category train/test partition. Each category contributes
/// round-half-even(train_fraction * n_c) pairs to train (selected by a
/// seeded shuffle), then a +-1 largest-remainder correction pins the
/// overall train count to round(train_fraction * n). Every category
/// needs at least 2 pairs. Deterministic under a fixed seed.
SplitResult stratified_split(const PairDataset& dataset, const SplitSpec& spec);

/// Stratified finetune_fraction subsample of the training split, with
/// similarity labels populated (1 iff clean) for the downstream
/// encoder fine-tuning step.
PairDataset finetune_subsample(const PairDataset& train, const SplitSpec& spec);

/// Synthetic pair/embedding generator: each pair is a random unit
/// vector and its rotation by the configured angle (plus Gaussian
/// angular noise, in degrees), so the expected drift is 1 - cos(angle).
struct SynthConfig {
  std::size_t n_clean = 0;
  std::size_t n_injected = 0;
  std::size_t dimension = 8;
  double clean_angle_deg = 0.0;
  double injected_angle_deg = 60.0;
  double noise_sd_deg = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthResult {
  PairDataset pairs;
  EmbeddingStore embeddings;
};

/// Injected pairs cycle round-robin through the five attack categories;
/// clean pairs carry similarity label 1, injected 0. Bit-identical
/// output for a fixed seed.
SynthResult synth_pairs(const SynthConfig& config);

}  // namespace driftguard
