// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "driftguard/types.hpp"

namespace driftguard {

/// Embedding drift score: 1 - cos(a, b), with the cosine clamped to
/// [-1, 1] before subtraction so the result is always in [0, 2].
/// Accumulation is in double precision. Throws ValidationError on
/// dimension mismatch or a zero-norm input.
double cosine_drift(const EmbeddingVector& a, const EmbeddingVector& b);

struct SkippedPair {
  std::string pair_id;
  std::string reason;

  bool operator==(const SkippedPair&) const = default;
};

/// records and skipped together partition the input pair ids.
struct DriftBatchResult {
  std::vector<DriftRecord> records;
  std::vector<SkippedPair> skipped;
};

/// Resolves an embedding for one side of a pair; nullptr when absent.
using EmbeddingLookup =
    std::function<const EmbeddingVector*(const std::string& pair_id, PairSide side)>;

/// Score a batch of pairs. Per-pair failures (missing embedding,
/// dimension mismatch, zero norm) are collected into skipped with a
/// reason, never thrown. Output order follows input order.
DriftBatchResult score_pairs(const std::vector<PromptPair>& pairs,
                             const EmbeddingLookup& lookup);

}  // namespace driftguard
