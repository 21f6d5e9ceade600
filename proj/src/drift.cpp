// SPDX-License-Identifier: Apache-2.0

#include "driftguard/drift.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace driftguard {

double cosine_drift(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw ValidationError("dimension mismatch: " + std::to_string(a.dimension()) +
                          " vs " + std::to_string(b.dimension()));
  }
  if (a.dimension() == 0) throw ValidationError("empty embedding vector");

  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double x = a.values[i];
    const double y = b.values[i];
    dot += x * y;
    norm_a += x * x;
    norm_b += y * y;
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw ValidationError("zero-norm embedding vector");
  }
  // Rounding can push |cos| a hair past 1; clamp before subtracting so
  // the result stays in [0, 2].
  const double cosine =
      std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), -1.0, 1.0);
  return 1.0 - cosine;
}

DriftBatchResult score_pairs(const std::vector<PromptPair>& pairs,
                             const EmbeddingLookup& lookup) {
  DriftBatchResult result;
  result.records.reserve(pairs.size());
  for (const PromptPair& pair : pairs) {
    const EmbeddingVector* va = lookup(pair.id, PairSide::a);
    const EmbeddingVector* vb = lookup(pair.id, PairSide::b);
    if (va == nullptr || vb == nullptr) {
      result.skipped.push_back({pair.id, "missing_embedding"});
      continue;
    }
    if (va->dimension() != vb->dimension()) {
      result.skipped.push_back({pair.id, "dimension_mismatch"});
      continue;
    }
    double drift = 0.0;
    try {
      drift = cosine_drift(*va, *vb);
    } catch (const ValidationError&) {
      result.skipped.push_back({pair.id, "zero_norm"});
      continue;
    }
    result.records.push_back(
        DriftRecord{pair.id, drift, pair.category, pair.similarity_label});
  }
  return result;
}

}  // namespace driftguard
