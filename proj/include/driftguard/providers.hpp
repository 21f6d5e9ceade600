// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "driftguard/types.hpp"

namespace driftguard {

/// Map from (pair id, side) to embedding, with a uniform dimension.
/// Immutable after loading and safe to share across threads.
class EmbeddingStore {
 public:
  /// Throws ValidationError on a duplicate key or a dimension that
  /// disagrees with vectors already present.
  void insert(const std::string& pair_id, PairSide side, EmbeddingVector vec);

  const EmbeddingVector* find(const std::string& pair_id, PairSide side) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t dimension() const { return dimension_; }

  const std::string& encoder_id() const { return encoder_id_; }
  void set_encoder_id(std::string id) { encoder_id_ = std::move(id); }

  /// Visit entries in sorted key order (deterministic for persistence).
  void for_each_sorted(
      const std::function<void(const std::string& pair_id, PairSide side,
                               const EmbeddingVector&)>& fn) const;

 private:
  std::unordered_map<std::string, EmbeddingVector> entries_;
  std::size_t dimension_ = 0;
  std::string encoder_id_;
};

/// Read a JSONL embeddings file: an optional first header line
/// {"header": true, "dimension": d, "encoder_id": s} followed by
/// {"id", "side", "vector"} lines. Errors cite line numbers.
EmbeddingStore load_embeddings(const std::filesystem::path& path);

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);

/// HTTP embeddings endpoint configuration. The bearer token is read
/// from the named environment variable, never from files.
struct HttpProviderConfig {
  std::string endpoint;  // e.g. http://host:port/v1/embeddings
  std::string model;
  std::size_t batch_size = 64;
  std::size_t max_retries = 2;
  std::chrono::milliseconds timeout{10000};
  std::string auth_env;  // empty = no Authorization header

  void validate() const;
};

/// Source of embedding vectors for raw texts. Must be safe for
/// concurrent use.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One vector per input text, in input order. Throws on failure.
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;

  virtual std::string encoder_id() const = 0;
};

/// Client for the conventional embeddings wire shape: POST with
/// {"model", "input": [...]}, response carrying an ordered data array.
/// Inputs are partitioned into batches of batch_size; transient
/// failures (connect errors, timeouts, 429, 5xx) retry with exponential
/// backoff (base 250 ms, cap 8 s, jittered) up to max_retries.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(HttpProviderConfig config);

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  std::string encoder_id() const override { return config_.model; }

  const HttpProviderConfig& config() const { return config_; }

 private:
  std::vector<EmbeddingVector> embed_one_batch(const std::vector<std::string>& batch,
                                               std::size_t expected_dim);

  HttpProviderConfig config_;
};

/// Free-function form of the batched embed call.
std::vector<EmbeddingVector> embed_texts(const HttpProviderConfig& config,
                                         const std::vector<std::string>& texts);

/// Adapter turning any callable into a provider; used by tests and by
/// in-process pipelines.
class FunctionProvider : public EmbeddingProvider {
 public:
  using Fn = std::function<EmbeddingVector(const std::string&)>;
  FunctionProvider(Fn fn, std::string id) : fn_(std::move(fn)), id_(std::move(id)) {}

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(fn_(t));
    return out;
  }

  std::string encoder_id() const override { return id_; }

 private:
  Fn fn_;
  std::string id_;
};

struct EmbedFailure {
  std::string pair_id;
  PairSide side = PairSide::a;
  std::string reason;
};

struct EmbedPairsResult {
  EmbeddingStore store;
  std::vector<EmbedFailure> failures;
};

/// Embed both sides of every pair. Batch failures degrade to per-text
/// calls so one bad text costs one store entry, not the whole batch;
/// failures are collected, never thrown.
EmbedPairsResult embed_pairs(EmbeddingProvider& provider,
                             const std::vector<PromptPair>& pairs,
                             std::size_t batch_size = 64);

}  // namespace driftguard
