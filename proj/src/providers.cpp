// SPDX-License-Identifier: Apache-2.0

#include "driftguard/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "driftguard/io_util.hpp"

namespace driftguard {

using nlohmann::json;

namespace {

std::string store_key(const std::string& pair_id, PairSide side) {
  std::string key = pair_id;
  key.push_back('\x1f');
  key.push_back(side == PairSide::a ? 'a' : 'b');
  return key;
}

}  // namespace

void EmbeddingStore::insert(const std::string& pair_id, PairSide side,
                            EmbeddingVector vec) {
  vec.validate();
  if (dimension_ == 0) {
    dimension_ = vec.dimension();
  } else if (vec.dimension() != dimension_) {
    throw ValidationError("embedding for (" + pair_id + ", " +
                          std::string(to_string(side)) + ") has dimension " +
                          std::to_string(vec.dimension()) + ", store has " +
                          std::to_string(dimension_));
  }
  if (!entries_.emplace(store_key(pair_id, side), std::move(vec)).second) {
    throw ValidationError("duplicate embedding key (" + pair_id + ", " +
                          std::string(to_string(side)) + ")");
  }
}

const EmbeddingVector* EmbeddingStore::find(const std::string& pair_id,
                                            PairSide side) const {
  const auto it = entries_.find(store_key(pair_id, side));
  return it == entries_.end() ? nullptr : &it->second;
}

void EmbeddingStore::for_each_sorted(
    const std::function<void(const std::string&, PairSide, const EmbeddingVector&)>& fn)
    const {
  std::vector<const std::string*> keys;
  keys.reserve(entries_.size());
  for (const auto& [key, vec] : entries_) keys.push_back(&key);
  std::sort(keys.begin(), keys.end(),
            [](const std::string* a, const std::string* b) { return *a < *b; });
  for (const std::string* key : keys) {
    const auto cut = key->find('\x1f');
    const PairSide side = (*key)[cut + 1] == 'a' ? PairSide::a : PairSide::b;
    fn(key->substr(0, cut), side, entries_.at(*key));
  }
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  EmbeddingStore store;
  std::size_t dim_line = 0;  // line that established the dimension
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (line.find_first_not_of(" \t") == std::string::npos) return;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": invalid JSON: " + e.what());
    }
    auto fail = [&](const std::string& why) -> ParseError {
      return ParseError(path.string() + ":" + std::to_string(line_no) + ": " + why);
    };
    if (!doc.is_object()) throw fail("expected a JSON object");
    if (doc.value("header", false)) {
      if (line_no != 1) throw fail("header line must come first");
      if (doc.contains("encoder_id")) {
        store.set_encoder_id(doc["encoder_id"].get<std::string>());
      }
      return;
    }
    for (const char* key : {"id", "side"}) {
      if (!doc.contains(key) || !doc[key].is_string()) {
        throw fail(std::string("missing or non-string \"") + key + "\"");
      }
    }
    if (!doc.contains("vector") || !doc["vector"].is_array()) {
      throw fail("missing or non-array \"vector\"");
    }
    EmbeddingVector vec;
    vec.values.reserve(doc["vector"].size());
    for (const auto& x : doc["vector"]) {
      if (!x.is_number()) throw fail("\"vector\" must contain only numbers");
      const double v = x.get<double>();
      if (!std::isfinite(v)) throw fail("\"vector\" contains a non-finite entry");
      vec.values.push_back(v);
    }
    if (store.dimension() != 0 && vec.dimension() != store.dimension()) {
      throw fail("dimension " + std::to_string(vec.dimension()) +
                 " disagrees with dimension " + std::to_string(store.dimension()) +
                 " established at line " + std::to_string(dim_line));
    }
    PairSide side;
    try {
      side = parse_side(doc["side"].get<std::string>());
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
    try {
      store.insert(doc["id"].get<std::string>(), side, std::move(vec));
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
    if (dim_line == 0) dim_line = line_no;
  });
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ostringstream out;
  json header{{"header", true}, {"dimension", store.dimension()}};
  if (!store.encoder_id().empty()) header["encoder_id"] = store.encoder_id();
  out << header.dump() << '\n';
  store.for_each_sorted([&](const std::string& id, PairSide side,
                            const EmbeddingVector& vec) {
    out << json{{"id", id}, {"side", std::string(to_string(side))}, {"vector", vec.values}}
               .dump()
        << '\n';
  });
  atomic_write_file(path, out.str());
}

void HttpProviderConfig::validate() const {
  if (endpoint.empty()) throw ValidationError("provider endpoint must be nonempty");
  if (batch_size == 0) throw ValidationError("provider batch_size must be >= 1");
  if (timeout.count() <= 0) throw ValidationError("provider timeout must be positive");
}

namespace {

struct ParsedEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("endpoint must include a scheme: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

bool transient_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

std::chrono::milliseconds backoff_delay(std::size_t attempt) {
  constexpr double kBaseMs = 250.0;
  constexpr double kCapMs = 8000.0;
  const double raw = std::min(kCapMs, kBaseMs * std::pow(2.0, static_cast<double>(attempt)));
  static thread_local std::mt19937 jitter_rng{std::random_device{}()};
  std::uniform_real_distribution<double> jitter(0.5, 1.0);
  return std::chrono::milliseconds(static_cast<long>(raw * jitter(jitter_rng)));
}

}  // namespace

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpProviderConfig config)
    : config_(std::move(config)) {
  config_.validate();
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_one_batch(
    const std::vector<std::string>& batch, std::size_t expected_dim) {
  const ParsedEndpoint ep = parse_endpoint(config_.endpoint);
  const json body{{"model", config_.model}, {"input", batch}};
  const std::string payload = body.dump();

  std::string last_error;
  for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(backoff_delay(attempt - 1));

    httplib::Client client(ep.base);
    const auto secs =
        std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    client.set_connection_timeout(secs.count(), 0);
    client.set_read_timeout(secs.count(), 0);
    client.set_write_timeout(secs.count(), 0);
    if (!config_.auth_env.empty()) {
      if (const char* token = std::getenv(config_.auth_env.c_str())) {
        client.set_default_headers({{"Authorization", std::string("Bearer ") + token}});
      }
    }

    auto res = client.Post(ep.path, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;  // transient
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      if (transient_status(res->status)) continue;
      throw HttpError("embedding request failed permanently: " + last_error);
    }

    json doc;
    try {
      doc = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw HttpError(std::string("embedding response is not valid JSON: ") + e.what());
    }
    if (!doc.contains("data") || !doc["data"].is_array()) {
      throw HttpError("embedding response missing \"data\" array");
    }
    const json& data = doc["data"];
    if (data.size() != batch.size()) {
      throw HttpError("embedding response has " + std::to_string(data.size()) +
                      " vectors for a batch of " + std::to_string(batch.size()));
    }
    std::vector<EmbeddingVector> out;
    out.reserve(data.size());
    for (const auto& item : data) {
      const json* arr = nullptr;
      if (item.is_array()) {
        arr = &item;
      } else if (item.is_object() && item.contains("embedding") &&
                 item["embedding"].is_array()) {
        arr = &item["embedding"];
      } else {
        throw HttpError("embedding response entry has no embedding array");
      }
      EmbeddingVector vec;
      vec.values.reserve(arr->size());
      for (const auto& x : *arr) {
        if (!x.is_number()) throw HttpError("embedding entry contains a non-number");
        vec.values.push_back(x.get<double>());
      }
      vec.validate();
      if (expected_dim != 0 && vec.dimension() != expected_dim) {
        throw HttpError("embedding dimension drifted mid-run: got " +
                        std::to_string(vec.dimension()) + ", expected " +
                        std::to_string(expected_dim));
      }
      if (expected_dim == 0 && !out.empty() && vec.dimension() != out[0].dimension()) {
        throw HttpError("embedding dimensions differ within one response");
      }
      out.push_back(std::move(vec));
    }
    return out;
  }
  throw HttpError("embedding request failed after " +
                  std::to_string(config_.max_retries + 1) + " attempt(s): " + last_error);
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw ValidationError("embed: texts must be nonempty");
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  std::size_t expected_dim = 0;
  for (std::size_t start = 0; start < texts.size(); start += config_.batch_size) {
    const std::size_t count = std::min(config_.batch_size, texts.size() - start);
    const std::vector<std::string> batch(texts.begin() + static_cast<long>(start),
                                         texts.begin() + static_cast<long>(start + count));
    auto vectors = embed_one_batch(batch, expected_dim);
    if (expected_dim == 0 && !vectors.empty()) expected_dim = vectors[0].dimension();
    for (auto& v : vectors) out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> embed_texts(const HttpProviderConfig& config,
                                         const std::vector<std::string>& texts) {
  HttpEmbeddingProvider provider(config);
  return provider.embed(texts);
}

EmbedPairsResult embed_pairs(EmbeddingProvider& provider,
                             const std::vector<PromptPair>& pairs,
                             std::size_t batch_size) {
  if (batch_size == 0) throw ValidationError("embed_pairs: batch_size must be >= 1");

  struct Slot {
    const PromptPair* pair;
    PairSide side;
  };
  std::vector<Slot> slots;
  slots.reserve(pairs.size() * 2);
  for (const PromptPair& pair : pairs) {
    slots.push_back({&pair, PairSide::a});
    slots.push_back({&pair, PairSide::b});
  }

  EmbedPairsResult result;
  if (!pairs.empty()) result.store.set_encoder_id(provider.encoder_id());

  auto text_of = [](const Slot& slot) -> const std::string& {
    return slot.side == PairSide::a ? slot.pair->prompt_a : slot.pair->prompt_b;
  };
  auto keep = [&](const Slot& slot, EmbeddingVector vec) {
    try {
      result.store.insert(slot.pair->id, slot.side, std::move(vec));
    } catch (const ValidationError& e) {
      result.failures.push_back({slot.pair->id, slot.side, e.what()});
    }
  };

  for (std::size_t start = 0; start < slots.size(); start += batch_size) {
    const std::size_t count = std::min(batch_size, slots.size() - start);
    std::vector<std::string> texts;
    texts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) texts.push_back(text_of(slots[start + i]));

    bool batch_ok = false;
    try {
      auto vectors = provider.embed(texts);
      if (vectors.size() == texts.size()) {
        for (std::size_t i = 0; i < count; ++i) {
          keep(slots[start + i], std::move(vectors[i]));
        }
        batch_ok = true;
      }
    } catch (const Error&) {
      // fall through to per-text isolation
    }
    if (batch_ok) continue;

    // Retry one text at a time so a single poison text costs one entry.
    for (std::size_t i = 0; i < count; ++i) {
      const Slot& slot = slots[start + i];
      try {
        auto vectors = provider.embed({text_of(slot)});
        if (vectors.size() != 1) {
          throw HttpError("provider returned " + std::to_string(vectors.size()) +
                          " vectors for one text");
        }
        keep(slot, std::move(vectors[0]));
      } catch (const Error& e) {
        result.failures.push_back({slot.pair->id, slot.side, e.what()});
      }
    }
  }
  return result;
}

}  // namespace driftguard
