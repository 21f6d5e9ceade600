// SPDX-License-Identifier: Apache-2.0

#include "driftguard/ingestion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "driftguard/io_util.hpp"
#include "driftguard/rng.hpp"

namespace driftguard {

using nlohmann::json;

namespace {

std::string trimmed(std::string_view s) {
  const auto* ws = " \t\r\n\f\v";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return "";
  const auto end = s.find_last_not_of(ws);
  return std::string(s.substr(begin, end - begin + 1));
}

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// round-half-to-even
std::size_t banker_round(double x) {
  const double floor = std::floor(x);
  const double frac = x - floor;
  if (frac > 0.5) return static_cast<std::size_t>(floor) + 1;
  if (frac < 0.5) return static_cast<std::size_t>(floor);
  const auto f = static_cast<std::size_t>(floor);
  return f % 2 == 0 ? f : f + 1;
}

// Per-group seeded selection of k elements out of n, by shuffled index.
std::vector<std::size_t> pick_indices(std::size_t n, std::size_t k, Rng rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

// Stratified selection: per category round-half-even of fraction * n_c,
// then +-1 largest-remainder corrections so the overall count equals
// round(fraction * n).
std::map<CategoryLabel, std::size_t> stratified_counts(
    const std::map<CategoryLabel, std::size_t>& group_sizes, double fraction,
    std::size_t total) {
  std::map<CategoryLabel, std::size_t> take;
  std::vector<std::pair<double, CategoryLabel>> residuals;  // target - taken
  std::size_t taken_total = 0;
  for (const auto& [label, n] : group_sizes) {
    const double target = fraction * static_cast<double>(n);
    std::size_t k = std::min(banker_round(target), n);
    take[label] = k;
    taken_total += k;
    residuals.emplace_back(target - static_cast<double>(k), label);
  }
  const auto want_total = banker_round(fraction * static_cast<double>(total));
  // Categories with the largest shortfall gain a pair; largest excess
  // loses one. Ties resolve in category declaration order.
  std::stable_sort(residuals.begin(), residuals.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t guard = 0;
  while (taken_total < want_total && guard < residuals.size()) {
    const CategoryLabel label = residuals[guard++].second;
    if (take[label] < group_sizes.at(label)) {
      ++take[label];
      ++taken_total;
    }
  }
  guard = residuals.size();
  while (taken_total > want_total && guard > 0) {
    const CategoryLabel label = residuals[--guard].second;
    if (take[label] > 0) {
      --take[label];
      --taken_total;
    }
  }
  return take;
}

PairDataset select_stratified(const PairDataset& dataset, double fraction,
                              std::uint64_t seed, std::uint64_t stream_salt,
                              std::vector<PromptPair>* rejected) {
  // Group indices by category, preserving input order.
  std::map<CategoryLabel, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    groups[dataset.pairs[i].category].push_back(i);
  }
  std::map<CategoryLabel, std::size_t> sizes;
  for (const auto& [label, idx] : groups) sizes[label] = idx.size();
  const auto take = stratified_counts(sizes, fraction, dataset.pairs.size());

  std::unordered_set<std::size_t> chosen;
  for (const auto& [label, indices] : groups) {
    const auto stream =
        stream_salt * 1000 + static_cast<std::uint64_t>(label);
    const auto picked =
        pick_indices(indices.size(), take.at(label), Rng::with_stream(seed, stream));
    for (std::size_t p : picked) chosen.insert(indices[p]);
  }

  std::vector<PromptPair> selected;
  selected.reserve(chosen.size());
  for (std::size_t i = 0; i < dataset.pairs.size(); ++i) {
    if (chosen.count(i)) {
      selected.push_back(dataset.pairs[i]);
    } else if (rejected) {
      rejected->push_back(dataset.pairs[i]);
    }
  }
  return make_dataset(std::move(selected));
}

}  // namespace

PairDataset make_dataset(std::vector<PromptPair> pairs) {
  PairDataset dataset;
  std::unordered_set<std::string> seen;
  seen.reserve(pairs.size());
  for (const PromptPair& pair : pairs) {
    pair.validate();
    if (!seen.insert(pair.id).second) {
      throw ValidationError("duplicate pair id: \"" + pair.id + "\"");
    }
    ++dataset.category_counts[pair.category];
  }
  dataset.pairs = std::move(pairs);
  return dataset;
}

PairDataset load_pairs(const std::filesystem::path& path) {
  std::vector<PromptPair> pairs;
  for_each_line(path, [&](std::size_t line_no, const std::string& line) {
    if (trimmed(line).empty()) return;  // ignore blank lines
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
    PromptPair pair;
    for (const char* key : {"id", "prompt_a", "prompt_b", "category"}) {
      if (!doc.contains(key)) throw fail(std::string("missing \"") + key + "\"");
      if (!doc[key].is_string()) throw fail(std::string("\"") + key + "\" must be a string");
    }
    pair.id = doc["id"].get<std::string>();
    pair.prompt_a = doc["prompt_a"].get<std::string>();
    pair.prompt_b = doc["prompt_b"].get<std::string>();
    try {
      pair.category = parse_category(doc["category"].get<std::string>());
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
    if (doc.contains("similarity_label") && !doc["similarity_label"].is_null()) {
      if (!doc["similarity_label"].is_number_integer()) {
        throw fail("\"similarity_label\" must be 0 or 1");
      }
      pair.similarity_label = doc["similarity_label"].get<int>();
    }
    try {
      pair.validate();
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
    pairs.push_back(std::move(pair));
  });
  return make_dataset(std::move(pairs));
}

void save_pairs(const PairDataset& dataset, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const PromptPair& pair : dataset.pairs) {
    json doc{{"id", pair.id},
             {"prompt_a", pair.prompt_a},
             {"prompt_b", pair.prompt_b},
             {"category", std::string(to_string(pair.category))}};
    if (pair.similarity_label) doc["similarity_label"] = *pair.similarity_label;
    out << doc.dump() << '\n';
  }
  atomic_write_file(path, out.str());
}

PairDataset language_filter(const PairDataset& dataset, const PairPredicate& keep) {
  if (!keep) return dataset;
  std::vector<PromptPair> kept;
  for (const PromptPair& pair : dataset.pairs) {
    if (keep(pair)) kept.push_back(pair);
  }
  return make_dataset(std::move(kept));
}

PairDataset dedup(const PairDataset& dataset) {
  std::vector<PromptPair> kept;
  std::unordered_set<std::string> seen;
  for (const PromptPair& pair : dataset.pairs) {
    if (seen.insert(trimmed(pair.prompt_a)).second) kept.push_back(pair);
  }
  return make_dataset(std::move(kept));
}

PairDataset keyword_filter(const PairDataset& dataset, std::string_view keyword) {
  if (keyword.empty()) throw ValidationError("keyword_filter: keyword must be nonempty");
  const std::string needle = lowered(keyword);
  std::vector<PromptPair> kept;
  for (const PromptPair& pair : dataset.pairs) {
    if (lowered(pair.prompt_a).find(needle) != std::string::npos) kept.push_back(pair);
  }
  return make_dataset(std::move(kept));
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("train_fraction must lie in (0, 1)");
  }
  if (!(finetune_fraction > 0.0 && finetune_fraction < 1.0)) {
    throw ValidationError("finetune_fraction must lie in (0, 1)");
  }
}

SplitResult stratified_split(const PairDataset& dataset, const SplitSpec& spec) {
  spec.validate();
  for (const auto& [label, count] : dataset.category_counts) {
    if (count < 2) {
      throw ValidationError("stratified_split: category " +
                            std::string(to_string(label)) + " has only " +
                            std::to_string(count) + " pair(s); need at least 2");
    }
  }
  SplitResult result;
  std::vector<PromptPair> rejected;
  result.train = select_stratified(dataset, spec.train_fraction, spec.seed,
                                   /*stream_salt=*/1, &rejected);
  result.test = make_dataset(std::move(rejected));
  return result;
}

PairDataset finetune_subsample(const PairDataset& train, const SplitSpec& spec) {
  spec.validate();
  if (train.pairs.empty()) throw ValidationError("finetune_subsample: empty train set");
  PairDataset subset = select_stratified(train, spec.finetune_fraction, spec.seed,
                                         /*stream_salt=*/2, nullptr);
  for (PromptPair& pair : subset.pairs) {
    pair.similarity_label = pair.category == CategoryLabel::clean ? 1 : 0;
  }
  return subset;
}

void SynthConfig::validate() const {
  if (n_clean + n_injected == 0) throw ValidationError("synth: no pairs requested");
  if (dimension < 2) throw ValidationError("synth: dimension must be >= 2");
  for (double angle : {clean_angle_deg, injected_angle_deg}) {
    if (!(angle >= 0.0 && angle <= 180.0)) {
      throw ValidationError("synth: angles must lie in [0, 180] degrees");
    }
  }
  if (noise_sd_deg < 0.0) throw ValidationError("synth: noise_sd_deg must be >= 0");
}

SynthResult synth_pairs(const SynthConfig& config) {
  config.validate();
  constexpr double kDegToRad = M_PI / 180.0;
  constexpr std::array<CategoryLabel, 5> kInjectedCategories = {
      CategoryLabel::encoding_manipulation, CategoryLabel::jailbreak,
      CategoryLabel::prompt_confusion, CategoryLabel::system_leak,
      CategoryLabel::task_override};

  Rng rng = Rng::with_stream(config.seed, /*stream=*/11);
  SynthResult result;
  result.embeddings.set_encoder_id("synthetic-rotation-v1/dim" +
                                   std::to_string(config.dimension));

  auto random_unit = [&](Rng& r) {
    EmbeddingVector v;
    v.values.resize(config.dimension);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& x : v.values) {
        x = r.normal();
        norm += x * x;
      }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    for (auto& x : v.values) x /= norm;
    return v;
  };

  auto rotate_by = [&](const EmbeddingVector& u, double theta_rad, Rng& r) {
    // Unit direction orthogonal to u spans the rotation plane.
    EmbeddingVector w;
    double norm = 0.0;
    do {
      w = random_unit(r);
      double proj = 0.0;
      for (std::size_t i = 0; i < u.values.size(); ++i) proj += w.values[i] * u.values[i];
      norm = 0.0;
      for (std::size_t i = 0; i < u.values.size(); ++i) {
        w.values[i] -= proj * u.values[i];
        norm += w.values[i] * w.values[i];
      }
    } while (norm < 1e-12);
    norm = std::sqrt(norm);
    const double c = std::cos(theta_rad);
    const double s = std::sin(theta_rad);
    EmbeddingVector v;
    v.values.resize(u.values.size());
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      v.values[i] = c * u.values[i] + s * (w.values[i] / norm);
    }
    return v;
  };

  std::vector<PromptPair> pairs;
  pairs.reserve(config.n_clean + config.n_injected);
  char id_buf[40];

  auto emit = [&](const std::string& id, CategoryLabel category, double angle_deg,
                  const std::string& prompt_a, const std::string& prompt_b) {
    const double theta =
        (angle_deg + rng.normal(0.0, config.noise_sd_deg)) * kDegToRad;
    const EmbeddingVector reference = random_unit(rng);
    const EmbeddingVector candidate = rotate_by(reference, theta, rng);
    result.embeddings.insert(id, PairSide::a, candidate);
    result.embeddings.insert(id, PairSide::b, reference);
    PromptPair pair;
    pair.id = id;
    pair.prompt_a = prompt_a;
    pair.prompt_b = prompt_b;
    pair.category = category;
    pair.similarity_label = category == CategoryLabel::clean ? 1 : 0;
    pairs.push_back(std::move(pair));
  };

  for (std::size_t i = 0; i < config.n_clean; ++i) {
    std::snprintf(id_buf, sizeof(id_buf), "synth-clean-%06zu", i);
    emit(id_buf, CategoryLabel::clean, config.clean_angle_deg,
         "synthetic clean candidate " + std::to_string(i),
         "synthetic clean reference " + std::to_string(i));
  }
  for (std::size_t i = 0; i < config.n_injected; ++i) {
    std::snprintf(id_buf, sizeof(id_buf), "synth-inj-%06zu", i);
    const CategoryLabel category = kInjectedCategories[i % kInjectedCategories.size()];
    emit(id_buf, category, config.injected_angle_deg,
         "synthetic injected candidate " + std::to_string(i) + " (" +
             std::string(to_string(category)) + ")",
         "synthetic clean reference for injected " + std::to_string(i));
  }
  result.pairs = make_dataset(std::move(pairs));
  return result;
}

}  // namespace driftguard
