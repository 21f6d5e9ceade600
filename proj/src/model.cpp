// SPDX-License-Identifier: Apache-2.0

#include "driftguard/model.hpp"

#include <json.hpp>

#include "driftguard/io_util.hpp"

namespace driftguard {

using nlohmann::json;

namespace {

const json& require(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw SchemaError(std::string("model document missing \"") + key + "\"");
  }
  return *it;
}

double require_number(const json& doc, const char* key) {
  const json& v = require(doc, key);
  if (!v.is_number()) {
    throw SchemaError(std::string("model field \"") + key + "\" must be a number");
  }
  return v.get<double>();
}

std::string require_string(const json& doc, const char* key) {
  const json& v = require(doc, key);
  if (!v.is_string()) {
    throw SchemaError(std::string("model field \"") + key + "\" must be a string");
  }
  return v.get<std::string>();
}

std::uint64_t require_unsigned(const json& doc, const char* key) {
  const json& v = require(doc, key);
  const bool negative = v.is_number_integer() && !v.is_number_unsigned() &&
                        v.get<std::int64_t>() < 0;
  if (!v.is_number_integer() || negative) {
    throw SchemaError(std::string("model field \"") + key +
                      "\" must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> require_number_array(const json& doc, const char* key) {
  const json& v = require(doc, key);
  if (!v.is_array()) {
    throw SchemaError(std::string("model field \"") + key + "\" must be an array");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw SchemaError(std::string("model field \"") + key +
                        "\" must contain only numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace

std::string serialize_model(const CalibratedModel& model) {
  model.validate();
  json doc;
  doc["format_version"] = model.format_version;
  doc["method"] = std::string(to_string(model.method));
  doc["threshold"] = model.threshold;
  if (model.gmm) {
    const GmmFit& g = *model.gmm;
    doc["gmm"] = json{{"w_clean", g.w_clean},
                      {"mu_clean", g.mu_clean},
                      {"sigma_clean", g.sigma_clean},
                      {"w_injected", g.w_injected},
                      {"mu_injected", g.mu_injected},
                      {"sigma_injected", g.sigma_injected},
                      {"log_likelihood", g.log_likelihood},
                      {"converged", g.converged},
                      {"iterations", g.iterations}};
  }
  if (model.kde_summary) {
    const KdeSummary& k = *model.kde_summary;
    doc["kde_summary"] =
        json{{"grid", k.grid}, {"density", k.density}, {"bandwidth", k.bandwidth}};
  }
  doc["config"] = json{{"fpr_cap", model.config.fpr_cap},
                       {"target_flag_rate", model.config.target_flag_rate},
                       {"em_max_iters", model.config.em_max_iters},
                       {"em_tol", model.config.em_tol},
                       {"kde_grid_points", model.config.kde_grid_points},
                       {"search_tol", model.config.search_tol},
                       {"seed", model.config.seed}};
  doc["predicted_clean_fpr"] = model.predicted_clean_fpr;
  doc["observed_flag_rate"] = model.observed_flag_rate;
  doc["encoder_id"] = model.encoder_id;
  doc["created_at"] = model.created_at;
  return doc.dump(2) + "\n";
}

CalibratedModel deserialize_model(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("model document must be a JSON object");

  const json& version = require(doc, "format_version");
  if (!version.is_number_integer()) {
    throw SchemaError("model field \"format_version\" must be an integer");
  }
  const int format_version = version.get<int>();
  if (format_version != kModelFormatVersion) {
    throw SchemaError("unknown format_version " + std::to_string(format_version) +
                      " (this reader understands " +
                      std::to_string(kModelFormatVersion) + ")");
  }

  CalibratedModel model;
  model.format_version = format_version;
  try {
    model.method = parse_method(require_string(doc, "method"));
  } catch (const ValidationError& e) {
    throw SchemaError(e.what());
  }
  model.threshold = require_number(doc, "threshold");

  if (doc.contains("gmm") && !doc["gmm"].is_null()) {
    const json& g = doc["gmm"];
    if (!g.is_object()) throw SchemaError("model field \"gmm\" must be an object");
    GmmFit fit;
    fit.w_clean = require_number(g, "w_clean");
    fit.mu_clean = require_number(g, "mu_clean");
    fit.sigma_clean = require_number(g, "sigma_clean");
    fit.w_injected = require_number(g, "w_injected");
    fit.mu_injected = require_number(g, "mu_injected");
    fit.sigma_injected = require_number(g, "sigma_injected");
    fit.log_likelihood = require_number(g, "log_likelihood");
    const json& conv = require(g, "converged");
    if (!conv.is_boolean()) throw SchemaError("gmm field \"converged\" must be a boolean");
    fit.converged = conv.get<bool>();
    fit.iterations = static_cast<std::uint32_t>(require_unsigned(g, "iterations"));
    model.gmm = fit;
  }
  if (doc.contains("kde_summary") && !doc["kde_summary"].is_null()) {
    const json& k = doc["kde_summary"];
    if (!k.is_object()) {
      throw SchemaError("model field \"kde_summary\" must be an object");
    }
    KdeSummary kde;
    kde.grid = require_number_array(k, "grid");
    kde.density = require_number_array(k, "density");
    kde.bandwidth = require_number(k, "bandwidth");
    model.kde_summary = kde;
  }

  const json& config = require(doc, "config");
  if (!config.is_object()) throw SchemaError("model field \"config\" must be an object");
  model.config.fpr_cap = require_number(config, "fpr_cap");
  model.config.target_flag_rate = require_number(config, "target_flag_rate");
  model.config.em_max_iters =
      static_cast<std::uint32_t>(require_unsigned(config, "em_max_iters"));
  model.config.em_tol = require_number(config, "em_tol");
  model.config.kde_grid_points =
      static_cast<std::uint32_t>(require_unsigned(config, "kde_grid_points"));
  model.config.search_tol = require_number(config, "search_tol");
  model.config.seed = require_unsigned(config, "seed");

  model.predicted_clean_fpr = require_number(doc, "predicted_clean_fpr");
  model.observed_flag_rate = require_number(doc, "observed_flag_rate");
  model.encoder_id = require_string(doc, "encoder_id");
  model.created_at = require_string(doc, "created_at");

  model.validate();
  return model;
}

CalibratedModel load_model(const std::filesystem::path& path) {
  return deserialize_model(read_file(path));
}

void save_model(const CalibratedModel& model, const std::filesystem::path& path) {
  atomic_write_file(path, serialize_model(model));
}

}  // namespace driftguard
