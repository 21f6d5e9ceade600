// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "driftguard/providers.hpp"
#include "driftguard/types.hpp"

namespace driftguard {

/// Request handling for the detection endpoints, independent of the
/// HTTP plumbing so it can be tested directly. The model is immutable
/// for the service lifetime; recalibration means restarting with a new
/// artifact.
class DetectionService {
 public:
  DetectionService(CalibratedModel model, std::shared_ptr<EmbeddingProvider> provider);

  struct Reply {
    int status = 200;
    nlohmann::json body;
  };

  /// POST /v1/detect: one pair, either {"prompt", "reference"} or
  /// {"vector_a", "vector_b"} (exactly one form).
  Reply detect(const nlohmann::json& request) const;

  /// POST /v1/score: {"pairs": [...]} -> {"results": [...]}, order
  /// preserved; text-form pairs are embedded in one batched call.
  Reply score(const nlohmann::json& request) const;

  /// GET /healthz payload.
  nlohmann::json health() const;

  const CalibratedModel& model() const { return model_; }

 private:
  nlohmann::json detect_one(const nlohmann::json& request,
                            const EmbeddingVector* va,
                            const EmbeddingVector* vb) const;

  CalibratedModel model_;
  std::shared_ptr<EmbeddingProvider> provider_;
};

/// HTTP front end. Constructed with a null service it answers 503
/// everywhere (the not-yet-loaded state); normal startup loads the
/// model first and never exposes that window.
class DetectionServer {
 public:
  explicit DetectionServer(std::shared_ptr<const DetectionService> service);
  ~DetectionServer();

  DetectionServer(const DetectionServer&) = delete;
  DetectionServer& operator=(const DetectionServer&) = delete;

  /// Bind to an OS-assigned port; returns the port (or -1 on failure).
  int bind_any(const std::string& host);
  bool bind(const std::string& host, int port);

  /// Blocking accept loop (after a successful bind).
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Load the model at path and serve it on host:port until terminated.
/// provider may be null (vector-form requests only).
int serve(const std::string& model_path, std::shared_ptr<EmbeddingProvider> provider,
          const std::string& host, int port);

}  // namespace driftguard
