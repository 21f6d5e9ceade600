// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "driftguard/types.hpp"

namespace driftguard {

/// Serialize a validated model to its JSON document form. Round-trips
/// losslessly through deserialize_model.
std::string serialize_model(const CalibratedModel& model);

/// Parse and validate a model document. Malformed JSON raises
/// ParseError, wrong shape or unknown format_version raises SchemaError,
/// and violated model invariants raise ValidationError.
CalibratedModel deserialize_model(std::string_view bytes);

CalibratedModel load_model(const std::filesystem::path& path);
void save_model(const CalibratedModel& model, const std::filesystem::path& path);

}  // namespace driftguard
