#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace dkdv::experiments {

/// Validates against the JSON Schema keywords used by the shipped schemas:
/// type (string or list), properties, required, additionalProperties
/// (boolean), items, enum, minimum, maximum. Returns one message per
/// violation, each prefixed with the JSON pointer of the offending value.
std::vector<std::string> validate_against_schema(const nlohmann::json& schema,
                                                 const nlohmann::json& doc);

nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace dkdv::experiments
