#pragma once

#include <string>

#include <json.hpp>

#include "khan/feature_select.hpp"
#include "khan/homology.hpp"
#include "khan/persistence.hpp"

namespace khan {

nlohmann::json to_json(const GraphFeature& f);
nlohmann::json to_json(const SelectionResult& r);
nlohmann::json to_json(const DgsOutput& r);
nlohmann::json to_json(const CycleRank& r);

/// Throws ConfigError when the file is missing and DataError when it does not parse.
nlohmann::json read_json_file(const std::string& path);
/// Throws ConfigError when the file cannot be opened for writing.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace khan
