#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace scoretr {

inline constexpr const char* kVersion = "scoretr 0.1.0";

/// Config document for one experiment run. The raw JSON is the source of
/// truth; typed access happens in the runner. `--set a.b.c=value` overrides
/// one key, parsing the value as JSON when possible and as a string otherwise.
struct ExperimentConfig {
  nlohmann::json doc = nlohmann::json::object();

  static ExperimentConfig from_file(const std::filesystem::path& path);
  static ExperimentConfig from_json_text(const std::string& text);

  void set_override(const std::string& key_equals_value);
  void set_task(const std::string& task);

  std::string task() const;

  /// Empty when valid; otherwise one message per offending field.
  std::vector<std::string> validate() const;
};

}  // namespace scoretr
