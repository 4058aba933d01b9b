#pragma once

#include "gptutor/context.hpp"
#include "gptutor/gateway.hpp"
#include "gptutor/indexer.hpp"
#include "gptutor/prompt.hpp"

#include "json.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>

namespace gptutor {

inline constexpr std::string_view kServerVersion = "0.1.0";
inline constexpr std::string_view kConfigFileName = "gptutor.json";

struct ServiceConfig {
  std::filesystem::path workspace_root;
  LlmConfig llm;
  Budget budget;
  IndexConfig index_config;
  std::size_t defining_file_budget = 8000;
  std::size_t cache_capacity = 256;
  BackendKind default_backend = BackendKind::Live;
  bool resolve_definitions = true;
  std::optional<std::filesystem::path> transcripts;  // relative paths resolve against the root

  std::filesystem::path transcript_store() const;
};

// Applies the gptutor.json keys {apiBase, apiKeyEnv, model, temperature, tokenBudget,
// definingFileBudget, include, exclude, transcripts}; throws Error(InvalidArgument) on bad types.
void apply_config_json(ServiceConfig& config, const nlohmann::json& doc);

// Reads and applies a config file; throws Error(FileNotFound / InvalidArgument).
void apply_config_file(ServiceConfig& config, const std::filesystem::path& file);

// GPTUTOR_API_BASE, GPTUTOR_MODEL, GPTUTOR_TEMPERATURE, GPTUTOR_TOKEN_BUDGET.
void apply_environment(ServiceConfig& config, const EnvLookup& env);

void validate(const ServiceConfig& config);

}  // namespace gptutor
