#include "gptutor/config.hpp"

#include "gptutor/error.hpp"

#include <fstream>
#include <sstream>

namespace gptutor {
namespace fs = std::filesystem;
using nlohmann::json;

fs::path ServiceConfig::transcript_store() const {
  const fs::path store = transcripts.value_or(fs::path(".gptutor") / "transcripts.jsonl");
  return store.is_absolute() ? store : workspace_root / store;
}

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& expected) {
  throw Error(ErrorCode::InvalidArgument, "config key '" + key + "' must be " + expected);
}

std::vector<std::string> string_list(const json& value, const std::string& key) {
  if (!value.is_array()) bad(key, "an array of strings");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) bad(key, "an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::size_t positive(const json& value, const std::string& key) {
  if (!value.is_number_integer() || value.get<long long>() <= 0) bad(key, "a positive integer");
  return value.get<std::size_t>();
}

std::string text(const json& value, const std::string& key) {
  if (!value.is_string()) bad(key, "a string");
  return value.get<std::string>();
}

}  // namespace

void apply_config_json(ServiceConfig& config, const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "apiBase") {
      config.llm.api_base = text(value, key);
    } else if (key == "apiKeyEnv") {
      config.llm.api_key_source = text(value, key);
    } else if (key == "model") {
      config.llm.model = text(value, key);
    } else if (key == "temperature") {
      if (!value.is_number()) bad(key, "a number");
      config.llm.temperature = value.get<double>();
    } else if (key == "tokenBudget") {
      config.budget.max_tokens = positive(value, key);
    } else if (key == "definingFileBudget") {
      config.defining_file_budget = positive(value, key);
    } else if (key == "include") {
      config.index_config.include = string_list(value, key);
    } else if (key == "exclude") {
      config.index_config.exclude = string_list(value, key);
    } else if (key == "transcripts") {
      config.transcripts = fs::path(text(value, key));
    }
  }
}

void apply_config_file(ServiceConfig& config, const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "config file not found: " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const json doc = json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorCode::InvalidArgument, "config file is not valid JSON: " + file.string());
  }
  apply_config_json(config, doc);
}

void apply_environment(ServiceConfig& config, const EnvLookup& env) {
  if (!env) return;
  if (auto v = env("GPTUTOR_API_BASE")) config.llm.api_base = *v;
  if (auto v = env("GPTUTOR_MODEL")) config.llm.model = *v;
  try {
    if (auto v = env("GPTUTOR_TEMPERATURE")) config.llm.temperature = std::stod(*v);
    if (auto v = env("GPTUTOR_TOKEN_BUDGET")) {
      const long long n = std::stoll(*v);
      if (n <= 0) throw std::invalid_argument("non-positive");
      config.budget.max_tokens = static_cast<std::size_t>(n);
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "GPTUTOR_TEMPERATURE / GPTUTOR_TOKEN_BUDGET must be numeric");
  }
}

void validate(const ServiceConfig& config) {
  validate(config.llm);
  if (config.budget.max_tokens == 0 ||
      !(config.budget.defining_share > 0.0 && config.budget.defining_share < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "budget needs max_tokens > 0 and 0 < defining_share < 1");
  }
}

}  // namespace gptutor
