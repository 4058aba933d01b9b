#include "gptutor/service.hpp"

#include "gptutor/error.hpp"
#include "gptutor/hash.hpp"

namespace gptutor {

std::string cache_key(const PromptBundle& prompt) {
  std::string material = prompt.model;
  material += '\0';
  material += prompt.system_message;
  material += '\0';
  material += prompt.user_message;
  return sha256_hex(material);
}

BackendFactory default_backend_factory() {
  return [](BackendKind kind, const ServiceConfig& config) -> std::shared_ptr<Backend> {
    switch (kind) {
      case BackendKind::Live:
        return std::make_shared<LiveBackend>(config.llm, make_http_transport());
      case BackendKind::Mock:
        return std::make_shared<MockBackend>();
      case BackendKind::Replay:
        return std::make_shared<ReplayBackend>(config.transcript_store());
    }
    return nullptr;
  };
}

ExplainService::ExplainService(ServiceConfig config, BackendFactory factory)
    : config_(std::move(config)), factory_(std::move(factory)) {
  validate(config_);
  for (auto& cache : caches_) {
    cache = std::make_unique<LruCache<std::string, CacheEntry>>(config_.cache_capacity);
  }
  index_ = std::make_shared<const SymbolIndex>(config_.workspace_root);
}

ScanSummary ExplainService::rescan() {
  auto fresh = std::make_shared<const SymbolIndex>(
      scan_workspace(config_.workspace_root, config_.index_config));
  ScanSummary summary{fresh->file_count(), fresh->skipped().size()};
  std::unique_lock lock(index_mutex_);
  index_ = std::move(fresh);
  return summary;
}

std::shared_ptr<const SymbolIndex> ExplainService::snapshot() const {
  std::shared_lock lock(index_mutex_);
  return index_;
}

void ExplainService::did_change(const std::filesystem::path& file,
                                const std::optional<std::string>& content) {
  const std::string rel = workspace_relative(config_.workspace_root, file);
  std::unique_lock lock(index_mutex_);
  index_ = std::make_shared<const SymbolIndex>(
      invalidate_path(*index_, rel, content, config_.index_config));
}

ExplainRequest ExplainService::make_request(const std::filesystem::path& file, Position start,
                                            Position end, std::optional<std::string> model,
                                            std::optional<BackendKind> backend) const {
  ExplainRequest request;
  request.workspace_root = config_.workspace_root;
  request.selection = {file.generic_string(), start, end};
  request.model_override = std::move(model);
  request.backend = backend.value_or(config_.default_backend);
  return request;
}

PromptBundle ExplainService::build_prompt_for(const ExplainRequest& request) const {
  const auto index = snapshot();
  ExtractOptions options;
  options.defining_file_budget = config_.defining_file_budget;
  options.extensions = config_.index_config.extensions;
  options.resolve_definitions = config_.resolve_definitions;
  const ContextBundle bundle = extract_context(request, *index, options);
  const ContextBundle fitted = fit_to_budget(bundle, config_.budget);
  return build_prompt(fitted, config_.budget, request.model_override.value_or(config_.llm.model));
}

std::shared_ptr<Backend> ExplainService::backend_for(BackendKind kind) {
  std::lock_guard lock(backend_mutex_);
  auto& slot = backends_[static_cast<std::size_t>(kind)];
  if (!slot) slot = factory_(kind, config_);
  if (!slot) throw Error(ErrorCode::InvalidArgument, "no backend available for " + std::string(to_string(kind)));
  return slot;
}

ExplanationResult ExplainService::handle_explain(const ExplainRequest& request, std::stop_token stop) {
  const auto started = std::chrono::steady_clock::now();
  const PromptBundle prompt = build_prompt_for(request);
  const std::string key = cache_key(prompt);
  auto& cache = cache_for(request.backend);
  if (auto hit = cache.get(key)) {
    ExplanationResult result = hit->result;
    result.cached = true;
    result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
    return result;
  }
  if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
  ExplanationResult result = backend_for(request.backend)->complete(prompt, stop);
  if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
  result.cached = false;
  result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  cache.put(key, CacheEntry{key, result, std::chrono::system_clock::now()});
  return result;
}

}  // namespace gptutor
