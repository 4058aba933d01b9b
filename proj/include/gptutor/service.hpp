#pragma once

#include "gptutor/cache.hpp"
#include "gptutor/config.hpp"
#include "gptutor/context.hpp"
#include "gptutor/gateway.hpp"
#include "gptutor/indexer.hpp"
#include "gptutor/prompt.hpp"

#include <array>
#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stop_token>
#include <string>

namespace gptutor {

struct CacheEntry {
  std::string key;
  ExplanationResult result;
  std::chrono::system_clock::time_point created_at;
};

// sha256(model + "\0" + system + "\0" + user)
std::string cache_key(const PromptBundle& prompt);

using BackendFactory = std::function<std::shared_ptr<Backend>(BackendKind, const ServiceConfig&)>;

// live -> LiveBackend over HTTP, mock -> MockBackend, replay -> ReplayBackend(transcript store).
BackendFactory default_backend_factory();

struct ScanSummary {
  std::size_t indexed_files = 0;
  std::size_t skipped_files = 0;
};

// extract -> fit -> build -> cache -> complete, over an immutable index snapshot per request.
class ExplainService {
 public:
  explicit ExplainService(ServiceConfig config, BackendFactory factory = default_backend_factory());

  // (Re)scans the workspace; throws Error(RootNotFound).
  ScanSummary rescan();

  PromptBundle build_prompt_for(const ExplainRequest& request) const;
  ExplanationResult handle_explain(const ExplainRequest& request, std::stop_token stop = {});

  // Replaces (or, with no content, drops) one file in the index.
  void did_change(const std::filesystem::path& file, const std::optional<std::string>& content);

  std::shared_ptr<const SymbolIndex> snapshot() const;
  const ServiceConfig& config() const noexcept { return config_; }

  ExplainRequest make_request(const std::filesystem::path& file, Position start, Position end,
                              std::optional<std::string> model = std::nullopt,
                              std::optional<BackendKind> backend = std::nullopt) const;

 private:
  std::shared_ptr<Backend> backend_for(BackendKind kind);
  LruCache<std::string, CacheEntry>& cache_for(BackendKind kind) {
    return *caches_[static_cast<std::size_t>(kind)];
  }

  ServiceConfig config_;
  BackendFactory factory_;
  mutable std::shared_mutex index_mutex_;
  std::shared_ptr<const SymbolIndex> index_;
  std::mutex backend_mutex_;
  std::array<std::shared_ptr<Backend>, 3> backends_;
  std::array<std::unique_ptr<LruCache<std::string, CacheEntry>>, 3> caches_;
};

}  // namespace gptutor
