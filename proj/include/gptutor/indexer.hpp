#pragma once

#include "gptutor/language.hpp"
#include "gptutor/text.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gptutor {

enum class SymbolKind { Function, Method, Class, Constant };

std::string_view to_string(SymbolKind kind) noexcept;

struct SymbolDef {
  std::string name;
  SymbolKind kind = SymbolKind::Function;
  std::string path;  // workspace-relative, '/'-separated
  Span span;
  std::optional<std::string> container;
  std::string signature;
  std::string body;
  std::size_t defining_file_size = 0;

  friend bool operator==(const SymbolDef&, const SymbolDef&) = default;
};

struct FileSymbols {
  std::vector<SymbolDef> defs;
  bool unsupported_language = false;
};

// Applies the definition grammar of `language` to `content` (already valid UTF-8).
FileSymbols index_file(std::string_view path, std::string_view content, const Language& language);

struct IndexConfig {
  std::vector<std::string> include = {"**"};
  std::vector<std::string> exclude = {"**/.git/**", "**/node_modules/**", "**/.gptutor/**"};
  std::uintmax_t max_file_size = 1u << 20;
  ExtensionMap extensions = default_extension_map();
};

struct SkippedFile {
  std::string path;
  std::string reason;

  friend bool operator==(const SkippedFile&, const SkippedFile&) = default;
};

// Name -> definitions and path -> definitions over one workspace. Buckets are kept sorted by
// (path, span.start) and every definition lives in exactly one bucket of each map.
class SymbolIndex {
 public:
  SymbolIndex() = default;
  explicit SymbolIndex(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const noexcept { return root_; }

  std::span<const SymbolDef> definitions_named(std::string_view name) const;
  std::span<const SymbolDef> definitions_in(std::string_view path) const;

  const std::map<std::string, std::vector<SymbolDef>, std::less<>>& by_name() const noexcept {
    return by_name_;
  }
  const std::map<std::string, std::vector<SymbolDef>, std::less<>>& by_path() const noexcept {
    return by_path_;
  }
  // path -> sha256 of the indexed content
  const std::map<std::string, std::string, std::less<>>& file_stamps() const noexcept {
    return stamps_;
  }
  const std::vector<SkippedFile>& skipped() const noexcept { return skipped_; }

  // Indexed text of a file, if the file is part of the index.
  std::optional<std::string_view> source(std::string_view path) const;

  std::size_t file_count() const noexcept { return stamps_.size(); }
  std::size_t definition_count() const noexcept;

  // Every definition ordered by (path, span.start).
  std::vector<SymbolDef> all_definitions() const;

  void put_file(const std::string& path, std::string content, std::vector<SymbolDef> defs);
  void remove_file(std::string_view path);
  void record_skipped(SkippedFile skipped);
  void clear_skipped(std::string_view path);

  friend bool operator==(const SymbolIndex&, const SymbolIndex&) = default;

 private:
  std::filesystem::path root_;
  std::map<std::string, std::vector<SymbolDef>, std::less<>> by_name_;
  std::map<std::string, std::vector<SymbolDef>, std::less<>> by_path_;
  std::map<std::string, std::string, std::less<>> stamps_;
  std::map<std::string, std::string, std::less<>> sources_;
  std::vector<SkippedFile> skipped_;
};

// Throws Error(RootNotFound) when root is not a readable directory. Unreadable and oversized
// files are recorded in skipped(); files in a plaintext language are ignored.
SymbolIndex scan_workspace(const std::filesystem::path& root, const IndexConfig& config = {});

// Copy of `index` with `path` dropped and, when content is given, re-indexed under the same
// filtering rules scan_workspace applies.
SymbolIndex invalidate_path(const SymbolIndex& index, std::string_view path,
                            const std::optional<std::string>& new_content,
                            const IndexConfig& config = {});

bool is_included(std::string_view rel_path, const IndexConfig& config);

struct QueryContext {
  std::string from_path;
  std::vector<std::string> imported_names;
  std::optional<std::string> receiver;
};

// Identifiers named by the import-like statements of a file.
std::vector<std::string> imported_names(std::string_view content, const Language& language);

// Ranked by tier: same file, module stem in imported_names, same directory, the rest;
// ties by (path, span.start).
std::vector<SymbolDef> lookup_definitions(const SymbolIndex& index, std::string_view name,
                                          const QueryContext& ctx);

// One JSON object per line, fields in declaration order of SymbolDef.
std::string dump_index_jsonl(const SymbolIndex& index);
std::string symbol_to_json_line(const SymbolDef& def);

}  // namespace gptutor
