#pragma once

#include "gptutor/indexer.hpp"
#include "gptutor/language.hpp"
#include "gptutor/text.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace gptutor {

// Zero-width selections mean "cursor here".
struct Selection {
  std::string path;
  Position start;
  Position end;

  bool empty() const noexcept { return start == end; }
};

enum class BackendKind { Live, Mock, Replay };

std::string_view to_string(BackendKind kind) noexcept;
std::optional<BackendKind> parse_backend_kind(std::string_view text) noexcept;

struct ExplainRequest {
  std::filesystem::path workspace_root;
  Selection selection;
  std::optional<std::string> model_override;
  BackendKind backend = BackendKind::Live;
};

struct ContextBundle {
  Language language;
  std::string selected_text;
  std::string cursor_line_text;
  std::string current_code;
  std::optional<std::string> selected_function_name;
  std::optional<std::string> resolved_definition_source;

  // Not rendered; consumed by fit_to_budget.
  std::size_t cursor_line = 0;                 // line of the selection start in current_code
  std::optional<std::string> definition_block; // body of the top-ranked definition

  friend bool operator==(const ContextBundle&, const ContextBundle&) = default;
};

struct TokenMatch {
  Span span;
  std::string text;
};

// Identifier at (or nearest to) `position` on its line, with one leading '.' when the
// identifier is a dotted member. Throws Error(NoToken) when the line has no identifier.
TokenMatch locate_token(std::string_view content, Position position);

struct ExtractOptions {
  std::size_t defining_file_budget = 8000;
  bool resolve_definitions = true;
  ExtensionMap extensions = default_extension_map();
};

// Workspace-relative '/'-separated form of `path`; throws OutsideWorkspace.
std::string workspace_relative(const std::filesystem::path& root, const std::filesystem::path& path);

ContextBundle extract_context(const ExplainRequest& request, const SymbolIndex& index,
                              const ExtractOptions& options = {});

}  // namespace gptutor
