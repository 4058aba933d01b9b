#include "gptutor/context.hpp"

#include "gptutor/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <vector>

namespace gptutor {
namespace fs = std::filesystem;

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::Live: return "live";
    case BackendKind::Mock: return "mock";
    case BackendKind::Replay: return "replay";
  }
  return "live";
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) noexcept {
  if (text == "live") return BackendKind::Live;
  if (text == "mock") return BackendKind::Mock;
  if (text == "replay") return BackendKind::Replay;
  return std::nullopt;
}

TokenMatch locate_token(std::string_view content, Position position) {
  const LineTable lines(content);
  position = lines.clamp(position);
  std::string_view line = lines.line(position.line);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const std::size_t cursor = byte_offset_of_column(line, position.character);

  struct Run {
    std::size_t begin;
    std::size_t end;
  };
  std::vector<Run> idents;
  for (std::size_t i = 0; i < line.size();) {
    if (!is_ident_char(line[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < line.size() && is_ident_char(line[i])) ++i;
    if (is_ident_start(line[begin])) idents.push_back({begin, i});
  }
  if (idents.empty()) {
    throw Error(ErrorCode::NoToken, "no identifier on line " + std::to_string(position.line + 1));
  }

  const Run* chosen = nullptr;
  for (const auto& run : idents) {
    if (run.begin <= cursor && cursor < run.end) chosen = &run;
  }
  if (!chosen) {
    for (const auto& run : idents) {
      if (run.end == cursor) chosen = &run;
    }
  }
  if (!chosen) {
    std::size_t best = std::string_view::npos;
    for (const auto& run : idents) {
      const std::size_t distance = run.begin > cursor ? run.begin - cursor : cursor - (run.end - 1);
      // ties go to the identifier on the right
      if (distance < best || (distance == best && run.begin > cursor)) {
        best = distance;
        chosen = &run;
      }
    }
  }

  std::size_t begin = chosen->begin;
  if (begin > 0 && line[begin - 1] == '.') --begin;
  TokenMatch match;
  match.text = std::string(line.substr(begin, chosen->end - begin));
  match.span.start = {position.line, column_of_byte_offset(line, begin)};
  match.span.end = {position.line, column_of_byte_offset(line, chosen->end)};
  return match;
}

std::string workspace_relative(const fs::path& root, const fs::path& path) {
  const fs::path base = fs::absolute(root).lexically_normal();
  const fs::path full = (path.is_absolute() ? path : base / path).lexically_normal();
  const fs::path rel = full.lexically_relative(base);
  if (rel.empty() || *rel.begin() == ".." || rel == ".") {
    throw Error(ErrorCode::OutsideWorkspace,
                "file is outside the workspace: " + path.generic_string());
  }
  return rel.generic_string();
}

namespace {

std::string read_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::FileNotFound, "file not found: " + path.generic_string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot read file: " + path.generic_string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return sanitize_utf8(buffer.str());
}

// Identifier right before the '.' of a dotted selection, if any.
std::optional<std::string> receiver_before(std::string_view line, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && is_ident_char(line[begin - 1])) --begin;
  if (begin == dot || !is_ident_start(line[begin])) return std::nullopt;
  return std::string(line.substr(begin, dot - begin));
}

}  // namespace

ContextBundle extract_context(const ExplainRequest& request, const SymbolIndex& index,
                              const ExtractOptions& options) {
  const std::string rel = workspace_relative(request.workspace_root, request.selection.path);
  std::string content;
  if (auto indexed = index.source(rel)) {
    content = std::string(*indexed);
  } else {
    content = read_file(fs::absolute(request.workspace_root) / rel);
  }

  ContextBundle bundle;
  bundle.language = detect_language(rel, options.extensions);
  const LineTable lines(content);
  Position start = lines.clamp(request.selection.start);
  Position end = lines.clamp(request.selection.end);
  if (end < start) std::swap(start, end);

  if (start != end) {
    bundle.selected_text = std::string(lines.slice({start, end}));
  } else {
    auto token = locate_token(content, start);
    bundle.selected_text = std::move(token.text);
    start = token.span.start;
  }
  bundle.cursor_line = start.line;
  bundle.cursor_line_text = std::string(trim_newline(lines.line(start.line)));
  bundle.current_code = content;

  std::string_view name = trim(bundle.selected_text);
  const bool dotted = !name.empty() && name.front() == '.';
  if (dotted) name.remove_prefix(1);
  if (!options.resolve_definitions || bundle.language.is_plaintext() || !is_identifier(name)) {
    return bundle;
  }

  QueryContext query;
  query.from_path = rel;
  query.imported_names = imported_names(content, bundle.language);
  if (dotted) {
    const std::string_view line = lines.line(start.line);
    const std::size_t offset = byte_offset_of_column(line, start.character);
    const std::size_t dot = line.find('.', offset);
    if (dot != std::string_view::npos) query.receiver = receiver_before(line, dot);
  }

  const auto defs = lookup_definitions(index, name, query);
  if (defs.empty()) return bundle;
  const SymbolDef& top = defs.front();
  bundle.selected_function_name = std::string(name);
  bundle.definition_block = top.body;
  const auto defining_source = index.source(top.path);
  if (defining_source && top.defining_file_size <= options.defining_file_budget) {
    bundle.resolved_definition_source = std::string(*defining_source);
  } else {
    bundle.resolved_definition_source = top.body;
  }
  return bundle;
}

}  // namespace gptutor
