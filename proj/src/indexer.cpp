#include "gptutor/indexer.hpp"

#include "gptutor/error.hpp"
#include "gptutor/glob.hpp"
#include "gptutor/hash.hpp"
#include "grammar.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace gptutor {
namespace fs = std::filesystem;

std::string_view to_string(SymbolKind kind) noexcept {
  switch (kind) {
    case SymbolKind::Function: return "function";
    case SymbolKind::Method: return "method";
    case SymbolKind::Class: return "class";
    case SymbolKind::Constant: return "constant";
  }
  return "function";
}

namespace {

std::size_t leading_blanks(std::string_view line) {
  const auto n = line.find_first_not_of(" \t");
  return n == std::string_view::npos ? line.size() : n;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::size_t python_block_last_line(const LineTable& lines, std::size_t header) {
  const std::size_t indent = leading_blanks(lines.line(header));
  std::size_t last = header;
  for (std::size_t k = header + 1; k < lines.line_count(); ++k) {
    const std::string_view line = lines.line(k);
    const std::string_view body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (leading_blanks(line) <= indent) break;
    last = k;
  }
  return last;
}

bool span_contains(const Span& outer, const Span& inner) {
  return outer.start <= inner.start && inner.end <= outer.end;
}

bool by_path_then_start(const SymbolDef& a, const SymbolDef& b) {
  return std::tie(a.path, a.span.start, a.name) < std::tie(b.path, b.span.start, b.name);
}

}  // namespace

FileSymbols index_file(std::string_view path, std::string_view content,
                       const Language& language) {
  FileSymbols out;
  if (language.is_plaintext()) {
    out.unsupported_language = true;
    return out;
  }
  const LineTable lines(content);
  const std::size_t file_size = count_code_points(content);
  struct Found {
    SymbolDef def;
    std::optional<std::string> receiver;
  };
  std::vector<Found> found;
  for (std::size_t i = 0; i < lines.line_count(); ++i) {
    const std::string_view line = lines.line(i);
    auto header = grammar::match_header(language.id(), line);
    if (!header) continue;
    const std::size_t start = lines.line_start(i) + leading_blanks(line);
    std::size_t end = 0;
    switch (header->scope) {
      case grammar::Scope::Indent: {
        const std::size_t last = python_block_last_line(lines, i);
        end = lines.line_start(last) + strip_cr(lines.line(last)).size();
        break;
      }
      case grammar::Scope::Line:
        end = lines.line_start(i) + strip_cr(line).size();
        break;
      default:
        end = grammar::brace_scope_end(language.id(), content, start, header->scope);
        break;
    }
    SymbolDef def;
    def.name = header->name;
    def.kind = header->kind;
    def.path = std::string(path);
    def.span = {lines.position_of(start), lines.position_of(end)};
    def.body = std::string(content.substr(start, end - start));
    def.signature = std::string(strip_cr(std::string_view(def.body).substr(0, def.body.find('\n'))));
    def.defining_file_size = file_size;
    found.push_back({std::move(def), header->receiver});
  }

  for (auto& item : found) {
    const SymbolDef* parent = nullptr;
    const SymbolDef* enclosing_class = nullptr;
    for (const auto& other : found) {
      if (&other == &item || !span_contains(other.def.span, item.def.span)) continue;
      if (other.def.span == item.def.span && &other > &item) continue;
      auto innermost = [&](const SymbolDef* current) {
        return current == nullptr || current->span.start < other.def.span.start ||
               (current->span.start == other.def.span.start &&
                other.def.span.end < current->span.end);
      };
      if (innermost(parent)) parent = &other.def;
      if (other.def.kind == SymbolKind::Class && innermost(enclosing_class)) {
        enclosing_class = &other.def;
      }
    }
    if (item.receiver) {
      item.def.container = item.receiver;
    } else if (enclosing_class) {
      item.def.container = enclosing_class->name;
    }
    if (item.def.kind == SymbolKind::Function && parent && parent->kind == SymbolKind::Class) {
      item.def.kind = SymbolKind::Method;
    }
  }
  out.defs.reserve(found.size());
  for (auto& item : found) out.defs.push_back(std::move(item.def));
  std::stable_sort(out.defs.begin(), out.defs.end(), by_path_then_start);
  return out;
}

std::span<const SymbolDef> SymbolIndex::definitions_named(std::string_view name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return {};
  return it->second;
}

std::span<const SymbolDef> SymbolIndex::definitions_in(std::string_view path) const {
  const auto it = by_path_.find(path);
  if (it == by_path_.end()) return {};
  return it->second;
}

std::optional<std::string_view> SymbolIndex::source(std::string_view path) const {
  const auto it = sources_.find(path);
  if (it == sources_.end()) return std::nullopt;
  return std::string_view(it->second);
}

std::size_t SymbolIndex::definition_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [path, defs] : by_path_) n += defs.size();
  return n;
}

std::vector<SymbolDef> SymbolIndex::all_definitions() const {
  std::vector<SymbolDef> out;
  for (const auto& [path, defs] : by_path_) out.insert(out.end(), defs.begin(), defs.end());
  return out;
}

void SymbolIndex::put_file(const std::string& path, std::string content,
                           std::vector<SymbolDef> defs) {
  remove_file(path);
  clear_skipped(path);
  stamps_[path] = sha256_hex(content);
  sources_[path] = std::move(content);
  std::sort(defs.begin(), defs.end(), by_path_then_start);
  for (const auto& def : defs) {
    auto& bucket = by_name_[def.name];
    bucket.insert(std::upper_bound(bucket.begin(), bucket.end(), def, by_path_then_start), def);
  }
  if (!defs.empty()) by_path_[path] = std::move(defs);
}

void SymbolIndex::remove_file(std::string_view path) {
  if (auto it = by_path_.find(path); it != by_path_.end()) {
    for (const auto& def : it->second) {
      auto bucket = by_name_.find(def.name);
      if (bucket == by_name_.end()) continue;
      std::erase_if(bucket->second, [&](const SymbolDef& d) { return d.path == path; });
      if (bucket->second.empty()) by_name_.erase(bucket);
    }
    by_path_.erase(it);
  }
  if (auto it = stamps_.find(path); it != stamps_.end()) stamps_.erase(it);
  if (auto it = sources_.find(path); it != sources_.end()) sources_.erase(it);
}

void SymbolIndex::record_skipped(SkippedFile skipped) {
  clear_skipped(skipped.path);
  auto pos = std::lower_bound(skipped_.begin(), skipped_.end(), skipped,
                              [](const SkippedFile& a, const SkippedFile& b) { return a.path < b.path; });
  skipped_.insert(pos, std::move(skipped));
}

void SymbolIndex::clear_skipped(std::string_view path) {
  std::erase_if(skipped_, [&](const SkippedFile& s) { return s.path == path; });
}

bool is_included(std::string_view rel_path, const IndexConfig& config) {
  const auto matches = [&](const std::string& pattern) { return glob_match(pattern, rel_path); };
  return std::any_of(config.include.begin(), config.include.end(), matches) &&
         std::none_of(config.exclude.begin(), config.exclude.end(), matches);
}

namespace {

// Applies the scan filters to one file; content is only consulted when the file qualifies.
void index_into(SymbolIndex& index, const std::string& rel, const std::string& content,
                const IndexConfig& config) {
  if (!is_included(rel, config)) return;
  const Language language = detect_language(rel, config.extensions);
  if (language.is_plaintext()) return;
  if (content.size() > config.max_file_size) {
    index.record_skipped({rel, "file exceeds max_file_size"});
    return;
  }
  std::string text = sanitize_utf8(content);
  auto symbols = index_file(rel, text, language);
  index.put_file(rel, std::move(text), std::move(symbols.defs));
}

}  // namespace

SymbolIndex scan_workspace(const fs::path& root, const IndexConfig& config) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::RootNotFound, "workspace root not found: " + root.string());
  }
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::RootNotFound, "workspace root unreadable: " + root.string());

  std::vector<std::string> files;
  for (const fs::recursive_directory_iterator end; it != end; it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file(ec)) continue;
    files.push_back(fs::relative(it->path(), root, ec).generic_string());
  }
  std::sort(files.begin(), files.end());

  SymbolIndex index(root);
  for (const auto& rel : files) {
    if (!is_included(rel, config) || detect_language(rel, config.extensions).is_plaintext()) {
      continue;
    }
    const fs::path full = root / rel;
    const auto size = fs::file_size(full, ec);
    if (ec) {
      index.record_skipped({rel, "unreadable: " + ec.message()});
      continue;
    }
    if (size > config.max_file_size) {
      index.record_skipped({rel, "file exceeds max_file_size"});
      continue;
    }
    std::ifstream in(full, std::ios::binary);
    if (!in) {
      index.record_skipped({rel, "unreadable"});
      continue;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) {
      index.record_skipped({rel, "read failed"});
      continue;
    }
    index_into(index, rel, buffer.str(), config);
  }
  return index;
}

SymbolIndex invalidate_path(const SymbolIndex& index, std::string_view path,
                            const std::optional<std::string>& new_content,
                            const IndexConfig& config) {
  SymbolIndex next = index;
  const std::string rel(path);
  next.remove_file(rel);
  next.clear_skipped(rel);
  if (new_content) index_into(next, rel, *new_content, config);
  return next;
}

namespace {

void collect_identifiers(std::string_view text, std::set<std::string>& out,
                         std::initializer_list<std::string_view> ignore) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '"' || text[i] == '\'' || text[i] == '`') {
      // quoted module path: keep the stem of its last segment
      const char quote = text[i];
      const auto close = text.find(quote, i + 1);
      const auto literal = text.substr(i + 1, (close == std::string_view::npos ? text.size() : close) - i - 1);
      std::string stem = fs::path(std::string(literal)).stem().string();
      if (is_identifier(stem)) out.insert(stem);
      i = close == std::string_view::npos ? text.size() : close + 1;
      continue;
    }
    if (is_ident_start(text[i])) {
      const std::size_t begin = i;
      while (i < text.size() && is_ident_char(text[i])) ++i;
      const std::string_view word = text.substr(begin, i - begin);
      if (std::find(ignore.begin(), ignore.end(), word) == ignore.end()) out.emplace(word);
      continue;
    }
    ++i;
  }
}

bool starts_with_word(std::string_view line, std::string_view word) {
  return line.substr(0, word.size()) == word &&
         (line.size() == word.size() || !is_ident_char(line[word.size()]));
}

}  // namespace

std::vector<std::string> imported_names(std::string_view content, const Language& language) {
  std::set<std::string> names;
  const LineTable lines(content);
  const std::string& id = language.id();
  bool in_go_block = false;
  for (std::size_t i = 0; i < lines.line_count(); ++i) {
    const std::string_view line = trim(lines.line(i));
    if (id == "python") {
      if (starts_with_word(line, "import") || starts_with_word(line, "from")) {
        const auto hash = line.find('#');
        collect_identifiers(line.substr(0, hash), names, {"import", "from", "as"});
      }
    } else if (id == "javascript" || id == "typescript") {
      const bool is_import = starts_with_word(line, "import") ||
                             (starts_with_word(line, "export") && line.find(" from ") != std::string_view::npos);
      if (is_import || line.find("require(") != std::string_view::npos) {
        collect_identifiers(line, names,
                            {"import", "export", "from", "as", "type", "require", "const", "let", "var", "default"});
      }
    } else if (id == "rust") {
      if (starts_with_word(line, "use") || starts_with_word(line, "mod") ||
          line.starts_with("pub use ") || line.starts_with("pub mod ")) {
        collect_identifiers(line, names, {"use", "mod", "pub", "as", "crate", "self", "super"});
      }
    } else if (id == "go") {
      if (in_go_block) {
        if (line.starts_with(")")) {
          in_go_block = false;
        } else {
          collect_identifiers(line, names, {});
        }
      } else if (starts_with_word(line, "import")) {
        if (line.find('(') != std::string_view::npos && line.find(')') == std::string_view::npos) {
          in_go_block = true;
        }
        collect_identifiers(line, names, {"import"});
      }
    }
  }
  return {names.begin(), names.end()};
}

std::vector<SymbolDef> lookup_definitions(const SymbolIndex& index, std::string_view name,
                                          const QueryContext& ctx) {
  const auto defs = index.definitions_named(name);
  const std::string from_dir = fs::path(ctx.from_path).parent_path().generic_string();
  auto tier = [&](const SymbolDef& def) {
    if (def.path == ctx.from_path) return 1;
    const std::string stem = fs::path(def.path).stem().string();
    if (std::find(ctx.imported_names.begin(), ctx.imported_names.end(), stem) !=
        ctx.imported_names.end()) {
      return 2;
    }
    if (fs::path(def.path).parent_path().generic_string() == from_dir) return 3;
    return 4;
  };
  std::vector<std::pair<int, const SymbolDef*>> ranked;
  ranked.reserve(defs.size());
  for (const auto& def : defs) ranked.emplace_back(tier(def), &def);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, a.second->path, a.second->span.start) <
           std::tie(b.first, b.second->path, b.second->span.start);
  });
  std::vector<SymbolDef> out;
  out.reserve(ranked.size());
  for (const auto& [t, def] : ranked) out.push_back(*def);
  return out;
}

std::string symbol_to_json_line(const SymbolDef& def) {
  auto position = [](const Position& p) {
    nlohmann::ordered_json j;
    j["line"] = p.line;
    j["character"] = p.character;
    return j;
  };
  nlohmann::ordered_json j;
  j["name"] = def.name;
  j["kind"] = to_string(def.kind);
  j["path"] = def.path;
  j["span"]["start"] = position(def.span.start);
  j["span"]["end"] = position(def.span.end);
  j["container"] = def.container ? nlohmann::ordered_json(*def.container) : nullptr;
  j["signature"] = def.signature;
  j["body"] = def.body;
  j["defining_file_size"] = def.defining_file_size;
  return j.dump();
}

std::string dump_index_jsonl(const SymbolIndex& index) {
  std::string out;
  for (const auto& def : index.all_definitions()) {
    out += symbol_to_json_line(def);
    out += '\n';
  }
  return out;
}

}  // namespace gptutor
