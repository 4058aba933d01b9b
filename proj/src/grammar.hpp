#pragma once

#include "gptutor/indexer.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace gptutor::grammar {

enum class Scope {
  Indent,     // python: header line plus following lines indented deeper
  Line,       // header line only
  Brace,      // body opens at first '{' outside parens; ';' first ends the item
  BraceOrEol, // as Brace, but a newline before the body opens also ends the item (go)
  Statement,  // ends at ';' or newline at bracket depth 0 (js/ts const)
};

struct Header {
  std::string name;
  SymbolKind kind = SymbolKind::Function;
  Scope scope = Scope::Line;
  std::optional<std::string> receiver;  // go method receiver type
};

// Recognises a definition header at the start of `line` (leading whitespace allowed).
std::optional<Header> match_header(std::string_view language, std::string_view line);

// Byte offset one past the end of an item whose header starts at `start`.
std::size_t brace_scope_end(std::string_view language, std::string_view text, std::size_t start,
                            Scope scope);

}  // namespace gptutor::grammar
