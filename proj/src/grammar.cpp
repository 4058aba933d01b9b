#include "grammar.hpp"

#include <array>
#include <algorithm>
#include <cctype>

namespace gptutor::grammar {
namespace {

constexpr std::array kPythonKeywords = {
    "False", "None",   "True",    "and",      "as",     "assert", "async", "await",
    "break", "class",  "continue","def",      "del",    "elif",   "else",  "except",
    "finally","for",   "from",    "global",   "if",     "import", "in",    "is",
    "lambda","nonlocal","not",    "or",       "pass",   "raise",  "return","try",
    "while", "with",   "yield",
};

bool is_space(char c) { return c == ' ' || c == '\t'; }

class Cursor {
 public:
  Cursor(std::string_view text, bool dollar_idents) : text_(text), dollar_(dollar_idents) {}

  void skip_ws() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  // Keyword followed by at least one blank (or, when `ws_required` is false, any non-ident).
  bool keyword(std::string_view word, bool ws_required = true) {
    if (text_.substr(pos_, word.size()) != word) return false;
    const std::size_t after = pos_ + word.size();
    if (after < text_.size() && ident_char(text_[after])) return false;
    if (ws_required && (after >= text_.size() || !is_space(text_[after]))) return false;
    pos_ = after;
    skip_ws();
    return true;
  }

  std::optional<std::string> ident() {
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) return std::nullopt;
    const std::size_t begin = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(begin, pos_ - begin));
  }

  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  bool at_end() const { return pos_ >= text_.size(); }

  // Skips a balanced <...> group when positioned on '<'.
  void skip_angles() {
    if (peek() != '<') return;
    int depth = 0;
    while (pos_ < text_.size()) {
      const char c = text_[pos_++];
      if (c == '<') ++depth;
      if (c == '>' && --depth == 0) break;
    }
    skip_ws();
  }

 private:
  bool ident_start(char c) const { return is_ident_start(c) || (dollar_ && c == '$'); }
  bool ident_char(char c) const { return is_ident_char(c) || (dollar_ && c == '$'); }

  std::string_view text_;
  bool dollar_;
  std::size_t pos_ = 0;
};

bool python_literal_start(std::string_view rhs) {
  if (rhs.empty()) return false;
  const char c = rhs.front();
  if (std::isdigit(static_cast<unsigned char>(c)) || c == '"' || c == '\'' || c == '[' ||
      c == '{' || c == '(') {
    return true;
  }
  if ((c == '-' || c == '+') && rhs.size() > 1 &&
      std::isdigit(static_cast<unsigned char>(rhs[1]))) {
    return true;
  }
  for (std::string_view word : {"True", "False", "None"}) {
    if (rhs.substr(0, word.size()) == word &&
        (rhs.size() == word.size() || !is_ident_char(rhs[word.size()]))) {
      return true;
    }
  }
  // string prefixes: r"", b'', f"", rb"", ...
  std::size_t i = 0;
  while (i < rhs.size() && i < 2 && std::string_view("rbfuRBFU").find(rhs[i]) != std::string_view::npos) ++i;
  return i > 0 && i < rhs.size() && (rhs[i] == '"' || rhs[i] == '\'');
}

std::optional<Header> match_python(std::string_view line) {
  Cursor cur(line, false);
  const bool column_zero = !line.empty() && !is_space(line.front());
  cur.skip_ws();
  Cursor probe = cur;
  probe.keyword("async");
  if (probe.keyword("def")) {
    auto name = probe.ident();
    probe.skip_ws();
    if (name && probe.eat('(')) return Header{*name, SymbolKind::Function, Scope::Indent, {}};
    return std::nullopt;
  }
  probe = cur;
  if (probe.keyword("class")) {
    auto name = probe.ident();
    probe.skip_ws();
    if (name && (probe.peek() == '(' || probe.peek() == ':')) {
      return Header{*name, SymbolKind::Class, Scope::Indent, {}};
    }
    return std::nullopt;
  }
  if (!column_zero) return std::nullopt;
  auto name = cur.ident();
  if (!name || std::find(kPythonKeywords.begin(), kPythonKeywords.end(), *name) !=
                   kPythonKeywords.end()) {
    return std::nullopt;
  }
  std::string_view rest = line.substr(name->size());
  rest = rest.substr(std::min(rest.size(), rest.find_first_not_of(" \t")));
  if (!rest.empty() && rest.front() == ':') {
    const auto eq = rest.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    rest = rest.substr(eq);
  }
  if (rest.empty() || rest.front() != '=' || (rest.size() > 1 && rest[1] == '=')) {
    return std::nullopt;
  }
  rest.remove_prefix(1);
  rest = rest.substr(std::min(rest.size(), rest.find_first_not_of(" \t")));
  if (!python_literal_start(rest)) return std::nullopt;
  return Header{*name, SymbolKind::Constant, Scope::Line, {}};
}

std::optional<Header> match_javascript(std::string_view line) {
  Cursor cur(line, true);
  cur.skip_ws();
  cur.keyword("export");
  Cursor probe = cur;
  if (probe.keyword("const")) {
    auto name = probe.ident();
    probe.skip_ws();
    if (!name) return std::nullopt;
    if (probe.eat(':')) {
      while (!probe.at_end() && probe.peek() != '=') probe.eat(probe.peek());
    }
    if (probe.eat('=') && probe.peek() != '=' && probe.peek() != '>') {
      return Header{*name, SymbolKind::Constant, Scope::Statement, {}};
    }
    return std::nullopt;
  }
  cur.keyword("default");
  cur.keyword("declare");
  probe = cur;
  probe.keyword("async");
  if (probe.keyword("function", false)) {
    probe.eat('*');
    probe.skip_ws();
    auto name = probe.ident();
    probe.skip_ws();
    if (name && (probe.peek() == '(' || probe.peek() == '<')) {
      return Header{*name, SymbolKind::Function, Scope::Brace, {}};
    }
    return std::nullopt;
  }
  probe = cur;
  probe.keyword("abstract");
  if (probe.keyword("class")) {
    auto name = probe.ident();
    if (!name) return std::nullopt;
    const char next = probe.peek();
    if (next == '\0' || is_space(next) || next == '{' || next == '<' || next == '\r') {
      return Header{*name, SymbolKind::Class, Scope::Brace, {}};
    }
  }
  return std::nullopt;
}

std::optional<Header> match_rust(std::string_view line) {
  Cursor cur(line, false);
  cur.skip_ws();
  if (cur.keyword("pub", false)) {
    if (cur.peek() == '(') {
      while (!cur.at_end() && !cur.eat(')')) cur.eat(cur.peek());
    }
    cur.skip_ws();
  }
  Cursor probe = cur;
  for (bool progressed = true; progressed;) {
    progressed = probe.keyword("const") || probe.keyword("async") || probe.keyword("unsafe");
    if (!progressed && probe.keyword("extern")) {
      progressed = true;
      if (probe.eat('"')) {
        while (!probe.at_end() && !probe.eat('"')) probe.eat(probe.peek());
        probe.skip_ws();
      }
    }
  }
  if (probe.keyword("fn")) {
    auto name = probe.ident();
    if (name) return Header{*name, SymbolKind::Function, Scope::Brace, {}};
    return std::nullopt;
  }
  probe = cur;
  if (probe.keyword("struct")) {
    auto name = probe.ident();
    if (name) return Header{*name, SymbolKind::Class, Scope::Brace, {}};
    return std::nullopt;
  }
  probe = cur;
  probe.keyword("unsafe");
  if (!probe.keyword("impl", false)) return std::nullopt;
  probe.skip_ws();
  probe.skip_angles();
  // Reads one type path and returns its last segment.
  auto read_type = [](Cursor& c) -> std::optional<std::string> {
    while (c.eat('&')) c.skip_ws();
    c.keyword("mut");
    c.keyword("dyn");
    std::optional<std::string> last;
    while (auto seg = c.ident()) {
      last = seg;
      c.skip_angles();
      if (c.peek() == ':' && c.peek(1) == ':') {
        c.eat(':');
        c.eat(':');
        continue;
      }
      break;
    }
    c.skip_ws();
    return last;
  };
  auto first = read_type(probe);
  if (!first) return std::nullopt;
  if (probe.keyword("for")) {
    auto self_type = read_type(probe);
    if (!self_type) return std::nullopt;
    return Header{*self_type, SymbolKind::Class, Scope::Brace, {}};
  }
  return Header{*first, SymbolKind::Class, Scope::Brace, {}};
}

std::optional<Header> match_go(std::string_view line) {
  Cursor cur(line, false);
  cur.skip_ws();
  if (cur.keyword("type")) {
    auto name = cur.ident();
    if (name && (is_space(cur.peek()) || cur.peek() == '[')) {
      return Header{*name, SymbolKind::Class, Scope::BraceOrEol, {}};
    }
    return std::nullopt;
  }
  if (!cur.keyword("func", false)) return std::nullopt;
  cur.skip_ws();
  std::optional<std::string> receiver;
  if (cur.eat('(')) {
    cur.skip_ws();
    auto first = cur.ident();
    cur.skip_ws();
    cur.eat('*');
    cur.skip_ws();
    auto second = cur.ident();
    receiver = second ? second : first;
    if (!receiver) return std::nullopt;
    while (!cur.at_end() && !cur.eat(')')) cur.eat(cur.peek());
    cur.skip_ws();
  }
  auto name = cur.ident();
  cur.skip_ws();
  if (!name || (cur.peek() != '(' && cur.peek() != '[')) return std::nullopt;
  if (receiver) return Header{*name, SymbolKind::Method, Scope::BraceOrEol, receiver};
  return Header{*name, SymbolKind::Function, Scope::BraceOrEol, {}};
}

// Skips a string/comment starting at `i`; returns the index after it, or `i` when none starts.
std::size_t skip_lexeme(std::string_view language, std::string_view text, std::size_t i) {
  const bool js = language == "javascript" || language == "typescript";
  const char c = text[i];
  const char next = i + 1 < text.size() ? text[i + 1] : '\0';
  if (c == '/' && next == '/') {
    const auto nl = text.find('\n', i);
    return nl == std::string_view::npos ? text.size() : nl;
  }
  if (c == '/' && next == '*') {
    const auto close = text.find("*/", i + 2);
    return close == std::string_view::npos ? text.size() : close + 2;
  }
  auto quoted = [&](char quote, bool escapes) {
    std::size_t k = i + 1;
    while (k < text.size() && text[k] != quote) k += (escapes && text[k] == '\\') ? 2 : 1;
    return std::min(k + 1, text.size());
  };
  if (c == '"') return quoted('"', true);
  if (c == '`' && (js || language == "go")) return quoted('`', js);
  if (c == '\'') {
    if (js) return quoted('\'', true);
    if (language == "go") return quoted('\'', true);
    if (language == "rust") {
      if (next == '\\') return quoted('\'', true);
      if (i + 2 < text.size() && text[i + 2] == '\'') return i + 3;
    }
  }
  return i;
}

}  // namespace

std::optional<Header> match_header(std::string_view language, std::string_view line) {
  if (language == "python") return match_python(line);
  if (language == "javascript" || language == "typescript") return match_javascript(line);
  if (language == "rust") return match_rust(line);
  if (language == "go") return match_go(line);
  return std::nullopt;
}

std::size_t brace_scope_end(std::string_view language, std::string_view text, std::size_t start,
                            Scope scope) {
  const std::size_t header_eol = std::min(text.size(), text.find('\n', start));
  auto before_cr = [&](std::size_t eol) {
    return (eol > start && text[eol - 1] == '\r') ? eol - 1 : eol;
  };
  int parens = 0;
  int braces = 0;
  bool open = false;
  std::size_t i = start;
  while (i < text.size()) {
    const std::size_t skipped = skip_lexeme(language, text, i);
    if (skipped != i) {
      i = skipped;
      continue;
    }
    const char c = text[i];
    if (scope == Scope::Statement) {
      if (c == '(' || c == '[' || c == '{') ++parens;
      if (c == ')' || c == ']' || c == '}') --parens;
      if (parens <= 0 && c == ';') return i + 1;
      if (parens <= 0 && c == '\n') return before_cr(i);
    } else if (!open) {
      if (c == '(' || c == '[') ++parens;
      if (c == ')' || c == ']') --parens;
      if (parens <= 0 && c == '{') {
        open = true;
        braces = 1;
      } else if (parens <= 0 && c == ';') {
        return i + 1;
      } else if (scope == Scope::BraceOrEol && parens <= 0 && c == '\n') {
        return before_cr(i);
      }
    } else {
      if (c == '{') ++braces;
      if (c == '}' && --braces == 0) return i + 1;
    }
    ++i;
  }
  if (!open && scope != Scope::Statement) return before_cr(header_eol);
  return text.size();
}

}  // namespace gptutor::grammar
