#pragma once

#include <cstddef>
#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace gptutor {

// 0-based line and column; columns count Unicode code points.
struct Position {
  std::size_t line = 0;
  std::size_t character = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

// Half-open [start, end).
struct Span {
  Position start;
  Position end;

  friend auto operator<=>(const Span&, const Span&) = default;
};

// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

std::size_t count_code_points(std::string_view utf8) noexcept;

// Byte offset of the code point at `column` within `line`, clamped to the line size.
std::size_t byte_offset_of_column(std::string_view line, std::size_t column) noexcept;

std::size_t column_of_byte_offset(std::string_view line, std::size_t offset) noexcept;

// Read-only view of a text split at '\n'. A trailing newline yields a final empty line.
class LineTable {
 public:
  explicit LineTable(std::string_view text);

  std::size_t line_count() const noexcept { return starts_.size(); }

  // Line text without its '\n' (a trailing '\r' is kept).
  std::string_view line(std::size_t index) const;

  std::size_t line_start(std::size_t index) const { return starts_.at(index); }

  // Byte offset in the whole text; clamps line and column into range.
  std::size_t offset_of(Position pos) const noexcept;

  Position position_of(std::size_t offset) const noexcept;

  Position clamp(Position pos) const noexcept;

  std::string_view slice(Span span) const noexcept;

  std::string_view text() const noexcept { return text_; }

 private:
  std::string_view text_;
  std::vector<std::size_t> starts_;
};

std::string_view trim(std::string_view text) noexcept;
std::string_view trim_newline(std::string_view line) noexcept;

bool is_ident_start(char c) noexcept;
bool is_ident_char(char c) noexcept;
bool is_identifier(std::string_view text) noexcept;

}  // namespace gptutor
