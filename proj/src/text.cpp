#include "gptutor/text.hpp"

#include <algorithm>
#include <cstdint>

namespace gptutor {
namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";

bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Length of the valid UTF-8 sequence starting at `i`, or 0 when invalid.
std::size_t sequence_length(std::string_view s, std::size_t i) {
  const auto c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) return 1;
  std::size_t len = 0;
  std::uint32_t min = 0;
  std::uint32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    len = 2, min = 0x80, cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3, min = 0x800, cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4, min = 0x10000, cp = c & 0x07;
  } else {
    return 0;
  }
  if (i + len > s.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto cc = static_cast<unsigned char>(s[i + k]);
    if (!is_continuation(cc)) return 0;
    cp = (cp << 6) | (cc & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return 0;
  return len;
}

}  // namespace

std::string sanitize_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const std::size_t len = sequence_length(bytes, i);
    if (len == 0) {
      out += kReplacement;
      ++i;
    } else {
      out.append(bytes.substr(i, len));
      i += len;
    }
  }
  return out;
}

std::size_t count_code_points(std::string_view utf8) noexcept {
  return static_cast<std::size_t>(std::count_if(utf8.begin(), utf8.end(), [](char c) {
    return !is_continuation(static_cast<unsigned char>(c));
  }));
}

std::size_t byte_offset_of_column(std::string_view line, std::size_t column) noexcept {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (is_continuation(static_cast<unsigned char>(line[i]))) continue;
    if (seen == column) return i;
    ++seen;
  }
  return line.size();
}

std::size_t column_of_byte_offset(std::string_view line, std::size_t offset) noexcept {
  return count_code_points(line.substr(0, std::min(offset, line.size())));
}

LineTable::LineTable(std::string_view text) : text_(text) {
  starts_.push_back(0);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\n') starts_.push_back(i + 1);
  }
}

std::string_view LineTable::line(std::size_t index) const {
  const std::size_t begin = starts_.at(index);
  const std::size_t end = index + 1 < starts_.size() ? starts_[index + 1] - 1 : text_.size();
  return text_.substr(begin, end - begin);
}

Position LineTable::clamp(Position pos) const noexcept {
  pos.line = std::min(pos.line, starts_.size() - 1);
  pos.character = std::min(pos.character, count_code_points(line(pos.line)));
  return pos;
}

std::size_t LineTable::offset_of(Position pos) const noexcept {
  pos = clamp(pos);
  return starts_[pos.line] + byte_offset_of_column(line(pos.line), pos.character);
}

Position LineTable::position_of(std::size_t offset) const noexcept {
  offset = std::min(offset, text_.size());
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), offset);
  const auto index = static_cast<std::size_t>(it - starts_.begin()) - 1;
  return {index, column_of_byte_offset(line(index), offset - starts_[index])};
}

std::string_view LineTable::slice(Span span) const noexcept {
  const std::size_t begin = offset_of(span.start);
  const std::size_t end = std::max(begin, offset_of(span.end));
  return text_.substr(begin, end - begin);
}

std::string_view trim(std::string_view text) noexcept {
  const auto first = text.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n\f\v");
  return text.substr(first, last - first + 1);
}

std::string_view trim_newline(std::string_view line) noexcept {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
  return line;
}

bool is_ident_start(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) noexcept { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_identifier(std::string_view text) noexcept {
  return !text.empty() && is_ident_start(text.front()) &&
         std::all_of(text.begin(), text.end(), is_ident_char);
}

}  // namespace gptutor
