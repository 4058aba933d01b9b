#include "gptutor/glob.hpp"

namespace gptutor {

bool glob_match(std::string_view pattern, std::string_view path) noexcept {
  if (pattern.empty()) return path.empty();
  if (pattern.substr(0, 2) == "**") {
    std::string_view rest = pattern.substr(2);
    const bool slash = !rest.empty() && rest.front() == '/';
    if (slash && glob_match(rest.substr(1), path)) return true;
    for (std::size_t i = 0; i <= path.size(); ++i) {
      if (glob_match(rest, path.substr(i))) return true;
    }
    return false;
  }
  const char p = pattern.front();
  if (p == '*') {
    for (std::size_t i = 0; i <= path.size(); ++i) {
      if (glob_match(pattern.substr(1), path.substr(i))) return true;
      if (i < path.size() && path[i] == '/') break;
    }
    return false;
  }
  if (path.empty()) return false;
  if (p == '?') return path.front() != '/' && glob_match(pattern.substr(1), path.substr(1));
  return p == path.front() && glob_match(pattern.substr(1), path.substr(1));
}

}  // namespace gptutor
