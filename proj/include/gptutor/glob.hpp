#pragma once

#include <string_view>

namespace gptutor {

// Matches a '/'-separated relative path against a glob.
//   *   any run of characters except '/'
//   **  any run of characters including '/' ("**/" also matches nothing)
//   ?   one character except '/'
bool glob_match(std::string_view pattern, std::string_view path) noexcept;

}  // namespace gptutor
