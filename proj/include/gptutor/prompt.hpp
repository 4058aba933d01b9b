#pragma once

#include "gptutor/context.hpp"

#include <cstddef>
#include <string>
#include <string_view>

namespace gptutor {

struct PromptBundle {
  std::string system_message;
  std::string user_message;
  std::string model;
  std::size_t estimated_tokens = 0;
  std::string language;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

struct Budget {
  std::size_t max_tokens = 3000;
  double defining_share = 0.4;
};

// ceil(code points / 4)
std::size_t estimate_tokens(std::string_view text) noexcept;

std::string render_system_message(const ContextBundle& bundle);
std::string render_user_message(const ContextBundle& bundle);

// Renders the two chat messages. Throws BudgetTooSmall when the system message plus the
// question line alone exceed the budget.
PromptBundle build_prompt(const ContextBundle& bundle, const Budget& budget, std::string model);

// Shrinks the bundle until its rendered prompt fits: definition source -> definition block,
// oversized block -> head of block, current code -> window around the cursor line.
ContextBundle fit_to_budget(const ContextBundle& bundle, const Budget& budget);

// Golden prompt file: system message, a `---` line, user message, trailing newline.
std::string format_golden(const PromptBundle& prompt);

struct GoldenPrompt {
  std::string system_message;
  std::string user_message;
};
GoldenPrompt parse_golden(std::string_view text);

}  // namespace gptutor
