#include "gptutor/prompt.hpp"

#include "gptutor/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gptutor {

std::size_t estimate_tokens(std::string_view text) noexcept {
  return (count_code_points(text) + 3) / 4;
}

std::string render_system_message(const ContextBundle& bundle) {
  return "You are a helpful coding tutor master in " + bundle.language.id() + ".";
}

namespace {

std::string question_line(const ContextBundle& bundle) {
  const std::string& language = bundle.language.id();
  return "Question: why use " + bundle.selected_text + " at " + bundle.cursor_line_text +
         " in the " + language + " code above?";
}

bool has_definition(const ContextBundle& bundle) {
  return bundle.selected_function_name && bundle.resolved_definition_source;
}

std::size_t rendered_tokens(const ContextBundle& bundle) {
  return estimate_tokens(render_system_message(bundle) + render_user_message(bundle));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t begin = 0;
  while (true) {
    const auto nl = text.find('\n', begin);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(begin));
      return lines;
    }
    lines.push_back(text.substr(begin, nl - begin));
    begin = nl + 1;
  }
}

std::string join(const std::vector<std::string_view>& lines, std::size_t lo, std::size_t hi) {
  std::string out;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (i > lo) out += '\n';
    out.append(lines[i]);
  }
  return out;
}

std::string head_lines(const std::vector<std::string_view>& lines, std::size_t keep) {
  std::string out = join(lines, 0, keep - 1);
  if (keep < lines.size()) out += "\n...";
  return out;
}

std::string window(const std::vector<std::string_view>& lines, std::size_t center,
                   std::size_t radius) {
  const std::size_t lo = center > radius ? center - radius : 0;
  const std::size_t hi = std::min(lines.size() - 1, center + radius);
  std::string out;
  if (lo > 0) out += "...\n";
  out += join(lines, lo, hi);
  if (hi + 1 < lines.size()) out += "\n...";
  return out;
}

// Largest value in [lo, hi] accepted by `fits`, assuming acceptance is (mostly) monotone;
// returns nullopt when `lo` itself is rejected.
template <typename Fits>
std::optional<std::size_t> largest_fitting(std::size_t lo, std::size_t hi, Fits fits) {
  if (!fits(lo)) return std::nullopt;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    if (fits(mid)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

void validate(const Budget& budget) {
  if (budget.max_tokens == 0 || !(budget.defining_share > 0.0 && budget.defining_share < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "budget needs max_tokens > 0 and 0 < defining_share < 1");
  }
}

}  // namespace

std::string render_user_message(const ContextBundle& bundle) {
  const std::string& language = bundle.language.id();
  std::string out;
  if (has_definition(bundle)) {
    out += "The following is the source code of the library of " + *bundle.selected_function_name +
           ": \n" + *bundle.resolved_definition_source + "\n";
  }
  out += "The following is the " + language + " code: \n" + bundle.current_code + "\n";
  out += question_line(bundle);
  return out;
}

PromptBundle build_prompt(const ContextBundle& bundle, const Budget& budget, std::string model) {
  validate(budget);
  PromptBundle prompt;
  prompt.system_message = render_system_message(bundle);
  if (estimate_tokens(prompt.system_message + question_line(bundle)) > budget.max_tokens) {
    throw Error(ErrorCode::BudgetTooSmall, "token budget of " + std::to_string(budget.max_tokens) +
                                               " cannot fit the question line");
  }
  prompt.user_message = render_user_message(bundle);
  prompt.model = std::move(model);
  prompt.estimated_tokens = estimate_tokens(prompt.system_message + prompt.user_message);
  prompt.language = bundle.language.id();
  return prompt;
}

ContextBundle fit_to_budget(const ContextBundle& bundle, const Budget& budget) {
  validate(budget);
  const std::size_t limit = budget.max_tokens;
  if (rendered_tokens(bundle) <= limit) return bundle;

  ContextBundle out = bundle;
  const bool with_definition = has_definition(out);
  if (with_definition && out.definition_block &&
      *out.resolved_definition_source != *out.definition_block) {
    out.resolved_definition_source = out.definition_block;
    if (rendered_tokens(out) <= limit) return out;
  }

  const std::string definition = with_definition ? *out.resolved_definition_source : std::string();
  const auto definition_lines = split_lines(definition);
  if (with_definition) {
    const auto share = static_cast<std::size_t>(std::floor(budget.defining_share * limit));
    if (estimate_tokens(definition) > share) {
      const auto keep = largest_fitting(1, definition_lines.size(), [&](std::size_t k) {
        return estimate_tokens(head_lines(definition_lines, k)) <= share;
      });
      out.resolved_definition_source = head_lines(definition_lines, keep.value_or(1));
    }
  }

  const std::string code = bundle.current_code;
  const auto code_lines = split_lines(code);
  const std::size_t center = std::min(out.cursor_line, code_lines.size() - 1);
  const std::size_t max_radius = std::max(center, code_lines.size() - 1 - center);
  auto fits_radius = [&](std::size_t r) {
    ContextBundle probe = out;
    probe.current_code = window(code_lines, center, r);
    return rendered_tokens(probe) <= limit;
  };
  if (auto radius = largest_fitting(0, max_radius, fits_radius)) {
    out.current_code = *radius == max_radius ? code : window(code_lines, center, *radius);
    return out;
  }

  out.current_code = window(code_lines, center, 0);
  if (with_definition) {
    auto fits_head = [&](std::size_t k) {
      ContextBundle probe = out;
      probe.resolved_definition_source = head_lines(definition_lines, k);
      return rendered_tokens(probe) <= limit;
    };
    if (auto keep = largest_fitting(1, definition_lines.size(), fits_head)) {
      out.resolved_definition_source = head_lines(definition_lines, *keep);
      return out;
    }
  } else if (rendered_tokens(out) <= limit) {
    return out;
  }
  throw Error(ErrorCode::BudgetTooSmall,
              "token budget of " + std::to_string(limit) +
                  " cannot fit the cursor line and the first line of the definition");
}

std::string format_golden(const PromptBundle& prompt) {
  return prompt.system_message + "\n---\n" + prompt.user_message + "\n";
}

GoldenPrompt parse_golden(std::string_view text) {
  const auto sep = text.find("\n---\n");
  if (sep == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "golden prompt is missing the --- separator line");
  }
  std::string_view user = text.substr(sep + 5);
  if (!user.empty() && user.back() == '\n') user.remove_suffix(1);
  return {std::string(text.substr(0, sep)), std::string(user)};
}

}  // namespace gptutor
