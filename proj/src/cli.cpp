#include "gptutor/cli.hpp"

#include "gptutor/error.hpp"
#include "gptutor/server.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace gptutor::cli {
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string workspace;
  std::string config;
  std::string file;
  std::size_t line = 0;
  std::size_t col = 0;
  std::optional<std::size_t> end_line;
  std::optional<std::size_t> end_col;
  std::optional<std::size_t> budget;
  std::optional<std::string> model;
  std::string backend = "live";
  std::optional<std::string> transcripts;
  std::optional<std::string> record;
  bool no_definition = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_workspace(CLI::App& command, Options& opts) {
  command.add_option("--workspace,-w", opts.workspace, "Workspace root")->required();
  command.add_option("--config", opts.config, "Config file (default: <workspace>/gptutor.json)");
}

void add_selection(CLI::App& command, Options& opts) {
  command.add_option("--file,-f", opts.file, "File containing the selection")->required();
  command.add_option("--line,-l", opts.line, "1-based line of the selection start")
      ->required()
      ->check(CLI::PositiveNumber);
  command.add_option("--col,-c", opts.col, "1-based column of the selection start")
      ->required()
      ->check(CLI::PositiveNumber);
  command.add_option("--end-line", opts.end_line, "1-based line of the selection end")
      ->check(CLI::PositiveNumber);
  command.add_option("--end-col", opts.end_col, "1-based column of the selection end (exclusive)")
      ->check(CLI::PositiveNumber);
  command.add_option("--budget", opts.budget, "Token budget for the rendered prompt")
      ->check(CLI::PositiveNumber);
  command.add_option("--model,-m", opts.model, "Model name");
}

ServiceConfig resolve_config(const Options& opts, const Environment& environment) {
  ServiceConfig config;
  config.workspace_root = fs::absolute(opts.workspace).lexically_normal();
  if (!opts.config.empty()) {
    apply_config_file(config, opts.config);
  } else if (const fs::path file = config.workspace_root / kConfigFileName; fs::exists(file)) {
    apply_config_file(config, file);
  }
  apply_environment(config, environment.env);
  if (opts.model) config.llm.model = *opts.model;
  if (opts.budget) config.budget.max_tokens = *opts.budget;
  if (opts.transcripts) config.transcripts = fs::absolute(*opts.transcripts);
  if (auto kind = parse_backend_kind(opts.backend)) config.default_backend = *kind;
  config.resolve_definitions = !opts.no_definition;
  return config;
}

ExplainRequest selection_request(const ExplainService& service, const Options& opts) {
  if (opts.end_line.has_value() != opts.end_col.has_value()) {
    throw UsageError("--end-line and --end-col must be given together");
  }
  const Position start{opts.line - 1, opts.col - 1};
  const Position end = opts.end_line ? Position{*opts.end_line - 1, *opts.end_col - 1} : start;
  return service.make_request(opts.file, start, end, opts.model);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const Environment& environment) {
  Options opts;
  CLI::App app{"Explains selected code with cross-file context", "gptutor"};
  app.require_subcommand(1);

  auto* prompt = app.add_subcommand("prompt", "Print the prompt for a selection (no backend call)");
  add_workspace(*prompt, opts);
  add_selection(*prompt, opts);
  prompt->add_flag("--no-definition", opts.no_definition, "Leave out the definition behind the selection");

  auto* explain = app.add_subcommand("explain", "Explain a selection");
  add_workspace(*explain, opts);
  add_selection(*explain, opts);
  explain->add_option("--backend,-b", opts.backend, "Backend: live, mock or replay")
      ->check(CLI::IsMember({"live", "mock", "replay"}));
  explain->add_option("--transcripts", opts.transcripts, "Transcript store for the replay backend");
  explain->add_option("--record", opts.record, "Append live answers to this transcript store");

  auto* index = app.add_subcommand("index", "Print the symbol index as JSON lines");
  add_workspace(*index, opts);

  auto* serve = app.add_subcommand("serve", "Run the JSON-RPC server on stdio");
  add_workspace(*serve, opts);
  serve->add_option("--backend,-b", opts.backend, "Default backend for explain requests")
      ->check(CLI::IsMember({"live", "mock", "replay"}));
  serve->add_option("--transcripts", opts.transcripts, "Transcript store for the replay backend");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    const ServiceConfig config = resolve_config(opts, environment);
    if (*index) {
      const SymbolIndex symbols = scan_workspace(config.workspace_root, config.index_config);
      for (const auto& skipped : symbols.skipped()) {
        err << "skipped " << skipped.path << ": " << skipped.reason << '\n';
      }
      out << dump_index_jsonl(symbols);
      return 0;
    }
    if (*serve) {
      RpcServer server(config, environment.backends);
      return server.run(environment.in ? *environment.in : std::cin, out);
    }

    BackendFactory factory = environment.backends;
    if (opts.record) {
      const fs::path store = fs::absolute(*opts.record);
      factory = [inner = environment.backends, store](BackendKind kind, const ServiceConfig& cfg) {
        auto backend = inner(kind, cfg);
        if (kind != BackendKind::Live || !backend) return backend;
        return std::shared_ptr<Backend>(std::make_shared<RecordingBackend>(backend, store));
      };
    }
    ExplainService service(config, factory);
    service.rescan();
    const ExplainRequest request = selection_request(service, opts);
    if (*prompt) {
      out << format_golden(service.build_prompt_for(request));
      return 0;
    }
    out << service.handle_explain(request).text << '\n';
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gptutor::cli
