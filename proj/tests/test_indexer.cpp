#include "gptutor/error.hpp"
#include "gptutor/indexer.hpp"

#include "corpus.hpp"
#include "oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace gptutor;
using gptutor::support::TempDir;

namespace {

oracle::Def as_oracle(const SymbolDef& d) {
  return {d.name,
          std::string(to_string(d.kind)),
          d.path,
          {d.span.start.line, d.span.start.character},
          {d.span.end.line, d.span.end.character},
          d.container.value_or("")};
}

std::vector<oracle::Def> as_oracle(const std::vector<SymbolDef>& defs) {
  std::vector<oracle::Def> out;
  for (const auto& d : defs) out.push_back(as_oracle(d));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SymbolDef> defs_of(const std::string& lang, const std::string& text) {
  return index_file("f", text, Language(lang)).defs;
}

void expect_invariants(const SymbolIndex& index) {
  std::multiset<std::tuple<std::string, std::string, Span>> from_path;
  std::multiset<std::tuple<std::string, std::string, Span>> from_name;
  for (const auto& [path, defs] : index.by_path()) {
    EXPECT_TRUE(std::is_sorted(defs.begin(), defs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.path, a.span.start) < std::tie(b.path, b.span.start);
    }));
    const auto source = index.source(path);
    ASSERT_TRUE(source.has_value()) << path;
    const LineTable lines(*source);
    for (const auto& d : defs) {
      EXPECT_EQ(d.path, path);
      EXPECT_LE(d.span.start, d.span.end);
      EXPECT_EQ(lines.slice(d.span), d.body) << d.name;
      EXPECT_EQ(d.signature, trim_newline(std::string_view(d.body).substr(0, d.body.find('\n'))));
      EXPECT_FALSE(d.name.empty());
      from_path.insert({d.name, d.path, d.span});
    }
  }
  for (const auto& [name, defs] : index.by_name()) {
    EXPECT_TRUE(std::is_sorted(defs.begin(), defs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.path, a.span.start) < std::tie(b.path, b.span.start);
    }));
    for (const auto& d : defs) {
      EXPECT_EQ(d.name, name);
      from_name.insert({d.name, d.path, d.span});
    }
  }
  EXPECT_EQ(from_path, from_name);
  EXPECT_EQ(std::set(from_path.begin(), from_path.end()).size(), from_path.size());
}

}  // namespace

TEST(IndexFile, AttendeeDefiningFileHasThreeDefinitions) {
  const std::string text = support::read_text(support::fixture("attendee/attendeeManager.py"));
  const auto defs = index_file("attendeeManager.py", text, Language("python")).defs;
  ASSERT_EQ(defs.size(), 3u);
  EXPECT_EQ(defs[0].name, "AttendeeManager");
  EXPECT_EQ(defs[0].kind, SymbolKind::Class);
  EXPECT_EQ(defs[1].name, "__init__");
  EXPECT_EQ(defs[1].kind, SymbolKind::Method);
  EXPECT_EQ(defs[1].container, "AttendeeManager");
  const SymbolDef& add = defs[2];
  EXPECT_EQ(add.name, "add_attendee");
  EXPECT_EQ(add.kind, SymbolKind::Method);
  EXPECT_EQ(add.signature, "def add_attendee(self, email, name=None, id=None, voucher=None):");
  EXPECT_TRUE(add.body.ends_with("self.mongo_col.insert_one(attendee)"));
  EXPECT_EQ(add.defining_file_size, count_code_points(text));
}

TEST(IndexFile, MinimalPythonConstant) {
  const auto defs = defs_of("python", "x = 1\n");
  ASSERT_EQ(defs.size(), 1u);
  EXPECT_EQ(defs[0].name, "x");
  EXPECT_EQ(defs[0].kind, SymbolKind::Constant);
  EXPECT_EQ(defs[0].body, "x = 1");
}

TEST(IndexFile, PythonNonLiteralAssignmentIsNotAConstant) {
  EXPECT_TRUE(defs_of("python", "manager = Manager()\n").empty());
  EXPECT_TRUE(defs_of("python", "    y = 1\n").empty());
  EXPECT_TRUE(defs_of("python", "x == 1\n").empty());
  EXPECT_EQ(defs_of("python", "N: int = 3\n").size(), 1u);
}

TEST(IndexFile, PlaintextIsFlaggedNotThrown) {
  const auto out = index_file("README", "def f():\n  pass\n", Language::plaintext());
  EXPECT_TRUE(out.unsupported_language);
  EXPECT_TRUE(out.defs.empty());
}

TEST(IndexFile, PythonBlockSkipsTrailingBlankAndCommentLines) {
  const std::string text = "def f():\n    a = 1\n\n    # note\n    return a\n\n# after\nx = 2\n";
  const auto defs = defs_of("python", text);
  ASSERT_EQ(defs.size(), 2u);
  EXPECT_EQ(defs[0].body, "def f():\n    a = 1\n\n    # note\n    return a");
  EXPECT_EQ(defs[0].span.end, (Position{4, 12}));
}

TEST(IndexFile, JavascriptForms) {
  const std::string text =
      "export const A = {\n  k: \"}\",\n};\n"
      "const f = (x) => x;\n"
      "function g(a) {\n  // }\n  return `}${a}`;\n}\n"
      "class K {\n  m() { return '}'; }\n}\n";
  const auto defs = defs_of("javascript", text);
  ASSERT_EQ(defs.size(), 4u);
  EXPECT_EQ(defs[0].name, "A");
  EXPECT_EQ(defs[0].kind, SymbolKind::Constant);
  EXPECT_EQ(defs[0].body, "export const A = {\n  k: \"}\",\n};");
  EXPECT_EQ(defs[1].name, "f");
  EXPECT_EQ(defs[1].body, "const f = (x) => x;");
  EXPECT_EQ(defs[2].name, "g");
  EXPECT_EQ(defs[2].body, "function g(a) {\n  // }\n  return `}${a}`;\n}");
  EXPECT_EQ(defs[3].name, "K");
  EXPECT_EQ(defs[3].kind, SymbolKind::Class);
  EXPECT_EQ(defs[3].span.end, (Position{10, 1}));
}

TEST(IndexFile, RustForms) {
  const std::string text =
      "struct P<'a> { s: &'a str }\n"
      "impl<'a> fmt::Display for P<'a> {\n"
      "    fn fmt(&self) -> char { '}' }\n"
      "}\n"
      "pub struct U;\n";
  const auto defs = defs_of("rust", text);
  ASSERT_EQ(defs.size(), 4u);
  EXPECT_EQ(defs[0].name, "P");
  EXPECT_EQ(defs[0].body, "struct P<'a> { s: &'a str }");
  EXPECT_EQ(defs[1].name, "P");
  EXPECT_EQ(defs[1].kind, SymbolKind::Class);
  EXPECT_EQ(defs[1].span.end, (Position{3, 1}));
  EXPECT_EQ(defs[2].name, "fmt");
  EXPECT_EQ(defs[2].kind, SymbolKind::Method);
  EXPECT_EQ(defs[2].container, "P");
  EXPECT_EQ(defs[3].name, "U");
  EXPECT_EQ(defs[3].body, "pub struct U;");
}

TEST(IndexFile, GoForms) {
  const std::string text =
      "type ID int\n"
      "type S struct {\n\tx int\n}\n"
      "func (s *S) Run(a int) error {\n\tr := `}`\n\treturn nil\n}\n"
      "func decl(a int) int\n";
  const auto defs = defs_of("go", text);
  ASSERT_EQ(defs.size(), 4u);
  EXPECT_EQ(defs[0].body, "type ID int");
  EXPECT_EQ(defs[1].span.end, (Position{3, 1}));
  EXPECT_EQ(defs[2].name, "Run");
  EXPECT_EQ(defs[2].kind, SymbolKind::Method);
  EXPECT_EQ(defs[2].container, "S");
  EXPECT_EQ(defs[2].span.end, (Position{7, 1}));
  EXPECT_EQ(defs[3].body, "func decl(a int) int");
}

TEST(IndexFile, UnterminatedBraceRunsToEndOfText) {
  const auto defs = defs_of("javascript", "function f() {\n  if (x) {\n");
  ASSERT_EQ(defs.size(), 1u);
  EXPECT_EQ(defs[0].span.end, (Position{2, 0}));
}

TEST(IndexFile, RandomNestedPythonMatchesIndentationOracle) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    corpus::Gen g(seed);
    const std::string text = corpus::python_file(g);
    EXPECT_EQ(as_oracle(index_file("n.py", text, Language("python")).defs),
              oracle::scan_text("python", "n.py", text))
        << "seed " << seed << "\n" << text;
  }
}

TEST(IndexFile, EveryLanguageMatchesOracleOnGeneratedFiles) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    for (const auto& lang : corpus::languages()) {
      corpus::Gen g(seed * 31 + lang.size());
      const std::string text = corpus::file_for(g, lang);
      EXPECT_EQ(as_oracle(index_file("g", text, Language(lang)).defs), oracle::scan_text(lang, "g", text))
          << lang << " seed " << seed << "\n" << text;
    }
  }
}

TEST(ScanWorkspace, AttendeeFixture) {
  const SymbolIndex index = scan_workspace(support::fixture("attendee"));
  std::set<std::string> names;
  for (const auto& [name, defs] : index.by_name()) names.insert(name);
  EXPECT_EQ(names, (std::set<std::string>{"AttendeeManager", "__init__", "add_attendee"}));
  EXPECT_EQ(index.file_count(), 2u);
  EXPECT_TRUE(index.skipped().empty());
  expect_invariants(index);
}

TEST(ScanWorkspace, EmptyDirectory) {
  TempDir dir;
  const SymbolIndex index = scan_workspace(dir.path());
  EXPECT_EQ(index.definition_count(), 0u);
  EXPECT_TRUE(index.skipped().empty());
}

TEST(ScanWorkspace, MissingRootThrows) {
  TempDir dir;
  try {
    scan_workspace(dir / "nope");
    FAIL() << "expected RootNotFound";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RootNotFound);
  }
}

TEST(ScanWorkspace, OversizedFilesAreSkippedAndRecorded) {
  TempDir dir;
  dir.write("big.py", "x = 1\n" + std::string(2000, '#'));
  dir.write("small.py", "y = 2\n");
  IndexConfig config;
  config.max_file_size = 1000;
  const SymbolIndex index = scan_workspace(dir.path(), config);
  ASSERT_EQ(index.skipped().size(), 1u);
  EXPECT_EQ(index.skipped()[0].path, "big.py");
  EXPECT_EQ(index.definition_count(), 1u);
}

TEST(ScanWorkspace, ExcludeGlobsAndPlaintextAreIgnored) {
  TempDir dir;
  dir.write("node_modules/lib/index.js", "function hidden() {}\n");
  dir.write(".git/hooks/x.py", "def hidden(): pass\n");
  dir.write("notes.txt", "def hidden(): pass\n");
  dir.write("web/app.js", "function shown() {}\n");
  const SymbolIndex index = scan_workspace(dir.path());
  EXPECT_TRUE(index.definitions_named("hidden").empty());
  EXPECT_EQ(index.definitions_named("shown").size(), 1u);
  EXPECT_EQ(index.file_count(), 1u);
  EXPECT_TRUE(index.skipped().empty());
}

TEST(ScanWorkspace, InvalidUtf8IsReplacedBeforeIndexing) {
  TempDir dir;
  dir.write("a.py", "def f\xff():\n    pass\ndef g():\n    pass\n");
  const SymbolIndex index = scan_workspace(dir.path());
  EXPECT_EQ(index.definitions_named("g").size(), 1u);
  EXPECT_EQ(index.source("a.py")->find('\xff'), std::string_view::npos);
}

TEST(ScanWorkspace, CorpusSetEqualsOracleAndIsDeterministic) {
  TempDir dir;
  corpus::write_corpus(dir.path(), 2024);
  const SymbolIndex index = scan_workspace(dir.path());
  const auto expected = oracle::scan_tree(dir.path());
  EXPECT_GE(expected.size(), 300u);
  EXPECT_EQ(as_oracle(index.all_definitions()), expected);
  expect_invariants(index);
  EXPECT_EQ(dump_index_jsonl(index), dump_index_jsonl(scan_workspace(dir.path())));
}

TEST(InvalidatePath, ReAddingIdenticalContentIsIdentity) {
  const SymbolIndex original = scan_workspace(support::fixture("attendee"));
  const std::string text(*original.source("attendeeManager.py"));
  const SymbolIndex dropped = invalidate_path(original, "attendeeManager.py", std::nullopt);
  EXPECT_NE(dropped, original);
  EXPECT_EQ(invalidate_path(dropped, "attendeeManager.py", text), original);
  EXPECT_EQ(invalidate_path(original, "attendeeManager.py", text), original);
}

TEST(InvalidatePath, DeletingDefiningFileEmptiesLookup) {
  const SymbolIndex original = scan_workspace(support::fixture("attendee"));
  const SymbolIndex dropped = invalidate_path(original, "attendeeManager.py", std::nullopt);
  QueryContext ctx{"main.py", {"attendeeManager", "AttendeeManager"}, std::nullopt};
  EXPECT_EQ(lookup_definitions(original, "add_attendee", ctx).size(), 1u);
  EXPECT_TRUE(lookup_definitions(dropped, "add_attendee", ctx).empty());
  expect_invariants(dropped);
}

TEST(InvalidatePath, RandomEditsMatchFreshScan) {
  TempDir dir;
  auto paths = corpus::write_corpus(dir.path(), 99, 30);
  SymbolIndex index = scan_workspace(dir.path());
  corpus::Gen g(5);
  for (int step = 0; step < 60; ++step) {
    const std::string& path = paths[static_cast<std::size_t>(g.pick(0, static_cast<int>(paths.size()) - 1))];
    if (g.chance(0.2)) {
      std::filesystem::remove(dir / path);
      index = invalidate_path(index, path, std::nullopt);
    } else {
      const std::string lang = detect_language(path).id();
      const std::string text = corpus::file_for(g, lang);
      support::write_text(dir / path, text);
      index = invalidate_path(index, path, text);
    }
  }
  EXPECT_EQ(index, scan_workspace(dir.path()));
  expect_invariants(index);
}

TEST(InvalidatePath, AppliesScanFilters) {
  const SymbolIndex index = scan_workspace(support::fixture("attendee"));
  EXPECT_EQ(invalidate_path(index, "node_modules/x.py", std::string("x = 1\n")), index);
  EXPECT_EQ(invalidate_path(index, "notes.txt", std::string("x = 1\n")), index);
}

TEST(ImportedNames, PythonFromImport) {
  const std::string main = support::read_text(support::fixture("attendee/main.py"));
  const auto names = imported_names(main, Language("python"));
  EXPECT_NE(std::find(names.begin(), names.end(), "attendeeManager"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "AttendeeManager"), names.end());
}

TEST(ImportedNames, AreAlwaysIdentifiers) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& lang : corpus::languages()) {
      corpus::Gen g(seed);
      const std::string text = corpus::file_for(g, lang) + "import \"./weird-name.js\"\nuse a::{b, c};\n";
      for (const auto& name : imported_names(text, Language(lang))) EXPECT_TRUE(is_identifier(name)) << name;
    }
  }
  const auto js = imported_names("import { helper } from \"./util\";\nconst x = require('../lib/dep.js');\n",
                                 Language("javascript"));
  EXPECT_NE(std::find(js.begin(), js.end(), "util"), js.end());
  EXPECT_NE(std::find(js.begin(), js.end(), "dep"), js.end());
}

TEST(Lookup, RanksImportedModuleFirst) {
  const SymbolIndex index = scan_workspace(support::fixture("attendee"));
  const std::string main(*index.source("main.py"));
  QueryContext ctx{"main.py", imported_names(main, Language("python")), "attendeeManager"};
  const auto defs = lookup_definitions(index, "add_attendee", ctx);
  ASSERT_FALSE(defs.empty());
  EXPECT_EQ(defs[0].path, "attendeeManager.py");
  EXPECT_TRUE(lookup_definitions(index, "no_such_symbol", ctx).empty());
}

TEST(Lookup, TierOrderMatchesExhaustiveEnumeration) {
  TempDir dir;
  dir.write("app/main.py", "import helpers\n\ndef run():\n    pass\n");
  dir.write("app/sibling.py", "def run():\n    pass\n");
  dir.write("lib/helpers.py", "def run():\n    pass\nclass X:\n    def run(self):\n        pass\n");
  dir.write("other/zeta.py", "def run():\n    pass\n");
  dir.write("other/alpha.py", "def run():\n    pass\n");
  const SymbolIndex index = scan_workspace(dir.path());
  const std::vector<QueryContext> contexts = {
      {"app/main.py", {"helpers"}, std::nullopt},
      {"app/main.py", {}, std::nullopt},
      {"other/zeta.py", {"sibling"}, std::nullopt},
      {"nowhere/x.py", {}, std::nullopt},
  };
  for (const auto& ctx : contexts) {
    auto expected = index.all_definitions();
    std::erase_if(expected, [](const SymbolDef& d) { return d.name != "run"; });
    auto tier = [&](const SymbolDef& d) {
      const std::filesystem::path p(d.path);
      if (d.path == ctx.from_path) return 1;
      if (std::find(ctx.imported_names.begin(), ctx.imported_names.end(), p.stem().string()) !=
          ctx.imported_names.end()) {
        return 2;
      }
      if (p.parent_path() == std::filesystem::path(ctx.from_path).parent_path()) return 3;
      return 4;
    };
    std::sort(expected.begin(), expected.end(), [&](const SymbolDef& a, const SymbolDef& b) {
      return std::make_tuple(tier(a), a.path, a.span.start) < std::make_tuple(tier(b), b.path, b.span.start);
    });
    const auto actual = lookup_definitions(index, "run", ctx);
    EXPECT_EQ(actual, expected) << ctx.from_path;
    EXPECT_EQ(actual, lookup_definitions(index, "run", ctx));
  }
}

TEST(DumpIndex, StableFieldOrder) {
  const SymbolIndex index = scan_workspace(support::fixture("attendee"));
  const std::string dump = dump_index_jsonl(index);
  const std::string first = dump.substr(0, dump.find('\n'));
  const std::vector<std::string> fields = {"\"name\"", "\"kind\"", "\"path\"", "\"span\"", "\"container\"",
                                           "\"signature\"", "\"body\"", "\"defining_file_size\""};
  std::size_t last = 0;
  for (const auto& f : fields) {
    const auto at = first.find(f);
    ASSERT_NE(at, std::string::npos) << f;
    EXPECT_GE(at, last) << f;
    last = at;
  }
  EXPECT_EQ(std::count(dump.begin(), dump.end(), '\n'), 3);
}
