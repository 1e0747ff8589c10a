#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "support/errors.hpp"
#include "synpatch/deps.hpp"

using namespace synpatch;
using synpatch::testing::code_of;

namespace {

const char* kUtil =
    "int LIMIT = 8 ;\n"
    "int counter ;\n"
    "struct pair { int a ; int b ; } ;\n"
    "int helper ( int v ) { return v + LIMIT ; }\n";

const char* kMain =
    "int scale = 3 ;\n"
    "int twice ( int v ) { return helper ( v ) * 2 ; }\n"
    "int use ( int n , int m ) {\n"
    "  int acc ;\n"
    "  int k = 0 ;\n"
    "  acc = twice ( n ) + scale ;\n"
    "  k = k + m ;\n"
    "  counter = acc + k ;\n"
    "  return counter ;\n"
    "}\n";

deps::Project project() {
  return {{"util.c", minic::lex(kUtil, "util.c")}, {"main.c", minic::lex(kMain, "main.c")}};
}

// The tokens of p on the given lines.
Program lines_of(const Program& p, std::vector<int> lines) {
  Program out;
  for (const auto& t : p) {
    if (std::find(lines.begin(), lines.end(), t.loc.line) != lines.end()) out.push_back(t);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].position = i;
  return out;
}

std::vector<std::string> names(const std::vector<deps::InputVar>& vars) {
  std::vector<std::string> out;
  for (const auto& v : vars) out.push_back(v.name);
  return out;
}

}  // namespace

TEST(DefDb, IndexesProject) {
  deps::DefDb db = deps::index_definitions(project());
  const auto* limit = db.global("LIMIT", deps::DefKind::Var);
  ASSERT_NE(limit, nullptr);
  EXPECT_EQ(limit->file, "util.c");
  EXPECT_EQ(limit->value, 8);
  EXPECT_NE(db.global("pair", deps::DefKind::Type), nullptr);
  const auto* helper = db.global("helper", deps::DefKind::Func);
  const auto* use = db.global("use", deps::DefKind::Func);
  ASSERT_TRUE(helper && use);
  EXPECT_LT(helper->ordinal, use->ordinal);
  EXPECT_EQ(join_lexemes(helper->tokens), "int helper ( int v ) { return v + LIMIT ; }");
  EXPECT_EQ(db.global("helper", deps::DefKind::Var), nullptr);

  auto n = db.locals("use", "n");
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0]->depth, 1);
  auto acc = db.locals("use", "acc");
  ASSERT_EQ(acc.size(), 1u);
  EXPECT_GE(acc[0]->depth, 2);
  EXPECT_TRUE(db.locals("twice", "acc").empty());
  ASSERT_EQ(db.structs_with_field("b").size(), 1u);
  EXPECT_TRUE(db.warnings().empty());
}

TEST(DefDb, OrdinalsFollowFileOrderThenPosition) {
  deps::DefDb db = deps::index_definitions(project());
  std::size_t prev = 0;
  std::string prev_file;
  for (const auto& d : db.entries()) {
    if (!d.scope.empty()) continue;
    EXPECT_GE(d.ordinal, prev) << d.name;
    prev = d.ordinal;
  }
  EXPECT_LT(db.global("counter", deps::DefKind::Var)->ordinal, db.global("scale", deps::DefKind::Var)->ordinal);
}

TEST(DefDb, DuplicateDefinitionKeepsLastAndWarns) {
  deps::Project p{{"a.c", minic::lex("int g = 1 ;\n", "a.c")}, {"b.c", minic::lex("int g = 2 ;\n", "b.c")}};
  deps::DefDb db = deps::index_definitions(p);
  ASSERT_EQ(db.warnings().size(), 1u);
  EXPECT_NE(db.warnings()[0].find("DuplicateDefinition"), std::string::npos);
  EXPECT_EQ(db.global("g", deps::DefKind::Var)->file, "b.c");
}

TEST(DefDb, UnparsableItemIsSkipped) {
  deps::Project p{{"a.c", minic::lex("int x = ;\nint ok ( ) { return 1 ; }\n", "a.c")}};
  deps::DefDb db = deps::index_definitions(p);
  EXPECT_FALSE(db.warnings().empty());
  EXPECT_NE(db.global("ok", deps::DefKind::Func), nullptr);
  EXPECT_EQ(db.global("x", deps::DefKind::Var), nullptr);
}

TEST(Resolve, PullsCalleesBeforeCallers) {
  deps::Project proj = project();
  deps::DefDb db = deps::index_definitions(proj);
  Program patched = lines_of(proj[1].second, {3, 6, 10});
  deps::CompilableUnit cu = deps::resolve_dependencies({patched}, db);
  EXPECT_EQ(cu.entry, "use");
  EXPECT_EQ(cu.patched_functions, std::vector<std::string>{"use"});
  EXPECT_EQ(cu.preamble,
            (std::vector<std::string>{"var LIMIT", "func helper", "var scale", "func twice"}));
  EXPECT_EQ(cu.declared, std::vector<std::string>{"acc"});
  EXPECT_LT(cu.patched_begin, cu.tokens.size());
  EXPECT_NE(cu.unit.function("helper"), nullptr);
  EXPECT_NE(cu.unit.function("use"), nullptr);
}

TEST(Resolve, UnknownSymbolFails) {
  deps::DefDb db = deps::index_definitions(project());
  Program patched = minic::lex("int f ( ) {\n  return mystery ( 1 ) ;\n}\n", "x.c");
  EXPECT_EQ(code_of([&] { deps::resolve_dependencies({patched}, db); }), Errc::UnresolvableSymbol);
}

TEST(InputVars, ParamsUninitializedLocalsAndFreeVariables) {
  deps::Project proj = project();
  deps::DefDb db = deps::index_definitions(proj);
  Program patched = lines_of(proj[1].second, {3, 4, 5, 6, 7, 8, 9, 10});
  deps::CompilableUnit cu = deps::resolve_dependencies({patched}, db);
  // Entry parameters are inputs; acc is assigned before use, k has an
  // initializer and counter is written first.
  EXPECT_EQ(names(cu.input_vars), (std::vector<std::string>{"n", "m"}));

  Program partial = lines_of(proj[1].second, {3, 7, 8, 10});
  deps::CompilableUnit cp = deps::resolve_dependencies({partial}, db);
  auto vars = cp.input_vars;
  ASSERT_EQ(names(vars), (std::vector<std::string>{"n", "m", "k", "acc"}));
  EXPECT_EQ(vars[0].origin, deps::InputVar::Origin::Param);
  EXPECT_EQ(vars[1].origin, deps::InputVar::Origin::Param);
  EXPECT_EQ(vars[2].origin, deps::InputVar::Origin::Free);
  EXPECT_EQ(vars[3].origin, deps::InputVar::Origin::Free);
  EXPECT_FALSE(vars[3].known.has_value());
  EXPECT_EQ(deps::to_string(deps::InputVar::Origin::Param), "param");
}

TEST(InputVars, AllCapsNamesAreConstants) {
  deps::DefDb db = deps::index_definitions(project());
  Program patched = minic::lex("int f ( ) {\n  return LIMIT + 1 ;\n}\n", "x.c");
  deps::CompilableUnit cu = deps::resolve_dependencies({patched}, db);
  EXPECT_TRUE(cu.input_vars.empty());
  EXPECT_EQ(cu.preamble, std::vector<std::string>{"var LIMIT"});
  Program undefined = minic::lex("int f ( ) {\n  return MAXLEN ;\n}\n", "x.c");
  EXPECT_EQ(code_of([&] { deps::resolve_dependencies({undefined}, db); }), Errc::UnresolvableSymbol);
}

TEST(Manifest, ReadsFilesRelativeToManifest) {
  auto dir = std::filesystem::temp_directory_path() / "synpatch_deps_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "util.c") << kUtil;
  std::ofstream(dir / "main.c") << kMain;
  std::ofstream(dir / "manifest.txt") << "# build order\nutil.c\n\nmain.c\n";
  deps::Project p = deps::read_project((dir / "manifest.txt").string());
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p[0].first, "util.c");
  EXPECT_EQ(p[1].second.front().loc.file, "main.c");
  std::ofstream(dir / "bad.txt") << "missing.c\n";
  EXPECT_EQ(code_of([&] { deps::read_project((dir / "bad.txt").string()); }), Errc::IoError);
  EXPECT_EQ(code_of([&] { deps::read_project((dir / "none.txt").string()); }), Errc::IoError);
  std::filesystem::remove_all(dir);
}
