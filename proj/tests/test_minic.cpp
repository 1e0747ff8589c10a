#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "support/errors.hpp"
#include "support/random_minic.hpp"
#include "synpatch/minic.hpp"
#include "synpatch/semantics.hpp"

using namespace synpatch;
using synpatch::testing::code_of;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

minic::Unit checked(const std::string& text) {
  minic::Unit u = minic::parse_unit(minic::lex(text, "t.c"));
  minic::type_check(u);
  return u;
}

Fragment lines_of(const Program& p, std::vector<int> lines) {
  Fragment f{p.front().loc.file, {}};
  for (const auto& t : p) {
    if (std::find(lines.begin(), lines.end(), t.loc.line) != lines.end()) f.picks.push_back(t.position);
  }
  return f;
}

}  // namespace

TEST(Lexer, TokensCarryLocations) {
  Program p = minic::lex("int x = 'a' ;\n  p->next = q != 0 ; // tail\n/* c\n */ y", "a.c");
  EXPECT_EQ(lexemes(p), (std::vector<std::string>{"int", "x", "=", "'a'", ";", "p", "->", "next", "=", "q", "!=",
                                                   "0", ";", "y"}));
  EXPECT_EQ(p[0].loc.line, 1);
  EXPECT_EQ(p[5].loc.line, 2);
  EXPECT_EQ(p[5].loc.column, 3);
  EXPECT_EQ(p[13].loc.line, 4);
  EXPECT_EQ(p[13].loc.file, "a.c");
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i].position, i);
  EXPECT_EQ(lexemes(minic::lex("'\\n'", "a.c")), (std::vector<std::string>{"'\\n'"}));
}

TEST(Lexer, Errors) {
  EXPECT_EQ(code_of([] { minic::lex("x @ y", "a.c"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { minic::lex("/* open", "a.c"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { minic::lex("12ab", "a.c"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { minic::lex("'ab'", "a.c"); }), Errc::SyntaxError);
}

TEST(Render, OneLinePerSourceLine) {
  Program p = minic::lex("int f ( ) {\n  return   1 ;\n}\n", "a.c");
  EXPECT_EQ(minic::render(p), "int f ( ) {\nreturn 1 ;\n}\n");
  EXPECT_EQ(minic::render(Program{}), "");
}

TEST(Parse, UnitStructure) {
  minic::Unit u = checked(
      "struct node { int val ; struct node * next ; } ;\n"
      "int table [ 4 ] ;\n"
      "int get ( struct node * n ) { if ( n == null ) return 0 ; return n -> val ; }\n"
      "int main ( ) { int i ; for ( i = 0 ; i < 4 ; i = i + 1 ) table [ i ] = i ; return get ( null ) ; }\n");
  ASSERT_EQ(u.structs.size(), 1u);
  EXPECT_EQ(u.structs[0].fields.size(), 2u);
  ASSERT_EQ(u.globals.size(), 1u);
  EXPECT_EQ(minic::declare(*u.globals[0].type, "table"), "int table [ 4 ]");
  ASSERT_EQ(u.functions.size(), 2u);
  ASSERT_NE(u.function("get"), nullptr);
  EXPECT_EQ(u.function("nope"), nullptr);
  EXPECT_EQ(u.order.size(), 4u);
  EXPECT_EQ(minic::cell_count(*minic::struct_type("node"), u), 2);
  EXPECT_EQ(minic::cell_count(*u.globals[0].type, u), 4);
  EXPECT_EQ(minic::field_offset(u.structs[0], "next", u).first, 1);
}

TEST(Parse, RejectsNonMiniC) {
  EXPECT_EQ(code_of([] { minic::parse_unit(minic::lex("int f ( ) { return 1 }", "a.c")); }), Errc::NotRecognized);
  EXPECT_EQ(code_of([] { minic::parse_unit(minic::lex("int f ( ) { break ; }", "a.c")); }), Errc::NotRecognized);
  EXPECT_TRUE(minic::is_keyword("while"));
  EXPECT_FALSE(minic::is_keyword("whilst"));
}

TEST(TypeCheck, Errors) {
  auto bad = [](const std::string& text) { return code_of([&] { checked(text); }); };
  EXPECT_EQ(bad("int f ( ) { return y ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int f ( ) { int * p ; int x ; x = p ; return x ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int f ( ) { int a [ 2 ] ; int b [ 2 ] ; a = b ; return 0 ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int f ( ) { int x ; return * x ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int f ( ) { return g ( 1 ) ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int g ( int a ) { return a ; } int f ( ) { return g ( ) ; }"), Errc::TypeError);
  EXPECT_EQ(bad("void f ( ) { return 1 ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int f ( ) { return 0 ; } int f ( ) { return 1 ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int f ( struct s * p ) { return 0 ; }"), Errc::TypeError);
  EXPECT_EQ(bad("struct s { int a ; } ; int f ( struct s * p ) { return p -> b ; }"), Errc::TypeError);
  EXPECT_EQ(bad("int f ( ) { int x ; free ( x ) ; return 0 ; }"), Errc::TypeError);
}

TEST(TypeCheck, AnnotatesExpressions) {
  minic::Unit u = checked("char c ; int f ( char * s ) { return s [ 0 ] + c ; }");
  const auto& ret = u.functions[0].body->stmts.at(0);
  ASSERT_EQ(ret->kind, minic::Stmt::Kind::Return);
  ASSERT_TRUE(ret->expr->type);
  EXPECT_EQ(ret->expr->type->kind, minic::Type::Kind::Int);
}

TEST(Patch, WithLoopHeadsAddsEnclosingLoopKeywords) {
  Program p = minic::lex(read_file(SYNPATCH_SOURCE_DIR "/tests/data/nested_loops.c"), "nested_loops.c");
  Fragment s = lines_of(p, {9});
  Fragment w = minic::with_loop_heads(p, s);
  EXPECT_EQ(join_lexemes(w.tokens(p)), "while if ( c ) break ;");
}

// Lines 8, 9 and 11 sit in two nested loops; the patch keeps both loops so
// the break still leaves the inner one and z = 3 stays in the outer body.
TEST(Patch, NestedLoopFixture) {
  Program p = minic::lex(read_file(SYNPATCH_SOURCE_DIR "/tests/data/nested_loops.c"), "nested_loops.c");
  Fragment s = lines_of(p, {8, 9, 11});
  PatchResult r = minic::patch(p, s);
  EXPECT_FALSE(r.fallback);
  EXPECT_EQ(minic::render(r.patched),
            "int f ( ) {\nwhile ( x ) {\nwhile ( y ) {\ny = y + 1 ;\nif ( c ) break ;\n}\nz = 3 ;\n}\n}\n");
  auto tp = parse(p, minic::grammar());
  auto ts = parse(r.patched, minic::grammar());
  ASSERT_TRUE(tp && ts);
  EXPECT_TRUE(minic::keep_loops(s)(*tp, *ts, r.origin));
  for (std::size_t i : r.added) EXPECT_LT(i, r.patched.size());
  EXPECT_EQ(r.patched.size(), s.picks.size() + r.added.size());
}

// Every generated program parses, type checks after declaring its
// variables, and renders back to the same tokens.
TEST(MiniCProperty, GeneratedProgramsRoundTrip) {
  synpatch::testing::MiniCGenerator gen(5);
  for (int i = 0; i < 100; ++i) {
    std::string text = gen.program();
    Program p = minic::lex(text, "r.c");
    ASSERT_NO_THROW(minic::parse_unit(p)) << text;
    EXPECT_EQ(lexemes(minic::lex(minic::render(p), "r.c")), lexemes(p));
    auto t = parse(p, minic::grammar());
    ASSERT_TRUE(t);
    EXPECT_EQ(join_lexemes(dft(*t)), join_lexemes(p));
  }
}

// minic::patch keeps the fragment and produces a MiniC program.
TEST(MiniCProperty, PatchesParse) {
  synpatch::testing::MiniCGenerator gen(11);
  for (int i = 0; i < 60; ++i) {
    std::string text = gen.program(30);
    Program p = minic::lex(text, "r.c");
    Fragment s = gen.fragment(p);
    PatchResult r = minic::patch(p, s);
    if (r.fallback) continue;
    EXPECT_TRUE(is_subsequence(s.tokens(p), r.patched)) << text;
    EXPECT_NO_THROW(minic::parse_unit(r.patched)) << text << minic::render(r.patched);
  }
}
