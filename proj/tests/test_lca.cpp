#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/errors.hpp"
#include "support/random_grammar.hpp"
#include "synpatch/lca.hpp"

using namespace synpatch;
using synpatch::testing::code_of;

namespace {

const char* kAssignCall =
    "Comp -> Stmts\n"
    "Stmts -> Stmt Stmts | Stmt\n"
    "Stmt -> Expr ;\n"
    "Expr -> IDENT = Expr | Call\n"
    "Call -> IDENT ( Arg )\n"
    "Arg -> IDENT | Expr\n";

const char* kStmtList =
    "Comp -> Stmts\n"
    "Stmts -> Stmt Stmts | Stmt\n"
    "Stmt -> IDENT ;\n";

}  // namespace

TEST(LcaRelation, NestedChildren) {
  Grammar g = load_grammar("A -> b C D E f\nC -> x\nD -> d\nE -> y\n");
  auto t = parse(make_program("b x d y f"), g);
  ASSERT_TRUE(t);
  LcaRelation r = lca_relation(*t, 1, 3);
  EXPECT_EQ(g.name(r.label), "A");
  EXPECT_EQ(g.production_text(r.production), "A -> b C D E f");
  EXPECT_EQ(r.ix, 2);
  EXPECT_EQ(r.iy, 4);
  EXPECT_EQ(to_string(r, g), "(A, b C D E f, 2, 4)");
}

TEST(LcaRelation, Siblings) {
  Grammar g = load_grammar("S -> a b\n");
  auto t = parse(make_program("a b"), g);
  ASSERT_TRUE(t);
  LcaRelation r = lca_relation(*t, 0, 1);
  EXPECT_EQ(g.name(r.label), "S");
  EXPECT_EQ(r.ix, 1);
  EXPECT_EQ(r.iy, 2);
  EXPECT_EQ(code_of([&] { lca_relation(*t, 1, 1); }), Errc::NotDistinct);
}

TEST(LcaPatch, AssignmentAroundCall) {
  Grammar g = load_grammar(kAssignCall);
  Program p = make_program("var = foo ( a ) ; bar ( b ) ;");
  Fragment s{"x", {2, 8}};
  PatchResult r = lca_patch(p, s, g);
  EXPECT_EQ(join_lexemes(r.patched), "foo ( a ) ; bar ( b ) ;");
  EXPECT_FALSE(r.fallback);
  // Token-level minimality alone merges the two calls.
  EXPECT_EQ(join_lexemes(brute_force_patch(p, s, g, PatchMode::Token).patched), "foo ( b ) ;");
  EXPECT_EQ(join_lexemes(brute_force_patch(p, s, g, PatchMode::Tree).patched), join_lexemes(p));
  EXPECT_EQ(join_lexemes(brute_force_patch(p, s, g, PatchMode::Lca).patched), join_lexemes(r.patched));
}

TEST(LcaPatch, DropsStatementsBetween) {
  Grammar g = load_grammar(kStmtList);
  Program p = make_program("s1 ; s2 ; s3 ; s4 ;");
  Fragment s{"x", {0, 4}};
  PatchResult r = lca_patch(p, s, g);
  EXPECT_EQ(join_lexemes(r.patched), "s1 ; s3 ;");
  EXPECT_EQ(r.origin, (std::vector<std::size_t>{0, 1, 4, 5}));
  EXPECT_EQ(r.added, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(join_lexemes(brute_force_patch(p, s, g, PatchMode::Tree).patched), "s1 ; s2 ; s3 ; s4 ;");
  ASSERT_EQ(r.lca_log.size(), 1u);
}

TEST(LcaPatch, ParsableFragmentIsKept) {
  Grammar g = load_grammar(kStmtList);
  Program p = make_program("s1 ; s2 ; s3 ;");
  Fragment s{"x", {2, 3}};
  PatchResult r = lca_patch(p, s, g);
  EXPECT_EQ(join_lexemes(r.patched), "s2 ;");
  EXPECT_TRUE(r.added.empty());
}

// Any identifier completes "IDENT ;"; the one right before the fragment is used.
TEST(LcaPatch, LeadingTokensComeFromNearestSource) {
  Grammar g = load_grammar(kStmtList);
  Program p = make_program("s1 ; s2 ; s3 ;");
  PatchResult r = lca_patch(p, Fragment{"x", {5}}, g);
  EXPECT_EQ(join_lexemes(r.patched), "s3 ;");
  EXPECT_EQ(r.origin, (std::vector<std::size_t>{4, 5}));
}

TEST(LcaPatch, Errors) {
  Grammar g = load_grammar(kStmtList);
  Program p = make_program("s1 ; s2 ;");
  EXPECT_EQ(code_of([&] { lca_patch(p, Fragment{"x", {}}, g); }), Errc::EmptyFragment);
  EXPECT_EQ(code_of([&] { lca_patch(make_program("s1 s2"), Fragment{"x", {0}}, g); }), Errc::NotRecognized);
  EXPECT_EQ(code_of([&] { brute_force_patch(p, Fragment{"x", {0}}, g, PatchMode::Lca, 2); }), Errc::BoundExceeded);
}

TEST(LcaPatch, AssembleRenumbers) {
  Program p = make_program("a b c d");
  Program q = assemble(p, {1, 3});
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(join_lexemes(q), "b d");
  EXPECT_EQ(q[0].position, 0u);
  EXPECT_EQ(q[1].position, 1u);
}

// On random grammars the search result keeps the fragment, parses, keeps
// every pairwise relation, and is as short as the exhaustive minimum.
TEST(LcaPatchProperty, MatchesExhaustiveSearch) {
  std::mt19937 rng(99);
  int checked = 0;
  while (checked < 250) {
    auto inst = synpatch::testing::random_instance(rng, 8, 10);
    if (!inst) continue;
    const Grammar& g = inst->grammar;
    const Program& p = inst->program;
    const Fragment& s = inst->fragment;
    auto tp = parse(p, g);
    if (!tp || tp->ambiguous()) continue;
    ++checked;
    PatchResult r = lca_patch(p, s, g);
    PatchResult b = brute_force_patch(p, s, g, PatchMode::Lca, 16);
    ASSERT_FALSE(r.fallback);
    EXPECT_EQ(r.patched.size(), b.patched.size()) << inst->bnf << join_lexemes(p);

    ASSERT_TRUE(std::is_sorted(r.origin.begin(), r.origin.end()));
    for (std::size_t pick : s.picks) {
      EXPECT_TRUE(std::binary_search(r.origin.begin(), r.origin.end(), pick));
    }
    auto ts = parse(r.patched, g);
    ASSERT_TRUE(ts) << inst->bnf << join_lexemes(r.patched);
    std::vector<std::size_t> in_s;
    for (std::size_t pick : s.picks) {
      in_s.push_back(static_cast<std::size_t>(std::lower_bound(r.origin.begin(), r.origin.end(), pick) - r.origin.begin()));
    }
    EXPECT_TRUE(preserves_lca(*tp, *ts, s.picks, in_s)) << inst->bnf << join_lexemes(p);
    EXPECT_EQ(r.added.size(), r.patched.size() - s.picks.size());
  }
}
