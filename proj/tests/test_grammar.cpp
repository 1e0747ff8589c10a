#include <gtest/gtest.h>

#include <random>

#include "support/errors.hpp"
#include "support/oracles.hpp"
#include "support/random_grammar.hpp"
#include "synpatch/grammar.hpp"

using namespace synpatch;
using synpatch::testing::code_of;

namespace {

const char* kSampleGrammar =
    "X -> m Y | M | u C D v\n"
    "Y -> d Z f\n"
    "Z -> M | k\n"
    "M -> m n\n"
    "C -> m\n"
    "D -> g n h | n d\n";

std::vector<std::string> child_labels(const ParseTree& t, int node, const Grammar& g) {
  std::vector<std::string> out;
  for (int c : t.node(node).children) out.push_back(g.name(t.node(c).label));
  return out;
}

void check_tree_invariants(const ParseTree& t, const Grammar& g) {
  for (std::size_t id = 0; id < t.size(); ++id) {
    const ParseNode& n = t.node(static_cast<int>(id));
    if (n.is_leaf()) {
      EXPECT_EQ(n.end, n.begin + 1);
      continue;
    }
    ASSERT_TRUE(g.is_nonterminal(n.label));
    const Production& prod = g.production(n.production);
    EXPECT_EQ(prod.lhs, n.label);
    ASSERT_EQ(prod.rhs.size(), n.children.size());
    std::size_t at = n.begin;
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      const ParseNode& c = t.node(n.children[i]);
      EXPECT_EQ(c.begin, at);
      at = c.end;
      if (c.is_leaf()) {
        EXPECT_TRUE(g.matches(prod.rhs[i], t.tokens()[c.begin].lexeme));
      } else {
        EXPECT_EQ(c.label, prod.rhs[i]);
      }
    }
    EXPECT_EQ(at, n.end);
  }
}

}  // namespace

TEST(LoadGrammar, SampleGrammarShape) {
  Grammar g = load_grammar(kSampleGrammar);
  EXPECT_EQ(g.name(g.start()), "X");
  EXPECT_EQ(g.productions().size(), 10u);
  std::set<std::string> nts;
  for (SymbolId s : g.nonterminals()) nts.insert(g.name(s));
  EXPECT_EQ(nts, (std::set<std::string>{"X", "Y", "Z", "M", "C", "D"}));
  EXPECT_EQ(g.production_text(0), "X -> m Y");
  EXPECT_EQ(g.production_text(2), "X -> u C D v");
}

TEST(LoadGrammar, Errors) {
  EXPECT_EQ(code_of([] { load_grammar(""); }), Errc::NoStartSymbol);
  EXPECT_EQ(code_of([] { load_grammar("# only a comment\n"); }), Errc::NoStartSymbol);
  EXPECT_EQ(code_of([] { load_grammar("X -> a Q\n"); }), Errc::UndefinedNonterminal);
  EXPECT_EQ(code_of([] { load_grammar("X a b\n"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { load_grammar("X -> a | | b\n"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { load_grammar("| a\n"); }), Errc::SyntaxError);
  EXPECT_EQ(code_of([] { load_grammar("X -> a %empty\n"); }), Errc::SyntaxError);
}

TEST(LoadGrammar, DialectFeatures) {
  Grammar g = load_grammar(
      "S -> A '|' B   # a quoted bar is a terminal\n"
      "  | IDENT\n"
      "A -> %empty | a\n"
      "B -> NUM\n");
  EXPECT_TRUE(g.has_epsilon());
  EXPECT_TRUE(g.nullable(g.symbol("A")));
  EXPECT_FALSE(g.nullable(g.symbol("S")));
  EXPECT_EQ(g.production_text(g.rules_for(g.symbol("A"))[0]), "A -> %empty");
  EXPECT_TRUE(parse(make_program("| 42"), g).has_value());
  EXPECT_TRUE(parse(make_program("a | 7"), g).has_value());
  EXPECT_TRUE(parse(make_program("foo"), g).has_value());
  EXPECT_FALSE(parse(make_program("a |"), g).has_value());
  // Literal keywords are not identifiers.
  EXPECT_FALSE(parse(make_program("a"), g).has_value());
}

TEST(Parse, SampleTrees) {
  Grammar g = load_grammar(kSampleGrammar);
  auto t = parse(make_program("m n"), g);
  ASSERT_TRUE(t);
  EXPECT_EQ(g.name(t->node(t->root()).label), "X");
  EXPECT_EQ(child_labels(*t, t->root(), g), (std::vector<std::string>{"M"}));
  EXPECT_EQ(join_lexemes(dft(*t)), "m n");

  auto u = parse(make_program("u m n d v"), g);
  ASSERT_TRUE(u);
  EXPECT_EQ(child_labels(*u, u->root(), g), (std::vector<std::string>{"u", "C", "D", "v"}));
  int d = u->node(u->root()).children[2];
  EXPECT_EQ(child_labels(*u, d, g), (std::vector<std::string>{"n", "d"}));
  check_tree_invariants(*u, g);

  EXPECT_FALSE(parse(make_program("q"), g).has_value());
  EXPECT_FALSE(parse(make_program(""), g).has_value());
}

TEST(Parse, SingleLeafDft) {
  Grammar g = load_grammar("S -> a\n");
  auto t = parse(make_program("a"), g);
  ASSERT_TRUE(t);
  EXPECT_EQ(join_lexemes(dft(*t)), "a");
  EXPECT_EQ(join_lexemes(dft(*t, t->leaf(0))), "a");
}

TEST(Parse, AmbiguityIsFlaggedAndDeterministic) {
  Grammar g = load_grammar("E -> E + E | a\n");
  auto t1 = parse(make_program("a + a + a"), g);
  auto t2 = parse(make_program("a + a + a"), g);
  ASSERT_TRUE(t1 && t2);
  EXPECT_TRUE(t1->ambiguous());
  ASSERT_EQ(t1->size(), t2->size());
  for (std::size_t i = 0; i < t1->size(); ++i) {
    EXPECT_EQ(t1->node(static_cast<int>(i)).production, t2->node(static_cast<int>(i)).production);
  }
  // Earlier children take the shortest span: (a) + (a + a).
  const ParseNode& root = t1->node(t1->root());
  EXPECT_EQ(t1->node(root.children[0]).end, 1u);
  EXPECT_FALSE(parse(make_program("a"), g)->ambiguous());
}

TEST(Parse, EpsilonAndLeftRecursion) {
  Grammar g = load_grammar("L -> L x | %empty\n");
  for (int n = 0; n < 6; ++n) {
    std::string text;
    for (int i = 0; i < n; ++i) text += "x ";
    auto t = parse(make_program(text), g);
    ASSERT_TRUE(t) << n;
    EXPECT_EQ(dft(*t).size(), static_cast<std::size_t>(n));
  }
}

TEST(Parse, AncestorQueries) {
  Grammar g = load_grammar(kSampleGrammar);
  auto t = parse(make_program("u m n d v"), g);
  ASSERT_TRUE(t);
  for (std::size_t i = 0; i < t->tokens().size(); ++i) {
    EXPECT_TRUE(t->is_ancestor(t->root(), t->leaf(i)));
    EXPECT_FALSE(t->is_ancestor(t->leaf(i), t->root()));
  }
}

TEST(Program, MakeProgramNumbersPositions) {
  Program p = make_program("  a b\tc  ");
  ASSERT_EQ(p.size(), 3u);
  for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(p[i].position, i);
  EXPECT_EQ(lexemes(p), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_TRUE(make_program("").empty());
}

// Every sentence of a random grammar parses, the tree is well formed and
// dft gives the sentence back; strings outside the language are rejected.
TEST(ParseProperty, RoundTripOnRandomGrammars) {
  std::mt19937 rng(20240611);
  int checked = 0;
  while (checked < 150) {
    auto inst = synpatch::testing::random_instance(rng);
    if (!inst) continue;
    ++checked;
    auto t = parse(inst->program, inst->grammar);
    ASSERT_TRUE(t) << inst->bnf << join_lexemes(inst->program);
    EXPECT_EQ(join_lexemes(dft(*t)), join_lexemes(inst->program));
    check_tree_invariants(*t, inst->grammar);

    auto lang = synpatch::testing::bounded_language(inst->grammar, inst->grammar.start(), 5);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<std::string> words;
      int len = 1 + static_cast<int>(rng() % 5);
      for (int i = 0; i < len; ++i) words.push_back(std::string(1, static_cast<char>('a' + rng() % 4)));
      std::string text;
      for (const auto& w : words) text += w + " ";
      EXPECT_EQ(parse(make_program(text), inst->grammar).has_value(), lang.count(words) == 1)
          << inst->bnf << text;
    }
  }
}
