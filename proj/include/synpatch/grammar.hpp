#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "synpatch/error.hpp"

namespace synpatch {

struct SourceLoc {
  std::string file;
  int line = 0;
  int column = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

/// A lexeme together with its ordinal position in the program it came from.
struct Token {
  std::string lexeme;
  std::size_t position = 0;
  SourceLoc loc;
};

/// Ordered token sequence. Positions strictly increase.
using Program = std::vector<Token>;

/// Builds a program from whitespace-separated lexemes, numbering positions from 0.
Program make_program(std::string_view text, std::string_view file = "<text>");

std::vector<std::string> lexemes(const Program& p);
std::string join_lexemes(const Program& p);

using SymbolId = int;

enum class SymbolKind {
  Nonterminal,
  Literal,  // terminal matched by exact lexeme
  Class,    // terminal matched by lexeme class (IDENT, NUM, CHAR, STRING)
};

struct Production {
  SymbolId lhs = -1;
  std::vector<SymbolId> rhs;
};

/// Context-free grammar loaded from the BNF dialect documented in README.md.
///
/// Productions keep file order; that order drives parse disambiguation.
class Grammar {
 public:
  static Grammar load(std::string_view bnf_text);

  SymbolId start() const { return start_; }
  std::size_t symbol_count() const { return names_.size(); }
  const std::string& name(SymbolId s) const { return names_.at(static_cast<std::size_t>(s)); }
  SymbolKind kind(SymbolId s) const { return kinds_.at(static_cast<std::size_t>(s)); }
  bool is_nonterminal(SymbolId s) const { return kind(s) == SymbolKind::Nonterminal; }
  bool is_terminal(SymbolId s) const { return !is_nonterminal(s); }
  std::optional<SymbolId> find(std::string_view name) const;
  SymbolId symbol(std::string_view name) const;  // throws UnknownNonterminal-style error if absent

  const std::vector<Production>& productions() const { return productions_; }
  const Production& production(int index) const { return productions_.at(static_cast<std::size_t>(index)); }
  /// Production indices with the given lhs, in file order.
  std::span<const int> rules_for(SymbolId nonterminal) const;

  std::vector<SymbolId> nonterminals() const;
  std::vector<SymbolId> terminals() const;

  bool nullable(SymbolId s) const { return nullable_.at(static_cast<std::size_t>(s)); }
  bool has_epsilon() const { return has_epsilon_; }

  /// True iff the terminal symbol accepts the lexeme.
  bool matches(SymbolId terminal, std::string_view lexeme) const;

  /// Terminal symbols accepting the lexeme, in symbol order.
  std::vector<SymbolId> terminals_matching(std::string_view lexeme) const;

  std::string production_text(int index) const;
  std::string rhs_text(const std::vector<SymbolId>& rhs) const;

 private:
  SymbolId intern(const std::string& name, SymbolKind kind);
  void finalize();

  std::vector<std::string> names_;
  std::vector<SymbolKind> kinds_;
  std::unordered_map<std::string, SymbolId> ids_;
  std::vector<Production> productions_;
  std::vector<std::vector<int>> rules_;
  std::vector<bool> nullable_;
  std::unordered_map<std::string, SymbolId> literal_by_lexeme_;
  SymbolId start_ = -1;
  bool has_epsilon_ = false;
};

inline Grammar load_grammar(std::string_view bnf_text) { return Grammar::load(bnf_text); }

/// Parse tree stored as a node arena. Leaves reference tokens of `tokens`.
struct ParseNode {
  SymbolId label = -1;
  int production = -1;  // -1 for leaves
  std::vector<int> children;
  int parent = -1;
  std::size_t begin = 0;  // token span [begin, end)
  std::size_t end = 0;
  int token = -1;  // leaf: index into ParseTree::tokens
  int depth = 0;
  int tin = 0;  // Euler tour interval, for ancestor queries
  int tout = 0;

  bool is_leaf() const { return production < 0; }
};

class ParseTree {
 public:
  ParseTree() = default;
  ParseTree(Program tokens, std::vector<ParseNode> nodes, int root, bool ambiguous);

  int root() const { return root_; }
  const ParseNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return nodes_.size(); }
  const Program& tokens() const { return tokens_; }
  /// Leaf node for the token at index i of the parsed sequence.
  int leaf(std::size_t token_index) const { return leaves_.at(token_index); }
  /// True iff `ancestor` is a proper ancestor of `node`.
  bool is_ancestor(int ancestor, int node) const;
  bool ambiguous() const { return ambiguous_; }

 private:
  Program tokens_;
  std::vector<ParseNode> nodes_;
  std::vector<int> leaves_;
  int root_ = -1;
  bool ambiguous_ = false;
};

/// Parses with a general (Earley) parser. Returns nullopt when p is not in L(G).
///
/// Among several trees the one whose preorder production sequence picks the
/// earliest-listed production at the first divergence wins; within a
/// production, earlier children take the shortest feasible span.
std::optional<ParseTree> parse(const Program& p, const Grammar& g);

/// Leaf tokens in left-to-right order.
Program dft(const ParseTree& t);
Program dft(const ParseTree& t, int node);

}  // namespace synpatch
