#pragma once

#include <climits>
#include <optional>
#include <string>
#include <vector>

#include "synpatch/grammar.hpp"

namespace synpatch {

inline constexpr int kInfiniteCost = INT_MAX / 4;

struct DgNode {
  enum class Kind { Nonterminal, Rhs };
  Kind kind = Kind::Nonterminal;
  SymbolId symbol = -1;  // the nonterminal, or the lhs for an rhs node
  int production = -1;   // rhs nodes only
};

/// Nonterminal -> rhs, weighted by the number of terminals in the rhs.
struct TypeIEdge {
  int from = -1;
  int to = -1;
  int weight = 0;
};

/// Rhs -> nonterminal, one per nonterminal occurrence in the rhs.
struct TypeIIEdge {
  int from = -1;
  int to = -1;
  int occurrence = -1;  // 0-based index in the rhs
};

/// Derivation graph over the nonterminals reachable from a root, with the
/// shortest-yield and shortest-derivation cost tables precomputed.
///
/// The graph keeps a pointer to its grammar; the grammar must outlive it.
class DerivationGraph {
 public:
  DerivationGraph(const Grammar& g, SymbolId root);
  /// Graph over every nonterminal of the grammar (root = start symbol).
  static DerivationGraph full(const Grammar& g);

  const Grammar& grammar() const { return *grammar_; }
  SymbolId root() const { return root_; }
  const std::vector<DgNode>& nodes() const { return nodes_; }
  const std::vector<TypeIEdge>& type1_edges() const { return type1_; }
  const std::vector<TypeIIEdge>& type2_edges() const { return type2_; }
  bool contains(SymbolId nonterminal) const;
  int node_of(SymbolId nonterminal) const;  // -1 when absent

  /// Shortest terminal yield length of a symbol (terminals cost 1).
  int final_cost(SymbolId s) const;
  /// Cost of the cheapest derivation from `from` whose yield holds one
  /// designated occurrence of `target` (1 if terminal, 0 if nonterminal hole).
  int dmin_cost(SymbolId from, SymbolId target) const;
  /// The part of dmin_cost that is only reachable with the target in an rhs of `from`.
  int dmin_direct(SymbolId from, SymbolId target) const;

  /// Graphviz rendering for inspection.
  std::string dump_dot() const;

 private:
  void build(const std::vector<SymbolId>& seeds);
  void compute_costs();
  int weight_of(int production) const;

  const Grammar* grammar_ = nullptr;
  SymbolId root_ = -1;
  std::vector<DgNode> nodes_;
  std::vector<TypeIEdge> type1_;
  std::vector<TypeIIEdge> type2_;
  std::vector<int> node_index_;          // symbol -> node id or -1
  std::vector<int> final_;               // symbol -> cost
  std::vector<std::vector<int>> dmin_;   // target -> symbol -> cost
  std::vector<std::vector<int>> direct_; // target -> symbol -> branch I cost
};

DerivationGraph build_derivation_graph(const Grammar& g, SymbolId root);

/// Length of the shortest terminal string derivable from x; nullopt if none.
std::optional<int> shortest_yield(SymbolId x, const DerivationGraph& dg);

/// Per-rhs detail of the branch that reaches the target through a nested nonterminal.
struct DminVia {
  int production = -1;
  int c_xu = 0;                    // terminals of the rhs itself
  std::optional<int> c_vy_min;     // best nested route plus sibling completion
  std::optional<int> c_xy;         // c_xu + c_vy_min
};

struct DminBreakdown {
  std::optional<int> direct;  // target inside an rhs of x
  std::optional<int> nested;  // target reached through a nested nonterminal
  std::vector<DminVia> via;
  std::optional<int> cost;
};

DminBreakdown dmin_breakdown(SymbolId x, SymbolId target, const DerivationGraph& dg);

struct DerivationPlan {
  int cost = 0;
  std::vector<int> steps;           // production indices in leftmost-derivation order; -1 keeps a nonterminal target as the hole
  std::vector<std::string> yield;   // terminals; a nonterminal target stays as its name
};

/// Cheapest derivation from x containing target; nullopt when target is unreachable.
std::optional<DerivationPlan> d_min(SymbolId x, SymbolId target, const DerivationGraph& dg);

/// Replays leftmost-derivation steps from x and returns the sentential form.
std::vector<std::string> replay(const Grammar& g, SymbolId x, const std::vector<int>& steps,
                                std::optional<SymbolId> hole = std::nullopt);

/// Target of gen_min_patch: an index into alpha, optionally naming the
/// nonterminal that alpha[index] stands for.
struct PatchTarget {
  std::size_t index = 0;
  std::optional<SymbolId> nonterminal;
};

/// Shortest string beta derivable from x with beta a subsequence of alpha and
/// the target kept. Enumerates derivations in nondecreasing cost. Returns alpha
/// itself when no cheaper candidate embeds.
Program gen_min_patch(const DerivationGraph& dg, SymbolId x, const Program& alpha,
                      std::optional<PatchTarget> target = std::nullopt);

}  // namespace synpatch
