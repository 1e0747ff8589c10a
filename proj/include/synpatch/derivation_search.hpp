#pragma once

// Best-first enumeration of derivations in nondecreasing yield length, with
// the yield embedded into a reference token sequence as it is generated.
// Shared by gen_min_patch and lca_patch.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "synpatch/derivation.hpp"

namespace synpatch::search {

struct RefSlot {
  std::string lexeme;
  int weight = 1;     // cost of emitting this slot
  bool hole = false;  // stands for a nonterminal; only an Anchor may claim it
};

enum class ItemKind : std::uint8_t {
  Term,    // free terminal symbol, embedded greedily
  Anchor,  // must be emitted at exactly reference slot `ref`
  Free,    // nonterminal, any derivation
  Holed,   // nonterminal whose derivation places hole `hole` exactly once
  Node,    // hole placed: expands to the hole body
  Mark,    // unconstrained nonterminal hole marker (cost 0)
  Pref,    // terminal preferring reference slot `ref`, else embedded greedily
};

struct Item {
  ItemKind kind = ItemKind::Term;
  SymbolId symbol = -1;
  int ref = -1;
  int hole = -1;
  int bound = 0;  // Holed: first usable alignment chain entry
};

/// One original ancestor of a hole, used to prefer derivations that reuse
/// the original production (and its original terminal tokens).
struct ChainEntry {
  SymbolId label = -1;
  int production = -1;
  int child_index = -1;             // rhs position leading to the hole
  std::vector<int> terminal_refs;   // per rhs position: preferred reference slot, or -1
};

struct Hole {
  SymbolId symbol = -1;        // nonterminal or terminal symbol the hole stands for
  bool by_lexeme = false;      // token hole: any terminal accepting `lexeme`
  std::string lexeme;
  std::vector<Item> body;      // items pushed when the hole is placed
  std::vector<ChainEntry> chain;
};

struct Problem {
  const DerivationGraph* graph = nullptr;
  bool constrained = true;
  std::vector<RefSlot> reference;
  std::vector<Hole> holes;
  Item start;
  int max_cost = kInfiniteCost;
  std::size_t max_expansions = 4'000'000;
  int visits_per_key = 1;
  // Include the emitted prefix in the dedupe key. Needed when the acceptor
  // looks at the whole string rather than just its length.
  bool key_history = false;
  std::size_t tie_pops = 20'000;  // extra pops spent looking for a better tie
};

struct Solution {
  int cost = 0;
  int aligned = 0;
  std::vector<int> refs;              // constrained: emitted reference slots in order
  std::vector<SymbolId> symbols;      // unconstrained: emitted symbols in order
  std::vector<int> productions;       // leftmost derivation order
};

struct Stats {
  std::size_t expansions = 0;
  std::size_t candidates = 0;
  std::size_t rejected = 0;
  bool exhausted = false;  // hit max_expansions
};

/// Returns true to accept a complete candidate.
using Acceptor = std::function<bool(const Solution&)>;

/// Cheapest accepted candidate. Among equal costs prefers more aligned
/// expansions, then lexicographically smaller reference slots.
std::optional<Solution> run(const Problem& problem, const Acceptor& accept, Stats* stats = nullptr);

}  // namespace synpatch::search
