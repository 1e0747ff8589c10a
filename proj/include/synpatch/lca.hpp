#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "synpatch/derivation.hpp"
#include "synpatch/derivation_search.hpp"
#include "synpatch/fragment.hpp"
#include "synpatch/grammar.hpp"

namespace synpatch {

/// Syntactic relation of two tokens: their lowest common ancestor, its
/// production, and the 1-based rhs positions of the children leading to each.
struct LcaRelation {
  int node = -1;  // node id in the tree it was computed on; not compared
  SymbolId label = -1;
  int production = -1;
  std::vector<SymbolId> rhs;
  int ix = 0;
  int iy = 0;

  friend bool operator==(const LcaRelation& a, const LcaRelation& b) {
    return a.label == b.label && a.rhs == b.rhs && a.ix == b.ix && a.iy == b.iy;
  }
};

/// Relation between two distinct leaves (token indices). Throws NotDistinct.
LcaRelation lca_relation(const ParseTree& t, std::size_t x, std::size_t y);

std::string to_string(const LcaRelation& r, const Grammar& g);

/// True when every pair of fragment tokens has the same relation in both trees.
/// `in_p[i]` and `in_s[i]` are the positions of the i-th fragment token.
bool preserves_lca(const ParseTree& tp, const ParseTree& ts, const std::vector<std::size_t>& in_p,
                   const std::vector<std::size_t>& in_s);

struct PatchResult {
  Program patched;                   // tokens keep their original source locations
  std::vector<std::size_t> origin;   // position in p of each patched token
  std::vector<std::size_t> added;    // positions in `patched` that are not fragment tokens
  std::vector<LcaRelation> lca_log;  // relations of consecutive fragment tokens in parse(p)
  bool ambiguous = false;            // some parse used during patching was ambiguous
  bool fallback = false;             // search budget ran out; patched == p
  search::Stats stats;
};

/// Extra condition on a candidate patch, given the parse trees of p and of
/// the candidate and the position in p of each candidate token.
using PatchCheck =
    std::function<bool(const ParseTree& tp, const ParseTree& ts, const std::vector<std::size_t>& origin)>;

struct LcaOptions {
  std::size_t max_expansions = 2'000'000;
  PatchCheck extra;  // optional
};

/// Shortest subsequence of p that keeps the fragment, parses, and preserves
/// the LCA relation of every pair of fragment tokens.
PatchResult lca_patch(const Program& p, const Fragment& s, const Grammar& g, const LcaOptions& opts = {});
PatchResult lca_patch(const Program& p, const Fragment& s, const DerivationGraph& dg, const LcaOptions& opts = {});

enum class PatchMode { Token, Tree, Lca };

/// Exhaustive baseline: subsets of non-fragment tokens by increasing size,
/// ties broken by leftmost positions. Throws BoundExceeded when p has more
/// than `bound` non-fragment tokens.
PatchResult brute_force_patch(const Program& p, const Fragment& s, const Grammar& g, PatchMode mode,
                              std::size_t bound = 16);

/// Program made of p's tokens at the given positions, renumbered.
Program assemble(const Program& p, const std::vector<std::size_t>& positions);

}  // namespace synpatch
