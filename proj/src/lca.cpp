#include "synpatch/lca.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace synpatch {

namespace {

// Child of `ancestor` on the path to `node` (ancestor must be a proper ancestor).
int child_toward(const ParseTree& t, int ancestor, int node) {
  int cur = node;
  while (t.node(cur).parent != ancestor) cur = t.node(cur).parent;
  return cur;
}

int child_index(const ParseTree& t, int parent, int child) {
  const auto& ch = t.node(parent).children;
  return static_cast<int>(std::find(ch.begin(), ch.end(), child) - ch.begin());
}

}  // namespace

LcaRelation lca_relation(const ParseTree& t, std::size_t x, std::size_t y) {
  if (x == y) throw Error(Errc::NotDistinct, "LCA relation needs two distinct tokens");
  int lx = t.leaf(x);
  int ly = t.leaf(y);
  int a = t.node(lx).parent;
  while (!t.is_ancestor(a, ly)) a = t.node(a).parent;
  const ParseNode& n = t.node(a);
  LcaRelation r;
  r.node = a;
  r.label = n.label;
  r.production = n.production;
  r.ix = child_index(t, a, child_toward(t, a, lx)) + 1;
  r.iy = child_index(t, a, child_toward(t, a, ly)) + 1;
  for (int c : n.children) r.rhs.push_back(t.node(c).label);
  return r;
}

std::string to_string(const LcaRelation& r, const Grammar& g) {
  std::ostringstream out;
  out << "(" << g.name(r.label) << ", " << g.rhs_text(r.rhs) << ", " << r.ix << ", " << r.iy << ")";
  return out.str();
}

bool preserves_lca(const ParseTree& tp, const ParseTree& ts, const std::vector<std::size_t>& in_p,
                   const std::vector<std::size_t>& in_s) {
  for (std::size_t i = 0; i < in_p.size(); ++i) {
    for (std::size_t j = i + 1; j < in_p.size(); ++j) {
      if (!(lca_relation(tp, in_p[i], in_p[j]) == lca_relation(ts, in_s[i], in_s[j]))) return false;
    }
  }
  return true;
}

Program assemble(const Program& p, const std::vector<std::size_t>& positions) {
  Program out;
  out.reserve(positions.size());
  for (std::size_t pos : positions) {
    Token t = p.at(pos);
    t.position = out.size();
    out.push_back(std::move(t));
  }
  return out;
}

namespace {

void check_fragment(const Program& p, const Fragment& s) {
  if (s.picks.empty()) throw Error(Errc::EmptyFragment, "fragment has no tokens");
  if (!s.valid_for(p)) throw Error(Errc::ConfigError, "fragment picks are not increasing positions of p");
}

// Positions of the fragment tokens inside a candidate given by p-positions.
std::vector<std::size_t> fragment_positions(const std::vector<std::size_t>& origin, const Fragment& s) {
  std::vector<std::size_t> out;
  out.reserve(s.picks.size());
  std::size_t j = 0;
  for (std::size_t pick : s.picks) {
    while (origin[j] != pick) ++j;
    out.push_back(j);
  }
  return out;
}

PatchResult finish(const Program& p, const Fragment& s, const ParseTree& tp, std::vector<std::size_t> origin) {
  PatchResult r;
  r.patched = assemble(p, origin);
  std::set<std::size_t> picks(s.picks.begin(), s.picks.end());
  for (std::size_t i = 0; i < origin.size(); ++i) {
    if (!picks.count(origin[i])) r.added.push_back(i);
  }
  r.origin = std::move(origin);
  for (std::size_t i = 0; i + 1 < s.picks.size(); ++i) r.lca_log.push_back(lca_relation(tp, s.picks[i], s.picks[i + 1]));
  r.ambiguous = tp.ambiguous();
  return r;
}

// Builds the search skeleton from the LCA nodes found bottom-up.
class Skeleton {
 public:
  Skeleton(const ParseTree& tp, const Fragment& s) : tp_(tp) {
    std::set<int> n_set;
    std::set<int> candidates;
    for (std::size_t pick : s.picks) {
      int leaf = tp.leaf(pick);
      n_set.insert(leaf);
      for (int a = tp.node(leaf).parent; a >= 0; a = tp.node(a).parent) candidates.insert(a);
    }
    std::vector<int> order(candidates.begin(), candidates.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      const auto& na = tp.node(a);
      const auto& nb = tp.node(b);
      if (na.depth != nb.depth) return na.depth > nb.depth;
      return na.begin < nb.begin;
    });
    for (int l : order) {
      std::vector<int> c;
      for (int x : n_set) {
        if (tp.is_ancestor(l, x)) c.push_back(x);
      }
      if (c.size() < 2) continue;
      for (int x : c) n_set.erase(x);
      n_set.insert(l);
      targets_[l] = c;
    }
    if (n_set.size() != 1) throw Error(Errc::NoDerivation, "LCA discovery did not converge");
    top_ = *n_set.begin();
  }

  search::Problem problem(const Program& p, const DerivationGraph& dg) {
    search::Problem prob;
    prob.graph = &dg;
    prob.constrained = true;
    prob.key_history = true;
    for (const auto& t : p) prob.reference.push_back({t.lexeme, 1, false});
    holes_.clear();
    int top_hole = hole_for(top_);
    int root = tp_.root();
    if (top_ == root) {
      prob.start = {search::ItemKind::Node, -1, -1, top_hole, 0};
    } else {
      holes_[static_cast<std::size_t>(top_hole)].chain = chain(root, top_);
      prob.start = {search::ItemKind::Holed, tp_.node(root).label, -1, top_hole, 0};
    }
    prob.holes = holes_;
    prob.max_cost = static_cast<int>(p.size());
    return prob;
  }

  const std::map<int, std::vector<int>>& lcas() const { return targets_; }

 private:
  int hole_for(int target) {
    search::Hole h;
    const ParseNode& n = tp_.node(target);
    if (n.is_leaf()) {
      h.by_lexeme = true;
      h.lexeme = tp_.tokens()[static_cast<std::size_t>(n.token)].lexeme;
      h.body.push_back({search::ItemKind::Anchor, -1, n.token, -1, 0});
      holes_.push_back(std::move(h));
      return static_cast<int>(holes_.size()) - 1;
    }
    h.symbol = n.label;
    const auto& targets = targets_.at(target);
    for (int c : n.children) {
      const ParseNode& cn = tp_.node(c);
      std::vector<int> inside;
      for (int t : targets) {
        if (t == c || tp_.is_ancestor(c, t)) inside.push_back(t);
      }
      if (inside.size() > 1) throw Error(Errc::NoDerivation, "LCA child holds more than one target");
      if (inside.empty()) {
        if (cn.is_leaf()) {
          h.body.push_back({search::ItemKind::Pref, cn.label, cn.token, -1, 0});
        } else {
          h.body.push_back({search::ItemKind::Free, cn.label});
        }
      } else if (inside[0] == c) {
        h.body.push_back({search::ItemKind::Node, -1, -1, hole_for(c), 0});
      } else {
        int sub = hole_for(inside[0]);
        holes_[static_cast<std::size_t>(sub)].chain = chain(c, inside[0]);
        h.body.push_back({search::ItemKind::Holed, cn.label, -1, sub, 0});
      }
    }
    holes_.push_back(std::move(h));
    return static_cast<int>(holes_.size()) - 1;
  }

  // Original productions from `from` down to the parent of `target`.
  std::vector<search::ChainEntry> chain(int from, int target) const {
    std::vector<int> path;
    for (int a = tp_.node(target).parent; a != tp_.node(from).parent; a = tp_.node(a).parent) path.push_back(a);
    std::reverse(path.begin(), path.end());
    std::vector<search::ChainEntry> out;
    for (int a : path) {
      const ParseNode& n = tp_.node(a);
      search::ChainEntry e;
      e.label = n.label;
      e.production = n.production;
      e.child_index = child_index(tp_, a, a == tp_.node(target).parent ? target : child_toward(tp_, a, target));
      for (int c : n.children) e.terminal_refs.push_back(tp_.node(c).is_leaf() ? tp_.node(c).token : -1);
      out.push_back(std::move(e));
    }
    return out;
  }

  const ParseTree& tp_;
  std::map<int, std::vector<int>> targets_;
  std::vector<search::Hole> holes_;
  int top_ = -1;
};

}  // namespace

namespace {

// Free terminals are embedded at their earliest slot, so tokens added before
// the fragment may come from far above it. The lexemes alone fix the parse,
// so each such token can take the last equal lexeme before its successor.
std::vector<std::size_t> settle_leading(const Program& p, const Fragment& s, std::vector<std::size_t> origin) {
  auto first = std::find(origin.begin(), origin.end(), s.picks.front());
  for (auto i = first - origin.begin() - 1; i >= 0; --i) {
    const std::size_t at = origin[static_cast<std::size_t>(i)];
    for (std::size_t j = origin[static_cast<std::size_t>(i) + 1]; j-- > at;) {
      if (p[j].lexeme == p[at].lexeme) {
        origin[static_cast<std::size_t>(i)] = j;
        break;
      }
    }
  }
  return origin;
}

}  // namespace

PatchResult lca_patch(const Program& p, const Fragment& s, const Grammar& g, const LcaOptions& opts) {
  DerivationGraph dg = DerivationGraph::full(g);
  return lca_patch(p, s, dg, opts);
}

PatchResult lca_patch(const Program& p, const Fragment& s, const DerivationGraph& dg, const LcaOptions& opts) {
  const Grammar& g = dg.grammar();
  check_fragment(p, s);
  auto tp = parse(p, g);
  if (!tp) throw Error(Errc::NotRecognized, "program is not in the language of the grammar");

  Skeleton skeleton(*tp, s);
  search::Problem prob = skeleton.problem(p, dg);
  prob.max_expansions = opts.max_expansions;
  bool ambiguous = false;
  auto accept = [&](const search::Solution& sol) {
    std::vector<std::size_t> origin(sol.refs.begin(), sol.refs.end());
    auto ts = parse(assemble(p, origin), g);
    if (!ts) return false;
    if (!preserves_lca(*tp, *ts, s.picks, fragment_positions(origin, s))) return false;
    if (opts.extra && !opts.extra(*tp, *ts, origin)) return false;
    ambiguous = ts->ambiguous();
    return true;
  };
  search::Stats stats;
  auto sol = search::run(prob, accept, &stats);
  PatchResult r;
  if (sol) {
    std::vector<std::size_t> origin(sol->refs.begin(), sol->refs.end());
    std::vector<std::size_t> settled = settle_leading(p, s, origin);
    if (settled != origin && opts.extra) {
      auto ts = parse(assemble(p, settled), g);
      if (!ts || !opts.extra(*tp, *ts, settled)) settled = origin;
    }
    r = finish(p, s, *tp, std::move(settled));
  } else if (stats.exhausted) {
    std::vector<std::size_t> all(p.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    r = finish(p, s, *tp, std::move(all));
    r.fallback = true;
  } else {
    throw Error(Errc::NoDerivation, "no derivation embeds the fragment");
  }
  r.ambiguous = r.ambiguous || ambiguous;
  r.stats = stats;
  return r;
}

namespace {

// Preorder structure of a subtree with leaf positions mapped through `pos`.
void signature(const ParseTree& t, int node, const std::vector<std::size_t>& pos, std::vector<long>& out) {
  const ParseNode& n = t.node(node);
  out.push_back(n.label);
  out.push_back(n.production);
  if (n.is_leaf()) {
    out.push_back(static_cast<long>(pos[static_cast<std::size_t>(n.token)]));
    return;
  }
  out.push_back(-static_cast<long>(n.children.size()) - 1);
  for (int c : n.children) signature(t, c, pos, out);
}

bool common_subtree(const ParseTree& tp, const ParseTree& ts, const Fragment& s, const std::vector<std::size_t>& origin) {
  std::vector<std::size_t> identity(tp.tokens().size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  std::vector<int> leaves;
  for (std::size_t pick : s.picks) leaves.push_back(tp.leaf(pick));
  // Lowest node above every fragment leaf, then all its ancestors.
  int u = leaves[0];
  for (int leaf : leaves) {
    while (u != leaf && !tp.is_ancestor(u, leaf)) u = tp.node(u).parent;
  }
  std::map<std::size_t, std::size_t> where;  // p position -> s' position
  for (std::size_t i = 0; i < origin.size(); ++i) where[origin[i]] = i;
  for (; u >= 0; u = tp.node(u).parent) {
    const ParseNode& n = tp.node(u);
    bool whole = true;
    for (std::size_t k = n.begin; k < n.end && whole; ++k) whole = where.count(k) > 0;
    if (!whole) continue;
    std::vector<long> want;
    signature(tp, u, identity, want);
    std::size_t b = where[n.begin];
    std::size_t e = b + (n.end - n.begin);
    for (std::size_t id = 0; id < ts.size(); ++id) {
      const ParseNode& m = ts.node(static_cast<int>(id));
      if (m.begin != b || m.end != e || m.label != n.label) continue;
      std::vector<long> got;
      signature(ts, static_cast<int>(id), origin, got);
      if (got == want) return true;
    }
  }
  return false;
}

}  // namespace

PatchResult brute_force_patch(const Program& p, const Fragment& s, const Grammar& g, PatchMode mode,
                              std::size_t bound) {
  check_fragment(p, s);
  auto tp = parse(p, g);
  if (!tp) throw Error(Errc::NotRecognized, "program is not in the language of the grammar");
  std::vector<std::size_t> rest;
  {
    std::set<std::size_t> picks(s.picks.begin(), s.picks.end());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!picks.count(i)) rest.push_back(i);
    }
  }
  if (rest.size() > bound) throw Error(Errc::BoundExceeded, "too many non-fragment tokens for exhaustive search");

  const std::size_t n = rest.size();
  for (std::size_t k = 0; k <= n; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      std::vector<std::size_t> origin(s.picks.begin(), s.picks.end());
      for (std::size_t i : idx) origin.push_back(rest[i]);
      std::sort(origin.begin(), origin.end());
      auto ts = parse(assemble(p, origin), g);
      bool ok = ts.has_value();
      if (ok && mode == PatchMode::Lca) ok = preserves_lca(*tp, *ts, s.picks, fragment_positions(origin, s));
      if (ok && mode == PatchMode::Tree) ok = common_subtree(*tp, *ts, s, origin);
      if (ok) {
        PatchResult r = finish(p, s, *tp, std::move(origin));
        r.ambiguous = r.ambiguous || ts->ambiguous();
        return r;
      }
      // Next combination in lexicographic order.
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  throw Error(Errc::NoSolution, "no subsequence of the program satisfies the patch conditions");
}

}  // namespace synpatch
