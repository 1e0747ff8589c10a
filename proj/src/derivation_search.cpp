#include "synpatch/derivation_search.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

namespace synpatch::search {
namespace {

constexpr int kNoAnchor = kInfiniteCost;

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_item(const Item& it) {
  std::uint64_t h = mix(static_cast<std::uint64_t>(it.kind));
  h = mix(h ^ static_cast<std::uint32_t>(it.symbol));
  h = mix(h ^ static_cast<std::uint32_t>(it.ref));
  h = mix(h ^ static_cast<std::uint32_t>(it.hole));
  return mix(h ^ static_cast<std::uint32_t>(it.bound));
}

int add(int a, int b) { return (a >= kInfiniteCost || b >= kInfiniteCost) ? kInfiniteCost : a + b; }

struct StackNode {
  Item item;
  int next;
  std::uint64_t hash;
  int min_anchor;
  int h;
  int depth;
};

enum class Action : std::uint8_t { None, Emit, Expand, Place };

struct State {
  int top;
  int pos;
  std::uint64_t hist;
  int cost;
  int aligned;
  int parent;
  int value;
  Action action;
};

struct Entry {
  int f;
  int aligned;
  int cost;
  int id;
};

struct EntryOrder {
  bool operator()(const Entry& a, const Entry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.aligned != b.aligned) return a.aligned < b.aligned;
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.id > b.id;
  }
};

bool better(const Solution& a, const Solution& b) {
  if (a.cost != b.cost) return a.cost < b.cost;
  if (a.aligned != b.aligned) return a.aligned > b.aligned;
  if (a.refs != b.refs) return a.refs < b.refs;
  return a.symbols < b.symbols;
}

class Engine {
 public:
  explicit Engine(const Problem& p) : p_(p), dg_(*p.graph), g_(p.graph->grammar()) {
    capacity_.assign(p.reference.size() + 1, 0);
    for (std::size_t i = p.reference.size(); i-- > 0;) capacity_[i] = capacity_[i + 1] + p.reference[i].weight;
    hole_h_.assign(p.holes.size(), -1);
    hole_anchor_.assign(p.holes.size(), kNoAnchor);
    hole_done_.assign(p.holes.size(), false);
    dexcl_.resize(p.holes.size());
    for (std::size_t i = 0; i < p.holes.size(); ++i) prepare_hole(static_cast<int>(i));
    next_match_.resize(g_.symbol_count());
    max_depth_ = static_cast<int>(p.reference.size()) * 2 + 256;
  }

  std::optional<Solution> run(const Acceptor& accept, Stats* stats) {
    Stats local;
    Stats& st = stats ? *stats : local;
    int top = push_item(p_.start, -1);
    if (top == -2) return std::nullopt;
    add_state({top, 0, 0, 0, 0, -1, 0, Action::None});

    std::optional<Solution> best;
    std::size_t pops_after_best = 0;
    while (!open_.empty()) {
      Entry e = open_.top();
      open_.pop();
      if (best && (e.f > best->cost || ++pops_after_best > p_.tie_pops)) break;
      const State s = states_[static_cast<std::size_t>(e.id)];
      if (s.top < 0) {
        ++st.candidates;
        Solution sol = solution(e.id);
        if (best && !better(sol, *best)) continue;
        if (accept(sol)) {
          best = std::move(sol);
        } else {
          ++st.rejected;
        }
        continue;
      }
      std::uint64_t key = mix(nodes_[static_cast<std::size_t>(s.top)].hash ^ mix(static_cast<std::uint64_t>(s.pos)));
      if (p_.key_history) key = mix(key ^ s.hist);
      if (++visits_[key] > p_.visits_per_key) continue;
      if (++st.expansions > p_.max_expansions) {
        st.exhausted = true;
        break;
      }
      expand(e.id);
    }
    return best;
  }

 private:
  // Heuristic and anchor bound per hole, computed bottom-up over hole bodies.
  void prepare_hole(int h) {
    if (hole_done_[static_cast<std::size_t>(h)]) return;
    hole_done_[static_cast<std::size_t>(h)] = true;
    int cost = 0;
    int anchor = kNoAnchor;
    for (const Item& it : p_.holes[static_cast<std::size_t>(h)].body) {
      if (it.kind == ItemKind::Node || it.kind == ItemKind::Holed) prepare_hole(it.hole);
      cost = add(cost, item_h(it));
      anchor = std::min(anchor, item_anchor(it));
    }
    hole_h_[static_cast<std::size_t>(h)] = cost;
    hole_anchor_[static_cast<std::size_t>(h)] = anchor;
  }

  int dexcl(SymbolId a, int h) {
    auto& row = dexcl_[static_cast<std::size_t>(h)];
    if (row.empty()) row.assign(g_.symbol_count(), -1);
    int& slot = row[static_cast<std::size_t>(a)];
    if (slot >= 0) return slot;
    const Hole& hole = p_.holes[static_cast<std::size_t>(h)];
    int c = kInfiniteCost;
    if (!dg_.contains(a)) {
      c = kInfiniteCost;
    } else if (hole.by_lexeme) {
      for (SymbolId t : g_.terminals_matching(hole.lexeme)) {
        int d = dg_.dmin_cost(a, t);
        if (d < kInfiniteCost) c = std::min(c, d - 1);
      }
    } else if (g_.is_nonterminal(hole.symbol)) {
      c = dg_.dmin_cost(a, hole.symbol);
    } else {
      int d = dg_.dmin_cost(a, hole.symbol);
      if (d < kInfiniteCost) c = d - 1;
    }
    slot = c;
    return c;
  }

  bool places(SymbolId terminal, int h) const {
    const Hole& hole = p_.holes[static_cast<std::size_t>(h)];
    if (hole.by_lexeme) return g_.matches(terminal, hole.lexeme);
    return terminal == hole.symbol && !g_.is_nonterminal(hole.symbol);
  }

  int item_h(const Item& it) {
    switch (it.kind) {
      case ItemKind::Term:
      case ItemKind::Pref: return 1;
      case ItemKind::Anchor: return p_.reference.at(static_cast<std::size_t>(it.ref)).weight;
      case ItemKind::Free: return dg_.contains(it.symbol) ? dg_.final_cost(it.symbol) : kInfiniteCost;
      case ItemKind::Holed: return add(dexcl(it.symbol, it.hole), hole_h_[static_cast<std::size_t>(it.hole)]);
      case ItemKind::Node: return hole_h_[static_cast<std::size_t>(it.hole)];
      case ItemKind::Mark: return 0;
    }
    return kInfiniteCost;
  }

  int item_anchor(const Item& it) const {
    switch (it.kind) {
      case ItemKind::Anchor: return it.ref;
      case ItemKind::Holed:
      case ItemKind::Node: return hole_anchor_[static_cast<std::size_t>(it.hole)];
      default: return kNoAnchor;
    }
  }

  // Returns the new top, or -2 when the item can never complete.
  int push_item(const Item& it, int next) {
    int h = item_h(it);
    if (h >= kInfiniteCost) return -2;
    const StackNode* below = next >= 0 ? &nodes_[static_cast<std::size_t>(next)] : nullptr;
    StackNode n;
    n.item = it;
    n.next = next;
    n.hash = mix(hash_item(it) ^ (below ? below->hash * 31 : 0x1234567ULL));
    n.min_anchor = std::min(item_anchor(it), below ? below->min_anchor : kNoAnchor);
    n.h = add(h, below ? below->h : 0);
    n.depth = below ? below->depth + 1 : 1;
    if (n.depth > max_depth_) return -2;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int push_items(const std::vector<Item>& items, int next) {
    int top = next;
    for (std::size_t i = items.size(); i-- > 0;) {
      top = push_item(items[i], top);
      if (top == -2) return -2;
    }
    return top;
  }

  void add_state(const State& s) {
    int h = s.top >= 0 ? nodes_[static_cast<std::size_t>(s.top)].h : 0;
    int f = add(s.cost, h);
    if (f > p_.max_cost) return;
    if (p_.constrained && h > capacity_[static_cast<std::size_t>(s.pos)]) return;
    int id = static_cast<int>(states_.size());
    states_.push_back(s);
    open_.push({f, s.aligned, s.cost, id});
  }

  int next_match(SymbolId terminal, int pos) {
    auto& table = next_match_[static_cast<std::size_t>(terminal)];
    if (table.empty()) {
      const int n = static_cast<int>(p_.reference.size());
      table.assign(static_cast<std::size_t>(n) + 1, n);
      for (int i = n; i-- > 0;) {
        const RefSlot& slot = p_.reference[static_cast<std::size_t>(i)];
        table[static_cast<std::size_t>(i)] =
            (!slot.hole && g_.matches(terminal, slot.lexeme)) ? i : table[static_cast<std::size_t>(i) + 1];
      }
    }
    return table[static_cast<std::size_t>(pos)];
  }

  Item plain(SymbolId s) const {
    return g_.is_nonterminal(s) ? Item{ItemKind::Free, s} : Item{ItemKind::Term, s};
  }

  State next(const State& s, int id, int top, int pos, int cost, int aligned, int value, Action a) const {
    std::uint64_t hist = a == Action::Emit ? mix(s.hist ^ static_cast<std::uint32_t>(value)) : s.hist;
    return {top, pos, hist, cost, aligned, id, value, a};
  }

  void emit_ref(int id, const State& s, int rest, int k, int aligned) {
    add_state(next(s, id, rest, k + 1, s.cost + p_.reference[static_cast<std::size_t>(k)].weight, aligned, k,
                   Action::Emit));
  }

  void expand(int id) {
    const State s = states_[static_cast<std::size_t>(id)];
    const StackNode top = nodes_[static_cast<std::size_t>(s.top)];
    const int rest = top.next;
    const Item& it = top.item;
    const int limit = rest >= 0 ? nodes_[static_cast<std::size_t>(rest)].min_anchor : kNoAnchor;
    const int n = static_cast<int>(p_.reference.size());
    switch (it.kind) {
      case ItemKind::Term:
      case ItemKind::Pref: {
        if (!p_.constrained) {
          add_state(next(s, id, rest, s.pos, s.cost + 1, s.aligned, it.symbol, Action::Emit));
          return;
        }
        if (it.kind == ItemKind::Pref && it.ref >= s.pos && it.ref < limit && it.ref < n &&
            !p_.reference[static_cast<std::size_t>(it.ref)].hole &&
            g_.matches(it.symbol, p_.reference[static_cast<std::size_t>(it.ref)].lexeme)) {
          emit_ref(id, s, rest, it.ref, s.aligned + 1);
        }
        int k = next_match(it.symbol, s.pos);
        if (k >= n || k >= limit || (it.kind == ItemKind::Pref && k == it.ref)) return;
        emit_ref(id, s, rest, k, s.aligned);
        return;
      }
      case ItemKind::Anchor:
        if (it.ref < s.pos) return;
        emit_ref(id, s, rest, it.ref, s.aligned);
        return;
      case ItemKind::Mark:
        add_state(next(s, id, rest, s.pos, s.cost, s.aligned, it.symbol, Action::Emit));
        return;
      case ItemKind::Node: {
        int t = push_items(p_.holes[static_cast<std::size_t>(it.hole)].body, rest);
        if (t != -2) add_state(next(s, id, t, s.pos, s.cost, s.aligned, 0, Action::None));
        return;
      }
      case ItemKind::Free: {
        for (int r : g_.rules_for(it.symbol)) {
          scratch_.clear();
          for (SymbolId x : g_.production(r).rhs) scratch_.push_back(plain(x));
          int t = push_items(scratch_, rest);
          if (t != -2) add_state(next(s, id, t, s.pos, s.cost, s.aligned, r, Action::Expand));
        }
        return;
      }
      case ItemKind::Holed:
        expand_holed(id, s, it, rest);
        return;
    }
  }

  void expand_holed(int id, const State& s, const Item& it, int rest) {
    const Hole& hole = p_.holes[static_cast<std::size_t>(it.hole)];
    if (!hole.by_lexeme && it.symbol == hole.symbol) {
      int t = push_item({ItemKind::Node, -1, -1, it.hole, 0}, rest);
      if (t != -2) add_state(next(s, id, t, s.pos, s.cost, s.aligned, -1, Action::Place));
    }
    // Nearest original ancestor with this label: its terminals are preferred
    // slots for same-symbol terminals of any production chosen here.
    const ChainEntry* near = nullptr;
    for (std::size_t e = static_cast<std::size_t>(it.bound); e < hole.chain.size() && !near; ++e) {
      if (hole.chain[e].label == it.symbol) near = &hole.chain[e];
    }
    for (int r : g_.rules_for(it.symbol)) {
      const auto& rhs = g_.production(r).rhs;
      std::vector<int> prefer(rhs.size(), -1);
      if (near) {
        const auto& orig = g_.production(near->production).rhs;
        std::size_t j = 0;
        for (std::size_t k = 0; k < rhs.size(); ++k) {
          if (g_.is_nonterminal(rhs[k])) continue;
          std::size_t m = j;
          while (m < orig.size() && !(orig[m] == rhs[k] && m < near->terminal_refs.size() && near->terminal_refs[m] >= 0)) ++m;
          if (m < orig.size()) {
            prefer[k] = near->terminal_refs[m];
            j = m + 1;
          }
        }
      }
      for (std::size_t i = 0; i < rhs.size(); ++i) {
        Item at;
        if (g_.is_nonterminal(rhs[i])) {
          if (dexcl(rhs[i], it.hole) >= kInfiniteCost) continue;
          at = {ItemKind::Holed, rhs[i], -1, it.hole, it.bound};
        } else {
          if (!places(rhs[i], it.hole)) continue;
          at = {ItemKind::Node, -1, -1, it.hole, 0};
        }
        scratch_.clear();
        for (std::size_t k = 0; k < rhs.size(); ++k) {
          if (k == i) {
            scratch_.push_back(at);
          } else if (prefer[k] >= 0) {
            scratch_.push_back({ItemKind::Pref, rhs[k], prefer[k], -1, 0});
          } else {
            scratch_.push_back(plain(rhs[k]));
          }
        }
        int t = push_items(scratch_, rest);
        if (t != -2) add_state(next(s, id, t, s.pos, s.cost, s.aligned, r, Action::Expand));
      }
    }
    // Reuse an original ancestor production with its terminals at their
    // original positions.
    for (std::size_t e = static_cast<std::size_t>(it.bound); e < hole.chain.size(); ++e) {
      const ChainEntry& entry = hole.chain[e];
      if (entry.label != it.symbol) continue;
      const auto& rhs = g_.production(entry.production).rhs;
      scratch_.clear();
      bool ok = true;
      for (std::size_t k = 0; k < rhs.size() && ok; ++k) {
        if (static_cast<int>(k) == entry.child_index) {
          if (g_.is_nonterminal(rhs[k])) {
            scratch_.push_back({ItemKind::Holed, rhs[k], -1, it.hole, static_cast<int>(e) + 1});
          } else if (places(rhs[k], it.hole)) {
            scratch_.push_back({ItemKind::Node, -1, -1, it.hole, 0});
          } else {
            ok = false;
          }
        } else if (!g_.is_nonterminal(rhs[k]) && k < entry.terminal_refs.size() && entry.terminal_refs[k] >= 0) {
          scratch_.push_back({ItemKind::Pref, rhs[k], entry.terminal_refs[k], -1, 0});
        } else {
          scratch_.push_back(plain(rhs[k]));
        }
      }
      if (!ok) continue;
      int t = push_items(scratch_, rest);
      if (t != -2) add_state(next(s, id, t, s.pos, s.cost, s.aligned + 1, entry.production, Action::Expand));
    }
  }

  Solution solution(int id) const {
    Solution sol;
    const State& last = states_[static_cast<std::size_t>(id)];
    sol.cost = last.cost;
    sol.aligned = last.aligned;
    for (int cur = id; cur >= 0; cur = states_[static_cast<std::size_t>(cur)].parent) {
      const State& s = states_[static_cast<std::size_t>(cur)];
      switch (s.action) {
        case Action::Emit:
          if (p_.constrained) {
            sol.refs.push_back(s.value);
          } else {
            sol.symbols.push_back(s.value);
          }
          break;
        case Action::Expand: sol.productions.push_back(s.value); break;
        case Action::Place: sol.productions.push_back(-1); break;
        case Action::None: break;
      }
    }
    std::reverse(sol.refs.begin(), sol.refs.end());
    std::reverse(sol.symbols.begin(), sol.symbols.end());
    std::reverse(sol.productions.begin(), sol.productions.end());
    return sol;
  }

  const Problem& p_;
  const DerivationGraph& dg_;
  const Grammar& g_;
  std::vector<int> capacity_;
  std::vector<int> hole_h_;
  std::vector<int> hole_anchor_;
  std::vector<bool> hole_done_;
  std::vector<std::vector<int>> dexcl_;
  std::vector<std::vector<int>> next_match_;
  int max_depth_ = 0;
  std::vector<StackNode> nodes_;
  std::vector<State> states_;
  std::priority_queue<Entry, std::vector<Entry>, EntryOrder> open_;
  std::unordered_map<std::uint64_t, int> visits_;
  std::vector<Item> scratch_;
};

}  // namespace

std::optional<Solution> run(const Problem& problem, const Acceptor& accept, Stats* stats) {
  if (!problem.graph) throw Error(Errc::NoDerivation, "search problem without derivation graph");
  Engine engine(problem);
  return engine.run(accept, stats);
}

}  // namespace synpatch::search
