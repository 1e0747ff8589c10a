#include "synpatch/derivation.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "synpatch/derivation_search.hpp"

namespace synpatch {

DerivationGraph::DerivationGraph(const Grammar& g, SymbolId root) : grammar_(&g), root_(root) {
  if (root < 0 || static_cast<std::size_t>(root) >= g.symbol_count() || !g.is_nonterminal(root)) {
    throw Error(Errc::UnknownNonterminal, "derivation graph root is not a nonterminal");
  }
  build({root});
}

DerivationGraph DerivationGraph::full(const Grammar& g) {
  DerivationGraph dg(g, g.start());
  std::vector<SymbolId> seeds{g.start()};
  for (SymbolId x : g.nonterminals()) {
    if (x != g.start()) seeds.push_back(x);
  }
  dg.build(seeds);
  return dg;
}

void DerivationGraph::build(const std::vector<SymbolId>& seeds) {
  const Grammar& g = *grammar_;
  nodes_.clear();
  type1_.clear();
  type2_.clear();
  node_index_.assign(g.symbol_count(), -1);
  std::vector<SymbolId> order;
  std::deque<SymbolId> queue;
  auto visit = [&](SymbolId s) {
    if (node_index_[static_cast<std::size_t>(s)] >= 0) return;
    node_index_[static_cast<std::size_t>(s)] = 0;
    queue.push_back(s);
  };
  for (SymbolId seed : seeds) {
    visit(seed);
    while (!queue.empty()) {
      SymbolId x = queue.front();
      queue.pop_front();
      order.push_back(x);
      for (int r : g.rules_for(x)) {
        for (SymbolId s : g.production(r).rhs) {
          if (g.is_nonterminal(s)) visit(s);
        }
      }
    }
  }
  for (SymbolId x : order) {
    node_index_[static_cast<std::size_t>(x)] = static_cast<int>(nodes_.size());
    nodes_.push_back({DgNode::Kind::Nonterminal, x, -1});
  }
  for (SymbolId x : order) {
    for (int r : g.rules_for(x)) {
      int rhs_node = static_cast<int>(nodes_.size());
      nodes_.push_back({DgNode::Kind::Rhs, x, r});
      type1_.push_back({node_index_[static_cast<std::size_t>(x)], rhs_node, weight_of(r)});
      const auto& rhs = g.production(r).rhs;
      for (std::size_t k = 0; k < rhs.size(); ++k) {
        if (g.is_nonterminal(rhs[k])) {
          type2_.push_back({rhs_node, node_index_[static_cast<std::size_t>(rhs[k])], static_cast<int>(k)});
        }
      }
    }
  }
  compute_costs();
}

bool DerivationGraph::contains(SymbolId nonterminal) const {
  return nonterminal >= 0 && static_cast<std::size_t>(nonterminal) < node_index_.size() &&
         node_index_[static_cast<std::size_t>(nonterminal)] >= 0;
}

int DerivationGraph::node_of(SymbolId nonterminal) const {
  return contains(nonterminal) ? node_index_[static_cast<std::size_t>(nonterminal)] : -1;
}

int DerivationGraph::weight_of(int production) const {
  const auto& rhs = grammar_->production(production).rhs;
  return static_cast<int>(std::count_if(rhs.begin(), rhs.end(), [&](SymbolId s) { return grammar_->is_terminal(s); }));
}

int DerivationGraph::final_cost(SymbolId s) const { return final_.at(static_cast<std::size_t>(s)); }

int DerivationGraph::dmin_cost(SymbolId from, SymbolId target) const {
  return dmin_.at(static_cast<std::size_t>(target)).at(static_cast<std::size_t>(from));
}

int DerivationGraph::dmin_direct(SymbolId from, SymbolId target) const {
  return direct_.at(static_cast<std::size_t>(target)).at(static_cast<std::size_t>(from));
}

namespace {
inline int add_cost(int a, int b) { return (a >= kInfiniteCost || b >= kInfiniteCost) ? kInfiniteCost : a + b; }
}  // namespace

void DerivationGraph::compute_costs() {
  const Grammar& g = *grammar_;
  const std::size_t n = g.symbol_count();
  std::vector<SymbolId> members;
  for (SymbolId s = 0; s < static_cast<SymbolId>(n); ++s) {
    if (contains(s)) members.push_back(s);
  }

  // Shortest terminal yield: least fixpoint over productions.
  final_.assign(n, kInfiniteCost);
  for (SymbolId s = 0; s < static_cast<SymbolId>(n); ++s) {
    if (g.is_terminal(s)) final_[static_cast<std::size_t>(s)] = 1;
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (SymbolId x : members) {
      for (int r : g.rules_for(x)) {
        int c = 0;
        for (SymbolId s : g.production(r).rhs) c = add_cost(c, final_[static_cast<std::size_t>(s)]);
        if (c < final_[static_cast<std::size_t>(x)]) {
          final_[static_cast<std::size_t>(x)] = c;
          changed = true;
        }
      }
    }
  }

  dmin_.assign(n, std::vector<int>(n, kInfiniteCost));
  direct_.assign(n, std::vector<int>(n, kInfiniteCost));
  for (SymbolId y = 0; y < static_cast<SymbolId>(n); ++y) {
    auto& d = dmin_[static_cast<std::size_t>(y)];
    auto& direct = direct_[static_cast<std::size_t>(y)];
    // Target inside an rhs of x: rhs terminals plus completion of every other
    // nonterminal occurrence.
    for (SymbolId x : members) {
      for (int r : g.rules_for(x)) {
        const auto& rhs = g.production(r).rhs;
        if (std::find(rhs.begin(), rhs.end(), y) == rhs.end()) continue;
        int c = weight_of(r);
        bool skipped_target = false;
        for (SymbolId s : rhs) {
          if (!g.is_nonterminal(s)) continue;
          if (s == y && !skipped_target) {
            skipped_target = true;
            continue;
          }
          c = add_cost(c, final_[static_cast<std::size_t>(s)]);
        }
        direct[static_cast<std::size_t>(x)] = std::min(direct[static_cast<std::size_t>(x)], c);
      }
      d[static_cast<std::size_t>(x)] = direct[static_cast<std::size_t>(x)];
    }
    if (g.is_nonterminal(y) && contains(y)) d[static_cast<std::size_t>(y)] = 0;
    // Target reached through a nested nonterminal v of an rhs u not holding it;
    // siblings of v complete at their shortest yield. Iterate to a fixpoint
    // because nesting may recurse.
    for (bool changed = true; changed;) {
      changed = false;
      for (SymbolId x : members) {
        int best = d[static_cast<std::size_t>(x)];
        for (int r : g.rules_for(x)) {
          const auto& rhs = g.production(r).rhs;
          if (std::find(rhs.begin(), rhs.end(), y) != rhs.end()) continue;
          int c_xu = weight_of(r);
          for (std::size_t k = 0; k < rhs.size(); ++k) {
            SymbolId v = rhs[k];
            if (!g.is_nonterminal(v)) continue;
            int siblings = 0;
            for (std::size_t t = 0; t < rhs.size(); ++t) {
              if (t != k && g.is_nonterminal(rhs[t])) siblings = add_cost(siblings, final_[static_cast<std::size_t>(rhs[t])]);
            }
            int c = add_cost(add_cost(c_xu, d[static_cast<std::size_t>(v)]), siblings);
            best = std::min(best, c);
          }
        }
        if (best < d[static_cast<std::size_t>(x)]) {
          d[static_cast<std::size_t>(x)] = best;
          changed = true;
        }
      }
    }
  }
}

std::string DerivationGraph::dump_dot() const {
  const Grammar& g = *grammar_;
  std::ostringstream out;
  out << "digraph derivation {\n  // root " << g.name(root_) << "\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.kind == DgNode::Kind::Nonterminal) {
      out << "  n" << i << " [label=\"" << g.name(n.symbol) << "\", shape=ellipse];\n";
    } else {
      std::string text = g.rhs_text(g.production(n.production).rhs);
      std::string escaped;
      for (char c : text) {
        if (c == '"' || c == '\\') escaped += '\\';
        escaped += c;
      }
      out << "  n" << i << " [label=\"" << escaped << "\", shape=box];\n";
    }
  }
  for (const auto& e : type1_) out << "  n" << e.from << " -> n" << e.to << " [label=\"" << e.weight << "\"];\n";
  for (const auto& e : type2_) out << "  n" << e.from << " -> n" << e.to << " [style=dashed];\n";
  out << "}\n";
  return out.str();
}

DerivationGraph build_derivation_graph(const Grammar& g, SymbolId root) { return DerivationGraph(g, root); }

std::optional<int> shortest_yield(SymbolId x, const DerivationGraph& dg) {
  if (!dg.contains(x)) throw Error(Errc::UnknownNonterminal, "symbol not in derivation graph");
  int c = dg.final_cost(x);
  if (c >= kInfiniteCost) return std::nullopt;
  return c;
}

DminBreakdown dmin_breakdown(SymbolId x, SymbolId target, const DerivationGraph& dg) {
  const Grammar& g = dg.grammar();
  if (!dg.contains(x)) throw Error(Errc::UnknownNonterminal, "symbol not in derivation graph");
  DminBreakdown out;
  if (int c = dg.dmin_direct(x, target); c < kInfiniteCost) out.direct = c;
  for (int r : g.rules_for(x)) {
    const auto& rhs = g.production(r).rhs;
    if (std::find(rhs.begin(), rhs.end(), target) != rhs.end()) continue;
    if (std::none_of(rhs.begin(), rhs.end(), [&](SymbolId s) { return g.is_nonterminal(s); })) continue;
    DminVia via;
    via.production = r;
    via.c_xu = static_cast<int>(std::count_if(rhs.begin(), rhs.end(), [&](SymbolId s) { return g.is_terminal(s); }));
    int best = kInfiniteCost;
    for (std::size_t k = 0; k < rhs.size(); ++k) {
      if (!g.is_nonterminal(rhs[k])) continue;
      int c = dg.dmin_cost(rhs[k], target);
      for (std::size_t t = 0; t < rhs.size(); ++t) {
        if (t != k && g.is_nonterminal(rhs[t])) c = add_cost(c, dg.final_cost(rhs[t]));
      }
      best = std::min(best, c);
    }
    if (best < kInfiniteCost) {
      via.c_vy_min = best;
      via.c_xy = via.c_xu + best;
      out.nested = std::min(out.nested.value_or(kInfiniteCost), *via.c_xy);
    }
    out.via.push_back(via);
  }
  if (int c = dg.dmin_cost(x, target); c < kInfiniteCost) out.cost = c;
  return out;
}

std::optional<DerivationPlan> d_min(SymbolId x, SymbolId target, const DerivationGraph& dg) {
  const Grammar& g = dg.grammar();
  if (!dg.contains(x)) throw Error(Errc::UnknownNonterminal, "symbol not in derivation graph");
  int cost = dg.dmin_cost(x, target);
  if (cost >= kInfiniteCost) return std::nullopt;

  search::Problem problem;
  problem.graph = &dg;
  problem.constrained = false;
  search::Hole hole;
  hole.symbol = target;
  if (g.is_nonterminal(target)) {
    hole.body.push_back({search::ItemKind::Mark, target});
  } else {
    hole.body.push_back({search::ItemKind::Term, target});
  }
  problem.holes.push_back(std::move(hole));
  problem.start = {search::ItemKind::Holed, x, -1, 0, 0};
  problem.max_cost = cost;
  auto sol = search::run(problem, [](const search::Solution&) { return true; });
  if (!sol || sol->cost != cost) {
    throw Error(Errc::NoDerivation, "derivation search disagrees with cost table");
  }
  DerivationPlan plan;
  plan.cost = sol->cost;
  plan.steps = sol->productions;
  for (SymbolId s : sol->symbols) plan.yield.push_back(g.name(s));
  return plan;
}

std::vector<std::string> replay(const Grammar& g, SymbolId x, const std::vector<int>& steps,
                                std::optional<SymbolId> hole) {
  struct Sym {
    SymbolId id;
    bool frozen;
  };
  std::vector<Sym> form{{x, false}};
  for (int step : steps) {
    auto it = std::find_if(form.begin(), form.end(), [&](const Sym& s) { return g.is_nonterminal(s.id) && !s.frozen; });
    if (it == form.end()) throw Error(Errc::NoDerivation, "replay: no nonterminal left to expand");
    if (step < 0) {
      if (!hole || it->id != *hole) throw Error(Errc::NoDerivation, "replay: hole marker on wrong symbol");
      it->frozen = true;
      continue;
    }
    const auto& prod = g.production(step);
    if (prod.lhs != it->id) throw Error(Errc::NoDerivation, "replay: production does not match leftmost nonterminal");
    std::vector<Sym> repl;
    for (SymbolId s : prod.rhs) repl.push_back({s, false});
    it = form.erase(it);
    form.insert(it, repl.begin(), repl.end());
  }
  std::vector<std::string> out;
  for (const auto& s : form) out.push_back(g.name(s.id));
  return out;
}

Program gen_min_patch(const DerivationGraph& dg, SymbolId x, const Program& alpha, std::optional<PatchTarget> target) {
  const Grammar& g = dg.grammar();
  if (!dg.contains(x)) throw Error(Errc::UnknownNonterminal, "symbol not in derivation graph");
  search::Problem problem;
  problem.graph = &dg;
  problem.constrained = true;
  int budget = 0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    search::RefSlot slot{alpha[i].lexeme, 1, false};
    if (target && target->nonterminal && target->index == i) {
      slot.weight = 0;
      slot.hole = true;
    }
    budget += slot.weight;
    problem.reference.push_back(std::move(slot));
  }
  if (target) {
    if (target->index >= alpha.size()) throw Error(Errc::NoDerivation, "target index outside alpha");
    search::Hole hole;
    if (target->nonterminal) {
      hole.symbol = *target->nonterminal;
    } else {
      hole.by_lexeme = true;
      hole.lexeme = alpha[target->index].lexeme;
    }
    hole.body.push_back({search::ItemKind::Anchor, -1, static_cast<int>(target->index)});
    problem.holes.push_back(std::move(hole));
    problem.start = {search::ItemKind::Holed, x, -1, 0, 0};
  } else {
    problem.start = {search::ItemKind::Free, x};
  }
  problem.max_cost = budget;
  auto sol = search::run(problem, [](const search::Solution&) { return true; });
  if (!sol) return alpha;
  Program out;
  for (int r : sol->refs) out.push_back(alpha[static_cast<std::size_t>(r)]);
  (void)g;
  return out;
}

}  // namespace synpatch
