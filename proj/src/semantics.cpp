#include "synpatch/semantics.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace synpatch::sem {

namespace {

using minic::Stmt;

std::string span_text(const Program& tokens, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i <= last && i < tokens.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += tokens[i].lexeme;
  }
  return out;
}

class CfgBuilder {
 public:
  CfgBuilder(const minic::Function& f, const minic::Unit& u) : f_(f), u_(u) {
    cfg_.function = f.name;
    cfg_.entry = add(CfgNode::Kind::Entry, f.first, f.first, f.first);
    cfg_.exit = add(CfgNode::Kind::Exit, f.last, f.last, f.last);
  }

  Cfg build() {
    auto out = lower(*f_.body, {cfg_.entry});
    connect(out, cfg_.exit);
    finish();
    return std::move(cfg_);
  }

 private:
  struct Loop {
    int id;
    int cont;
    std::vector<int> breaks;
  };

  int open_loop(int header) {
    int id = static_cast<int>(cfg_.loop_header.size());
    cfg_.loop_header.push_back(header);
    cfg_.loop_parent.push_back(loops_.empty() ? -1 : loops_.back().id);
    cfg_.loop[static_cast<std::size_t>(header)] = id;
    return id;
  }

  int add(CfgNode::Kind kind, std::size_t anchor, std::size_t first, std::size_t last) {
    cfg_.loop.push_back(loops_.empty() ? -1 : loops_.back().id);
    CfgNode n;
    n.kind = kind;
    n.anchor = anchor;
    n.loc = u_.tokens.at(anchor).loc;
    n.first = first;
    n.last = last;
    if (kind == CfgNode::Kind::Entry) {
      n.text = "<entry " + f_.name + ">";
    } else if (kind == CfgNode::Kind::Exit) {
      n.text = "<exit " + f_.name + ">";
    } else {
      n.text = span_text(u_.tokens, first, last);
    }
    cfg_.nodes.push_back(std::move(n));
    cfg_.succ.emplace_back();
    return static_cast<int>(cfg_.nodes.size()) - 1;
  }

  void edge(int a, int b) {
    auto& s = cfg_.succ[static_cast<std::size_t>(a)];
    if (std::find(s.begin(), s.end(), b) == s.end()) s.push_back(b);
  }

  void connect(const std::vector<int>& from, int to) {
    for (int a : from) edge(a, to);
  }

  std::vector<int> lower(const Stmt& s, std::vector<int> in) {
    switch (s.kind) {
      case Stmt::Kind::Empty: return in;
      case Stmt::Kind::Block:
        for (const auto& c : s.stmts) in = lower(*c, std::move(in));
        return in;
      case Stmt::Kind::Decl:
      case Stmt::Kind::Expr:
      case Stmt::Kind::Assert:
      case Stmt::Kind::Free: {
        int n = add(CfgNode::Kind::Stmt, s.anchor, s.first, s.last);
        connect(in, n);
        return {n};
      }
      case Stmt::Kind::If: {
        int c = add(CfgNode::Kind::Cond, s.anchor, s.first, s.then_branch->first - 1);
        connect(in, c);
        auto out = lower(*s.then_branch, {c});
        auto other = s.else_branch ? lower(*s.else_branch, {c}) : std::vector<int>{c};
        out.insert(out.end(), other.begin(), other.end());
        return out;
      }
      case Stmt::Kind::While: {
        int c = add(CfgNode::Kind::Cond, s.anchor, s.first, s.then_branch->first - 1);
        connect(in, c);
        loops_.push_back({open_loop(c), c, {}});
        auto out = lower(*s.then_branch, {c});
        connect(out, c);
        Loop l = std::move(loops_.back());
        loops_.pop_back();
        l.breaks.insert(l.breaks.begin(), c);
        return l.breaks;
      }
      case Stmt::Kind::For: {
        std::size_t header_last = s.then_branch->first - 1;
        int init = add(CfgNode::Kind::Init, s.init->token, s.first, header_last);
        int c = add(CfgNode::Kind::Cond, s.anchor, s.first, header_last);
        int id = open_loop(c);
        int step = add(CfgNode::Kind::Step, s.step->token, s.first, header_last);
        cfg_.loop[static_cast<std::size_t>(step)] = id;
        cfg_.nodes[static_cast<std::size_t>(init)].text = "init " + span_text(u_.tokens, s.first, header_last);
        cfg_.nodes[static_cast<std::size_t>(step)].text = "step " + span_text(u_.tokens, s.first, header_last);
        connect(in, init);
        edge(init, c);
        loops_.push_back({id, step, {}});
        auto out = lower(*s.then_branch, {c});
        connect(out, step);
        edge(step, c);
        Loop l = std::move(loops_.back());
        loops_.pop_back();
        l.breaks.insert(l.breaks.begin(), c);
        return l.breaks;
      }
      case Stmt::Kind::Break: {
        int n = add(CfgNode::Kind::Stmt, s.anchor, s.first, s.last);
        connect(in, n);
        if (loops_.empty()) throw Error(Errc::UnsupportedConstruct, "break outside loop");
        loops_.back().breaks.push_back(n);
        return {};
      }
      case Stmt::Kind::Continue: {
        int n = add(CfgNode::Kind::Stmt, s.anchor, s.first, s.last);
        connect(in, n);
        if (loops_.empty()) throw Error(Errc::UnsupportedConstruct, "continue outside loop");
        edge(n, loops_.back().cont);
        return {};
      }
      case Stmt::Kind::Return: {
        int n = add(CfgNode::Kind::Stmt, s.anchor, s.first, s.last);
        connect(in, n);
        edge(n, cfg_.exit);
        return {};
      }
    }
    throw Error(Errc::UnsupportedConstruct, "unknown statement kind");
  }

  std::vector<std::vector<bool>> closure(const std::vector<std::vector<int>>& succ) const {
    const std::size_t n = succ.size();
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a) {
      std::vector<int> stack(succ[a].begin(), succ[a].end());
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        if (reach[a][static_cast<std::size_t>(v)]) continue;
        reach[a][static_cast<std::size_t>(v)] = true;
        for (int w : succ[static_cast<std::size_t>(v)]) stack.push_back(w);
      }
    }
    return reach;
  }

  bool inside(int node, int l) const {
    for (int k = cfg_.loop[static_cast<std::size_t>(node)]; k >= 0; k = cfg_.loop_parent[static_cast<std::size_t>(k)]) {
      if (k == l) return true;
    }
    return false;
  }

  void finish() {
    cfg_.before = closure(cfg_.succ);
    cfg_.reachable = cfg_.before[static_cast<std::size_t>(cfg_.entry)];
    cfg_.reachable[static_cast<std::size_t>(cfg_.entry)] = true;
    cfg_.within.push_back(cfg_.before);
    for (std::size_t l = 0; l < cfg_.loop_header.size(); ++l) {
      std::vector<std::vector<int>> succ = cfg_.succ;
      for (int k = static_cast<int>(l); k >= 0; k = cfg_.loop_parent[static_cast<std::size_t>(k)]) {
        int h = cfg_.loop_header[static_cast<std::size_t>(k)];
        for (std::size_t u = 0; u < succ.size(); ++u) {
          if (!inside(static_cast<int>(u), k)) continue;
          auto& out = succ[u];
          out.erase(std::remove(out.begin(), out.end(), h), out.end());
        }
      }
      cfg_.within.push_back(closure(succ));
    }
  }

  const minic::Function& f_;
  const minic::Unit& u_;
  Cfg cfg_;
  std::vector<Loop> loops_;
};

}  // namespace

Cfg build_cfg(const minic::Function& f, const minic::Unit& unit) { return CfgBuilder(f, unit).build(); }

std::vector<Cfg> build_cfgs(const minic::Unit& unit) {
  std::vector<Cfg> out;
  for (const auto& f : unit.functions) out.push_back(build_cfg(f, unit));
  return out;
}

std::string_view to_string(Order o) {
  switch (o) {
    case Order::Before: return "before";
    case Order::After: return "after";
    case Order::Both: return "both";
    case Order::Unordered: return "unordered";
  }
  return "?";
}

int Cfg::common_loop(int a, int b) const {
  for (int k = loop.at(static_cast<std::size_t>(a)); k >= 0; k = loop_parent[static_cast<std::size_t>(k)]) {
    for (int j = loop.at(static_cast<std::size_t>(b)); j >= 0; j = loop_parent[static_cast<std::size_t>(j)]) {
      if (j == k) return k;
    }
  }
  return -1;
}

Order partial_order(int n1, int n2, const Cfg& cfg) {
  const auto& reach = cfg.within.at(static_cast<std::size_t>(cfg.common_loop(n1, n2) + 1));
  bool ab = reach[static_cast<std::size_t>(n1)][static_cast<std::size_t>(n2)];
  bool ba = reach[static_cast<std::size_t>(n2)][static_cast<std::size_t>(n1)];
  if (ab && ba) return Order::Both;
  if (ab) return Order::Before;
  if (ba) return Order::After;
  return Order::Unordered;
}

PathSet enumerate_paths(const Cfg& cfg, int bound, std::size_t max_paths) {
  PathSet out;
  out.bound = bound;
  std::vector<int> visits(cfg.size(), 0);
  std::vector<int> path;
  std::function<void(int)> walk = [&](int v) {
    if (out.truncated) return;
    if (visits[static_cast<std::size_t>(v)] > bound) return;
    ++visits[static_cast<std::size_t>(v)];
    path.push_back(v);
    if (v == cfg.exit) {
      if (out.paths.size() >= max_paths) {
        out.truncated = true;
      } else {
        out.paths.push_back(path);
      }
    } else {
      for (int w : cfg.succ[static_cast<std::size_t>(v)]) walk(w);
    }
    path.pop_back();
    --visits[static_cast<std::size_t>(v)];
  };
  walk(cfg.entry);
  return out;
}

std::string_view verdict(const SemanticsReport& r) { return r.preserved ? "PRESERVED" : "VIOLATED"; }

namespace {

struct Mapped {
  int function = -1;  // index into p's cfgs
  int node = -1;
};

// Some entry-to-exit walk of cfg has sigma as a subsequence: each element
// is reachable from the previous one.
bool walk_subsequence(const std::vector<int>& sigma, const Cfg& cfg) {
  int prev = cfg.entry;
  for (int v : sigma) {
    if (!cfg.before[static_cast<std::size_t>(prev)][static_cast<std::size_t>(v)]) return false;
    prev = v;
  }
  return prev == cfg.exit || cfg.before[static_cast<std::size_t>(prev)][static_cast<std::size_t>(cfg.exit)];
}

}  // namespace

SemanticsReport verify_semantics(const minic::Unit& p, const Fragment& s, const minic::Unit& s_prime,
                                 const VerifyOptions& opts) {
  SemanticsReport report;
  report.bound = opts.bound;

  std::map<std::tuple<std::string, int, int>, std::size_t> p_index;
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    const auto& l = p.tokens[i].loc;
    p_index[{l.file, l.line, l.column}] = i;
  }
  std::set<std::tuple<std::string, int, int>> selected;
  for (std::size_t pick : s.picks) {
    const auto& l = p.tokens.at(pick).loc;
    selected.insert({l.file, l.line, l.column});
  }
  {
    std::set<std::tuple<std::string, int, int>> in_s;
    for (const auto& t : s_prime.tokens) in_s.insert({t.loc.file, t.loc.line, t.loc.column});
    for (std::size_t pick : s.picks) {
      const auto& l = p.tokens.at(pick).loc;
      if (!in_s.count({l.file, l.line, l.column})) {
        throw Error(Errc::MappingFailure, "fragment token at " + l.file + ":" + std::to_string(l.line) + " missing from patch");
      }
    }
  }

  std::vector<Cfg> pc = build_cfgs(p);
  std::vector<Cfg> sc = build_cfgs(s_prime);

  auto map_node = [&](const CfgNode& n) -> Mapped {
    auto it = p_index.find({n.loc.file, n.loc.line, n.loc.column});
    if (it == p_index.end()) throw Error(Errc::MappingFailure, "patch token not from the original program: " + n.text);
    std::size_t tok = it->second;
    Mapped best;
    std::size_t best_width = SIZE_MAX;
    for (std::size_t f = 0; f < pc.size(); ++f) {
      for (std::size_t v = 0; v < pc[f].size(); ++v) {
        const CfgNode& m = pc[f].nodes[v];
        if (m.kind == CfgNode::Kind::Entry || m.kind == CfgNode::Kind::Exit) continue;
        if (m.anchor == tok && m.kind == n.kind) return {static_cast<int>(f), static_cast<int>(v)};
        if (m.first <= tok && tok <= m.last && m.last - m.first < best_width) {
          best_width = m.last - m.first;
          best = {static_cast<int>(f), static_cast<int>(v)};
        }
      }
    }
    if (best.node < 0) throw Error(Errc::MappingFailure, "no statement of the original contains: " + n.text);
    return best;
  };

  for (const Cfg& g : sc) {
    std::vector<Mapped> map(g.size());
    std::vector<bool> has_pick(g.size(), false);
    std::map<int, int> votes;
    for (std::size_t v = 0; v < g.size(); ++v) {
      const CfgNode& n = g.nodes[v];
      if (n.kind == CfgNode::Kind::Entry || n.kind == CfgNode::Kind::Exit || !g.reachable[v]) continue;
      map[v] = map_node(n);
      ++votes[map[v].function];
      for (std::size_t i = n.first; i <= n.last && i < s_prime.tokens.size(); ++i) {
        const auto& l = s_prime.tokens[i].loc;
        if (selected.count({l.file, l.line, l.column})) has_pick[v] = true;
      }
    }
    if (votes.empty()) continue;
    int home = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
                 return a.second < b.second;
               })->first;
    const Cfg& pg = pc[static_cast<std::size_t>(home)];
    if (votes.size() > 1) {
      report.notes.push_back("function " + g.function + ": statements from several original functions; cross-function pairs skipped");
    }

    // Pairwise order of statements holding selected tokens. Nodes unreachable
    // in p lie on no execution, so pairs involving them carry no order.
    bool unreachable = false;
    for (std::size_t a = 0; a < g.size() && report.preserved; ++a) {
      if (map[a].node < 0 || map[a].function != home || !has_pick[a]) continue;
      for (std::size_t b = a + 1; b < g.size(); ++b) {
        if (map[b].node < 0 || map[b].function != home || !has_pick[b] || map[a].node == map[b].node) continue;
        if (!pg.reachable[static_cast<std::size_t>(map[a].node)] || !pg.reachable[static_cast<std::size_t>(map[b].node)]) {
          unreachable = true;
          continue;
        }
        ++report.pairs_checked;
        Order os = partial_order(static_cast<int>(a), static_cast<int>(b), g);
        Order op = partial_order(map[a].node, map[b].node, pg);
        if (os != op) {
          report.preserved = false;
          report.counterexample = "order of (" + g.nodes[a].text + ", " + g.nodes[b].text + "): patch " +
                                  std::string(to_string(os)) + ", original " + std::string(to_string(op));
          break;
        }
      }
    }
    if (!report.preserved) return report;
    if (unreachable) report.notes.push_back("function " + g.function + ": pairs with statements unreachable in the original skipped");

    // Bounded paths.
    PathSet sp = enumerate_paths(g, opts.bound, opts.max_paths);
    report.paths_truncated = report.paths_truncated || sp.truncated;
    std::set<std::vector<int>> sigmas;
    for (const auto& path : sp.paths) {
      std::vector<int> sigma;
      for (int v : path) {
        const Mapped& m = map[static_cast<std::size_t>(v)];
        if (m.node < 0 || m.function != home || !pg.reachable[static_cast<std::size_t>(m.node)]) continue;
        if (!sigma.empty() && sigma.back() == m.node) continue;
        sigma.push_back(m.node);
      }
      sigmas.insert(std::move(sigma));
    }
    for (const auto& sigma : sigmas) {
      ++report.paths_checked;
      if (!walk_subsequence(sigma, pg)) {
        report.preserved = false;
        std::string text;
        for (int v : sigma) text += (text.empty() ? "" : " ; ") + pg.nodes[static_cast<std::size_t>(v)].text;
        report.counterexample = "path [" + text + "] is not a subsequence of any original path";
        return report;
      }
    }
  }
  if (report.paths_truncated) report.notes.push_back("path enumeration of the patch truncated");
  return report;
}

}  // namespace synpatch::sem
