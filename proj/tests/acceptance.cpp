// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "support/micro_programs.hpp"
#include "support/oracles.hpp"
#include "support/random_grammar.hpp"
#include "support/random_minic.hpp"
#include "support/scratch_dir.hpp"
#include "synpatch/derivation.hpp"
#include "synpatch/lca.hpp"
#include "synpatch/minic.hpp"
#include "synpatch/pipeline.hpp"
#include "synpatch/semantics.hpp"

using namespace synpatch;
namespace st = synpatch::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = "failed: " + what;
    }
  }
};

const char* kFlatGrammar = "A -> b C D E f\nC -> x\nD -> d\nE -> y\n";
const char* kSampleGrammar =
    "X -> m Y | M | u C D v\n"
    "Y -> d Z f\n"
    "Z -> M | k\n"
    "M -> m n\n"
    "C -> m\n"
    "D -> g n h | n d\n";
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

const std::string kSourceDir = SYNPATCH_SOURCE_DIR;

Fragment lines_of(const Program& p, std::vector<int> lines) {
  Fragment f{p.front().loc.file, {}};
  for (const auto& t : p) {
    if (std::find(lines.begin(), lines.end(), t.loc.line) != lines.end()) f.picks.push_back(t.position);
  }
  return f;
}

Program reorder_lines(const Program& p, std::vector<int> order) {
  Program out;
  for (int line : order) {
    for (const auto& t : p) {
      if (t.loc.line == line) out.push_back(t);
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].position = i;
  return out;
}

Outcome lca_exactness() {
  Outcome o;
  Grammar g = load_grammar(kFlatGrammar);
  auto t = parse(make_program("b x d y f"), g);
  o.require(t.has_value(), "fixture parses");
  if (!o.ok) return o;
  o.detail = to_string(lca_relation(*t, 1, 3), g);
  o.require(o.detail == "(A, b C D E f, 2, 4)", "relation is (A, b C D E f, 2, 4), got " + o.detail);
  return o;
}

Outcome derivation_graph() {
  Outcome o;
  Grammar g = load_grammar(kSampleGrammar);
  DerivationGraph dg = build_derivation_graph(g, g.symbol("X"));
  const int x = dg.node_of(g.symbol("X"));
  std::vector<int> weights;
  for (const auto& e : dg.type1_edges()) {
    if (e.from == x) weights.push_back(e.weight);
  }
  o.require(weights == std::vector<int>{1, 0, 2}, "Type I weights from X are {1, 0, 2}");
  std::vector<std::string> targets;
  for (const auto& e : dg.type2_edges()) {
    const DgNode& from = dg.nodes()[static_cast<std::size_t>(e.from)];
    if (g.production_text(from.production) == "X -> u C D v") {
      targets.push_back(g.name(dg.nodes()[static_cast<std::size_t>(e.to)].symbol));
    }
  }
  o.require(targets == std::vector<std::string>{"C", "D"}, "Type II edges uCDv -> C, D");
  DminBreakdown b = dmin_breakdown(g.symbol("X"), g.symbol("m"), dg);
  bool found = false;
  for (const auto& via : b.via) {
    if (g.production_text(via.production) != "X -> u C D v") continue;
    found = true;
    o.require(via.c_xu == 2 && via.c_vy_min == 3 && via.c_xy == 5, "uCDv branch costs 2, 3, 5");
    if (o.ok) o.detail = "weights {1,0,2}, uCDv -> C,D, C_Xu=2 C_vymin=3 C_Xy=5";
  }
  o.require(found, "uCDv branch present");
  return o;
}

Outcome dmin_oracle() {
  Outcome o;
  Grammar g = load_grammar(kSampleGrammar);
  auto oracle = st::brute_dmin(g, g.symbol("X"), g.symbol("m"), 10);
  o.require(oracle.has_value(), "oracle finds a derivation");
  if (!o.ok) return o;
  std::printf("    oracle d_min(X, m) = %d\n", *oracle);
  DerivationGraph dg = DerivationGraph::full(g);
  auto plan = d_min(g.symbol("X"), g.symbol("m"), dg);
  o.require(plan.has_value(), "d_min finds a derivation");
  if (!o.ok) return o;
  o.require(plan->cost == *oracle, "d_min equals the oracle");
  std::string yield;
  for (const auto& w : plan->yield) yield += (yield.empty() ? "" : " ") + w;
  o.detail = "d_min = oracle = " + std::to_string(*oracle) + " (" + yield + ")";
  return o;
}

Outcome lca_minimality() {
  Outcome o;
  std::mt19937 rng(4242);
  int solved = 0, unsolvable = 0, total = 0;
  while (total < 250) {
    auto inst = st::random_instance(rng, 8, 12);
    if (!inst) continue;
    ++total;
    const Grammar& g = inst->grammar;
    const Program& p = inst->program;
    const Fragment& s = inst->fragment;
    std::string fast_err, slow_err;
    PatchResult r, b;
    try {
      r = lca_patch(p, s, g);
    } catch (const Error& e) {
      fast_err = to_string(e.code());
    }
    try {
      b = brute_force_patch(p, s, g, PatchMode::Lca, 16);
    } catch (const Error& e) {
      slow_err = to_string(e.code());
    }
    if (!fast_err.empty() || !slow_err.empty()) {
      ++unsolvable;
      o.require(!fast_err.empty() && !slow_err.empty(), "both searches fail together: " + inst->bnf);
      continue;
    }
    ++solved;
    o.require(!r.fallback, "search budget suffices");
    // 1: the fragment is kept; 2: the patch is a subsequence of p.
    o.require(std::is_sorted(r.origin.begin(), r.origin.end()) && r.origin.size() == r.patched.size(),
              "patch is a subsequence of p");
    for (std::size_t pick : s.picks) {
      o.require(std::binary_search(r.origin.begin(), r.origin.end(), pick), "fragment token kept");
    }
    // 3: the patch is in the language.
    auto tp = parse(p, g);
    auto ts = parse(r.patched, g);
    o.require(tp && ts, "patch parses: " + inst->bnf + " / " + join_lexemes(r.patched));
    if (!o.ok) break;
    // 4: every pairwise relation is kept.
    std::vector<std::size_t> in_s;
    for (std::size_t pick : s.picks) {
      in_s.push_back(static_cast<std::size_t>(std::lower_bound(r.origin.begin(), r.origin.end(), pick) -
                                              r.origin.begin()));
    }
    o.require(preserves_lca(*tp, *ts, s.picks, in_s), "relations preserved: " + inst->bnf);
    o.require(r.patched.size() == b.patched.size(),
              "minimal length: " + inst->bnf + " / " + join_lexemes(p) + " got " + join_lexemes(r.patched) +
                  " oracle " + join_lexemes(b.patched));
    if (!o.ok) break;
  }
  if (o.ok) {
    o.detail = std::to_string(solved) + "/" + std::to_string(solved) + " solvable minimal, " +
               std::to_string(unsolvable) + " unsolvable agree";
  }
  return o;
}

Outcome baseline_pathology() {
  Outcome o;
  Grammar g2 = load_grammar(kAssignCall);
  Program p2 = make_program("var = foo ( a ) ; bar ( b ) ;");
  Fragment s2{"calls", {2, 8}};
  PatchResult token = brute_force_patch(p2, s2, g2, PatchMode::Token);
  PatchResult lca = lca_patch(p2, s2, g2);
  auto tp = parse(p2, g2);
  auto tt = parse(token.patched, g2);
  auto tl = parse(lca.patched, g2);
  o.require(tp && tt && tl, "call fixture patches parse");
  if (!o.ok) return o;
  auto pos = [](const PatchResult& r, std::size_t p) {
    return static_cast<std::size_t>(std::find(r.origin.begin(), r.origin.end(), p) - r.origin.begin());
  };
  LcaRelation orig = lca_relation(*tp, 2, 8);
  o.require(!(lca_relation(*tt, pos(token, 2), pos(token, 8)) == orig), "token-mode loses the (foo, b) relation");
  o.require(lca_relation(*tl, pos(lca, 2), pos(lca, 8)) == orig, "lca patch keeps the (foo, b) relation");

  Grammar g4 = load_grammar(kStmtList);
  Program p4 = make_program("s1 ; s2 ; s3 ; s4 ;");
  Fragment s4{"stmts", {0, 4}};
  std::string tree = join_lexemes(brute_force_patch(p4, s4, g4, PatchMode::Tree).patched);
  std::string lca4 = join_lexemes(lca_patch(p4, s4, g4).patched);
  o.require(tree == "s1 ; s2 ; s3 ; s4 ;", "tree mode keeps all four statements, got " + tree);
  o.require(lca4 == "s1 ; s3 ;", "lca patch keeps two statements, got " + lca4);
  if (o.ok) {
    o.detail = "token: '" + join_lexemes(token.patched) + "', lca: '" + join_lexemes(lca.patched) + "'; tree: '" +
               tree + "', lca: '" + lca4 + "'";
  }
  return o;
}

Outcome order_preservation() {
  Outcome o;
  st::MiniCGenerator gen(2024);
  int preserved = 0, total = 0;
  sem::VerifyOptions vo;
  vo.bound = 2;
  while (total < 250) {
    std::string text = gen.program(40);
    Program p = minic::lex(text, "r.c");
    Fragment s = gen.fragment(p, true);
    ++total;
    PatchResult r = minic::patch(p, s);
    auto rep = sem::verify_semantics(minic::parse_unit(p), s, minic::parse_unit(r.patched), vo);
    if (rep.preserved) {
      ++preserved;
    } else {
      o.require(false, "PRESERVED for\n" + text + "patch:\n" + minic::render(r.patched) + rep.counterexample);
    }
  }
  o.detail = std::to_string(preserved) + "/" + std::to_string(total) + " PRESERVED at k=2";
  return o;
}

Outcome nested_loop_break() {
  Outcome o;
  Program p = minic::lex(st::slurp(kSourceDir + "/tests/data/nested_loops.c"), "nested_loops.c");
  Fragment s = lines_of(p, {8, 9, 11});
  minic::Unit up = minic::parse_unit(p);
  PatchResult r = minic::patch(p, s);
  bool inner_kept = false;
  for (std::size_t i : r.origin) inner_kept |= p[i].loc.line == 7 && p[i].lexeme == "while";
  o.require(inner_kept, "patch restores the inner loop header");
  auto good = sem::verify_semantics(up, s, minic::parse_unit(r.patched));
  o.require(good.preserved, "lca patch PRESERVED");
  Program naive = reorder_lines(p, {1, 5, 8, 9, 11, 12, 14});
  auto bad = sem::verify_semantics(up, s, minic::parse_unit(naive));
  o.require(!bad.preserved, "naive patch VIOLATED");
  if (o.ok) o.detail = "lca patch PRESERVED, naive patch VIOLATED (" + bad.counterexample + ")";
  return o;
}

std::string verdict_name(runner::VerdictValue v) {
  switch (v) {
    case runner::VerdictValue::TruePositive: return "TruePositive";
    case runner::VerdictValue::FalsePositive: return "FalsePositive";
    case runner::VerdictValue::LikelyFalsePositive: return "LikelyFalsePositive";
    case runner::VerdictValue::Inconclusive: return "Inconclusive";
  }
  return "?";
}

pipeline::RunConfig corpus_config() {
  pipeline::RunConfig cfg;
  cfg.manifest = kSourceDir + "/data/corpus/manifest.txt";
  cfg.warnings = kSourceDir + "/data/corpus/warnings.json";
  cfg.inputs = 20;
  cfg.seed = 1;
  return cfg;
}

Outcome corpus() {
  Outcome o;
  pipeline::BatchReport r = pipeline::cmd_validate(corpus_config());
  auto expected = nlohmann::json::parse(st::slurp(kSourceDir + "/data/corpus/expected.json")).at("verdicts");
  int agree = 0, mislabels = 0;
  std::string misses;
  for (const auto& rec : r.records) {
    std::string want = expected.at(rec.warning.id).get<std::string>();
    std::string got = verdict_name(rec.verdict.value);
    if (want == got) {
      ++agree;
      continue;
    }
    misses += " " + rec.warning.id + "=" + got;
    bool strong = got == "TruePositive" || got == "FalsePositive";
    mislabels += strong;
  }
  o.require(r.records.size() == 20, "corpus has 20 warnings");
  o.require(agree >= 18, "at least 18/20 verdicts match:" + misses);
  o.require(mislabels == 0, "no TruePositive/FalsePositive mislabels:" + misses);
  if (o.ok) {
    o.detail = std::to_string(agree) + "/20 expected verdicts, " + std::to_string(mislabels) + " mislabels";
  }
  return o;
}

Outcome interpreter_suite() {
  Outcome o;
  int exact = 0, total = 0;
  for (const auto& c : st::kMicroPrograms) {
    ++total;
    runner::ExecOptions opts;
    opts.step_budget = 20000;
    opts.max_call_depth = 200;
    runner::RunResult r = runner::execute(st::hand_harness(c.text), c.input, opts);
    bool ok = r.outcome == c.outcome;
    if (ok && c.outcome == st::RunOutcome::Failure) ok = r.kind == c.kind && r.where.line == c.line;
    exact += ok;
    o.require(ok, std::string(c.name) + ": " + r.message);
  }
  o.require(total >= 30, "at least 30 micro-programs");
  if (o.ok) o.detail = std::to_string(exact) + "/" + std::to_string(total) + " exact kind and line";
  return o;
}

Outcome determinism() {
  Outcome o;
  std::string a = pipeline::render_json(pipeline::cmd_validate(corpus_config()));
  std::string b = pipeline::render_json(pipeline::cmd_validate(corpus_config()));
  o.require(a == b, "reports are byte-identical");
  pipeline::RunConfig par = corpus_config();
  par.workers = 4;
  o.require(pipeline::render_json(pipeline::cmd_validate(par)) == a, "parallel report equals serial report");
  if (o.ok) o.detail = "two runs and a 4-worker run give identical " + std::to_string(a.size()) + "-byte reports";
  return o;
}

struct Criterion {
  int number;
  const char* name;
  double limit_s;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "LCA relation exactness", 1, lca_exactness},
      {2, "derivation graph fidelity", 1, derivation_graph},
      {3, "d_min equals exhaustive oracle", 5, dmin_oracle},
      {4, "patch correctness and minimality", 600, lca_minimality},
      {5, "baseline pathology reproduction", 5, baseline_pathology},
      {6, "order preservation on random programs", 900, order_preservation},
      {7, "nested-loop break fidelity", 5, nested_loop_break},
      {8, "end-to-end corpus", 300, corpus},
      {9, "interpreter check suite", 10, interpreter_suite},
      {10, "determinism", 300, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.ok && secs > c.limit_s) {
      o.ok = false;
      o.detail += " (over time limit)";
    }
    failed += !o.ok;
    std::printf("criterion %2d %s  %s: %s [%.2fs]\n", c.number, o.ok ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
