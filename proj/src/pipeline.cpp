#include "synpatch/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "synpatch/lca.hpp"
#include "synpatch/semantics.hpp"

namespace synpatch::pipeline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

void RunConfig::validate() const {
  auto need = [](const std::string& path, const char* what) {
    if (path.empty()) throw Error(Errc::ConfigError, std::string(what) + " path missing");
    if (!fs::exists(path)) throw Error(Errc::ConfigError, std::string(what) + " not found: " + path);
  };
  need(manifest, "manifest");
  need(warnings, "warnings");
  if (!grammar.empty()) need(grammar, "grammar");
  if (inputs < 1) throw Error(Errc::ConfigError, "inputs must be at least 1");
  if (bound < 1) throw Error(Errc::ConfigError, "bound must be at least 1");
  if (oracle_bound < 1) throw Error(Errc::ConfigError, "oracle bound must be at least 1");
  if (workers < 1) throw Error(Errc::ConfigError, "workers must be at least 1");
  if (step_budget < 1) throw Error(Errc::ConfigError, "step budget must be at least 1");
  if (line_tolerance < 0) throw Error(Errc::ConfigError, "line tolerance must not be negative");
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::Fragment: return "fragment";
    case Stage::Patch: return "patch";
    case Stage::Resolve: return "resolve";
    case Stage::Verify: return "verify";
    case Stage::Harness: return "harness";
    case Stage::Run: return "run";
    case Stage::Classify: return "classify";
  }
  return "?";
}

std::string_view to_string(StageStatus s) {
  switch (s) {
    case StageStatus::Ok: return "ok";
    case StageStatus::Failed: return "failed";
    case StageStatus::Skipped: return "skipped";
  }
  return "?";
}

bool WarningRecord::failed() const {
  return std::any_of(stages.begin(), stages.end(), [](const StageResult& s) { return s.status == StageStatus::Failed; });
}

Aggregates aggregate(const std::vector<WarningRecord>& records) {
  Aggregates a;
  for (const auto& r : records) {
    ++a.warnings;
    a.parsed += r.parsed;
    a.compiled += r.buildable;
    a.executable += r.executable;
    a.preserved += r.semantics == "PRESERVED";
    a.violated += r.semantics == "VIOLATED";
    a.failed += r.failed();
    if (r.executable) {
      switch (r.verdict.value) {
        case runner::VerdictValue::TruePositive: ++a.tp; break;
        case runner::VerdictValue::FalsePositive: ++a.fp; break;
        case runner::VerdictValue::LikelyFalsePositive: ++a.likely_fp; break;
        case runner::VerdictValue::Inconclusive: ++a.inconclusive; break;
      }
    } else {
      ++a.inconclusive;
    }
    a.valid_tests += r.verdict.valid;
    a.pass_tests += r.verdict.pass;
    a.timeouts += r.verdict.timeouts;
  }
  return a;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << text;
}

Program whitespace_lexer(std::string_view text, std::string_view file) {
  Program p;
  int line = 1;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
      Token t;
      t.lexeme = std::string(text.substr(i, j - i));
      t.position = p.size();
      t.loc = SourceLoc{std::string(file), line, static_cast<int>(i)};
      p.push_back(std::move(t));
      i = j;
    }
  }
  return p;
}

// Function of `file` whose definition spans `line`.
std::string function_at(const deps::DefDb& db, const std::string& file, int line) {
  for (const auto& d : db.entries()) {
    if (d.kind != deps::DefKind::Func || d.file != file || d.scope != "" || d.tokens.empty()) continue;
    if (d.tokens.front().loc.line <= line && line <= d.tokens.back().loc.line) return d.name;
  }
  return "";
}

std::string describe(const std::exception& e) {
  if (dynamic_cast<const Error*>(&e)) return e.what();
  return std::string("internal: ") + e.what();
}

}  // namespace

Workspace load(const RunConfig& cfg) {
  cfg.validate();
  Workspace ws;
  if (cfg.grammar.empty()) {
    ws.project = deps::read_project(cfg.manifest);
    ws.db = deps::index_definitions(ws.project);
  } else {
    ws.grammar = load_grammar(read_file(cfg.grammar));
    ws.project = deps::read_project(cfg.manifest, &whitespace_lexer);
  }
  for (const auto& [file, tokens] : ws.project) ws.sources[file] = tokens;
  ws.warnings = read_warnings(cfg.warnings);
  std::vector<std::string> ids;
  for (const auto& w : ws.warnings) ids.push_back(w.id);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(Errc::ConfigError, "duplicate warning id " + *std::adjacent_find(ids.begin(), ids.end()));
  }
  return ws;
}

std::uint64_t warning_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h ^ (seed * 0x9e3779b97f4a7c15ULL);
}

WarningRecord process(const Warning& w, const Workspace& ws, const RunConfig& cfg, Depth depth) {
  WarningRecord rec;
  rec.warning = w;
  for (int s = 0; s < kStageCount; ++s) rec.stages.push_back({static_cast<Stage>(s), StageStatus::Skipped, ""});
  rec.semantics = "skipped";
  const bool minic_mode = !ws.grammar.has_value();
  const bool verify = depth != Depth::Patch && minic_mode;
  const bool test = depth == Depth::Validate && minic_mode;

  std::vector<Fragment> frags;
  std::vector<Program> patched;
  std::optional<deps::CompilableUnit> cu;
  std::optional<runner::TestProgram> tp;
  std::vector<runner::Evidence> evidence;

  auto wanted = [&](Stage s) {
    switch (s) {
      case Stage::Fragment:
      case Stage::Patch: return true;
      case Stage::Resolve: return test;
      case Stage::Verify: return verify;
      default: return test;
    }
  };

  auto run = [&](Stage s, auto&& body) {
    if (!wanted(s)) return true;
    try {
      body();
      rec.stages[static_cast<std::size_t>(s)].status = StageStatus::Ok;
      return true;
    } catch (const std::exception& e) {
      rec.stages[static_cast<std::size_t>(s)].status = StageStatus::Failed;
      rec.stages[static_cast<std::size_t>(s)].error = describe(e);
      return false;
    }
  };

  bool ok = run(Stage::Fragment, [&] { frags = fragment_from_warning(w, ws.sources); });

  ok = ok && run(Stage::Patch, [&] {
    for (const auto& f : frags) {
      const Program& p = ws.sources.at(f.file);
      PatchResult r = minic_mode ? minic::patch(p, f) : lca_patch(p, f, *ws.grammar);
      FilePatch fp;
      fp.file = f.file;
      fp.fragment_tokens = f.picks.size();
      for (std::size_t i : r.added) {
        fp.added.push_back(r.patched[i].lexeme + "@" + std::to_string(r.patched[i].loc.line));
      }
      const Grammar& g = minic_mode ? minic::grammar() : *ws.grammar;
      for (const auto& rel : r.lca_log) fp.lca_log.push_back(to_string(rel, g));
      fp.fallback = r.fallback;
      if (!minic_mode && p.size() - f.picks.size() <= static_cast<std::size_t>(cfg.oracle_bound)) {
        try {
          PatchResult b = brute_force_patch(p, f, g, PatchMode::Lca, static_cast<std::size_t>(cfg.oracle_bound));
          fp.oracle_agrees = b.patched.size() == r.patched.size();
        } catch (const Error& e) {
          fp.oracle_agrees = e.code() == Errc::NoSolution ? std::optional<bool>(false) : std::nullopt;
        }
      }
      fp.patched = r.patched;
      rec.patch_tokens += r.patched.size();
      patched.push_back(r.patched);
      rec.files.push_back(std::move(fp));
    }
    if (minic_mode) {
      for (const auto& p : patched) minic::parse_unit(p);
    }
    rec.parsed = true;
  });

  bool resolved = ok && run(Stage::Resolve, [&] {
    std::string entry = function_at(ws.db, w.path.front().file, w.path.front().line);
    cu = deps::resolve_dependencies(patched, ws.db, entry);
    rec.entry = cu->entry;
    rec.buildable = true;
  });

  // Verification reads only the patch, so it runs even when resolution failed.
  bool verified = ok && run(Stage::Verify, [&] {
    bool all = true;
    for (std::size_t i = 0; i < frags.size(); ++i) {
      minic::Unit pu = minic::parse_unit(ws.sources.at(frags[i].file));
      minic::Unit su = minic::parse_unit(patched[i]);
      sem::VerifyOptions vo;
      vo.bound = cfg.bound;
      sem::SemanticsReport sr = sem::verify_semantics(pu, frags[i], su, vo);
      rec.files[i].semantics = std::string(sem::verdict(sr));
      rec.files[i].counterexample = sr.counterexample;
      all = all && sr.preserved;
    }
    rec.semantics = all ? "PRESERVED" : "VIOLATED";
  });

  ok = ok && resolved && verified;
  ok = ok && run(Stage::Harness, [&] {
    tp = runner::generate_harness(*cu, w);
    for (const auto& v : tp->slots) rec.inputs.push_back(v.name);
  });

  ok = ok && run(Stage::Run, [&] {
    std::vector<minic::TypeRef> types;
    for (const auto& v : tp->slots) types.push_back(v.type);
    rec.vectors = runner::gen_inputs(types, tp->unit, warning_seed(cfg.seed, w.id), cfg.inputs);
    runner::ExecOptions eo;
    eo.step_budget = cfg.step_budget;
    for (const auto& in : rec.vectors) {
      runner::Evidence ev;
      ev.input = in;
      ev.result = runner::execute(*tp, in, eo);
      ev.match = runner::match_oracle(ev.result, w, cfg.line_tolerance);
      evidence.push_back(std::move(ev));
    }
    rec.executable = true;
  });

  ok = ok && run(Stage::Classify, [&] { rec.verdict = runner::classify(w, std::move(evidence), cfg.line_tolerance); });
  return rec;
}

namespace {

BatchReport finish(std::vector<WarningRecord> records, const RunConfig& cfg) {
  std::sort(records.begin(), records.end(),
            [](const WarningRecord& a, const WarningRecord& b) { return a.warning.id < b.warning.id; });
  BatchReport r;
  r.config = cfg;
  r.totals = aggregate(records);
  r.records = std::move(records);
  return r;
}

}  // namespace

BatchReport run_serial(const Workspace& ws, const RunConfig& cfg, Depth depth) {
  std::vector<WarningRecord> records;
  for (const auto& w : ws.warnings) records.push_back(process(w, ws, cfg, depth));
  return finish(std::move(records), cfg);
}

BatchReport run_parallel(const Workspace& ws, const RunConfig& cfg, Depth depth) {
  std::vector<WarningRecord> records(ws.warnings.size());
  const long n = static_cast<long>(ws.warnings.size());
#pragma omp parallel for schedule(dynamic) num_threads(cfg.workers)
  for (long i = 0; i < n; ++i) {
    records[static_cast<std::size_t>(i)] = process(ws.warnings[static_cast<std::size_t>(i)], ws, cfg, depth);
  }
  return finish(std::move(records), cfg);
}

ordered_json to_json(const BatchReport& r, bool evidence) {
  ordered_json j;
  j["version"] = kReportFormatVersion;
  const RunConfig& c = r.config;
  j["config"] = {{"grammar", c.grammar.empty() ? "minic" : c.grammar},
                 {"manifest", c.manifest},
                 {"warnings", c.warnings},
                 {"inputs", c.inputs},
                 {"seed", c.seed},
                 {"bound", c.bound},
                 {"oracle_bound", c.oracle_bound},
                 {"line_tolerance", c.line_tolerance},
                 {"step_budget", c.step_budget}};
  const Aggregates& a = r.totals;
  j["aggregates"] = {{"warnings", a.warnings},   {"parsed", a.parsed},
                     {"compiled", a.compiled},   {"executable", a.executable},
                     {"preserved", a.preserved}, {"violated", a.violated},
                     {"tp", a.tp},               {"fp", a.fp},
                     {"likely_fp", a.likely_fp}, {"inconclusive", a.inconclusive},
                     {"valid_tests", a.valid_tests}, {"pass_tests", a.pass_tests},
                     {"timeouts", a.timeouts},   {"failed", a.failed}};
  ordered_json recs = ordered_json::array();
  for (const auto& rec : r.records) {
    ordered_json jr;
    jr["id"] = rec.warning.id;
    jr["type"] = to_string(rec.warning.type);
    jr["polarity"] = to_string(rec.warning.polarity);
    jr["failure"] = {{"file", rec.warning.failure.file}, {"line", rec.warning.failure.line},
                     {"symptom", to_string(rec.warning.symptom)}};
    ordered_json stages = ordered_json::array();
    for (const auto& s : rec.stages) {
      ordered_json js = {{"stage", to_string(s.stage)}, {"status", to_string(s.status)}};
      if (!s.error.empty()) js["error"] = s.error;
      stages.push_back(js);
    }
    jr["stages"] = stages;
    jr["patch_tokens"] = rec.patch_tokens;
    jr["parsed"] = rec.parsed;
    jr["buildable"] = rec.buildable;
    jr["executable"] = rec.executable;
    jr["semantics"] = rec.semantics;
    ordered_json files = ordered_json::array();
    for (const auto& f : rec.files) {
      ordered_json jf;
      jf["file"] = f.file;
      jf["fragment_tokens"] = f.fragment_tokens;
      jf["patched"] = join_lexemes(f.patched);
      jf["added"] = f.added;
      jf["lca_log"] = f.lca_log;
      jf["fallback"] = f.fallback;
      if (f.oracle_agrees) jf["oracle_agrees"] = *f.oracle_agrees;
      if (!f.semantics.empty()) jf["semantics"] = f.semantics;
      if (!f.counterexample.empty()) jf["counterexample"] = f.counterexample;
      files.push_back(jf);
    }
    jr["files"] = files;
    jr["entry"] = rec.entry;
    jr["inputs"] = rec.inputs;
    jr["valid"] = rec.verdict.valid;
    jr["pass"] = rec.verdict.pass;
    jr["timeouts"] = rec.verdict.timeouts;
    jr["verdict"] = rec.executable ? to_string(rec.verdict.value) : to_string(runner::VerdictValue::Inconclusive);
    if (evidence) {
      ordered_json ev = ordered_json::array();
      for (const auto& e : rec.verdict.evidence) {
        ordered_json je;
        ordered_json in = ordered_json::array();
        for (const auto& v : e.input) in.push_back(ordered_json::parse(runner::to_json(v).dump()));
        je["input"] = in;
        je["outcome"] = to_string(e.result.outcome);
        if (e.result.outcome == runner::RunResult::Outcome::Failure) {
          je["kind"] = to_string(e.result.kind);
          je["where"] = {{"file", e.result.where.file}, {"line", e.result.where.line}};
        }
        je["steps"] = e.result.steps;
        je["match"] = to_string(e.match);
        ev.push_back(je);
      }
      jr["evidence"] = ev;
    }
    recs.push_back(jr);
  }
  j["warnings"] = recs;
  return j;
}

std::string render_json(const BatchReport& r) { return to_json(r).dump(2) + "\n"; }

std::string render_table(const ordered_json& report) {
  struct Row {
    std::vector<std::string> cells;
  };
  std::vector<std::string> head = {"id", "type", "pol", "tokens", "parsed", "built", "semantics",
                                   "valid", "pass", "verdict", "note"};
  std::vector<Row> rows;
  auto yn = [](bool b) { return std::string(b ? "yes" : "no"); };
  for (const auto& w : report.at("warnings")) {
    std::string note;
    for (const auto& s : w.at("stages")) {
      if (s.at("status") == "failed") {
        note = s.at("stage").get<std::string>() + ": " + s.value("error", "");
        break;
      }
    }
    if (note.size() > 60) note = note.substr(0, 57) + "...";
    rows.push_back({{w.at("id").get<std::string>(), w.at("type").get<std::string>(),
                     w.at("polarity") == "positive" ? "+" : "-", std::to_string(w.at("patch_tokens").get<int>()),
                     yn(w.at("parsed").get<bool>()), yn(w.at("buildable").get<bool>()),
                     w.at("semantics").get<std::string>(), std::to_string(w.at("valid").get<int>()),
                     std::to_string(w.at("pass").get<int>()), w.at("verdict").get<std::string>(), note}});
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t i = 0; i < head.size(); ++i) width[i] = head[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < head.size(); ++i) width[i] = std::max(width[i], r.cells[i].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      l += cells[i];
      if (i + 1 < cells.size()) l += std::string(width[i] - cells[i].size() + 2, ' ');
    }
    out << l.substr(0, l.find_last_not_of(' ') + 1) << "\n";
  };
  line(head);
  for (const auto& r : rows) line(r.cells);
  const auto& a = report.at("aggregates");
  out << "\nwarnings " << a.at("warnings") << "  parsed " << a.at("parsed") << "  compiled " << a.at("compiled")
      << "  executable " << a.at("executable") << "  preserved " << a.at("preserved") << "\n";
  out << "tp " << a.at("tp") << "  fp " << a.at("fp") << "  likely-fp " << a.at("likely_fp") << "  inconclusive "
      << a.at("inconclusive") << "  valid tests " << a.at("valid_tests") << "  pass tests " << a.at("pass_tests")
      << "  timeouts " << a.at("timeouts") << "  failed " << a.at("failed") << "\n";
  return out.str();
}

runner::Replay replay_of(const BatchReport& r) {
  runner::Replay rp;
  rp.seed = r.config.seed;
  for (const auto& rec : r.records) {
    if (rec.vectors.empty()) continue;
    rp.runs.push_back({rec.warning.id, rec.vectors});
  }
  return rp;
}

namespace {

BatchReport run_batch(const RunConfig& cfg, Depth depth) {
  Workspace ws = load(cfg);
  return cfg.workers > 1 ? run_parallel(ws, cfg, depth) : run_serial(ws, cfg, depth);
}

}  // namespace

BatchReport cmd_patch(const RunConfig& cfg) {
  BatchReport r = run_batch(cfg, Depth::Patch);
  if (!cfg.out_dir.empty()) {
    ordered_json all = to_json(r, false);
    for (const auto& jr : all.at("warnings")) {
      ordered_json out;
      out["version"] = kReportFormatVersion;
      out["id"] = jr.at("id");
      out["stages"] = jr.at("stages");
      out["files"] = jr.at("files");
      write_file(fs::path(cfg.out_dir) / "patch" / (jr.at("id").get<std::string>() + ".json"), out.dump(2) + "\n");
    }
  }
  return r;
}

BatchReport cmd_verify(const RunConfig& cfg) {
  if (!cfg.grammar.empty()) throw Error(Errc::ConfigError, "verify works on MiniC only");
  BatchReport r = run_batch(cfg, Depth::Verify);
  if (!cfg.out_dir.empty()) write_file(fs::path(cfg.out_dir) / "verify.json", to_json(r, false).dump(2) + "\n");
  return r;
}

BatchReport cmd_validate(const RunConfig& cfg) {
  if (!cfg.grammar.empty()) throw Error(Errc::ConfigError, "validate works on MiniC only");
  BatchReport r = run_batch(cfg, Depth::Validate);
  if (!cfg.out_dir.empty()) {
    fs::path dir(cfg.out_dir);
    ordered_json j = to_json(r);
    write_file(dir / "report.json", j.dump(2) + "\n");
    write_file(dir / "report.txt", render_table(j));
    write_file(dir / "replay.json", runner::serialize_replay(replay_of(r)));
  }
  return r;
}

}  // namespace synpatch::pipeline
