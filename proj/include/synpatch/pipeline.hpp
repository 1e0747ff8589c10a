#pragma once

// Batch driver: fragment, patch, resolve, verify, harness, run, classify,
// one warning at a time, with a versioned JSON report and a text table.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synpatch/fragment.hpp"
#include "synpatch/runner.hpp"

namespace synpatch::pipeline {

struct RunConfig {
  std::string grammar;   // BNF file; empty selects MiniC. Only `patch` accepts another grammar.
  std::string manifest;  // project manifest
  std::string warnings;  // warning file
  int inputs = 20;       // input vectors per warning
  std::uint64_t seed = 1;
  int bound = 2;         // loop unrolling bound for path checks
  int oracle_bound = 12;  // brute-force cross-check when a file has at most this many tokens outside the fragment
  std::string out_dir;   // empty: no files written
  int workers = 1;
  int line_tolerance = 0;
  std::uint64_t step_budget = 1'000'000;

  /// Throws ConfigError for missing paths or knobs below 1.
  void validate() const;
};

inline constexpr int kReportFormatVersion = 1;

enum class Stage { Fragment, Patch, Resolve, Verify, Harness, Run, Classify };
inline constexpr int kStageCount = 7;
std::string_view to_string(Stage s);

enum class StageStatus { Ok, Failed, Skipped };
std::string_view to_string(StageStatus s);

struct StageResult {
  Stage stage = Stage::Fragment;
  StageStatus status = StageStatus::Skipped;
  std::string error;  // "<code>: <message>" for Failed
};

struct FilePatch {
  std::string file;
  Program patched;
  std::size_t fragment_tokens = 0;
  std::vector<std::string> added;  // lexemes of added tokens with their lines, "lexeme@line"
  std::vector<std::string> lca_log;
  bool fallback = false;
  std::optional<bool> oracle_agrees;  // set when the brute-force cross-check ran
  std::string semantics;              // PRESERVED, VIOLATED or empty when not checked
  std::string counterexample;
};

struct WarningRecord {
  Warning warning;
  std::vector<StageResult> stages;  // one per Stage, in order
  std::vector<FilePatch> files;
  std::size_t patch_tokens = 0;
  bool parsed = false;     // every patched file parses
  bool buildable = false;  // compilable unit type-checks
  bool executable = false;  // harness built and ran
  std::string semantics;   // PRESERVED, VIOLATED or skipped
  std::string entry;
  std::vector<std::string> inputs;  // input variable names in slot order
  runner::Verdict verdict;
  std::vector<runner::InputVector> vectors;

  bool failed() const;
};

struct Aggregates {
  int warnings = 0, parsed = 0, compiled = 0, executable = 0;
  int preserved = 0, violated = 0;
  int tp = 0, fp = 0, likely_fp = 0, inconclusive = 0;
  int valid_tests = 0, pass_tests = 0, timeouts = 0;
  int failed = 0;  // records with a failed stage
};

struct BatchReport {
  RunConfig config;
  std::vector<WarningRecord> records;  // sorted by warning id
  Aggregates totals;
};

Aggregates aggregate(const std::vector<WarningRecord>& records);

/// Inputs shared by every warning of a batch; read-only while warnings run.
struct Workspace {
  deps::Project project;
  std::map<std::string, Program> sources;
  deps::DefDb db;                 // empty in grammar mode
  std::optional<Grammar> grammar;  // set in grammar mode
  std::vector<Warning> warnings;
};

/// Reads the manifest (MiniC lexer) and warnings. Throws IoError/ConfigError.
Workspace load(const RunConfig& cfg);

enum class Depth { Patch, Verify, Validate };

/// Runs one warning through the stages up to `depth`. A stage that throws is
/// recorded as Failed and every later stage as Skipped.
WarningRecord process(const Warning& w, const Workspace& ws, const RunConfig& cfg, Depth depth);

/// All warnings, one after another.
BatchReport run_serial(const Workspace& ws, const RunConfig& cfg, Depth depth);
/// All warnings on `cfg.workers` OpenMP threads; identical result to run_serial.
BatchReport run_parallel(const Workspace& ws, const RunConfig& cfg, Depth depth);

/// Machine report. Holds no timings, paths of the host or thread counts, so
/// equal configurations give byte-identical text.
nlohmann::ordered_json to_json(const BatchReport& r, bool evidence = true);
std::string render_json(const BatchReport& r);
/// Human table derived from the machine report.
std::string render_table(const nlohmann::ordered_json& report);

runner::Replay replay_of(const BatchReport& r);

/// Patches every warning; with `cfg.grammar` set, sources are whitespace
/// tokenized and patched with that grammar. Writes <out>/patch/<id>.json.
BatchReport cmd_patch(const RunConfig& cfg);
/// Patches and checks semantics preservation. Writes <out>/verify.json.
BatchReport cmd_verify(const RunConfig& cfg);
/// Full pipeline. Writes <out>/report.json, report.txt and replay.json.
BatchReport cmd_validate(const RunConfig& cfg);

/// Seed for one warning, independent of batch order.
std::uint64_t warning_seed(std::uint64_t seed, const std::string& id);

}  // namespace synpatch::pipeline
