#pragma once

// Test generation and execution: random inputs, harness synthesis, a
// checking MiniC interpreter, failure oracles and warning classification.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "synpatch/deps.hpp"
#include "synpatch/fragment.hpp"
#include "synpatch/minic.hpp"

namespace synpatch::runner {

/// One generated value. Blocks hold one value per memory cell.
struct InputValue {
  enum class Kind { Int, Null, Block };
  Kind kind = Kind::Int;
  long long value = 0;
  std::vector<InputValue> cells;

  static InputValue integer(long long v) { return {Kind::Int, v, {}}; }
  static InputValue null() { return {Kind::Null, 0, {}}; }
  friend bool operator==(const InputValue&, const InputValue&) = default;
};

using InputVector = std::vector<InputValue>;  // one value per slot

/// Integers are numbers, null is null, blocks are arrays.
nlohmann::json to_json(const InputValue& v);
InputValue from_json(const nlohmann::json& j);

/// n input vectors for the given slot types, deterministic per seed. The
/// first vectors walk boundary values (zero, one, minus one, the extremes,
/// empty and null blocks); the rest draw from a boundary-biased mix.
/// Pointers become null or a fresh block of 0..16 elements; a pointer to a
/// struct points at one struct. `unit` supplies struct layouts.
std::vector<InputVector> gen_inputs(const std::vector<minic::TypeRef>& types, const minic::Unit& unit,
                                    std::uint64_t seed, int n);

struct TestProgram {
  Program tokens;                        // unit with harness edits, then the harness function
  minic::Unit unit;                      // parsed and type-checked
  std::vector<deps::InputVar> slots;     // input variables fed from input vectors, in slot order
  std::vector<deps::InputVar> fixed;     // input variables set to their known original value
  std::vector<Location> assertions;      // injected `assert ( 0 ) ;` sites
  std::string entry;
};

inline constexpr std::string_view kHarnessMain = "__harness_main";

/// Adds `void __harness_main ( )`, which assigns free input variables,
/// calls the entry function once with parameter inputs as arguments, and
/// returns. Uninitialized local inputs get `= __input ( k )` in their
/// declaration. For a negative warning, `assert ( 0 ) ;` is placed before
/// the statement starting on the failure line (wrapped in braces when that
/// statement is a lone loop or branch body). Throws HarnessError for struct
/// values passed by value or a failure line with no statement.
TestProgram generate_harness(const deps::CompilableUnit& unit, const Warning& w);

struct RunResult {
  enum class Outcome { Normal, Failure, Timeout };
  Outcome outcome = Outcome::Normal;
  FailureKind kind = FailureKind::AssertFail;  // meaningful for Failure
  Location where;                              // meaningful for Failure
  std::string message;
  std::vector<Location> trace;                 // executed lines, sorted
  std::uint64_t steps = 0;

  bool covers(const Location& l) const;
};

std::string_view to_string(RunResult::Outcome o);

struct ExecOptions {
  std::uint64_t step_budget = 1'000'000;
  int max_call_depth = 2'000;  // deeper recursion ends the run as Timeout
};

/// Runs the harness on one input vector. Every index and dereference is
/// checked, division by zero traps, reads of unwritten cells trap, freed or
/// foreign blocks passed to free trap as out-of-bounds, and heap blocks the
/// program allocated but never freed are reported as a leak at their malloc
/// line when the harness returns. Globals start zeroed, locals and malloc
/// memory unwritten. int is 32-bit with wraparound; char is 8-bit.
RunResult execute(const TestProgram& tp, const InputVector& input, const ExecOptions& opts = {});

enum class Match { Valid, Pass, Irrelevant };
std::string_view to_string(Match m);

/// Valid: failure of the warning's symptom on its failure line (within
/// `line_tolerance`). Pass: normal run whose trace covers the failure line.
Match match_oracle(const RunResult& r, const Warning& w, int line_tolerance = 0);

enum class VerdictValue { TruePositive, FalsePositive, LikelyFalsePositive, Inconclusive };
std::string_view to_string(VerdictValue v);

struct Evidence {
  InputVector input;
  RunResult result;
  Match match = Match::Irrelevant;
};

struct Verdict {
  VerdictValue value = VerdictValue::Inconclusive;
  int valid = 0;
  int pass = 0;
  int timeouts = 0;
  std::vector<Evidence> evidence;
};

/// Positive: any Valid gives TruePositive, else any Pass LikelyFalsePositive.
/// Negative: any Valid gives FalsePositive. Otherwise Inconclusive.
Verdict classify(const Warning& w, std::vector<Evidence> results, int line_tolerance = 0);

/// Replay files: {"version": 1, "seed": s, "runs": [{"warning": id,
/// "inputs": [vector, ...]}]}. Integers are numbers, null is null, blocks
/// are arrays.
struct ReplayRun {
  std::string warning;
  std::vector<InputVector> inputs;
};
struct Replay {
  std::uint64_t seed = 0;
  std::vector<ReplayRun> runs;
};
inline constexpr int kReplayFormatVersion = 1;
std::string serialize_replay(const Replay& r);
Replay parse_replay(std::string_view json_text);

}  // namespace synpatch::runner
