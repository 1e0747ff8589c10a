#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "synpatch/grammar.hpp"

namespace synpatch {

/// Picks into a source program; picks strictly increase (q is a subsequence of p).
struct Fragment {
  std::string file;
  std::vector<std::size_t> picks;

  bool valid_for(const Program& p) const;
  Program tokens(const Program& p) const;
};

/// Greedy left-to-right embedding of q's lexemes into p's.
bool is_subsequence(const Program& q, const Program& p);
bool is_subsequence(const std::vector<std::string>& q, const std::vector<std::string>& p);

enum class WarningType {
  BufferOverflow,
  NullDeref,
  DivByZero,
  MemoryLeak,
  DeadCode,
  UnreachableCall,
  Assertion,
};

enum class Polarity { Positive, Negative };

enum class FailureKind {
  OutOfBounds,
  NullDeref,
  DivByZero,
  AssertFail,
  Leak,
  UninitializedRead,
};

struct Location {
  std::string file;
  int line = 0;

  friend bool operator==(const Location&, const Location&) = default;
  friend auto operator<=>(const Location&, const Location&) = default;
};

struct Warning {
  std::string id;
  WarningType type = WarningType::BufferOverflow;
  Polarity polarity = Polarity::Positive;
  std::vector<Location> path;
  Location failure;
  FailureKind symptom = FailureKind::OutOfBounds;

  /// Throws ConfigError when the record breaks the warning invariants.
  void validate() const;
};

std::string_view to_string(WarningType t);
std::string_view to_string(Polarity p);
std::string_view to_string(FailureKind k);
WarningType warning_type_from(std::string_view s);
Polarity polarity_from(std::string_view s);
FailureKind failure_kind_from(std::string_view s);

/// Symptom the dynamic run must show for a warning of this type.
FailureKind expected_symptom(WarningType t);

inline constexpr int kWarningFormatVersion = 1;

/// Warning files are JSON: {"version": 1, "warnings": [{id, type, polarity,
/// path: [{file, line}], failure: {file, line, symptom}}]}.
std::vector<Warning> parse_warnings(std::string_view json_text);
std::vector<Warning> read_warnings(const std::string& path);
std::string serialize_warnings(const std::vector<Warning>& warnings);

/// One fragment per file touched by the path, in first-appearance order.
/// Every token on a listed line is picked.
std::vector<Fragment> fragment_from_warning(const Warning& w, const std::map<std::string, Program>& sources);

}  // namespace synpatch
