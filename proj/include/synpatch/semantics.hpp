#pragma once

#include <optional>
#include <string>
#include <vector>

#include "synpatch/fragment.hpp"
#include "synpatch/minic.hpp"

namespace synpatch::sem {

struct CfgNode {
  enum class Kind { Entry, Exit, Stmt, Cond, Init, Step };
  Kind kind = Kind::Stmt;
  std::size_t anchor = 0;  // token index in the unit
  SourceLoc loc;           // anchor token location
  std::size_t first = 0;   // token span used for containment, inclusive
  std::size_t last = 0;
  std::string text;        // for reports
};

/// Control-flow graph of one function. Empty statements have no node.
struct Cfg {
  std::string function;
  std::vector<CfgNode> nodes;
  std::vector<std::vector<int>> succ;
  int entry = 0;
  int exit = 1;
  std::vector<bool> reachable;            // from entry
  std::vector<std::vector<bool>> before;  // before[a][b]: b reachable from a in one or more steps

  // Loop nesting. A loop holds its condition (and step) plus its body.
  std::vector<int> loop;         // innermost loop of each node, -1 outside loops
  std::vector<int> loop_parent;  // enclosing loop of each loop, -1 at top
  std::vector<int> loop_header;  // condition node, target of the loop's back edges
  // within[l + 1][a][b]: b reachable from a without a back edge of loop l
  // or of any loop enclosing l.
  std::vector<std::vector<std::vector<bool>>> within;

  /// Innermost loop containing both nodes, -1 if none.
  int common_loop(int a, int b) const;

  std::size_t size() const { return nodes.size(); }
};

Cfg build_cfg(const minic::Function& f, const minic::Unit& unit);
std::vector<Cfg> build_cfgs(const minic::Unit& unit);

enum class Order { Before, After, Both, Unordered };
std::string_view to_string(Order o);

/// n1 precedes n2 when some acyclic path visits n1 and later n2 within one
/// iteration of the loops enclosing both. Inner loops may still repeat, so
/// Both only arises when control re-enters through a jump.
Order partial_order(int n1, int n2, const Cfg& cfg);

struct PathSet {
  std::vector<std::vector<int>> paths;  // entry .. exit, inclusive
  int bound = 0;
  bool truncated = false;  // hit max_paths
};

/// Entry-to-exit paths visiting every node at most bound + 1 times.
PathSet enumerate_paths(const Cfg& cfg, int bound, std::size_t max_paths = 20000);

struct SemanticsReport {
  bool preserved = true;
  int bound = 2;
  std::size_t pairs_checked = 0;
  std::size_t paths_checked = 0;
  bool paths_truncated = false;
  std::vector<std::string> notes;
  std::string counterexample;  // empty when preserved
};

std::string_view verdict(const SemanticsReport& r);

struct VerifyOptions {
  int bound = 2;
  std::size_t max_paths = 20000;
};

/// Checks that s_prime (parsed from the patch of p) keeps the pairwise order
/// of statements holding fragment tokens and that each of its bounded paths maps to a
/// subsequence of some entry-to-exit walk of p. Statements unreachable in p
/// are left out of both checks. Statements map by anchor token
/// location, falling back to the innermost p node containing the anchor.
/// Throws MappingFailure when an s_prime node maps nowhere.
SemanticsReport verify_semantics(const minic::Unit& p, const Fragment& s, const minic::Unit& s_prime,
                                 const VerifyOptions& opts = {});

}  // namespace synpatch::sem
