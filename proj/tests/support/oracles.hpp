#pragma once

// Exhaustive reference computations used to check the optimized ones.

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "synpatch/grammar.hpp"

namespace synpatch::testing {

inline constexpr SymbolId kHole = -2;

// Visits every sentential form derivable from x by leftmost derivation whose
// terminal count cannot exceed max_len. With `hole`, one occurrence of that
// nonterminal may be frozen as a zero-cost hole. `done` sees each form that
// has no expandable nonterminal left.
template <class F>
void enumerate_forms(const Grammar& g, SymbolId x, int max_len, std::optional<SymbolId> hole, F&& done) {
  auto lower = [&](const std::vector<SymbolId>& form) {
    int n = 0;
    for (SymbolId s : form) {
      if (s == kHole) continue;
      if (g.is_terminal(s) || !g.nullable(s)) ++n;
    }
    return n;
  };
  std::set<std::vector<SymbolId>> seen;
  std::deque<std::vector<SymbolId>> queue{{x}};
  seen.insert({x});
  while (!queue.empty()) {
    std::vector<SymbolId> form = std::move(queue.front());
    queue.pop_front();
    std::size_t i = 0;
    while (i < form.size() && (form[i] == kHole || g.is_terminal(form[i]))) ++i;
    if (i == form.size()) {
      done(form);
      continue;
    }
    auto push = [&](std::vector<SymbolId> next) {
      if (lower(next) > max_len) return;
      if (seen.insert(next).second) queue.push_back(std::move(next));
    };
    const bool has_hole = std::find(form.begin(), form.end(), kHole) != form.end();
    if (hole && form[i] == *hole && !has_hole) {
      auto next = form;
      next[i] = kHole;
      push(std::move(next));
    }
    for (int r : g.rules_for(form[i])) {
      std::vector<SymbolId> next(form.begin(), form.begin() + static_cast<long>(i));
      const auto& rhs = g.production(r).rhs;
      next.insert(next.end(), rhs.begin(), rhs.end());
      next.insert(next.end(), form.begin() + static_cast<long>(i) + 1, form.end());
      push(std::move(next));
    }
  }
}

// Smallest terminal count of a derivation from x containing target, when
// that count is at most max_len.
inline std::optional<int> brute_dmin(const Grammar& g, SymbolId x, SymbolId target, int max_len) {
  std::optional<int> best;
  std::optional<SymbolId> hole;
  if (g.is_nonterminal(target)) hole = target;
  enumerate_forms(g, x, max_len, hole, [&](const std::vector<SymbolId>& form) {
    bool has = std::find(form.begin(), form.end(), g.is_nonterminal(target) ? kHole : target) != form.end();
    if (!has) return;
    int n = 0;
    for (SymbolId s : form) n += s != kHole;
    if (!best || n < *best) best = n;
  });
  return best;
}

// Terminal strings of length at most max_len derivable from x.
inline std::set<std::vector<std::string>> bounded_language(const Grammar& g, SymbolId x, int max_len) {
  std::set<std::vector<std::string>> out;
  enumerate_forms(g, x, max_len, std::nullopt, [&](const std::vector<SymbolId>& form) {
    std::vector<std::string> words;
    for (SymbolId s : form) words.push_back(g.name(s));
    out.insert(words);
  });
  return out;
}

}  // namespace synpatch::testing
