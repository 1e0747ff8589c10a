#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "synpatch/fragment.hpp"
#include "synpatch/minic.hpp"
#include "synpatch/semantics.hpp"

namespace synpatch::testing {

// Random structured MiniC function, one statement or header per line, at
// most `max_tokens` tokens and `max_depth` nesting levels.
class MiniCGenerator {
 public:
  explicit MiniCGenerator(std::uint32_t seed) : rng_(seed) {}

  std::string program(int max_tokens = 40, int max_depth = 3) {
    for (;;) {
      lines_.clear();
      tokens_ = 6;  // int f ( ) { }
      budget_ = max_tokens;
      lines_.push_back("int f ( ) {");
      block(1, max_depth, false, 1 + pick(4));
      lines_.push_back("}");
      if (tokens_ <= max_tokens && lines_.size() > 2) break;
    }
    std::string out;
    for (const auto& l : lines_) out += l + "\n";
    return out;
  }

  // Warning-shaped fragment: a random subset of the lines visited by a random
  // walk from entry through the CFG of f, which ends at exit or after
  // `max_steps` nodes. Jumps taken by the walk are always kept, as warning
  // traces report the control transfers they follow.
  Fragment path_fragment(const Program& p, int max_steps = 30) {
    minic::Unit u = minic::parse_unit(p);
    sem::Cfg g = sem::build_cfg(u.functions.at(0), u);
    std::vector<int> walk;
    for (int v = g.entry, steps = 0; v != g.exit && steps < max_steps; ++steps) {
      if (v != g.entry) walk.push_back(g.nodes[static_cast<std::size_t>(v)].loc.line);
      const auto& next = g.succ[static_cast<std::size_t>(v)];
      v = next[static_cast<std::size_t>(pick(static_cast<int>(next.size())))];
    }
    std::vector<int> lines;
    for (int l : walk) {
      if (pick(3) == 0) lines.push_back(l);
    }
    for (const auto& t : p) {
      bool jump = t.lexeme == "break" || t.lexeme == "continue" || t.lexeme == "return";
      if (jump && std::find(walk.begin(), walk.end(), t.loc.line) != walk.end()) lines.push_back(t.loc.line);
    }
    if (lines.empty()) lines.push_back(walk.empty() ? p.back().loc.line : walk[static_cast<std::size_t>(pick(static_cast<int>(walk.size())))]);
    Fragment f{p.front().loc.file, {}};
    for (const auto& t : p) {
      if (std::find(lines.begin(), lines.end(), t.loc.line) != lines.end()) f.picks.push_back(t.position);
    }
    return f;
  }

  // Random nonempty set of lines strictly inside the function body. With
  // jump_closed every break, continue and return line is included.
  Fragment fragment(const Program& p, bool jump_closed = false) {
    int last_line = p.back().loc.line;
    Fragment f{p.front().loc.file, {}};
    std::vector<int> lines;
    for (int l = 2; l < last_line; ++l) {
      if (pick(3) == 0) lines.push_back(l);
    }
    if (lines.empty()) lines.push_back(2 + pick(std::max(1, last_line - 2)));
    if (jump_closed) {
      for (const auto& t : p) {
        if (t.lexeme == "break" || t.lexeme == "continue" || t.lexeme == "return") lines.push_back(t.loc.line);
      }
    }
    for (const auto& t : p) {
      if (std::find(lines.begin(), lines.end(), t.loc.line) != lines.end()) f.picks.push_back(t.position);
    }
    if (f.picks.empty()) f.picks.push_back(p.size() / 2);
    return f;
  }

 private:
  int pick(int n) { return static_cast<int>(rng_() % static_cast<unsigned>(n)); }

  std::string var() { return std::string(1, "abcxy"[pick(5)]); }

  bool fits(int n) const { return tokens_ + n <= budget_; }

  void emit(const std::string& line, int n, int depth) {
    lines_.push_back(std::string(static_cast<std::size_t>(depth) * 2, ' ') + line);
    tokens_ += n;
  }

  void block(int depth, int max_depth, bool in_loop, int count) {
    for (int i = 0; i < count; ++i) stmt(depth, max_depth, in_loop);
  }

  void stmt(int depth, int max_depth, bool in_loop) {
    int kind = pick(in_loop ? 9 : 7);
    bool nest = depth < max_depth;
    if (kind <= 2 || !nest) {
      if (in_loop && kind >= 7 && fits(2)) {
        emit(kind == 7 ? "break ;" : "continue ;", 2, depth);
      } else if (pick(2) && fits(6)) {
        std::string v = var();
        emit(v + " = " + var() + " + 1 ;", 6, depth);
      } else if (fits(4)) {
        emit(var() + " = " + std::to_string(pick(5)) + " ;", 4, depth);
      }
      return;
    }
    if (kind == 3 && fits(6)) {
      emit("if ( " + var() + " < " + var() + " ) {", 7, depth);
      block(depth + 1, max_depth, in_loop, 1 + pick(2));
      emit("}", 1, depth);
      if (pick(2) && fits(3)) {
        emit("else {", 2, depth);
        block(depth + 1, max_depth, in_loop, 1 + pick(2));
        emit("}", 1, depth);
      }
    } else if (kind == 4 && fits(7)) {
      emit("while ( " + var() + " < " + var() + " ) {", 7, depth);
      block(depth + 1, max_depth, true, 1 + pick(3));
      emit("}", 1, depth);
    } else if (kind == 5 && fits(18)) {
      std::string v = var();
      emit("for ( " + v + " = 0 ; " + v + " < " + var() + " ; " + v + " = " + v + " + 1 ) {", 17, depth);
      block(depth + 1, max_depth, true, 1 + pick(2));
      emit("}", 1, depth);
    } else if (kind == 6 && fits(5)) {
      emit("if ( " + var() + " ) " + var() + " = 1 ;", 9, depth);
    } else if (fits(3)) {
      emit("return " + var() + " ;", 3, depth);
    }
  }

  std::mt19937 rng_;
  std::vector<std::string> lines_;
  int tokens_ = 0;
  int budget_ = 0;
};

}  // namespace synpatch::testing
