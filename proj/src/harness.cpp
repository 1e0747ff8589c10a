#include <algorithm>
#include <climits>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>

#include "json.hpp"
#include "synpatch/runner.hpp"

namespace synpatch::runner {

using minic::Stmt;
using minic::Type;
using minic::TypeRef;

namespace {

constexpr int kMaxBlock = 16;
constexpr int kBoundaryVectors = 5;

class InputGen {
 public:
  InputGen(const minic::Unit& u, std::uint64_t seed) : u_(u), rng_(seed) {}

  InputValue value(const Type& t, int boundary, int depth) {
    if (t.is_integral()) return InputValue::integer(scalar(t, boundary));
    if (t.kind == Type::Kind::Pointer) return pointer(*t.elem, boundary, depth);
    throw Error(Errc::HarnessError, "cannot generate a value of type " + minic::to_string(t));
  }

 private:
  std::uint64_t below(std::uint64_t n) { return rng_() % n; }
  long long range(long long lo, long long hi) { return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo + 1))); }

  long long scalar(const Type& t, int boundary) {
    const bool is_char = t.kind == Type::Kind::Char;
    const long long hi = is_char ? CHAR_MAX : INT_MAX;
    const long long lo = is_char ? CHAR_MIN : INT_MIN;
    switch (boundary) {
      case 0: return 0;
      case 1: return 1;
      case 2: return -1;
      case 3: return hi;
      case 4: return lo;
      default: break;
    }
    auto r = below(100);
    if (r < 10) return 0;
    if (r < 18) return 1;
    if (r < 26) return -1;
    if (r < 30) return hi;
    if (r < 34) return lo;
    if (r < 74) return range(-16, 16);
    return is_char ? range(lo, hi) : range(-1000, 1000);
  }

  int length(int boundary) {
    switch (boundary) {
      case 0: return 0;
      case 1:
      case 4: return 1;
      case 3: return kMaxBlock;
      default: break;
    }
    auto r = below(100);
    if (r < 15) return 0;
    if (r < 30) return 1;
    if (r < 40) return kMaxBlock;
    return static_cast<int>(range(2, kMaxBlock - 1));
  }

  // Cells of one object of type t, appended to out.
  void cells(const Type& t, int depth, std::vector<InputValue>& out) {
    switch (t.kind) {
      case Type::Kind::Struct: {
        const minic::StructDef* s = u_.find_struct(t.name);
        if (!s) throw Error(Errc::HarnessError, "unknown struct " + t.name);
        for (const auto& f : s->fields) cells(*f.type, depth, out);
        if (s->fields.empty()) out.push_back(InputValue::integer(0));
        return;
      }
      case Type::Kind::Array:
        for (int i = 0; i < t.length; ++i) cells(*t.elem, depth, out);
        return;
      case Type::Kind::Pointer:
        out.push_back(depth >= 2 ? InputValue::null() : pointer(*t.elem, -1, depth + 1));
        return;
      default: out.push_back(InputValue::integer(scalar(t, -1)));
    }
  }

  InputValue pointer(const Type& elem, int boundary, int depth) {
    if (boundary == 2 || (boundary < 0 && below(100) < 15)) return InputValue::null();
    InputValue b{InputValue::Kind::Block, 0, {}};
    const Type& e = elem.kind == Type::Kind::Void ? *minic::int_type() : elem;
    int n = e.kind == Type::Kind::Struct ? 1 : length(boundary);
    for (int i = 0; i < n; ++i) cells(e, depth, b.cells);
    return b;
  }

  const minic::Unit& u_;
  std::mt19937_64 rng_;
};

Program relex(const std::string& text, const SourceLoc& loc) {
  Program p = minic::lex(text, loc.file);
  for (auto& t : p) t.loc = loc;
  return p;
}

// Statement starting on `line`, first in preorder, with whether it is the
// lone body of a branch or loop.
struct Site {
  const Stmt* stmt = nullptr;
  bool lone_body = false;
};

void find_site(const Stmt& s, bool lone, const Program& tokens, const Location& where, Site& out) {
  if (out.stmt) return;
  const auto& l = tokens.at(s.first).loc;
  if (s.kind != Stmt::Kind::Block && s.kind != Stmt::Kind::Empty && l.file == where.file && l.line == where.line) {
    out = {&s, lone};
    return;
  }
  if (s.kind == Stmt::Kind::Block) {
    for (const auto& c : s.stmts) find_site(*c, false, tokens, where, out);
  }
  if (s.then_branch) find_site(*s.then_branch, s.then_branch->kind != Stmt::Kind::Block, tokens, where, out);
  if (s.else_branch) find_site(*s.else_branch, s.else_branch->kind != Stmt::Kind::Block, tokens, where, out);
}

}  // namespace

std::vector<InputVector> gen_inputs(const std::vector<TypeRef>& types, const minic::Unit& unit, std::uint64_t seed,
                                    int n) {
  if (n < 1) throw Error(Errc::ConfigError, "input count must be at least 1");
  InputGen gen(unit, seed);
  std::vector<InputVector> out;
  for (int i = 0; i < n; ++i) {
    InputVector v;
    int boundary = i < kBoundaryVectors ? i : -1;
    for (const auto& t : types) v.push_back(gen.value(*t, boundary, 0));
    out.push_back(std::move(v));
  }
  return out;
}

TestProgram generate_harness(const deps::CompilableUnit& cu, const Warning& w) {
  TestProgram tp;
  tp.entry = cu.entry;
  const minic::Function* entry = cu.unit.function(cu.entry);
  if (!entry) throw Error(Errc::HarnessError, "entry function " + cu.entry + " missing");

  std::map<std::size_t, Program> inserts;  // token index -> tokens inserted before it
  std::vector<std::string> assigns;
  std::map<std::string, std::string> args;
  auto slot_expr = [&](const deps::InputVar& v) {
    const Type& t = *v.type;
    std::string k = std::to_string(tp.slots.size());
    if (t.is_integral()) {
      tp.slots.push_back(v);
      return std::string(minic::kInputBuiltin) + " ( " + k + " )";
    }
    if (t.kind == Type::Kind::Pointer) {
      tp.slots.push_back(v);
      return std::string(minic::kInputPtrBuiltin) + " ( " + k + " )";
    }
    throw Error(Errc::HarnessError, "cannot initialize " + v.name + " of type " + minic::to_string(t));
  };
  auto literal = [](long long v) { return v < 0 ? "- " + std::to_string(-v) : std::to_string(v); };

  for (const auto& v : cu.input_vars) {
    if (v.known && v.type->is_integral()) {
      tp.fixed.push_back(v);
      std::string value = literal(*v.known);
      if (v.origin == deps::InputVar::Origin::Local) {
        inserts[v.decl_end] = relex("= " + value, cu.tokens.at(v.decl_end).loc);
      } else if (v.origin == deps::InputVar::Origin::Param) {
        args[v.name] = value;
      } else {
        assigns.push_back(v.name + " = " + value + " ;");
      }
      continue;
    }
    std::string e = slot_expr(v);
    switch (v.origin) {
      case deps::InputVar::Origin::Local: inserts[v.decl_end] = relex("= " + e, cu.tokens.at(v.decl_end).loc); break;
      case deps::InputVar::Origin::Param: args[v.name] = e; break;
      case deps::InputVar::Origin::Free: assigns.push_back(v.name + " = " + e + " ;"); break;
    }
  }

  if (w.polarity == Polarity::Negative) {
    Site site;
    for (const auto& f : cu.unit.functions) find_site(*f.body, false, cu.tokens, w.failure, site);
    if (!site.stmt) {
      throw Error(Errc::HarnessError, "no statement starts on " + w.failure.file + ":" + std::to_string(w.failure.line));
    }
    SourceLoc at = cu.tokens.at(site.stmt->first).loc;
    Program a = relex(std::string(site.lone_body ? "{ " : "") + "assert ( 0 ) ;", at);
    auto& before = inserts[site.stmt->first];
    before.insert(before.begin(), a.begin(), a.end());
    if (site.lone_body) {
      Program close = relex("}", cu.tokens.at(site.stmt->last).loc);
      auto& after = inserts[site.stmt->last + 1];
      after.insert(after.end(), close.begin(), close.end());
    }
    tp.assertions.push_back(w.failure);
  }

  for (std::size_t i = 0; i <= cu.tokens.size(); ++i) {
    if (auto it = inserts.find(i); it != inserts.end()) {
      tp.tokens.insert(tp.tokens.end(), it->second.begin(), it->second.end());
    }
    if (i < cu.tokens.size()) tp.tokens.push_back(cu.tokens[i]);
  }

  std::string h = "void " + std::string(kHarnessMain) + " ( ) {\n";
  for (const auto& a : assigns) h += "  " + a + "\n";
  std::string call = cu.entry + " (";
  for (std::size_t i = 0; i < entry->params.size(); ++i) {
    auto it = args.find(entry->params[i].name);
    if (it == args.end()) throw Error(Errc::HarnessError, "no input for parameter " + entry->params[i].name);
    call += (i ? " , " : " ") + it->second;
  }
  call += entry->params.empty() ? ") ;" : " ) ;";
  h += "  " + call + "\n}\n";
  Program harness = minic::lex(h, "<harness>");
  tp.tokens.insert(tp.tokens.end(), harness.begin(), harness.end());
  for (std::size_t i = 0; i < tp.tokens.size(); ++i) tp.tokens[i].position = i;

  tp.unit = minic::parse_unit(tp.tokens);
  minic::type_check(tp.unit);
  return tp;
}

bool RunResult::covers(const Location& l) const { return std::binary_search(trace.begin(), trace.end(), l); }

std::string_view to_string(RunResult::Outcome o) {
  switch (o) {
    case RunResult::Outcome::Normal: return "normal";
    case RunResult::Outcome::Failure: return "failure";
    case RunResult::Outcome::Timeout: return "timeout";
  }
  return "?";
}

std::string_view to_string(Match m) {
  switch (m) {
    case Match::Valid: return "valid";
    case Match::Pass: return "pass";
    case Match::Irrelevant: return "irrelevant";
  }
  return "?";
}

std::string_view to_string(VerdictValue v) {
  switch (v) {
    case VerdictValue::TruePositive: return "true-positive";
    case VerdictValue::FalsePositive: return "false-positive";
    case VerdictValue::LikelyFalsePositive: return "likely-false-positive";
    case VerdictValue::Inconclusive: return "inconclusive";
  }
  return "?";
}

Match match_oracle(const RunResult& r, const Warning& w, int line_tolerance) {
  auto near = [&](const Location& l) {
    return l.file == w.failure.file && std::abs(l.line - w.failure.line) <= line_tolerance;
  };
  if (r.outcome == RunResult::Outcome::Failure) {
    return r.kind == w.symptom && near(r.where) ? Match::Valid : Match::Irrelevant;
  }
  if (r.outcome == RunResult::Outcome::Normal) {
    return std::any_of(r.trace.begin(), r.trace.end(), near) ? Match::Pass : Match::Irrelevant;
  }
  return Match::Irrelevant;
}

Verdict classify(const Warning& w, std::vector<Evidence> results, int line_tolerance) {
  Verdict v;
  for (auto& e : results) {
    e.match = match_oracle(e.result, w, line_tolerance);
    if (e.match == Match::Valid) ++v.valid;
    if (e.match == Match::Pass) ++v.pass;
    if (e.result.outcome == RunResult::Outcome::Timeout) ++v.timeouts;
  }
  if (w.polarity == Polarity::Positive) {
    if (v.valid > 0) {
      v.value = VerdictValue::TruePositive;
    } else if (v.pass > 0) {
      v.value = VerdictValue::LikelyFalsePositive;
    }
  } else if (v.valid > 0) {
    v.value = VerdictValue::FalsePositive;
  }
  v.evidence = std::move(results);
  return v;
}

nlohmann::json to_json(const InputValue& v) {
  switch (v.kind) {
    case InputValue::Kind::Int: return v.value;
    case InputValue::Kind::Null: return nullptr;
    case InputValue::Kind::Block: {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& c : v.cells) a.push_back(to_json(c));
      return a;
    }
  }
  return nullptr;
}

InputValue from_json(const nlohmann::json& j) {
  if (j.is_null()) return InputValue::null();
  if (j.is_number_integer()) return InputValue::integer(j.get<long long>());
  if (j.is_array()) {
    InputValue b{InputValue::Kind::Block, 0, {}};
    for (const auto& c : j) b.cells.push_back(from_json(c));
    return b;
  }
  throw Error(Errc::ConfigError, "bad input value in replay file");
}

std::string serialize_replay(const Replay& r) {
  nlohmann::json j;
  j["version"] = kReplayFormatVersion;
  j["seed"] = r.seed;
  j["runs"] = nlohmann::json::array();
  for (const auto& run : r.runs) {
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& vec : run.inputs) {
      nlohmann::json slots = nlohmann::json::array();
      for (const auto& v : vec) slots.push_back(to_json(v));
      vectors.push_back(std::move(slots));
    }
    j["runs"].push_back({{"warning", run.warning}, {"inputs", std::move(vectors)}});
  }
  return j.dump(2) + "\n";
}

Replay parse_replay(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("replay file: ") + e.what());
  }
  if (j.value("version", 0) != kReplayFormatVersion) throw Error(Errc::ConfigError, "unsupported replay version");
  Replay r;
  r.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& run : j.at("runs")) {
    ReplayRun rr;
    rr.warning = run.at("warning").get<std::string>();
    for (const auto& vec : run.at("inputs")) {
      InputVector v;
      for (const auto& s : vec) v.push_back(from_json(s));
      rr.inputs.push_back(std::move(v));
    }
    r.runs.push_back(std::move(rr));
  }
  return r;
}

}  // namespace synpatch::runner
