#include "synpatch/fragment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace synpatch {

bool Fragment::valid_for(const Program& p) const {
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (picks[i] >= p.size()) return false;
    if (i > 0 && picks[i] <= picks[i - 1]) return false;
  }
  return true;
}

Program Fragment::tokens(const Program& p) const {
  Program out;
  out.reserve(picks.size());
  for (std::size_t i : picks) out.push_back(p.at(i));
  return out;
}

bool is_subsequence(const std::vector<std::string>& q, const std::vector<std::string>& p) {
  std::size_t j = 0;
  for (const auto& lexeme : q) {
    while (j < p.size() && p[j] != lexeme) ++j;
    if (j == p.size()) return false;
    ++j;
  }
  return true;
}

bool is_subsequence(const Program& q, const Program& p) { return is_subsequence(lexemes(q), lexemes(p)); }

namespace {

struct Named {
  std::string_view name;
  int value;
};

constexpr Named kWarningTypes[] = {
    {"buffer-overflow", static_cast<int>(WarningType::BufferOverflow)},
    {"null-deref", static_cast<int>(WarningType::NullDeref)},
    {"div-by-zero", static_cast<int>(WarningType::DivByZero)},
    {"memory-leak", static_cast<int>(WarningType::MemoryLeak)},
    {"dead-code", static_cast<int>(WarningType::DeadCode)},
    {"unreachable-call", static_cast<int>(WarningType::UnreachableCall)},
    {"assertion", static_cast<int>(WarningType::Assertion)},
};

constexpr Named kFailureKinds[] = {
    {"out-of-bounds", static_cast<int>(FailureKind::OutOfBounds)},
    {"null-deref", static_cast<int>(FailureKind::NullDeref)},
    {"div-by-zero", static_cast<int>(FailureKind::DivByZero)},
    {"assert-fail", static_cast<int>(FailureKind::AssertFail)},
    {"leak", static_cast<int>(FailureKind::Leak)},
    {"uninitialized-read", static_cast<int>(FailureKind::UninitializedRead)},
};

template <std::size_t N>
std::string_view name_of(const Named (&table)[N], int value) {
  for (const auto& n : table) {
    if (n.value == value) return n.name;
  }
  return "?";
}

template <std::size_t N>
int value_of(const Named (&table)[N], std::string_view name, std::string_view what) {
  for (const auto& n : table) {
    if (n.name == name) return n.value;
  }
  throw Error(Errc::ConfigError, "unknown " + std::string(what) + " '" + std::string(name) + "'");
}

}  // namespace

std::string_view to_string(WarningType t) { return name_of(kWarningTypes, static_cast<int>(t)); }
std::string_view to_string(Polarity p) { return p == Polarity::Positive ? "positive" : "negative"; }
std::string_view to_string(FailureKind k) { return name_of(kFailureKinds, static_cast<int>(k)); }

WarningType warning_type_from(std::string_view s) {
  return static_cast<WarningType>(value_of(kWarningTypes, s, "warning type"));
}

Polarity polarity_from(std::string_view s) {
  if (s == "positive") return Polarity::Positive;
  if (s == "negative") return Polarity::Negative;
  throw Error(Errc::ConfigError, "unknown polarity '" + std::string(s) + "'");
}

FailureKind failure_kind_from(std::string_view s) {
  return static_cast<FailureKind>(value_of(kFailureKinds, s, "failure kind"));
}

FailureKind expected_symptom(WarningType t) {
  switch (t) {
    case WarningType::BufferOverflow: return FailureKind::OutOfBounds;
    case WarningType::NullDeref: return FailureKind::NullDeref;
    case WarningType::DivByZero: return FailureKind::DivByZero;
    case WarningType::MemoryLeak: return FailureKind::Leak;
    case WarningType::DeadCode:
    case WarningType::UnreachableCall:
    case WarningType::Assertion: return FailureKind::AssertFail;
  }
  return FailureKind::AssertFail;
}

void Warning::validate() const {
  if (id.empty()) throw Error(Errc::ConfigError, "warning without id");
  if (path.empty()) throw Error(Errc::ConfigError, "warning " + id + ": empty path");
  if (polarity == Polarity::Positive && std::find(path.begin(), path.end(), failure) == path.end()) {
    throw Error(Errc::ConfigError, "warning " + id + ": failure location not on path");
  }
  if (polarity == Polarity::Negative && type != WarningType::DeadCode && type != WarningType::UnreachableCall) {
    throw Error(Errc::ConfigError, "warning " + id + ": negative polarity needs dead-code or unreachable-call");
  }
}

std::vector<Warning> parse_warnings(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("warning file: ") + e.what());
  }
  if (doc.value("version", 0) != kWarningFormatVersion) {
    throw Error(Errc::ConfigError, "warning file: unsupported version");
  }
  std::vector<Warning> out;
  try {
    for (const auto& jw : doc.at("warnings")) {
      Warning w;
      w.id = jw.at("id").get<std::string>();
      w.type = warning_type_from(jw.at("type").get<std::string>());
      w.polarity = polarity_from(jw.at("polarity").get<std::string>());
      for (const auto& jp : jw.at("path")) {
        w.path.push_back({jp.at("file").get<std::string>(), jp.at("line").get<int>()});
      }
      const auto& jf = jw.at("failure");
      w.failure = {jf.at("file").get<std::string>(), jf.at("line").get<int>()};
      w.symptom = jf.contains("symptom") ? failure_kind_from(jf.at("symptom").get<std::string>())
                                         : expected_symptom(w.type);
      w.validate();
      out.push_back(std::move(w));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ConfigError, std::string("warning file: ") + e.what());
  }
  return out;
}

std::vector<Warning> read_warnings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_warnings(ss.str());
}

std::string serialize_warnings(const std::vector<Warning>& warnings) {
  nlohmann::ordered_json doc;
  doc["version"] = kWarningFormatVersion;
  doc["warnings"] = nlohmann::ordered_json::array();
  for (const auto& w : warnings) {
    nlohmann::ordered_json jw;
    jw["id"] = w.id;
    jw["type"] = to_string(w.type);
    jw["polarity"] = to_string(w.polarity);
    jw["path"] = nlohmann::ordered_json::array();
    for (const auto& loc : w.path) jw["path"].push_back({{"file", loc.file}, {"line", loc.line}});
    jw["failure"] = {{"file", w.failure.file}, {"line", w.failure.line}, {"symptom", to_string(w.symptom)}};
    doc["warnings"].push_back(std::move(jw));
  }
  return doc.dump(2) + "\n";
}

std::vector<Fragment> fragment_from_warning(const Warning& w, const std::map<std::string, Program>& sources) {
  std::vector<Fragment> out;
  for (const auto& loc : w.path) {
    auto src = sources.find(loc.file);
    if (src == sources.end()) {
      throw Error(Errc::UnresolvedLocation, w.id + ": unknown file " + loc.file);
    }
    auto frag = std::find_if(out.begin(), out.end(), [&](const Fragment& f) { return f.file == loc.file; });
    if (frag == out.end()) {
      out.push_back(Fragment{loc.file, {}});
      frag = std::prev(out.end());
    }
    bool any = false;
    for (const auto& t : src->second) {
      if (t.loc.line == loc.line) {
        frag->picks.push_back(t.position);
        any = true;
      }
    }
    if (!any) {
      throw Error(Errc::UnresolvedLocation, w.id + ": no tokens at " + loc.file + ":" + std::to_string(loc.line));
    }
  }
  for (auto& f : out) {
    std::sort(f.picks.begin(), f.picks.end());
    f.picks.erase(std::unique(f.picks.begin(), f.picks.end()), f.picks.end());
  }
  return out;
}

}  // namespace synpatch
