#include "synpatch/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <sstream>
#include <unordered_set>

namespace synpatch {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UndefinedNonterminal: return "UndefinedNonterminal";
    case Errc::NoStartSymbol: return "NoStartSymbol";
    case Errc::UnknownNonterminal: return "UnknownNonterminal";
    case Errc::NotDistinct: return "NotDistinct";
    case Errc::EmptyFragment: return "EmptyFragment";
    case Errc::NotRecognized: return "NotRecognized";
    case Errc::NoDerivation: return "NoDerivation";
    case Errc::NoSolution: return "NoSolution";
    case Errc::BoundExceeded: return "BoundExceeded";
    case Errc::UnresolvedLocation: return "UnresolvedLocation";
    case Errc::UnsupportedConstruct: return "UnsupportedConstruct";
    case Errc::MappingFailure: return "MappingFailure";
    case Errc::UnresolvableSymbol: return "UnresolvableSymbol";
    case Errc::DuplicateDefinition: return "DuplicateDefinition";
    case Errc::UntypeableInput: return "UntypeableInput";
    case Errc::HarnessError: return "HarnessError";
    case Errc::InterpreterBug: return "InterpreterBug";
    case Errc::TypeError: return "TypeError";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Program make_program(std::string_view text, std::string_view file) {
  Program p;
  std::istringstream in{std::string(text)};
  std::string lexeme;
  while (in >> lexeme) {
    Token t;
    t.position = p.size();
    t.loc = SourceLoc{std::string(file), 1, static_cast<int>(p.size()) + 1};
    t.lexeme = std::move(lexeme);
    p.push_back(std::move(t));
  }
  return p;
}

std::vector<std::string> lexemes(const Program& p) {
  std::vector<std::string> out;
  out.reserve(p.size());
  for (const auto& t : p) out.push_back(t.lexeme);
  return out;
}

std::string join_lexemes(const Program& p) {
  std::string out;
  for (const auto& t : p) {
    if (!out.empty()) out += ' ';
    out += t.lexeme;
  }
  return out;
}

// ---------------------------------------------------------------------------
// BNF loading

namespace {

constexpr std::string_view kClasses[] = {"IDENT", "NUM", "CHAR", "STRING"};

bool is_class_name(std::string_view s) {
  return std::find(std::begin(kClasses), std::end(kClasses), s) != std::end(kClasses);
}

std::string strip_comment(const std::string& line) {
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == quote) quote = 0;
    } else if (c == '\'' || c == '"') {
      // A quote only opens a literal at the start of a word.
      if (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1]))) quote = c;
    } else if (c == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

struct RawSymbol {
  std::string text;
  bool quoted = false;
};

std::vector<RawSymbol> split_words(const std::string& text, int line_no) {
  std::vector<RawSymbol> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    if (text[i] == '\'' || text[i] == '"') {
      char q = text[i];
      std::size_t close = text.find(q, i + 1);
      if (close == std::string::npos || close == i + 1) {
        throw Error(Errc::SyntaxError, "line " + std::to_string(line_no) + ": bad quoted terminal");
      }
      out.push_back({text.substr(i + 1, close - i - 1), true});
      i = close + 1;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    out.push_back({text.substr(i, j - i), false});
    i = j;
  }
  return out;
}

bool is_nonterminal_word(const RawSymbol& w) {
  return !w.quoted && !w.text.empty() && std::isupper(static_cast<unsigned char>(w.text[0])) &&
         !is_class_name(w.text);
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

bool is_number(std::string_view s) {
  if (s.empty() || !std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  bool dot = false;
  for (char c : s) {
    if (c == '.') {
      if (dot) return false;
      dot = true;
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      return false;
    }
  }
  return s.back() != '.';
}

}  // namespace

SymbolId Grammar::intern(const std::string& name, SymbolKind kind) {
  std::string key = std::string(1, static_cast<char>('0' + static_cast<int>(kind))) + name;
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  auto id = static_cast<SymbolId>(names_.size());
  names_.push_back(name);
  kinds_.push_back(kind);
  ids_.emplace(std::move(key), id);
  rules_.emplace_back();
  if (kind == SymbolKind::Literal) literal_by_lexeme_.emplace(name, id);
  return id;
}

Grammar Grammar::load(std::string_view bnf_text) {
  Grammar g;
  std::istringstream in{std::string(bnf_text)};
  std::string raw;
  int line_no = 0;
  SymbolId current_lhs = -1;
  std::vector<SymbolId> referenced;

  auto add_alternatives = [&](const std::string& body) {
    // Split on unquoted '|' words.
    auto words = split_words(body, line_no);
    std::vector<std::vector<RawSymbol>> alts(1);
    for (auto& w : words) {
      if (!w.quoted && w.text == "|") {
        alts.emplace_back();
      } else {
        alts.back().push_back(w);
      }
    }
    for (auto& alt : alts) {
      Production prod;
      prod.lhs = current_lhs;
      if (alt.size() == 1 && !alt[0].quoted && alt[0].text == "%empty") {
        g.has_epsilon_ = true;
      } else {
        if (alt.empty()) {
          throw Error(Errc::SyntaxError,
                      "line " + std::to_string(line_no) + ": empty alternative (use %empty)");
        }
        for (auto& w : alt) {
          if (!w.quoted && w.text == "%empty") {
            throw Error(Errc::SyntaxError, "line " + std::to_string(line_no) + ": %empty must stand alone");
          }
          SymbolId s;
          if (is_nonterminal_word(w)) {
            s = g.intern(w.text, SymbolKind::Nonterminal);
            referenced.push_back(s);
          } else if (!w.quoted && is_class_name(w.text)) {
            s = g.intern(w.text, SymbolKind::Class);
          } else {
            s = g.intern(w.text, SymbolKind::Literal);
          }
          prod.rhs.push_back(s);
        }
      }
      g.rules_[static_cast<std::size_t>(current_lhs)].push_back(static_cast<int>(g.productions_.size()));
      g.productions_.push_back(std::move(prod));
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = strip_comment(raw);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    if (line[0] == '|') {
      if (current_lhs < 0) throw Error(Errc::SyntaxError, "line " + std::to_string(line_no) + ": continuation without rule");
      add_alternatives(line.substr(1));
      continue;
    }
    auto arrow = line.find("->");
    if (arrow == std::string::npos) {
      throw Error(Errc::SyntaxError, "line " + std::to_string(line_no) + ": expected 'LHS -> alternatives'");
    }
    std::string lhs = line.substr(0, arrow);
    lhs.erase(lhs.find_last_not_of(" \t") + 1);
    RawSymbol lhs_word{lhs, false};
    if (lhs.empty() || lhs.find_first_of(" \t") != std::string::npos || !is_nonterminal_word(lhs_word)) {
      throw Error(Errc::SyntaxError, "line " + std::to_string(line_no) + ": bad left-hand side '" + lhs + "'");
    }
    current_lhs = g.intern(lhs, SymbolKind::Nonterminal);
    if (g.start_ < 0) g.start_ = current_lhs;
    add_alternatives(line.substr(arrow + 2));
  }

  if (g.start_ < 0) throw Error(Errc::NoStartSymbol, "grammar has no rules");
  for (SymbolId s : referenced) {
    if (g.rules_[static_cast<std::size_t>(s)].empty()) {
      throw Error(Errc::UndefinedNonterminal, "'" + g.name(s) + "' has no rules");
    }
  }
  g.finalize();
  return g;
}

void Grammar::finalize() {
  nullable_.assign(names_.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& prod : productions_) {
      if (nullable_[static_cast<std::size_t>(prod.lhs)]) continue;
      bool all = std::all_of(prod.rhs.begin(), prod.rhs.end(),
                             [&](SymbolId s) { return nullable_[static_cast<std::size_t>(s)]; });
      if (all) {
        nullable_[static_cast<std::size_t>(prod.lhs)] = true;
        changed = true;
      }
    }
  }
}

std::optional<SymbolId> Grammar::find(std::string_view name) const {
  for (auto kind : {SymbolKind::Nonterminal, SymbolKind::Class, SymbolKind::Literal}) {
    std::string key = std::string(1, static_cast<char>('0' + static_cast<int>(kind))) + std::string(name);
    if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  }
  return std::nullopt;
}

SymbolId Grammar::symbol(std::string_view name) const {
  auto s = find(name);
  if (!s) throw Error(Errc::UnknownNonterminal, "unknown symbol '" + std::string(name) + "'");
  return *s;
}

std::span<const int> Grammar::rules_for(SymbolId nonterminal) const {
  return rules_.at(static_cast<std::size_t>(nonterminal));
}

std::vector<SymbolId> Grammar::nonterminals() const {
  std::vector<SymbolId> out;
  for (SymbolId s = 0; s < static_cast<SymbolId>(names_.size()); ++s) {
    if (is_nonterminal(s)) out.push_back(s);
  }
  return out;
}

std::vector<SymbolId> Grammar::terminals() const {
  std::vector<SymbolId> out;
  for (SymbolId s = 0; s < static_cast<SymbolId>(names_.size()); ++s) {
    if (is_terminal(s)) out.push_back(s);
  }
  return out;
}

bool Grammar::matches(SymbolId terminal, std::string_view lexeme) const {
  switch (kind(terminal)) {
    case SymbolKind::Nonterminal:
      return false;
    case SymbolKind::Literal:
      return name(terminal) == lexeme;
    case SymbolKind::Class: {
      const std::string& cls = name(terminal);
      if (cls == "IDENT") {
        return is_identifier(lexeme) && !literal_by_lexeme_.contains(std::string(lexeme));
      }
      if (cls == "NUM") return is_number(lexeme);
      if (cls == "CHAR") return lexeme.size() >= 3 && lexeme.front() == '\'' && lexeme.back() == '\'';
      if (cls == "STRING") return lexeme.size() >= 2 && lexeme.front() == '"' && lexeme.back() == '"';
      return false;
    }
  }
  return false;
}

std::vector<SymbolId> Grammar::terminals_matching(std::string_view lexeme) const {
  std::vector<SymbolId> out;
  for (SymbolId s = 0; s < static_cast<SymbolId>(names_.size()); ++s) {
    if (is_terminal(s) && matches(s, lexeme)) out.push_back(s);
  }
  return out;
}

std::string Grammar::rhs_text(const std::vector<SymbolId>& rhs) const {
  if (rhs.empty()) return "%empty";
  std::string out;
  for (SymbolId s : rhs) {
    if (!out.empty()) out += ' ';
    out += name(s);
  }
  return out;
}

std::string Grammar::production_text(int index) const {
  const auto& p = production(index);
  return name(p.lhs) + " -> " + rhs_text(p.rhs);
}

// ---------------------------------------------------------------------------
// Parse trees

ParseTree::ParseTree(Program tokens, std::vector<ParseNode> nodes, int root, bool ambiguous)
    : tokens_(std::move(tokens)), nodes_(std::move(nodes)), root_(root), ambiguous_(ambiguous) {
  leaves_.assign(tokens_.size(), -1);
  int clock = 0;
  // Iterative DFS assigning depth, parent, Euler intervals.
  struct Frame {
    int node;
    std::size_t next;
  };
  std::vector<Frame> stack{{root_, 0}};
  nodes_[static_cast<std::size_t>(root_)].parent = -1;
  nodes_[static_cast<std::size_t>(root_)].depth = 0;
  nodes_[static_cast<std::size_t>(root_)].tin = clock++;
  while (!stack.empty()) {
    auto& f = stack.back();
    auto& n = nodes_[static_cast<std::size_t>(f.node)];
    if (n.is_leaf()) leaves_[static_cast<std::size_t>(n.token)] = f.node;
    if (f.next < n.children.size()) {
      int c = n.children[f.next++];
      auto& cn = nodes_[static_cast<std::size_t>(c)];
      cn.parent = f.node;
      cn.depth = n.depth + 1;
      cn.tin = clock++;
      stack.push_back({c, 0});
    } else {
      n.tout = clock++;
      stack.pop_back();
    }
  }
}

bool ParseTree::is_ancestor(int ancestor, int node) const {
  const auto& a = nodes_[static_cast<std::size_t>(ancestor)];
  const auto& n = nodes_[static_cast<std::size_t>(node)];
  return ancestor != node && a.tin <= n.tin && n.tout <= a.tout;
}

Program dft(const ParseTree& t, int node) {
  Program out;
  std::vector<int> stack{node};
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const auto& n = t.node(id);
    if (n.is_leaf()) {
      out.push_back(t.tokens()[static_cast<std::size_t>(n.token)]);
    } else {
      for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(*it);
    }
  }
  return out;
}

Program dft(const ParseTree& t) { return dft(t, t.root()); }

// ---------------------------------------------------------------------------
// Earley recognizer + deterministic tree extraction

namespace {

inline std::uint64_t key3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return (a << 44) | (b << 22) | c;
}

class EarleyParser {
 public:
  EarleyParser(const Program& p, const Grammar& g) : p_(p), g_(g), n_(p.size()) {}

  std::optional<ParseTree> run() {
    if (n_ >= (1u << 21)) throw Error(Errc::BoundExceeded, "program too long to parse");
    recognize();
    bool ok = false;
    for (int r : g_.rules_for(g_.start())) {
      if (completed_.contains(key3(static_cast<std::uint64_t>(r), 0, n_))) ok = true;
    }
    if (!ok) return std::nullopt;
    int root = build(g_.start(), 0, n_);
    if (root < 0) return std::nullopt;
    // Re-index so the node vector holds only the final tree in creation order.
    return ParseTree(p_, std::move(nodes_), root, ambiguous_);
  }

 private:
  struct Item {
    int prod;
    int dot;
    std::size_t origin;
  };

  struct ItemSet {
    std::vector<Item> items;
    std::unordered_set<std::uint64_t> seen;
    std::unordered_map<SymbolId, std::vector<int>> waiting;  // next symbol -> item indices
    std::unordered_set<SymbolId> predicted;
  };

  void add(std::size_t set, Item it) {
    auto& s = sets_[set];
    std::uint64_t k = key3(static_cast<std::uint64_t>(it.prod), static_cast<std::uint64_t>(it.dot), it.origin);
    if (!s.seen.insert(k).second) return;
    const auto& rhs = g_.production(it.prod).rhs;
    if (static_cast<std::size_t>(it.dot) < rhs.size()) {
      s.waiting[rhs[static_cast<std::size_t>(it.dot)]].push_back(static_cast<int>(s.items.size()));
    }
    s.items.push_back(it);
  }

  void recognize() {
    sets_.resize(n_ + 1);
    for (int r : g_.rules_for(g_.start())) add(0, {r, 0, 0});
    for (std::size_t j = 0; j <= n_; ++j) {
      auto& s = sets_[j];
      for (std::size_t idx = 0; idx < s.items.size(); ++idx) {
        Item it = s.items[idx];
        const auto& prod = g_.production(it.prod);
        if (static_cast<std::size_t>(it.dot) < prod.rhs.size()) {
          SymbolId sym = prod.rhs[static_cast<std::size_t>(it.dot)];
          if (g_.is_nonterminal(sym)) {
            if (s.predicted.insert(sym).second) {
              for (int r : g_.rules_for(sym)) add(j, {r, 0, j});
            }
            if (g_.nullable(sym)) add(j, {it.prod, it.dot + 1, it.origin});
          } else if (j < n_ && g_.matches(sym, p_[j].lexeme)) {
            add(j + 1, {it.prod, it.dot + 1, it.origin});
          }
        } else {
          completed_.insert(key3(static_cast<std::uint64_t>(it.prod), it.origin, j));
          derivable_.insert(key3(static_cast<std::uint64_t>(prod.lhs), it.origin, j));
          auto& origin_set = sets_[it.origin];
          auto w = origin_set.waiting.find(prod.lhs);
          if (w == origin_set.waiting.end()) continue;
          // Copy: the waiting list may grow when origin == j.
          std::vector<int> waiters = w->second;
          for (int wi : waiters) {
            Item parent = origin_set.items[static_cast<std::size_t>(wi)];
            add(j, {parent.prod, parent.dot + 1, parent.origin});
          }
        }
      }
    }
  }

  bool derives(SymbolId sym, std::size_t i, std::size_t j) const {
    if (g_.is_terminal(sym)) return j == i + 1 && i < n_ && g_.matches(sym, p_[i].lexeme);
    return derivable_.contains(key3(static_cast<std::uint64_t>(sym), i, j));
  }

  // Can rhs[k..] of production r derive tokens [i, j)?
  bool seq(int r, std::size_t k, std::size_t i, std::size_t j) {
    const auto& rhs = g_.production(r).rhs;
    if (k == rhs.size()) return i == j;
    std::uint64_t mk = (static_cast<std::uint64_t>(r) << 48) | (static_cast<std::uint64_t>(k) << 42) |
                       (static_cast<std::uint64_t>(i) << 21) | j;
    if (auto it = seq_memo_.find(mk); it != seq_memo_.end()) return it->second;
    bool ok = false;
    SymbolId sym = rhs[k];
    for (std::size_t e = i; e <= j && !ok; ++e) {
      if (derives(sym, i, e) && seq(r, k + 1, e, j)) ok = true;
    }
    seq_memo_.emplace(mk, ok);
    return ok;
  }

  int make_leaf(std::size_t i) {
    ParseNode n;
    n.label = -1;
    n.begin = i;
    n.end = i + 1;
    n.token = static_cast<int>(i);
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  int build(SymbolId sym, std::size_t i, std::size_t j) {
    if (g_.is_terminal(sym)) {
      if (!derives(sym, i, j)) return -1;
      int leaf = make_leaf(i);
      nodes_[static_cast<std::size_t>(leaf)].label = sym;
      return leaf;
    }
    std::uint64_t pk = key3(static_cast<std::uint64_t>(sym), i, j);
    if (on_path_.contains(pk)) return -1;  // unit/epsilon cycle
    on_path_.insert(pk);
    int feasible = 0;
    for (int r : g_.rules_for(sym)) {
      if (completed_.contains(key3(static_cast<std::uint64_t>(r), i, j))) ++feasible;
    }
    if (feasible > 1) ambiguous_ = true;
    int result = -1;
    for (int r : g_.rules_for(sym)) {
      if (!completed_.contains(key3(static_cast<std::uint64_t>(r), i, j))) continue;
      std::size_t mark = nodes_.size();
      std::vector<int> children;
      if (assign(r, 0, i, j, children)) {
        ParseNode n;
        n.label = sym;
        n.production = r;
        n.children = std::move(children);
        n.begin = i;
        n.end = j;
        nodes_.push_back(std::move(n));
        result = static_cast<int>(nodes_.size()) - 1;
        break;
      }
      nodes_.resize(mark);
    }
    on_path_.erase(pk);
    return result;
  }

  bool assign(int r, std::size_t k, std::size_t pos, std::size_t j, std::vector<int>& children) {
    const auto& rhs = g_.production(r).rhs;
    if (k == rhs.size()) return pos == j;
    SymbolId sym = rhs[k];
    std::vector<std::size_t> ends;
    for (std::size_t e = pos; e <= j; ++e) {
      if (derives(sym, pos, e) && seq(r, k + 1, e, j)) ends.push_back(e);
    }
    if (ends.size() > 1) ambiguous_ = true;
    for (std::size_t e : ends) {
      std::size_t mark = nodes_.size();
      int c = build(sym, pos, e);
      if (c >= 0) {
        children.push_back(c);
        if (assign(r, k + 1, e, j, children)) return true;
        children.pop_back();
      }
      nodes_.resize(mark);
    }
    return false;
  }

  const Program& p_;
  const Grammar& g_;
  std::size_t n_;
  std::vector<ItemSet> sets_;
  std::unordered_set<std::uint64_t> completed_;
  std::unordered_set<std::uint64_t> derivable_;
  std::unordered_map<std::uint64_t, bool> seq_memo_;
  std::unordered_set<std::uint64_t> on_path_;
  std::vector<ParseNode> nodes_;
  bool ambiguous_ = false;
};

}  // namespace

std::optional<ParseTree> parse(const Program& p, const Grammar& g) {
  EarleyParser parser(p, g);
  return parser.run();
}

}  // namespace synpatch
