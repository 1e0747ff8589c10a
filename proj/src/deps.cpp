#include "synpatch/deps.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace synpatch::deps {

using minic::Expr;
using minic::Stmt;
using minic::Type;
using minic::TypeRef;

std::string_view to_string(DefKind k) {
  switch (k) {
    case DefKind::Var: return "var";
    case DefKind::Func: return "func";
    case DefKind::Type: return "type";
  }
  return "?";
}

std::string_view to_string(InputVar::Origin o) {
  switch (o) {
    case InputVar::Origin::Free: return "free";
    case InputVar::Origin::Local: return "local";
    case InputVar::Origin::Param: return "param";
  }
  return "?";
}

const Definition* DefDb::global(std::string_view name, DefKind kind) const {
  for (const auto& d : entries_) {
    if (d.scope.empty() && d.kind == kind && d.name == name) return &d;
  }
  return nullptr;
}

std::vector<const Definition*> DefDb::locals(std::string_view function, std::string_view name) const {
  std::vector<const Definition*> out;
  for (const auto& d : entries_) {
    if (d.scope == function && d.name == name) out.push_back(&d);
  }
  return out;
}

std::vector<const Definition*> DefDb::structs_with_field(std::string_view field) const {
  std::vector<const Definition*> out;
  for (const auto& d : entries_) {
    if (d.kind != DefKind::Type) continue;
    minic::Unit u = minic::parse_unit(d.tokens);
    for (const auto& f : u.structs.at(0).fields) {
      if (f.name == field) out.push_back(&d);
    }
  }
  return out;
}

void DefDb::add(Definition d) {
  for (auto& e : entries_) {
    if (e.name == d.name && e.kind == d.kind && e.scope == d.scope && e.depth == d.depth && e.scope.empty()) {
      warnings_.push_back(std::string(to_string(Errc::DuplicateDefinition)) + ": " + std::string(to_string(d.kind)) +
                          " " + d.name + " at " + d.loc.file + ":" + std::to_string(d.loc.line) +
                          " replaces the one at " + e.loc.file + ":" + std::to_string(e.loc.line));
      e = std::move(d);
      return;
    }
  }
  entries_.push_back(std::move(d));
}

namespace {

// Top-level items: split at `;` on depth 0, and after a `}` that returns to
// depth 0 unless a `;` follows (struct definitions end in `} ;`).
std::vector<Program> split_items(const Program& p) {
  std::vector<Program> out;
  Program cur;
  int depth = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::string& w = p[i].lexeme;
    cur.push_back(p[i]);
    if (w == "{") ++depth;
    if (w == "}") depth = std::max(0, depth - 1);
    bool end = depth == 0 && (w == ";" || (w == "}" && !(i + 1 < p.size() && p[i + 1].lexeme == ";")));
    if (end) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::optional<long long> const_value(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Num:
    case Expr::Kind::Char: return e.value;
    case Expr::Kind::Unary: {
      auto v = const_value(*e.kids[0]);
      if (!v) return std::nullopt;
      if (e.op == "-") return -*v;
      if (e.op == "!") return *v == 0 ? 1 : 0;
      return std::nullopt;
    }
    case Expr::Kind::Binary: {
      auto a = const_value(*e.kids[0]);
      auto b = const_value(*e.kids[1]);
      if (!a || !b) return std::nullopt;
      const std::string& op = e.op;
      if (op == "+") return *a + *b;
      if (op == "-") return *a - *b;
      if (op == "*") return *a * *b;
      if ((op == "/" || op == "%") && *b != 0) return op == "/" ? *a / *b : *a % *b;
      return std::nullopt;
    }
    default: return std::nullopt;
  }
}

void each_expr(const Expr& e, const std::function<void(const Expr&, const Expr*)>& f, const Expr* parent = nullptr) {
  f(e, parent);
  for (const auto& k : e.kids) each_expr(*k, f, &e);
}

void each_stmt(const Stmt& s, const std::function<void(const Stmt&, int)>& f, int depth) {
  f(s, depth);
  if (s.kind == Stmt::Kind::Block) {
    for (const auto& c : s.stmts) each_stmt(*c, f, depth + 1);
  }
  if (s.then_branch) each_stmt(*s.then_branch, f, depth + 1);
  if (s.else_branch) each_stmt(*s.else_branch, f, depth + 1);
}

void stmt_exprs(const Stmt& s, const std::function<void(const Expr&)>& f) {
  if (s.decl && s.decl->init) f(*s.decl->init);
  if (s.init) f(*s.init);
  if (s.expr) f(*s.expr);
  if (s.step) f(*s.step);
}

// Names assigned or address-taken anywhere in a function body.
std::map<std::string, int> writes_in(const Stmt& body) {
  std::map<std::string, int> out;
  each_stmt(body, [&](const Stmt& s, int) {
    stmt_exprs(s, [&](const Expr& root) {
      each_expr(root, [&](const Expr& e, const Expr*) {
        if (e.kind == Expr::Kind::Assign && e.kids[0]->kind == Expr::Kind::Var) ++out[e.kids[0]->name];
        if (e.kind == Expr::Kind::Unary && e.op == "&" && e.kids[0]->kind == Expr::Kind::Var) ++out[e.kids[0]->name];
      });
    });
  }, 1);
  return out;
}

void index_function(DefDb& db, const minic::Function& f, const std::string& file, std::size_t ordinal) {
  auto writes = writes_in(*f.body);
  std::map<std::string, int> decls;
  each_stmt(*f.body, [&](const Stmt& s, int) {
    if (s.kind == Stmt::Kind::Decl) ++decls[s.decl->name];
  }, 1);
  for (const auto& p : f.params) {
    Definition d;
    d.name = p.name;
    d.kind = DefKind::Var;
    d.file = file;
    d.ordinal = ordinal;
    d.scope = f.name;
    d.depth = 1;
    d.type = p.type;
    d.loc = f.loc;
    db.add(std::move(d));
  }
  each_stmt(*f.body, [&](const Stmt& s, int depth) {
    if (s.kind != Stmt::Kind::Decl) return;
    const minic::VarDecl& v = *s.decl;
    Definition d;
    d.name = v.name;
    d.kind = DefKind::Var;
    d.file = file;
    d.ordinal = ordinal;
    d.scope = f.name;
    d.depth = depth;
    d.type = v.type;
    d.is_const = v.is_const;
    d.loc = v.loc;
    bool sole = decls[v.name] == 1 && writes[v.name] == 0 &&
                std::none_of(f.params.begin(), f.params.end(), [&](const auto& p) { return p.name == v.name; });
    if (v.init && sole) d.value = const_value(*v.init);
    db.add(std::move(d));
  }, 1);
}

bool all_caps(std::string_view name) {
  bool letter = false;
  for (char c : name) {
    if (std::islower(static_cast<unsigned char>(c))) return false;
    if (std::isupper(static_cast<unsigned char>(c))) letter = true;
  }
  return letter;
}

Program renumber(Program p) {
  for (std::size_t i = 0; i < p.size(); ++i) p[i].position = i;
  return p;
}

}  // namespace

DefDb index_definitions(const Project& project) {
  DefDb db;
  std::size_t ordinal = 0;
  std::map<std::string, int> global_writes;
  for (const auto& [file, tokens] : project) {
    for (Program& item : split_items(tokens)) {
      ++ordinal;
      minic::Unit u;
      try {
        u = minic::parse_unit(renumber(item));
      } catch (const Error&) {
        const auto& l = item.front().loc;
        db.warn("unparsable top-level item at " + l.file + ":" + std::to_string(l.line) + " skipped");
        continue;
      }
      Definition d;
      d.file = file;
      d.ordinal = ordinal;
      d.tokens = item;
      if (!u.structs.empty()) {
        d.name = u.structs[0].name;
        d.kind = DefKind::Type;
        d.loc = u.structs[0].loc;
        d.type = minic::struct_type(d.name);
      } else if (!u.globals.empty()) {
        const auto& g = u.globals[0];
        d.name = g.name;
        d.kind = DefKind::Var;
        d.loc = g.loc;
        d.type = g.type;
        d.is_const = g.is_const;
        if (g.init) d.value = const_value(*g.init);
      } else if (!u.functions.empty()) {
        const auto& f = u.functions[0];
        d.name = f.name;
        d.kind = DefKind::Func;
        d.loc = f.loc;
        d.type = f.ret;
        for (const auto& [name, n] : writes_in(*f.body)) global_writes[name] += n;
        index_function(db, f, file, ordinal);
      } else {
        continue;
      }
      db.add(std::move(d));
    }
  }
  // A global keeps its constant value only when no function writes it.
  DefDb out;
  for (Definition d : db.entries()) {
    if (d.scope.empty() && d.kind == DefKind::Var && !d.is_const && global_writes.count(d.name)) d.value.reset();
    out.add(std::move(d));
  }
  for (const auto& w : db.warnings()) out.warn(w);
  return out;
}

Project read_project(const std::string& manifest_path, Lexer lexer) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::IoError, "cannot read manifest " + manifest_path);
  namespace fs = std::filesystem;
  fs::path base = fs::path(manifest_path).parent_path();
  Project out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty()) continue;
    std::ifstream src(base / line);
    if (!src) throw Error(Errc::IoError, "cannot read source " + (base / line).string());
    std::stringstream ss;
    ss << src.rdbuf();
    out.emplace_back(line, lexer(ss.str(), line));
  }
  return out;
}

namespace {

struct Use {
  std::string name;
  const Expr* expr;
  const Expr* parent;
  std::string function;
};

struct FreeSymbols {
  std::vector<Use> vars;  // in walk order
  std::vector<std::string> calls;
  std::vector<std::string> structs;
};

void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

class FreeScan {
 public:
  explicit FreeScan(const minic::Unit& u) : u_(u) {}

  FreeSymbols run() {
    for (const auto& s : u_.structs) {
      for (const auto& f : s.fields) type(*f.type);
    }
    scopes_.emplace_back();
    for (const auto& g : u_.globals) {
      type(*g.type);
      if (g.init) expr(*g.init, nullptr, "");
      scopes_.back().insert(g.name);
    }
    for (const auto& f : u_.functions) {
      type(*f.ret);
      scopes_.emplace_back();
      for (const auto& p : f.params) {
        type(*p.type);
        scopes_.back().insert(p.name);
      }
      stmt(*f.body, f.name);
      scopes_.pop_back();
    }
    return std::move(out_);
  }

 private:
  void type(const Type& t) {
    if (t.kind == Type::Kind::Struct && !u_.find_struct(t.name)) add_unique(out_.structs, t.name);
    if (t.elem) type(*t.elem);
  }

  bool bound(const std::string& name) const {
    for (const auto& s : scopes_) {
      if (s.count(name)) return true;
    }
    return false;
  }

  void expr(const Expr& root, const Expr* root_parent, const std::string& fn) {
    each_expr(root, [&](const Expr& e, const Expr* parent) {
      if (e.kind == Expr::Kind::Var && !bound(e.name)) out_.vars.push_back({e.name, &e, parent ? parent : root_parent, fn});
      if (e.kind == Expr::Kind::Call && e.name != minic::kInputBuiltin && e.name != minic::kInputPtrBuiltin &&
          !u_.function(e.name)) {
        add_unique(out_.calls, e.name);
      }
    });
  }

  void stmt(const Stmt& s, const std::string& fn) {
    switch (s.kind) {
      case Stmt::Kind::Block:
        scopes_.emplace_back();
        for (const auto& c : s.stmts) stmt(*c, fn);
        scopes_.pop_back();
        return;
      case Stmt::Kind::Decl:
        type(*s.decl->type);
        if (s.decl->init) expr(*s.decl->init, nullptr, fn);
        scopes_.back().insert(s.decl->name);
        return;
      default: break;
    }
    if (s.init) expr(*s.init, nullptr, fn);
    if (s.expr) expr(*s.expr, nullptr, fn);
    if (s.step) expr(*s.step, nullptr, fn);
    for (const auto& b : {s.then_branch, s.else_branch}) {
      if (!b) continue;
      scopes_.emplace_back();
      stmt(*b, fn);
      scopes_.pop_back();
    }
  }

  const minic::Unit& u_;
  std::vector<std::set<std::string>> scopes_;
  FreeSymbols out_;
};

// Type evidence for a free variable from one use.
TypeRef evidence(const Use& use, const minic::Unit& u, const DefDb& db) {
  const Expr* p = use.parent;
  if (!p) return nullptr;
  auto struct_with = [&](const std::string& field) -> TypeRef {
    for (const auto& s : u.structs) {
      for (const auto& f : s.fields) {
        if (f.name == field) return minic::struct_type(s.name);
      }
    }
    auto defs = db.structs_with_field(field);
    if (!defs.empty()) return minic::struct_type(defs.front()->name);
    return nullptr;
  };
  bool first = !p->kids.empty() && p->kids[0].get() == use.expr;
  switch (p->kind) {
    case Expr::Kind::Index:
      if (first) return minic::pointer_to(minic::int_type());
      break;
    case Expr::Kind::Unary:
      if (p->op == "*") return minic::pointer_to(minic::int_type());
      break;
    case Expr::Kind::Arrow:
      if (auto s = struct_with(p->name)) return minic::pointer_to(s);
      break;
    case Expr::Kind::Field:
      return struct_with(p->name);
    case Expr::Kind::Assign:
      if (first && p->kids[1]->kind == Expr::Kind::Malloc) return minic::pointer_to(minic::int_type());
      break;
    case Expr::Kind::Call: {
      std::size_t i = 0;
      while (i < p->kids.size() && p->kids[i].get() != use.expr) ++i;
      const minic::Function* f = u.function(p->name);
      if (f && i < f->params.size()) return f->params[i].type;
      if (const Definition* d = db.global(p->name, DefKind::Func)) {
        minic::Unit fu = minic::parse_unit(d->tokens);
        const auto& params = fu.functions.at(0).params;
        if (i < params.size()) return params[i].type;
      }
      break;
    }
    default: break;
  }
  return nullptr;
}

}  // namespace

CompilableUnit resolve_dependencies(const std::vector<Program>& patched, const DefDb& db, const std::string& entry) {
  // Patched top-level items, callees before callers, otherwise project order.
  struct Item {
    Program tokens;
    std::string name;
    DefKind kind;
    std::size_t ordinal;
    std::vector<std::string> calls;
  };
  std::vector<Item> items;
  std::size_t extra = 1'000'000;
  for (const Program& p : patched) {
    for (Program& tokens : split_items(p)) {
      minic::Unit u = minic::parse_unit(renumber(tokens));
      Item it{std::move(tokens), "", DefKind::Var, 0, {}};
      if (!u.structs.empty()) {
        it.name = u.structs[0].name;
        it.kind = DefKind::Type;
      } else if (!u.globals.empty()) {
        it.name = u.globals[0].name;
      } else if (!u.functions.empty()) {
        it.name = u.functions[0].name;
        it.kind = DefKind::Func;
        each_stmt(*u.functions[0].body, [&](const Stmt& s, int) {
          stmt_exprs(s, [&](const Expr& root) {
            each_expr(root, [&](const Expr& e, const Expr*) {
              if (e.kind == Expr::Kind::Call) add_unique(it.calls, e.name);
            });
          });
        }, 0);
      } else {
        continue;
      }
      const Definition* d = db.global(it.name, it.kind);
      it.ordinal = d ? d->ordinal : extra++;
      items.push_back(std::move(it));
    }
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    bool fa = a.kind == DefKind::Func, fb = b.kind == DefKind::Func;
    if (fa != fb) return !fa;
    return a.ordinal < b.ordinal;
  });
  std::vector<const Item*> ordered;
  {
    std::set<std::string> done;
    std::function<void(const Item&)> visit = [&](const Item& it) {
      if (it.kind != DefKind::Func) {
        ordered.push_back(&it);
        return;
      }
      if (!done.insert(it.name).second) return;
      for (const auto& c : it.calls) {
        for (const auto& other : items) {
          if (other.kind == DefKind::Func && other.name == c) visit(other);
        }
      }
      ordered.push_back(&it);
    };
    for (const auto& it : items) visit(it);
  }

  CompilableUnit out;
  Program body;
  for (const Item* it : ordered) {
    body.insert(body.end(), it->tokens.begin(), it->tokens.end());
    if (it->kind == DefKind::Func) out.patched_functions.push_back(it->name);
  }
  if (out.patched_functions.empty()) throw Error(Errc::UnresolvableSymbol, "patched code contains no function");
  out.entry = entry.empty() ? out.patched_functions.front() : entry;
  if (std::find(out.patched_functions.begin(), out.patched_functions.end(), out.entry) == out.patched_functions.end()) {
    throw Error(Errc::UnresolvableSymbol, "entry function " + out.entry + " is not in the patched code");
  }

  std::vector<const Definition*> pulled;
  std::map<std::string, TypeRef> free_types;  // free variable -> declared type
  std::vector<std::string> free_order;
  for (int round = 0;; ++round) {
    std::sort(pulled.begin(), pulled.end(), [](const Definition* a, const Definition* b) { return a->ordinal < b->ordinal; });
    Program all;
    for (const Definition* d : pulled) all.insert(all.end(), d->tokens.begin(), d->tokens.end());
    for (std::size_t i = 0; i < free_order.size(); ++i) {
      Program decl = minic::lex(minic::declare(*free_types[free_order[i]], free_order[i]) + " ;", "<inputs>");
      for (auto& t : decl) t.loc.line = static_cast<int>(i) + 1;
      all.insert(all.end(), decl.begin(), decl.end());
    }
    std::size_t patched_begin = all.size();
    all.insert(all.end(), body.begin(), body.end());
    all = renumber(std::move(all));
    minic::Unit unit = minic::parse_unit(all);
    FreeSymbols fs = FreeScan(unit).run();

    bool changed = false;
    auto pull = [&](const Definition* d) {
      if (std::find(pulled.begin(), pulled.end(), d) != pulled.end()) return;
      pulled.push_back(d);
      changed = true;
    };
    for (const auto& name : fs.structs) {
      const Definition* d = db.global(name, DefKind::Type);
      if (!d) throw Error(Errc::UnresolvableSymbol, "struct " + name + " has no definition");
      pull(d);
    }
    for (const auto& name : fs.calls) {
      const Definition* d = db.global(name, DefKind::Func);
      if (!d) throw Error(Errc::UnresolvableSymbol, "function " + name + " has no definition");
      pull(d);
    }
    std::map<std::string, std::vector<const Use*>> free_uses;
    for (const auto& use : fs.vars) {
      bool in_patched = std::find(out.patched_functions.begin(), out.patched_functions.end(), use.function) !=
                        out.patched_functions.end();
      bool local_in_original = in_patched && !db.locals(use.function, use.name).empty();
      if (!local_in_original) {
        if (const Definition* d = db.global(use.name, DefKind::Var)) {
          pull(d);
          continue;
        }
      }
      if (!in_patched) {
        throw Error(Errc::UnresolvableSymbol, "variable " + use.name + " in " +
                                                  (use.function.empty() ? "a global initializer" : use.function) +
                                                  " has no definition");
      }
      if (all_caps(use.name)) {
        throw Error(Errc::UnresolvableSymbol, "constant " + use.name + " has no definition");
      }
      free_uses[use.name].push_back(&use);
    }
    if (changed) continue;

    std::vector<std::string> notes;
    for (const auto& use : fs.vars) {
      if (!free_uses.count(use.name) || free_types.count(use.name)) continue;
      TypeRef t;
      for (const Definition* d : db.locals(use.function, use.name)) {
        if (!t) t = d->type;
      }
      for (const Use* u : free_uses[use.name]) {
        if (t) break;
        t = evidence(*u, unit, db);
      }
      if (!t) {
        t = minic::int_type();
        notes.push_back("no type evidence for " + use.name + ", assumed int");
      }
      if (t->kind == Type::Kind::Array) t = minic::pointer_to(t->elem);
      free_types[use.name] = t;
      free_order.push_back(use.name);
      changed = true;
    }
    out.notes.insert(out.notes.end(), notes.begin(), notes.end());
    if (changed) continue;

    minic::type_check(unit);
    out.tokens = std::move(all);
    out.unit = std::move(unit);
    out.patched_begin = patched_begin;
    for (const Definition* d : pulled) out.preamble.push_back(std::string(to_string(d->kind)) + " " + d->name);
    out.declared = free_order;
    out.input_vars = find_input_vars(out, &db);
    return out;
  }
}

namespace {

// Definite-assignment scan over the patched functions.
class InputScan {
 public:
  InputScan(const CompilableUnit& cu, const DefDb* db) : cu_(cu), db_(db) {}

  std::vector<InputVar> run() {
    const minic::Unit& u = cu_.unit;
    for (const auto& g : u.globals) {
      if (std::find(cu_.declared.begin(), cu_.declared.end(), g.name) == cu_.declared.end()) continue;
      InputVar v;
      v.name = g.name;
      v.type = g.type;
      v.origin = InputVar::Origin::Free;
      global_ids_[g.name] = add(std::move(v));
    }
    for (const auto& f : u.functions) {
      if (std::find(cu_.patched_functions.begin(), cu_.patched_functions.end(), f.name) == cu_.patched_functions.end()) {
        continue;
      }
      fn_ = &f;
      scopes_.assign(1, {});
      for (const auto& [name, id] : global_ids_) scopes_[0][name] = id;
      scopes_.emplace_back();
      State st;
      for (const auto& p : f.params) {
        if (f.name == cu_.entry) {
          InputVar v;
          v.name = p.name;
          v.type = p.type;
          v.origin = InputVar::Origin::Param;
          v.function = f.name;
          int id = add(std::move(v));
          first_seen_[id] = f.first;
          used_[id] = true;
        }
        scopes_.back()[p.name] = -1;
      }
      stmt(*f.body, st);
    }
    std::vector<int> ids;
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (used_[i]) ids.push_back(static_cast<int>(i));
    }
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return first_seen_[a] < first_seen_[b]; });
    std::vector<InputVar> out;
    for (int id : ids) out.push_back(vars_[static_cast<std::size_t>(id)]);
    return out;
  }

 private:
  struct State {
    std::set<int> da;
    bool dead = false;
  };

  static State meet(const State& a, const State& b) {
    if (a.dead) return b;
    if (b.dead) return a;
    State out;
    std::set_intersection(a.da.begin(), a.da.end(), b.da.begin(), b.da.end(), std::inserter(out.da, out.da.begin()));
    return out;
  }

  int add(InputVar v) {
    vars_.push_back(std::move(v));
    used_.push_back(false);
    first_seen_.push_back(SIZE_MAX);
    return static_cast<int>(vars_.size()) - 1;
  }

  int resolve(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto f = it->find(name); f != it->end()) return f->second;
    }
    return -1;
  }

  void use(const Expr& e, const State& st) {
    int id = resolve(e.name);
    if (id < 0 || st.dead || st.da.count(id)) return;
    auto& v = vars_[static_cast<std::size_t>(id)];
    if (!used_[static_cast<std::size_t>(id)]) {
      used_[static_cast<std::size_t>(id)] = true;
      first_seen_[static_cast<std::size_t>(id)] = e.token;
      if (v.origin == InputVar::Origin::Free) v.function = fn_->name;
      if (db_ && v.origin != InputVar::Origin::Param) {
        auto defs = db_->locals(v.function, v.name);
        if (defs.size() == 1) v.known = defs[0]->value;
      }
    }
  }

  void expr(const Expr& e, State& st) {
    switch (e.kind) {
      case Expr::Kind::Var: use(e, st); return;
      case Expr::Kind::Assign: {
        expr(*e.kids[1], st);
        if (e.kids[0]->kind == Expr::Kind::Var) {
          int id = resolve(e.kids[0]->name);
          if (id >= 0) st.da.insert(id);
        } else {
          expr(*e.kids[0], st);
        }
        return;
      }
      case Expr::Kind::Binary:
        if (e.op == "&&" || e.op == "||") {
          expr(*e.kids[0], st);
          State right = st;
          expr(*e.kids[1], right);
          return;
        }
        break;
      default: break;
    }
    for (const auto& k : e.kids) expr(*k, st);
  }

  void branch(const Stmt& s, State& st) {
    scopes_.emplace_back();
    stmt(s, st);
    scopes_.pop_back();
  }

  void stmt(const Stmt& s, State& st) {
    switch (s.kind) {
      case Stmt::Kind::Empty: return;
      case Stmt::Kind::Block:
        scopes_.emplace_back();
        for (const auto& c : s.stmts) stmt(*c, st);
        scopes_.pop_back();
        return;
      case Stmt::Kind::Decl: {
        const minic::VarDecl& d = *s.decl;
        if (d.init) {
          expr(*d.init, st);
          scopes_.back()[d.name] = -1;
          return;
        }
        bool scalar = d.type->kind != Type::Kind::Array && d.type->kind != Type::Kind::Struct;
        if (!scalar) {
          scopes_.back()[d.name] = -1;
          return;
        }
        InputVar v;
        v.name = d.name;
        v.type = d.type;
        v.origin = InputVar::Origin::Local;
        v.function = fn_->name;
        v.decl_end = d.last;
        scopes_.back()[d.name] = add(std::move(v));
        return;
      }
      case Stmt::Kind::Expr:
      case Stmt::Kind::Assert:
      case Stmt::Kind::Free: expr(*s.expr, st); return;
      case Stmt::Kind::Return:
        if (s.expr) expr(*s.expr, st);
        st.dead = true;
        return;
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue: st.dead = true; return;
      case Stmt::Kind::If: {
        expr(*s.expr, st);
        State a = st;
        branch(*s.then_branch, a);
        State b = st;
        if (s.else_branch) branch(*s.else_branch, b);
        st = meet(a, b);
        return;
      }
      case Stmt::Kind::While: {
        expr(*s.expr, st);
        State body = st;
        branch(*s.then_branch, body);
        return;
      }
      case Stmt::Kind::For: {
        expr(*s.init, st);
        expr(*s.expr, st);
        State body = st;
        branch(*s.then_branch, body);
        expr(*s.step, body);
        return;
      }
    }
  }

  const CompilableUnit& cu_;
  const DefDb* db_;
  const minic::Function* fn_ = nullptr;
  std::vector<InputVar> vars_;
  std::vector<bool> used_;
  std::vector<std::size_t> first_seen_;
  std::map<std::string, int> global_ids_;
  std::vector<std::map<std::string, int>> scopes_;
};

}  // namespace

std::vector<InputVar> find_input_vars(const CompilableUnit& unit, const DefDb* db) { return InputScan(unit, db).run(); }

}  // namespace synpatch::deps
