#include "synpatch/minic.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace synpatch::minic {

namespace {

TypeRef make(Type::Kind k) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  return t;
}

const std::set<std::string, std::less<>>& keywords() {
  static const std::set<std::string, std::less<>> k = {"int",      "char",  "void",   "struct", "const",
                                                       "if",       "else",  "while",  "for",    "break",
                                                       "continue", "return", "assert", "free",   "malloc",
                                                       "null"};
  return k;
}

}  // namespace

TypeRef int_type() {
  static const TypeRef t = make(Type::Kind::Int);
  return t;
}
TypeRef char_type() {
  static const TypeRef t = make(Type::Kind::Char);
  return t;
}
TypeRef void_type() {
  static const TypeRef t = make(Type::Kind::Void);
  return t;
}
TypeRef pointer_to(TypeRef elem) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Pointer;
  t->elem = std::move(elem);
  return t;
}
TypeRef array_of(TypeRef elem, int length) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Array;
  t->elem = std::move(elem);
  t->length = length;
  return t;
}
TypeRef struct_type(const std::string& name) {
  auto t = std::make_shared<Type>();
  t->kind = Type::Kind::Struct;
  t->name = name;
  return t;
}

bool same_type(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Type::Kind::Pointer: return same_type(*a.elem, *b.elem);
    case Type::Kind::Array: return a.length == b.length && same_type(*a.elem, *b.elem);
    case Type::Kind::Struct: return a.name == b.name;
    default: return true;
  }
}

std::string to_string(const Type& t) {
  switch (t.kind) {
    case Type::Kind::Int: return "int";
    case Type::Kind::Char: return "char";
    case Type::Kind::Void: return "void";
    case Type::Kind::Struct: return "struct " + t.name;
    case Type::Kind::Pointer: return to_string(*t.elem) + " *";
    case Type::Kind::Array: return to_string(*t.elem) + " [ " + std::to_string(t.length) + " ]";
  }
  return "?";
}

std::string declare(const Type& t, const std::string& name) {
  if (t.kind == Type::Kind::Array) return to_string(*t.elem) + " " + name + " [ " + std::to_string(t.length) + " ]";
  return to_string(t) + " " + name;
}

bool is_keyword(std::string_view word) { return keywords().count(word) > 0; }

const Function* Unit::function(std::string_view name) const {
  for (const auto& f : functions) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const StructDef* Unit::find_struct(std::string_view name) const {
  for (const auto& s : structs) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

// ---------------------------------------------------------------- lexer

Program lex(std::string_view text, std::string_view file) {
  Program out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto emit = [&](std::size_t len) {
    Token t;
    t.lexeme = std::string(text.substr(i, len));
    t.position = out.size();
    t.loc = SourceLoc{std::string(file), line, col};
    out.push_back(std::move(t));
    advance(len);
  };
  auto fail = [&](const std::string& what) {
    throw Error(Errc::SyntaxError, std::string(file) + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  };
  static const char* kTwo[] = {"==", "!=", "<=", ">=", "&&", "||", "->"};
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
    } else if (text.substr(i, 2) == "//") {
      while (i < text.size() && text[i] != '\n') advance(1);
    } else if (text.substr(i, 2) == "/*") {
      auto end = text.find("*/", i + 2);
      if (end == std::string_view::npos) fail("unterminated comment");
      advance(end + 2 - i);
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      emit(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && (std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
        fail("malformed number");
      }
      emit(j - i);
    } else if (c == '\'') {
      std::size_t j = i + 1;
      if (j < text.size() && text[j] == '\\') ++j;
      ++j;
      if (j >= text.size() || text[j] != '\'') fail("malformed character literal");
      emit(j + 1 - i);
    } else {
      bool two = false;
      for (const char* op : kTwo) {
        if (text.substr(i, 2) == op) {
          emit(2);
          two = true;
          break;
        }
      }
      if (two) continue;
      if (std::string_view("+-*/%<>=!&.()[]{};,").find(c) == std::string_view::npos) {
        fail(std::string("unexpected character '") + c + "'");
      }
      emit(1);
    }
  }
  return out;
}

std::string render(const Program& p) {
  std::string out;
  const SourceLoc* prev = nullptr;
  for (const auto& t : p) {
    if (prev) out += (prev->file == t.loc.file && prev->line == t.loc.line) ? " " : "\n";
    out += t.lexeme;
    prev = &t.loc;
  }
  if (!out.empty()) out += '\n';
  return out;
}

// ---------------------------------------------------------------- grammar

extern const char* const kEmbeddedGrammar;

std::string_view grammar_text() { return kEmbeddedGrammar; }

const Grammar& grammar() {
  static const Grammar g = load_grammar(kEmbeddedGrammar);
  return g;
}

// ---------------------------------------------------------------- AST

namespace {

long long char_value(std::string_view lexeme) {
  std::string_view body = lexeme.substr(1, lexeme.size() - 2);
  if (body.size() == 2 && body[0] == '\\') {
    switch (body[1]) {
      case 'n': return '\n';
      case 't': return '\t';
      case '0': return 0;
      default: return body[1];
    }
  }
  return static_cast<unsigned char>(body[0]);
}

class Builder {
 public:
  explicit Builder(const ParseTree& t) : t_(t), g_(grammar()) {}

  Unit unit() {
    Unit u;
    u.tokens = t_.tokens();
    int decls = kids(t_.root())[0];
    for (int d : flatten(decls, "Decls")) {
      int item = kids(d)[0];
      const std::string& kind = label(item);
      if (kind == "StructDef") {
        u.order.push_back({TopItem::Kind::Struct, u.structs.size()});
        u.structs.push_back(struct_def(item));
      } else if (kind == "GlobalVar") {
        auto k = kids(item);
        VarDecl v = var_decl(k.back());
        v.is_const = k.size() == 2;
        v.first = first(item);
        v.loc = loc(item);
        u.order.push_back({TopItem::Kind::Global, u.globals.size()});
        u.globals.push_back(std::move(v));
      } else {
        u.order.push_back({TopItem::Kind::Function, u.functions.size()});
        u.functions.push_back(function(item));
      }
    }
    return u;
  }

 private:
  const std::string& label(int n) const { return g_.name(t_.node(n).label); }
  const std::vector<int>& kids(int n) const { return t_.node(n).children; }
  const Token& tok(int n) const { return t_.tokens()[t_.node(n).begin]; }
  const std::string& lex(int n) const { return tok(n).lexeme; }
  SourceLoc loc(int n) const { return tok(n).loc; }
  std::size_t first(int n) const { return t_.node(n).begin; }
  std::size_t last(int n) const { return t_.node(n).end - 1; }

  // Right-recursive list X -> Item X | Item.
  std::vector<int> flatten(int n, const char* list) const {
    std::vector<int> out;
    while (true) {
      auto k = kids(n);
      out.push_back(k[0]);
      if (k.size() == 1) break;
      n = k.back();
      if (label(n) != list) break;
    }
    return out;
  }

  std::vector<int> separated(int n) const {
    std::vector<int> out;
    while (true) {
      auto k = kids(n);
      out.push_back(k[0]);
      if (k.size() == 1) break;
      n = k[2];
    }
    return out;
  }

  TypeRef type(int n) const {
    auto k = kids(n);
    if (label(n) == "Type") {
      if (k.size() == 2) return pointer_to(type(k[0]));
      return type(k[0]);
    }
    // BaseType
    const std::string& w = lex(k[0]);
    if (w == "int") return int_type();
    if (w == "char") return char_type();
    if (w == "void") return void_type();
    return struct_type(lex(k[1]));
  }

  VarDecl var_decl(int n) const {
    auto k = kids(n);
    VarDecl v;
    v.type = type(k[0]);
    v.name = lex(k[1]);
    v.loc = loc(n);
    v.first = first(n);
    v.last = last(n);
    if (k.size() == 5) v.init = expr(k[3]);
    if (k.size() == 6) v.type = array_of(v.type, std::stoi(lex(k[3])));
    return v;
  }

  StructDef struct_def(int n) const {
    auto k = kids(n);
    StructDef s;
    s.name = lex(k[1]);
    s.loc = loc(n);
    s.first = first(n);
    s.last = last(n);
    for (int f : flatten(k[3], "Fields")) {
      auto fk = kids(f);
      TypeRef t = type(fk[0]);
      if (fk.size() == 6) t = array_of(t, std::stoi(lex(fk[3])));
      s.fields.push_back({t, lex(fk[1])});
    }
    return s;
  }

  Function function(int n) const {
    auto k = kids(n);
    Function f;
    f.ret = type(k[0]);
    f.name = lex(k[1]);
    f.loc = loc(n);
    f.first = first(n);
    f.last = last(n);
    if (k.size() == 6) {
      for (int p : separated(k[3])) {
        auto pk = kids(p);
        f.params.push_back({type(pk[0]), lex(pk[1])});
      }
    }
    f.body = block(k.back());
    return f;
  }

  StmtPtr block(int n) const {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Block;
    s->loc = loc(n);
    s->anchor = s->first = first(n);
    s->last = last(n);
    auto k = kids(n);
    if (k.size() == 3) {
      for (int st : flatten(k[1], label(k[1]).c_str())) s->stmts.push_back(stmt(st));
    }
    return s;
  }

  // Body/LBody -> Block | Stmt
  StmtPtr body(int n) const {
    int c = kids(n)[0];
    const std::string& l = label(c);
    return (l == "Block" || l == "LBlock") ? block(c) : stmt(c);
  }

  // Stmt, LStmt, Simple and Loop share one AST shape.
  StmtPtr stmt(int n) const {
    auto k = kids(n);
    const std::string& head = label(k[0]);
    if (head == "Simple" || head == "Loop") return stmt(k[0]);
    auto s = std::make_shared<Stmt>();
    s->loc = loc(n);
    s->anchor = s->first = first(n);
    s->last = last(n);
    if (head == "VarDecl") {
      s->kind = Stmt::Kind::Decl;
      s->decl = var_decl(k[0]);
      return s;
    }
    if (head == "Expr") {
      s->kind = Stmt::Kind::Expr;
      s->expr = expr(k[0]);
      return s;
    }
    const std::string& w = lex(k[0]);
    if (w == "if") {
      s->kind = Stmt::Kind::If;
      s->expr = expr(k[2]);
      s->then_branch = body(k[4]);
      if (k.size() == 7) s->else_branch = body(k[6]);
    } else if (w == "while") {
      s->kind = Stmt::Kind::While;
      s->expr = expr(k[2]);
      s->then_branch = body(k[4]);
    } else if (w == "for") {
      s->kind = Stmt::Kind::For;
      s->init = expr(k[2]);
      s->expr = expr(k[4]);
      s->step = expr(k[6]);
      s->then_branch = body(k[8]);
    } else if (w == "break") {
      s->kind = Stmt::Kind::Break;
    } else if (w == "continue") {
      s->kind = Stmt::Kind::Continue;
    } else if (w == "return") {
      s->kind = Stmt::Kind::Return;
      if (k.size() == 3) s->expr = expr(k[1]);
    } else if (w == "assert") {
      s->kind = Stmt::Kind::Assert;
      s->expr = expr(k[2]);
    } else if (w == "free") {
      s->kind = Stmt::Kind::Free;
      s->expr = expr(k[2]);
    } else {
      s->kind = Stmt::Kind::Empty;
    }
    return s;
  }

  ExprPtr node(Expr::Kind kind, int n) const {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->loc = loc(n);
    e->token = first(n);
    return e;
  }

  ExprPtr expr(int n) const {
    auto k = kids(n);
    const std::string& l = label(n);
    if (l == "Expr") return expr(k[0]);
    if (l == "Assign") {
      if (k.size() == 1) return expr(k[0]);
      auto e = node(Expr::Kind::Assign, n);
      e->kids = {expr(k[0]), expr(k[2])};
      return e;
    }
    if (l == "Or" || l == "And" || l == "Eq" || l == "Rel" || l == "Add" || l == "Mul") {
      if (k.size() == 1) return expr(k[0]);
      auto e = node(Expr::Kind::Binary, n);
      e->op = lex(k[1]);
      e->kids = {expr(k[0]), expr(k[2])};
      return e;
    }
    if (l == "Unary") {
      if (k.size() == 1) return expr(k[0]);
      auto e = node(Expr::Kind::Unary, n);
      e->op = lex(k[0]);
      e->kids = {expr(k[1])};
      return e;
    }
    if (l == "Postfix") {
      if (k.size() == 1) return expr(k[0]);
      if (label(k[0]) == "Postfix") {
        const std::string& op = lex(k[1]);
        if (op == "[") {
          auto e = node(Expr::Kind::Index, n);
          e->kids = {expr(k[0]), expr(k[2])};
          return e;
        }
        auto e = node(op == "." ? Expr::Kind::Field : Expr::Kind::Arrow, n);
        e->name = lex(k[2]);
        e->kids = {expr(k[0])};
        return e;
      }
      auto e = node(Expr::Kind::Call, n);
      e->name = lex(k[0]);
      if (k.size() == 4) {
        for (int a : separated(k[2])) e->kids.push_back(expr(a));
      }
      return e;
    }
    // Primary
    if (k.size() == 3) return expr(k[1]);
    if (k.size() == 4) {
      auto e = node(Expr::Kind::Malloc, n);
      e->kids = {expr(k[2])};
      return e;
    }
    const std::string& w = lex(k[0]);
    const std::string& cls = g_.name(t_.node(k[0]).label);
    if (cls == "IDENT") {
      auto e = node(Expr::Kind::Var, n);
      e->name = w;
      return e;
    }
    if (cls == "NUM") {
      auto e = node(Expr::Kind::Num, n);
      e->value = std::stoll(w);
      return e;
    }
    if (cls == "CHAR") {
      auto e = node(Expr::Kind::Char, n);
      e->value = char_value(w);
      return e;
    }
    return node(Expr::Kind::Null, n);
  }

  const ParseTree& t_;
  const Grammar& g_;
};

}  // namespace

Unit build_unit(const ParseTree& tree) { return Builder(tree).unit(); }

Unit parse_unit(const Program& tokens) {
  auto tree = parse(tokens, grammar());
  if (!tree) {
    std::string where = tokens.empty() ? "<empty>" : tokens.front().loc.file;
    throw Error(Errc::NotRecognized, where + ": not a MiniC program");
  }
  return build_unit(*tree);
}

// ---------------------------------------------------------------- types

int cell_count(const Type& t, const Unit& unit) {
  switch (t.kind) {
    case Type::Kind::Array:
      if (t.length < 0) throw Error(Errc::TypeError, "array without length");
      return t.length * cell_count(*t.elem, unit);
    case Type::Kind::Struct: {
      const StructDef* s = unit.find_struct(t.name);
      if (!s) throw Error(Errc::TypeError, "unknown struct " + t.name);
      int n = 0;
      for (const auto& f : s->fields) n += cell_count(*f.type, unit);
      return std::max(n, 1);
    }
    default: return 1;
  }
}

std::pair<int, TypeRef> field_offset(const StructDef& s, const std::string& field, const Unit& unit) {
  int off = 0;
  for (const auto& f : s.fields) {
    if (f.name == field) return {off, f.type};
    off += cell_count(*f.type, unit);
  }
  throw Error(Errc::TypeError, "struct " + s.name + " has no field " + field);
}

namespace {

class Checker {
 public:
  explicit Checker(Unit& u) : u_(u) {}

  void run() {
    std::set<std::string> seen;
    for (const auto& s : u_.structs) {
      if (!seen.insert("struct " + s.name).second) fail(s.loc, "duplicate struct " + s.name);
      for (const auto& f : s.fields) check_type(*f.type, s.loc);
    }
    scopes_.emplace_back();
    for (auto& g : u_.globals) declare_var(g);
    for (const auto& f : u_.functions) {
      if (!seen.insert("fn " + f.name).second) fail(f.loc, "duplicate function " + f.name);
    }
    for (auto& f : u_.functions) {
      ret_ = f.ret;
      scopes_.emplace_back();
      for (const auto& p : f.params) {
        check_type(*p.type, f.loc);
        scopes_.back()[p.name] = p.type;
      }
      stmt(*f.body, 0);
      scopes_.pop_back();
    }
  }

 private:
  [[noreturn]] void fail(const SourceLoc& loc, const std::string& what) const {
    throw Error(Errc::TypeError, loc.file + ":" + std::to_string(loc.line) + ": " + what);
  }

  void check_type(const Type& t, const SourceLoc& loc) const {
    if (t.kind == Type::Kind::Struct && !u_.find_struct(t.name)) fail(loc, "unknown struct " + t.name);
    if (t.elem) check_type(*t.elem, loc);
  }

  void declare_var(VarDecl& v) {
    check_type(*v.type, v.loc);
    if (v.type->kind == Type::Kind::Void) fail(v.loc, "variable of type void");
    if (v.init) {
      if (v.type->kind == Type::Kind::Array || v.type->kind == Type::Kind::Struct) {
        fail(v.loc, "initializer for aggregate " + v.name);
      }
      assignable(*v.type, expr(*v.init), v.loc);
    }
    scopes_.back()[v.name] = v.type;
  }

  TypeRef lookup(const std::string& name, const SourceLoc& loc) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto f = it->find(name); f != it->end()) return f->second;
    }
    fail(loc, "undefined variable " + name);
  }

  static bool is_void_ptr(const Type& t) { return t.kind == Type::Kind::Pointer && t.elem->kind == Type::Kind::Void; }

  void assignable(const Type& to, const TypeRef& from, const SourceLoc& loc) const {
    if (to.is_integral() && from->is_integral()) return;
    if (to.kind == Type::Kind::Pointer && from->is_pointer_like()) {
      if (is_void_ptr(to) || is_void_ptr(*from) || same_type(*to.elem, *from->elem)) return;
    }
    if (to.kind == Type::Kind::Struct && same_type(to, *from)) return;
    fail(loc, "cannot assign " + to_string(*from) + " to " + to_string(to));
  }

  void condition(const TypeRef& t, const SourceLoc& loc) const {
    if (!t->is_integral() && !t->is_pointer_like()) fail(loc, "condition is not scalar");
  }

  void stmt(Stmt& s, int loops) {
    switch (s.kind) {
      case Stmt::Kind::Decl: declare_var(*s.decl); break;
      case Stmt::Kind::Expr: expr(*s.expr); break;
      case Stmt::Kind::If:
        condition(expr(*s.expr), s.loc);
        scoped(*s.then_branch, loops);
        if (s.else_branch) scoped(*s.else_branch, loops);
        break;
      case Stmt::Kind::While:
        condition(expr(*s.expr), s.loc);
        scoped(*s.then_branch, loops + 1);
        break;
      case Stmt::Kind::For:
        expr(*s.init);
        condition(expr(*s.expr), s.loc);
        expr(*s.step);
        scoped(*s.then_branch, loops + 1);
        break;
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue:
        if (loops == 0) fail(s.loc, "break/continue outside loop");
        break;
      case Stmt::Kind::Return:
        if (s.expr) {
          if (ret_->kind == Type::Kind::Void) fail(s.loc, "return with value in void function");
          assignable(*ret_, expr(*s.expr), s.loc);
        }
        break;
      case Stmt::Kind::Assert: condition(expr(*s.expr), s.loc); break;
      case Stmt::Kind::Free: {
        TypeRef t = expr(*s.expr);
        if (t->kind != Type::Kind::Pointer) fail(s.loc, "free of non-pointer");
        break;
      }
      case Stmt::Kind::Block:
        scopes_.emplace_back();
        for (auto& c : s.stmts) stmt(*c, loops);
        scopes_.pop_back();
        break;
      case Stmt::Kind::Empty: break;
    }
  }

  void scoped(Stmt& s, int loops) {
    scopes_.emplace_back();
    stmt(s, loops);
    scopes_.pop_back();
  }

  static bool lvalue(const Expr& e) {
    return e.kind == Expr::Kind::Var || e.kind == Expr::Kind::Index || e.kind == Expr::Kind::Field ||
           e.kind == Expr::Kind::Arrow || (e.kind == Expr::Kind::Unary && e.op == "*");
  }

  TypeRef expr(Expr& e) {
    e.type = infer(e);
    return e.type;
  }

  TypeRef infer(Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Num: return int_type();
      case Expr::Kind::Char: return char_type();
      case Expr::Kind::Null: return pointer_to(void_type());
      case Expr::Kind::Var: return lookup(e.name, e.loc);
      case Expr::Kind::Malloc: {
        if (!expr(*e.kids[0])->is_integral()) fail(e.loc, "malloc size is not an integer");
        return pointer_to(void_type());
      }
      case Expr::Kind::Unary: {
        TypeRef t = expr(*e.kids[0]);
        if (e.op == "*") {
          if (!t->is_pointer_like() || t->elem->kind == Type::Kind::Void) fail(e.loc, "dereference of non-pointer");
          return t->elem;
        }
        if (e.op == "&") {
          if (!lvalue(*e.kids[0])) fail(e.loc, "address of non-lvalue");
          return pointer_to(t);
        }
        if (e.op == "!") {
          condition(t, e.loc);
          return int_type();
        }
        if (!t->is_integral()) fail(e.loc, "arithmetic on non-integer");
        return int_type();
      }
      case Expr::Kind::Binary: {
        TypeRef a = expr(*e.kids[0]);
        TypeRef b = expr(*e.kids[1]);
        const std::string& op = e.op;
        if (op == "&&" || op == "||") {
          condition(a, e.loc);
          condition(b, e.loc);
          return int_type();
        }
        if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") {
          bool ok = (a->is_integral() && b->is_integral()) || (a->is_pointer_like() && b->is_pointer_like());
          if (!ok) fail(e.loc, "comparison of incompatible operands");
          return int_type();
        }
        if ((op == "+" || op == "-") && a->is_pointer_like() && b->is_integral()) {
          return a->kind == Type::Kind::Array ? pointer_to(a->elem) : a;
        }
        if (!a->is_integral() || !b->is_integral()) fail(e.loc, "arithmetic on non-integer");
        return int_type();
      }
      case Expr::Kind::Assign: {
        if (!lvalue(*e.kids[0])) fail(e.loc, "assignment to non-lvalue");
        TypeRef to = expr(*e.kids[0]);
        if (to->kind == Type::Kind::Array) fail(e.loc, "assignment to array");
        assignable(*to, expr(*e.kids[1]), e.loc);
        return to;
      }
      case Expr::Kind::Index: {
        TypeRef base = expr(*e.kids[0]);
        if (!base->is_pointer_like() || base->elem->kind == Type::Kind::Void) fail(e.loc, "index of non-array");
        if (!expr(*e.kids[1])->is_integral()) fail(e.loc, "non-integer index");
        return base->elem;
      }
      case Expr::Kind::Field:
      case Expr::Kind::Arrow: {
        TypeRef base = expr(*e.kids[0]);
        if (e.kind == Expr::Kind::Arrow) {
          if (base->kind != Type::Kind::Pointer) fail(e.loc, "-> on non-pointer");
          base = base->elem;
        }
        if (base->kind != Type::Kind::Struct) fail(e.loc, "member access on non-struct");
        const StructDef* s = u_.find_struct(base->name);
        if (!s) fail(e.loc, "unknown struct " + base->name);
        for (const auto& f : s->fields) {
          if (f.name == e.name) return f.type;
        }
        fail(e.loc, "struct " + base->name + " has no field " + e.name);
      }
      case Expr::Kind::Call: {
        if (e.name == kInputBuiltin || e.name == kInputPtrBuiltin) {
          if (e.kids.size() != 1 || !expr(*e.kids[0])->is_integral()) fail(e.loc, e.name + " takes one slot number");
          return e.name == kInputBuiltin ? int_type() : pointer_to(void_type());
        }
        const Function* f = u_.function(e.name);
        if (!f) fail(e.loc, "undefined function " + e.name);
        if (f->params.size() != e.kids.size()) fail(e.loc, "wrong argument count for " + e.name);
        for (std::size_t i = 0; i < e.kids.size(); ++i) assignable(*f->params[i].type, expr(*e.kids[i]), e.loc);
        return f->ret;
      }
    }
    fail(e.loc, "unknown expression");
  }

  Unit& u_;
  std::vector<std::map<std::string, TypeRef>> scopes_;
  TypeRef ret_;
};

}  // namespace

void type_check(Unit& unit) { Checker(unit).run(); }

}  // namespace synpatch::minic

namespace synpatch::minic {

namespace {

// Position in p of the first token of the innermost Loop around `node`, or
// nullopt outside any loop.
std::optional<std::size_t> loop_head(const ParseTree& t, int node, SymbolId loop,
                                     const std::vector<std::size_t>* origin) {
  for (int v = t.node(node).parent; v >= 0; v = t.node(v).parent) {
    const ParseNode& n = t.node(v);
    if (n.label == loop) return origin ? (*origin)[n.begin] : n.begin;
  }
  return std::nullopt;
}

}  // namespace

PatchCheck keep_loops(const Fragment& s) {
  return [picks = s.picks](const ParseTree& tp, const ParseTree& ts, const std::vector<std::size_t>& origin) {
    SymbolId loop = grammar().symbol("Loop");
    std::size_t j = 0;
    for (std::size_t pick : picks) {
      while (origin[j] != pick) ++j;
      if (loop_head(tp, tp.leaf(pick), loop, nullptr) != loop_head(ts, ts.leaf(j), loop, &origin)) return false;
    }
    return true;
  };
}

Fragment with_loop_heads(const Program& p, const Fragment& s) {
  auto tp = synpatch::parse(p, grammar());
  if (!tp) throw Error(Errc::NotRecognized, "program is not MiniC");
  SymbolId loop = grammar().symbol("Loop");
  std::set<std::size_t> picks(s.picks.begin(), s.picks.end());
  for (std::size_t pick : s.picks) {
    if (auto head = loop_head(*tp, tp->leaf(pick), loop, nullptr)) picks.insert(*head);
  }
  Fragment out = s;
  out.picks.assign(picks.begin(), picks.end());
  return out;
}

PatchResult patch(const Program& p, const Fragment& s, LcaOptions opts) {
  static const DerivationGraph dg = DerivationGraph::full(grammar());
  Fragment widened = with_loop_heads(p, s);
  opts.extra = keep_loops(widened);
  PatchResult r = lca_patch(p, widened, dg, opts);
  std::set<std::size_t> picks(s.picks.begin(), s.picks.end());
  r.added.clear();
  for (std::size_t i = 0; i < r.origin.size(); ++i) {
    if (!picks.count(r.origin[i])) r.added.push_back(i);
  }
  return r;
}

}  // namespace synpatch::minic
