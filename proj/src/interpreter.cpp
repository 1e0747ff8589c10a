#include <algorithm>
#include <cstdint>
#include <map>

#include "synpatch/runner.hpp"

namespace synpatch::runner {

using minic::Expr;
using minic::Stmt;
using minic::Type;

namespace {

struct Cell {
  enum class Kind : std::uint8_t { Uninit, Int, Ptr };
  Kind kind = Kind::Uninit;
  int block = -1;  // Ptr: -1 is null
  long long v = 0;  // Int value or Ptr offset

  static Cell integer(long long x) { return {Kind::Int, -1, x}; }
  static Cell pointer(int b, long long off) { return {Kind::Ptr, b, off}; }
  static Cell null() { return {Kind::Ptr, -1, 0}; }
};

struct Block {
  std::vector<Cell> cells;
  bool heap = false;
  bool freed = false;
  bool input = false;
  SourceLoc alloc;
};

struct Trap {
  FailureKind kind;
  SourceLoc loc;
  std::string message;
};

struct OutOfSteps {};

enum class Flow { Next, Break, Continue, Return };

long long wrap(long long v, const Type& t) {
  if (t.kind == Type::Kind::Char) return static_cast<std::int8_t>(static_cast<std::uint8_t>(v & 0xff));
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(v & 0xffffffffLL));
}

long long wrap32(long long v) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(v & 0xffffffffLL)); }

class Machine {
 public:
  Machine(const TestProgram& tp, const InputVector& input, const ExecOptions& opts)
      : tp_(tp), u_(tp.unit), input_(input), opts_(opts) {}

  RunResult run() {
    RunResult r;
    try {
      for (const auto& g : u_.globals) {
        int b = alloc(*g.type, g.loc, false);
        zero(b, 0, *g.type);
        globals_[g.name] = b;
        if (g.init) store(b, 0, *g.type, eval(*g.init), g.loc);
      }
      const minic::Function* main = u_.function(kHarnessMain);
      if (!main) throw Error(Errc::InterpreterBug, "harness function missing");
      call(*main, {}, main->loc);
      check_leaks();
    } catch (const Trap& t) {
      r.outcome = RunResult::Outcome::Failure;
      r.kind = t.kind;
      r.where = {t.loc.file, t.loc.line};
      r.message = t.message;
    } catch (const OutOfSteps&) {
      r.outcome = RunResult::Outcome::Timeout;
    }
    r.steps = steps_;
    for (const auto& [file, lines] : trace_) {
      for (std::size_t l = 0; l < lines.size(); ++l) {
        if (lines[l]) r.trace.push_back({file, static_cast<int>(l)});
      }
    }
    std::sort(r.trace.begin(), r.trace.end());
    return r;
  }

 private:
  struct Frame {
    std::vector<std::map<std::string, int>> scopes;
    Cell ret;
  };

  [[noreturn]] void trap(FailureKind k, const SourceLoc& loc, const std::string& msg) const { throw Trap{k, loc, msg}; }

  void tick(const SourceLoc& loc) {
    if (++steps_ > opts_.step_budget) throw OutOfSteps{};
    if (loc.line <= 0) return;
    auto& lines = trace_[loc.file];
    if (lines.size() <= static_cast<std::size_t>(loc.line)) lines.resize(static_cast<std::size_t>(loc.line) + 1, false);
    lines[static_cast<std::size_t>(loc.line)] = true;
  }

  int cells(const Type& t) const { return minic::cell_count(t, u_); }

  int alloc(const Type& t, const SourceLoc& loc, bool heap) { return alloc_cells(cells(t), loc, heap); }

  int alloc_cells(long long n, const SourceLoc& loc, bool heap) {
    Block b;
    b.cells.resize(static_cast<std::size_t>(n));
    b.heap = heap;
    b.alloc = loc;
    blocks_.push_back(std::move(b));
    return static_cast<int>(blocks_.size()) - 1;
  }

  void zero(int b, long long off, const Type& t) {
    switch (t.kind) {
      case Type::Kind::Array:
        for (int i = 0; i < t.length; ++i) zero(b, off + static_cast<long long>(i) * cells(*t.elem), *t.elem);
        return;
      case Type::Kind::Struct: {
        const minic::StructDef* s = u_.find_struct(t.name);
        long long o = off;
        for (const auto& f : s->fields) {
          zero(b, o, *f.type);
          o += cells(*f.type);
        }
        return;
      }
      case Type::Kind::Pointer: blocks_[static_cast<std::size_t>(b)].cells[static_cast<std::size_t>(off)] = Cell::null(); return;
      default: blocks_[static_cast<std::size_t>(b)].cells[static_cast<std::size_t>(off)] = Cell::integer(0); return;
    }
  }

  // Address check for an n-cell access.
  void check(const Cell& p, long long n, const SourceLoc& loc) const {
    if (p.kind != Cell::Kind::Ptr) throw Error(Errc::InterpreterBug, "address is not a pointer");
    if (p.block < 0) trap(FailureKind::NullDeref, loc, "null dereference");
    const Block& b = blocks_[static_cast<std::size_t>(p.block)];
    if (b.freed) trap(FailureKind::OutOfBounds, loc, "use after free");
    if (p.v < 0 || p.v + n > static_cast<long long>(b.cells.size())) {
      trap(FailureKind::OutOfBounds, loc,
           "access at cell " + std::to_string(p.v) + " of a " + std::to_string(b.cells.size()) + "-cell block");
    }
  }

  Cell load(const Cell& addr, const Type& t, const SourceLoc& loc) {
    check(addr, 1, loc);
    Cell c = blocks_[static_cast<std::size_t>(addr.block)].cells[static_cast<std::size_t>(addr.v)];
    if (c.kind == Cell::Kind::Uninit) trap(FailureKind::UninitializedRead, loc, "read of uninitialized memory");
    if (t.kind == Type::Kind::Pointer && c.kind == Cell::Kind::Int) return Cell::null();
    return c;
  }

  void store(int b, long long off, const Type& t, Cell v, const SourceLoc& loc) {
    store_at(Cell::pointer(b, off), t, v, loc);
  }

  void store_at(const Cell& addr, const Type& t, Cell v, const SourceLoc& loc) {
    check(addr, 1, loc);
    if (t.is_integral()) {
      if (v.kind != Cell::Kind::Int) throw Error(Errc::InterpreterBug, "storing a pointer into an integer");
      v.v = wrap(v.v, t);
    }
    blocks_[static_cast<std::size_t>(addr.block)].cells[static_cast<std::size_t>(addr.v)] = v;
  }

  void copy(const Cell& to, const Cell& from, const Type& t, const SourceLoc& loc) {
    long long n = cells(t);
    check(from, n, loc);
    check(to, n, loc);
    auto& src = blocks_[static_cast<std::size_t>(from.block)].cells;
    auto& dst = blocks_[static_cast<std::size_t>(to.block)].cells;
    std::vector<Cell> tmp(src.begin() + from.v, src.begin() + from.v + n);
    std::copy(tmp.begin(), tmp.end(), dst.begin() + to.v);
  }

  int lookup(const std::string& name, const SourceLoc& loc) const {
    if (!frames_.empty()) {
      const auto& scopes = frames_.back().scopes;
      for (auto it = scopes.rbegin(); it != scopes.rend(); ++it) {
        if (auto f = it->find(name); f != it->end()) return f->second;
      }
    }
    if (auto g = globals_.find(name); g != globals_.end()) return g->second;
    throw Error(Errc::InterpreterBug, loc.file + ":" + std::to_string(loc.line) + ": unbound " + name);
  }

  long long field(const Type& st, const std::string& name) {
    auto key = st.name + "." + name;
    if (auto it = fields_.find(key); it != fields_.end()) return it->second;
    const minic::StructDef* s = u_.find_struct(st.name);
    if (!s) throw Error(Errc::InterpreterBug, "unknown struct " + st.name);
    long long off = minic::field_offset(*s, name, u_).first;
    fields_[key] = off;
    return off;
  }

  Cell pointer_value(const Expr& e) {
    Cell p = eval(e);
    if (p.kind != Cell::Kind::Ptr) throw Error(Errc::InterpreterBug, "expected a pointer");
    return p;
  }

  // Address of an lvalue; checked for the object's full size.
  Cell lvalue(const Expr& e) {
    tick(e.loc);
    Cell a;
    switch (e.kind) {
      case Expr::Kind::Var: return Cell::pointer(lookup(e.name, e.loc), 0);
      case Expr::Kind::Index: {
        Cell base = pointer_value(*e.kids[0]);
        Cell i = eval(*e.kids[1]);
        if (base.block < 0) trap(FailureKind::NullDeref, e.loc, "index of null pointer");
        a = Cell::pointer(base.block, base.v + i.v * cells(*e.type));
        break;
      }
      case Expr::Kind::Unary:
        a = pointer_value(*e.kids[0]);
        break;
      case Expr::Kind::Field: {
        Cell base = lvalue(*e.kids[0]);
        a = Cell::pointer(base.block, base.v + field(*e.kids[0]->type, e.name));
        break;
      }
      case Expr::Kind::Arrow: {
        Cell p = pointer_value(*e.kids[0]);
        if (p.block < 0) trap(FailureKind::NullDeref, e.loc, "member access through null pointer");
        a = Cell::pointer(p.block, p.v + field(*e.kids[0]->type->elem, e.name));
        break;
      }
      default: throw Error(Errc::InterpreterBug, "not an lvalue");
    }
    check(a, cells(*e.type), e.loc);
    return a;
  }

  static bool truthy(const Cell& c) { return c.kind == Cell::Kind::Ptr ? c.block >= 0 : c.v != 0; }

  Cell eval(const Expr& e) {
    tick(e.loc);
    const Type& t = *e.type;
    switch (e.kind) {
      case Expr::Kind::Num:
      case Expr::Kind::Char: return Cell::integer(e.value);
      case Expr::Kind::Null: return Cell::null();
      case Expr::Kind::Var:
      case Expr::Kind::Index:
      case Expr::Kind::Field:
      case Expr::Kind::Arrow: {
        Cell a = lvalue(e);
        if (t.kind == Type::Kind::Array) return a;
        if (t.kind == Type::Kind::Struct) throw Error(Errc::UnsupportedConstruct, "struct value outside assignment");
        return load(a, t, e.loc);
      }
      case Expr::Kind::Unary: {
        if (e.op == "&") return lvalue(*e.kids[0]);
        if (e.op == "*") {
          Cell a = lvalue(e);
          if (t.kind == Type::Kind::Array) return a;
          if (t.kind == Type::Kind::Struct) throw Error(Errc::UnsupportedConstruct, "struct value outside assignment");
          return load(a, t, e.loc);
        }
        Cell v = eval(*e.kids[0]);
        if (e.op == "!") return Cell::integer(truthy(v) ? 0 : 1);
        return Cell::integer(wrap32(-v.v));
      }
      case Expr::Kind::Binary: return binary(e);
      case Expr::Kind::Assign: {
        const Type& lt = *e.kids[0]->type;
        if (lt.kind == Type::Kind::Struct) {
          Cell to = lvalue(*e.kids[0]);
          Cell from = lvalue(*e.kids[1]);
          copy(to, from, lt, e.loc);
          return Cell::integer(0);
        }
        Cell to = lvalue(*e.kids[0]);
        Cell v = eval(*e.kids[1]);
        if (lt.kind == Type::Kind::Pointer && v.kind == Cell::Kind::Int) v = Cell::null();
        store_at(to, lt, v, e.loc);
        return lt.is_integral() ? Cell::integer(wrap(v.v, lt)) : v;
      }
      case Expr::Kind::Malloc: {
        Cell n = eval(*e.kids[0]);
        if (n.v < 0) trap(FailureKind::OutOfBounds, e.loc, "negative allocation size");
        if (n.v > (1 << 20)) return Cell::null();
        int b = alloc_cells(n.v, e.loc, true);
        return Cell::pointer(b, 0);
      }
      case Expr::Kind::Call: return call_expr(e);
    }
    throw Error(Errc::InterpreterBug, "unknown expression");
  }

  Cell binary(const Expr& e) {
    const std::string& op = e.op;
    if (op == "&&") return Cell::integer(truthy(eval(*e.kids[0])) && truthy(eval(*e.kids[1])) ? 1 : 0);
    if (op == "||") return Cell::integer(truthy(eval(*e.kids[0])) || truthy(eval(*e.kids[1])) ? 1 : 0);
    Cell a = eval(*e.kids[0]);
    Cell b = eval(*e.kids[1]);
    if (a.kind == Cell::Kind::Ptr || b.kind == Cell::Kind::Ptr) {
      if (op == "+" || op == "-") {
        long long step = cells(*e.kids[0]->type->elem) * (op == "+" ? b.v : -b.v);
        return Cell::pointer(a.block, a.v + step);
      }
      bool same = a.block == b.block;
      long long d = same ? a.v - b.v : (a.block < b.block ? -1 : 1);
      if (op == "==") return Cell::integer(same && a.v == b.v);
      if (op == "!=") return Cell::integer(!(same && a.v == b.v));
      if (op == "<") return Cell::integer(d < 0);
      if (op == "<=") return Cell::integer(d <= 0);
      if (op == ">") return Cell::integer(d > 0);
      if (op == ">=") return Cell::integer(d >= 0);
      throw Error(Errc::InterpreterBug, "pointer operator " + op);
    }
    long long x = a.v, y = b.v;
    if (op == "+") return Cell::integer(wrap32(x + y));
    if (op == "-") return Cell::integer(wrap32(x - y));
    if (op == "*") return Cell::integer(wrap32(x * y));
    if (op == "/" || op == "%") {
      if (y == 0) trap(FailureKind::DivByZero, e.loc, "division by zero");
      if (x == INT32_MIN && y == -1) return Cell::integer(op == "/" ? x : 0);
      return Cell::integer(op == "/" ? x / y : x % y);
    }
    if (op == "==") return Cell::integer(x == y);
    if (op == "!=") return Cell::integer(x != y);
    if (op == "<") return Cell::integer(x < y);
    if (op == "<=") return Cell::integer(x <= y);
    if (op == ">") return Cell::integer(x > y);
    if (op == ">=") return Cell::integer(x >= y);
    throw Error(Errc::InterpreterBug, "operator " + op);
  }

  int materialize(const InputValue& v, const SourceLoc& loc) {
    int b = alloc_cells(static_cast<long long>(v.cells.size()), loc, true);
    blocks_[static_cast<std::size_t>(b)].input = true;
    for (std::size_t i = 0; i < v.cells.size(); ++i) {
      const InputValue& c = v.cells[i];
      Cell cell;
      switch (c.kind) {
        case InputValue::Kind::Int: cell = Cell::integer(c.value); break;
        case InputValue::Kind::Null: cell = Cell::null(); break;
        case InputValue::Kind::Block: cell = Cell::pointer(materialize(c, loc), 0); break;
      }
      blocks_[static_cast<std::size_t>(b)].cells[i] = cell;
    }
    return b;
  }

  const InputValue& slot(const Expr& e) {
    long long k = eval(*e.kids[0]).v;
    if (k < 0 || k >= static_cast<long long>(input_.size())) {
      throw Error(Errc::InterpreterBug, "input slot " + std::to_string(k) + " out of range");
    }
    return input_[static_cast<std::size_t>(k)];
  }

  Cell call_expr(const Expr& e) {
    if (e.name == minic::kInputBuiltin) {
      const InputValue& v = slot(e);
      if (v.kind == InputValue::Kind::Block) throw Error(Errc::InterpreterBug, "block in an integer slot");
      return Cell::integer(v.kind == InputValue::Kind::Int ? wrap32(v.value) : 0);
    }
    if (e.name == minic::kInputPtrBuiltin) {
      const InputValue& v = slot(e);
      if (v.kind == InputValue::Kind::Int) throw Error(Errc::InterpreterBug, "integer in a pointer slot");
      return v.kind == InputValue::Kind::Null ? Cell::null() : Cell::pointer(materialize(v, e.loc), 0);
    }
    const minic::Function* f = u_.function(e.name);
    if (!f) throw Error(Errc::InterpreterBug, "undefined function " + e.name);
    std::vector<std::pair<Cell, bool>> args;  // value, or address of a struct to copy
    for (std::size_t i = 0; i < e.kids.size(); ++i) {
      if (f->params[i].type->kind == Type::Kind::Struct) {
        args.push_back({lvalue(*e.kids[i]), true});
      } else {
        args.push_back({eval(*e.kids[i]), false});
      }
    }
    if (f->ret->kind == Type::Kind::Struct) throw Error(Errc::UnsupportedConstruct, "struct return value");
    return call(*f, args, e.loc);
  }

  Cell call(const minic::Function& f, const std::vector<std::pair<Cell, bool>>& args, const SourceLoc& loc) {
    if (static_cast<int>(frames_.size()) >= opts_.max_call_depth) throw OutOfSteps{};
    Frame frame;
    frame.scopes.emplace_back();
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      const Type& pt = *f.params[i].type;
      int b = alloc(pt, loc, false);
      if (args[i].second) {
        copy(Cell::pointer(b, 0), args[i].first, pt, loc);
      } else {
        Cell v = args[i].first;
        if (pt.kind == Type::Kind::Pointer && v.kind == Cell::Kind::Int) v = Cell::null();
        store(b, 0, pt, v, loc);
      }
      frame.scopes.back()[f.params[i].name] = b;
    }
    frames_.push_back(std::move(frame));
    exec(*f.body);
    Cell r = frames_.back().ret;
    frames_.pop_back();
    return r;
  }

  Flow body(const Stmt& s) {
    frames_.back().scopes.emplace_back();
    Flow fl = exec(s);
    frames_.back().scopes.pop_back();
    return fl;
  }

  Flow exec(const Stmt& s) {
    tick(s.loc);
    switch (s.kind) {
      case Stmt::Kind::Empty: return Flow::Next;
      case Stmt::Kind::Block: {
        frames_.back().scopes.emplace_back();
        Flow fl = Flow::Next;
        for (const auto& c : s.stmts) {
          fl = exec(*c);
          if (fl != Flow::Next) break;
        }
        frames_.back().scopes.pop_back();
        return fl;
      }
      case Stmt::Kind::Decl: {
        const minic::VarDecl& d = *s.decl;
        int b = alloc(*d.type, d.loc, false);
        if (d.init) {
          Cell v = eval(*d.init);
          if (d.type->kind == Type::Kind::Pointer && v.kind == Cell::Kind::Int) v = Cell::null();
          store(b, 0, *d.type, v, d.loc);
        }
        frames_.back().scopes.back()[d.name] = b;
        return Flow::Next;
      }
      case Stmt::Kind::Expr: eval(*s.expr); return Flow::Next;
      case Stmt::Kind::If:
        if (truthy(eval(*s.expr))) return body(*s.then_branch);
        if (s.else_branch) return body(*s.else_branch);
        return Flow::Next;
      case Stmt::Kind::While:
        while (truthy(eval(*s.expr))) {
          Flow fl = body(*s.then_branch);
          if (fl == Flow::Break) break;
          if (fl == Flow::Return) return fl;
          tick(s.loc);
        }
        return Flow::Next;
      case Stmt::Kind::For:
        eval(*s.init);
        while (truthy(eval(*s.expr))) {
          Flow fl = body(*s.then_branch);
          if (fl == Flow::Break) break;
          if (fl == Flow::Return) return fl;
          eval(*s.step);
        }
        return Flow::Next;
      case Stmt::Kind::Break: return Flow::Break;
      case Stmt::Kind::Continue: return Flow::Continue;
      case Stmt::Kind::Return:
        if (s.expr) {
          Cell v = eval(*s.expr);
          frames_.back().ret = v;
        }
        return Flow::Return;
      case Stmt::Kind::Assert:
        if (!truthy(eval(*s.expr))) trap(FailureKind::AssertFail, s.loc, "assertion failed");
        return Flow::Next;
      case Stmt::Kind::Free: {
        Cell p = eval(*s.expr);
        if (p.block < 0) return Flow::Next;
        Block& b = blocks_[static_cast<std::size_t>(p.block)];
        if (!b.heap || b.freed || p.v != 0) {
          trap(FailureKind::OutOfBounds, s.loc, b.freed ? "double free" : "free of a pointer not from malloc");
        }
        b.freed = true;
        return Flow::Next;
      }
    }
    throw Error(Errc::InterpreterBug, "unknown statement");
  }

  // Heap blocks allocated by the program, not freed and unreachable from
  // globals once the harness returns.
  void check_leaks() {
    std::vector<bool> seen(blocks_.size(), false);
    std::vector<int> stack;
    for (const auto& [name, b] : globals_) stack.push_back(b);
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      if (seen[static_cast<std::size_t>(b)]) continue;
      seen[static_cast<std::size_t>(b)] = true;
      for (const Cell& c : blocks_[static_cast<std::size_t>(b)].cells) {
        if (c.kind == Cell::Kind::Ptr && c.block >= 0) stack.push_back(c.block);
      }
    }
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const Block& b = blocks_[i];
      if (b.heap && !b.freed && !b.input && !seen[i]) trap(FailureKind::Leak, b.alloc, "allocation never freed");
    }
  }

  const TestProgram& tp_;
  const minic::Unit& u_;
  const InputVector& input_;
  const ExecOptions& opts_;
  std::vector<Block> blocks_;
  std::map<std::string, int> globals_;
  std::vector<Frame> frames_;
  std::map<std::string, long long> fields_;
  std::map<std::string, std::vector<bool>> trace_;
  std::uint64_t steps_ = 0;
};

}  // namespace

RunResult execute(const TestProgram& tp, const InputVector& input, const ExecOptions& opts) {
  return Machine(tp, input, opts).run();
}

}  // namespace synpatch::runner
