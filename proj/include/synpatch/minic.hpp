#pragma once

// MiniC front end: lexer, grammar, AST and type checker.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "synpatch/grammar.hpp"
#include "synpatch/lca.hpp"

namespace synpatch::minic {

struct Type;
using TypeRef = std::shared_ptr<const Type>;

struct Type {
  enum class Kind { Int, Char, Void, Pointer, Array, Struct };
  Kind kind = Kind::Int;
  TypeRef elem;          // Pointer, Array
  int length = -1;       // Array
  std::string name;      // Struct

  bool is_integral() const { return kind == Kind::Int || kind == Kind::Char; }
  bool is_pointer_like() const { return kind == Kind::Pointer || kind == Kind::Array; }
};

TypeRef int_type();
TypeRef char_type();
TypeRef void_type();
TypeRef pointer_to(TypeRef elem);
TypeRef array_of(TypeRef elem, int length);
TypeRef struct_type(const std::string& name);
bool same_type(const Type& a, const Type& b);
/// C spelling with the declarator name placed correctly, e.g. "int a [ 4 ]".
std::string declare(const Type& t, const std::string& name);
std::string to_string(const Type& t);

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class Kind { Num, Char, Null, Var, Unary, Binary, Assign, Index, Field, Arrow, Call, Malloc };
  Kind kind = Kind::Num;
  std::string op;        // Unary/Binary operator
  long long value = 0;   // Num/Char
  std::string name;      // Var, Call, Field/Arrow member
  std::vector<ExprPtr> kids;
  SourceLoc loc;
  std::size_t token = 0;  // position of the first token
  TypeRef type;           // set by the type checker
};

struct VarDecl {
  TypeRef type;
  std::string name;
  ExprPtr init;
  bool is_const = false;
  SourceLoc loc;
  std::size_t first = 0;  // token positions, inclusive
  std::size_t last = 0;
};

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct Stmt {
  enum class Kind { Decl, Expr, If, While, For, Break, Continue, Return, Assert, Free, Block, Empty };
  Kind kind = Kind::Empty;
  std::optional<VarDecl> decl;
  ExprPtr expr;                // Expr, If/While/For condition, Return value, Assert, Free
  ExprPtr init;                // For
  ExprPtr step;                // For
  StmtPtr then_branch;         // If, loop body
  StmtPtr else_branch;
  std::vector<StmtPtr> stmts;  // Block
  SourceLoc loc;               // anchor token
  std::size_t anchor = 0;      // anchor token position
  std::size_t first = 0;
  std::size_t last = 0;
};

struct Param {
  TypeRef type;
  std::string name;
};

struct Function {
  TypeRef ret;
  std::string name;
  std::vector<Param> params;
  StmtPtr body;
  SourceLoc loc;
  std::size_t first = 0;
  std::size_t last = 0;
};

struct StructDef {
  std::string name;
  std::vector<Param> fields;
  SourceLoc loc;
  std::size_t first = 0;
  std::size_t last = 0;
};

struct TopItem {
  enum class Kind { Struct, Global, Function };
  Kind kind;
  std::size_t index;
};

struct Unit {
  Program tokens;
  std::vector<StructDef> structs;
  std::vector<VarDecl> globals;
  std::vector<Function> functions;
  std::vector<TopItem> order;

  const Function* function(std::string_view name) const;
  const StructDef* find_struct(std::string_view name) const;
};

/// Harness builtins: `__input ( k )` is the integer in slot k of the current
/// input vector, `__input_ptr ( k )` a fresh block built from slot k (or null).
inline constexpr std::string_view kInputBuiltin = "__input";
inline constexpr std::string_view kInputPtrBuiltin = "__input_ptr";

/// Tokenizes MiniC source. Tokens carry file, line and column.
Program lex(std::string_view text, std::string_view file);

std::string_view grammar_text();
const Grammar& grammar();

/// Parses and builds the AST. Throws NotRecognized when the tokens are not MiniC.
Unit parse_unit(const Program& tokens);
Unit build_unit(const ParseTree& tree);

/// Resolves names and annotates expression types. Throws TypeError.
void type_check(Unit& unit);

/// Number of memory cells a value of this type occupies.
int cell_count(const Type& t, const Unit& unit);
/// Cell offset and type of a struct field.
std::pair<int, TypeRef> field_offset(const StructDef& s, const std::string& field, const Unit& unit);

/// Source text with one output line per original (file, line), tokens
/// space-separated.
std::string render(const Program& p);

/// Patch condition: every fragment token stays directly inside the loop that
/// holds it in p. Without it a minimal patch may bind a break to a borrowed
/// outer loop, or move a statement into a neighbouring loop whose body has
/// the same shape.
PatchCheck keep_loops(const Fragment& s);

/// s plus the keyword of the innermost loop around each of its tokens.
Fragment with_loop_heads(const Program& p, const Fragment& s);

/// lca_patch with MiniC's grammar on with_loop_heads(p, s), checked by
/// keep_loops. `added` is relative to s.
PatchResult patch(const Program& p, const Fragment& s, LcaOptions opts = {});

/// Identifiers that are MiniC keywords.
bool is_keyword(std::string_view word);

}  // namespace synpatch::minic
