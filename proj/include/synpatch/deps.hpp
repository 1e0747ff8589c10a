#pragma once

// Dependency resolution: a definition database over the project, pulling of
// the definitions a patched fragment needs, and input-variable detection.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synpatch/grammar.hpp"
#include "synpatch/minic.hpp"

namespace synpatch::deps {

enum class DefKind { Var, Func, Type };
std::string_view to_string(DefKind k);

struct Definition {
  std::string name;
  DefKind kind = DefKind::Var;
  std::string file;
  std::size_t ordinal = 0;  // project order: file listing order, then position
  Program tokens;           // top-level defining tokens with original locations; empty for locals
  std::string scope;        // "" at file scope, else the enclosing function
  int depth = 0;            // 0 file scope, 1 parameters, 2+ nested blocks
  minic::TypeRef type;      // Var: declared type; Func: return type
  bool is_const = false;
  std::optional<long long> value;  // constant initializer of a variable never assigned elsewhere
  SourceLoc loc;
};

/// Files in build order, each tokenized.
using Project = std::vector<std::pair<std::string, Program>>;

class DefDb {
 public:
  const std::vector<Definition>& entries() const { return entries_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// File-scope definition, or nullptr.
  const Definition* global(std::string_view name, DefKind kind) const;
  /// Parameters and locals named `name` inside function `function`.
  std::vector<const Definition*> locals(std::string_view function, std::string_view name) const;
  /// Struct definitions with a field of this name.
  std::vector<const Definition*> structs_with_field(std::string_view field) const;

  void add(Definition d);
  void warn(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  std::vector<Definition> entries_;
  std::vector<std::string> warnings_;
};

/// Indexes global variables, functions, struct types, and the parameters and
/// locals of every function. Top-level items are split on `;` and closing
/// braces at nesting depth 0 and parsed one by one, so an item that does not
/// parse is skipped with a warning instead of hiding the rest of the file.
/// A second definition of the same (name, kind, scope) replaces the first
/// and records a DuplicateDefinition warning.
DefDb index_definitions(const Project& project);

/// Reads a manifest (one source path per line, `#` comments, paths relative
/// to the manifest) and lexes every file. Throws IoError.
using Lexer = Program (*)(std::string_view text, std::string_view file);
Project read_project(const std::string& manifest_path, Lexer lexer = &minic::lex);

struct InputVar {
  enum class Origin { Free, Local, Param };
  std::string name;
  minic::TypeRef type;
  Origin origin = Origin::Free;
  std::string function;            // owning function for Local and Param, using function for Free
  std::size_t decl_end = 0;        // Local: token index of the declaration's `;`
  std::optional<long long> known;  // value fixed before the fragment in the original program
};

std::string_view to_string(InputVar::Origin o);

struct CompilableUnit {
  Program tokens;                      // preamble, free-variable declarations, patched code
  minic::Unit unit;                    // parsed and type-checked
  std::vector<std::string> preamble;   // pulled definitions in project order, "kind name"
  std::size_t patched_begin = 0;       // token index where the patched code starts
  std::vector<std::string> patched_functions;
  std::vector<InputVar> input_vars;
  std::vector<std::string> declared;   // free names given a declaration; inputs among them are in input_vars
  std::string entry;                   // function the harness calls
  std::vector<std::string> notes;
};

/// Builds a compilable unit from the patched program(s) of one warning.
/// Definitions are pulled transitively and emitted in project order;
/// patched functions shadow their originals. Remaining free variables are
/// declared at file scope with types taken from the original function's
/// declaration, else from their uses, else int (with a note). Names in
/// ALL_CAPS are constants and never become inputs. `entry` defaults to the
/// first patched function. Throws UnresolvableSymbol or TypeError.
CompilableUnit resolve_dependencies(const std::vector<Program>& patched, const DefDb& db,
                                    const std::string& entry = "");

/// Variables with a use not preceded on every path by a definition, in the
/// patched functions: free variables, locals declared without initializer,
/// and parameters of the entry function. Ordered by first appearance.
std::vector<InputVar> find_input_vars(const CompilableUnit& unit, const DefDb* db = nullptr);

}  // namespace synpatch::deps
