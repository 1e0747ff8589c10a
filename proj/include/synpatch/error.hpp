#pragma once

#include <stdexcept>
#include <string>

namespace synpatch {

enum class Errc {
  SyntaxError,
  UndefinedNonterminal,
  NoStartSymbol,
  UnknownNonterminal,
  NotDistinct,
  EmptyFragment,
  NotRecognized,
  NoDerivation,
  NoSolution,
  BoundExceeded,
  UnresolvedLocation,
  UnsupportedConstruct,
  MappingFailure,
  UnresolvableSymbol,
  DuplicateDefinition,
  UntypeableInput,
  HarnessError,
  InterpreterBug,
  TypeError,
  ConfigError,
  IoError,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace synpatch
