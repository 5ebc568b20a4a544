#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace manydsl {

enum class ErrorKind {
  Syntax,
  UnboundSugar,
  UnboundName,
  UnboundStageName,
  ApplyNonClosure,
  ArityMismatch,
  PrimType,
  StepBudgetExceeded,
  ReturnNeverCalled,
  ReturnCalledTwice,
  NameNotFound,
  NegativeArity,
  NonClosureSubject,
  ZeroArityLeft,
  UnfilledContinuations,
  DuplicateRuleSignatureMismatch,
  KindMismatch,
  UnknownSignatureQuery,
  UnresolvableDefault,
  EntryRuleWouldChange,
  Grammar,
  Ll1Conflict,
  Lex,
  UnexpectedToken,
  UnknownLanguage,
  UnknownEntry,
  Link,
  Action,
  ProgramExit,
};

std::string_view to_string(ErrorKind kind);

/// Position inside a source text. Line and column are 1-based; zero means unknown.
struct SourcePos {
  std::size_t offset = 0;
  std::size_t line = 0;
  std::size_t column = 0;

  [[nodiscard]] bool known() const { return line != 0; }
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, SourcePos pos = {});

  [[nodiscard]] ErrorKind kind() const { return kind_; }
  [[nodiscard]] const SourcePos& pos() const { return pos_; }
  [[nodiscard]] const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  SourcePos pos_;
  std::string detail_;
};

/// Raised by the `exit` builtin; carries the process exit status.
class ProgramExit : public Error {
 public:
  explicit ProgramExit(int status);
  [[nodiscard]] int status() const { return status_; }

 private:
  int status_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message, SourcePos pos = {});

}  // namespace manydsl
