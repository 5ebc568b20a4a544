#include "manydsl/error.hpp"

namespace manydsl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnboundSugar: return "UnboundSugar";
    case ErrorKind::UnboundName: return "UnboundName";
    case ErrorKind::UnboundStageName: return "UnboundStageName";
    case ErrorKind::ApplyNonClosure: return "ApplyNonClosure";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::PrimType: return "PrimTypeError";
    case ErrorKind::StepBudgetExceeded: return "StepBudgetExceeded";
    case ErrorKind::ReturnNeverCalled: return "ReturnNeverCalled";
    case ErrorKind::ReturnCalledTwice: return "ReturnCalledTwice";
    case ErrorKind::NameNotFound: return "NameNotFound";
    case ErrorKind::NegativeArity: return "NegativeArity";
    case ErrorKind::NonClosureSubject: return "NonClosureSubject";
    case ErrorKind::ZeroArityLeft: return "ZeroArityLeft";
    case ErrorKind::UnfilledContinuations: return "UnfilledContinuations";
    case ErrorKind::DuplicateRuleSignatureMismatch: return "DuplicateRuleSignatureMismatch";
    case ErrorKind::KindMismatch: return "KindMismatch";
    case ErrorKind::UnknownSignatureQuery: return "UnknownSignatureQuery";
    case ErrorKind::UnresolvableDefault: return "UnresolvableDefault";
    case ErrorKind::EntryRuleWouldChange: return "EntryRuleWouldChange";
    case ErrorKind::Grammar: return "GrammarError";
    case ErrorKind::Ll1Conflict: return "Ll1Conflict";
    case ErrorKind::Lex: return "LexError";
    case ErrorKind::UnexpectedToken: return "UnexpectedToken";
    case ErrorKind::UnknownLanguage: return "UnknownLanguage";
    case ErrorKind::UnknownEntry: return "UnknownEntry";
    case ErrorKind::Link: return "LinkError";
    case ErrorKind::Action: return "ActionError";
    case ErrorKind::ProgramExit: return "ProgramExit";
  }
  return "Error";
}

namespace {

std::string format(ErrorKind kind, const std::string& message, const SourcePos& pos) {
  std::string out(to_string(kind));
  if (pos.known()) {
    out += " at " + std::to_string(pos.line) + ":" + std::to_string(pos.column);
  }
  out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, SourcePos pos)
    : std::runtime_error(format(kind, message, pos)), kind_(kind), pos_(pos), detail_(message) {}

ProgramExit::ProgramExit(int status)
    : Error(ErrorKind::ProgramExit, "program exited with status " + std::to_string(status)),
      status_(status) {}

void fail(ErrorKind kind, const std::string& message, SourcePos pos) {
  throw Error(kind, message, pos);
}

}  // namespace manydsl
