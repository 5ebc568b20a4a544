#pragma once

// Syntax-directed execution: lazy per-language lexing, table-driven parsing
// with attribute threading, actions run as they are reached, and complete
// language switches at foreign nonterminals.

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "manydsl/eval.hpp"
#include "manydsl/grammar.hpp"
#include "manydsl/ll1.hpp"

namespace manydsl {

struct Token {
  std::string kind;  ///< terminal key; `$` at end of input
  std::string lexeme;
  TermPtr value;
  std::size_t start = 0;
  std::size_t end = 0;
};

struct LexerDef {
  std::set<std::string> literals;
  std::set<std::string> classes;

  static LexerDef for_grammar(const Grammar& g);
  /// Longest match at `offset` after whitespace and `//` comments; literals win ties.
  Token lex(std::string_view text, std::size_t offset) const;
};

/// A language implemented by host code instead of a grammar.
struct NativeLanguage {
  NameList entries;
  struct Result {
    std::vector<TermPtr> values;
    std::size_t end = 0;
  };
  std::function<Result(std::string_view text, std::size_t offset, const std::string& entry,
                       const std::vector<TermPtr>& args, NameSupply& names)>
      parse;
};

/// The core calculus as a language: entries `Lambda` and `Term` read one core term.
NativeLanguage core_language();

struct Language {
  std::string name;
  Grammar grammar;
  ParseTable table;
  LexerDef lexer;
  std::optional<NativeLanguage> native;

  bool has_entry(const std::string& entry) const;
};

class LanguageRegistry {
 public:
  /// Validates and registers; re-registering a name replaces it and yields a warning.
  std::vector<std::string> register_language(const GrammarDecl& decl, const std::vector<Template>& templates = {});
  std::vector<std::string> register_language(const std::string& name, const Grammar& grammar);
  std::vector<std::string> register_native(const std::string& name, NativeLanguage lang);

  const Language* find(const std::string& name) const;
  /// Every foreign reference must name an entry rule of a registered language.
  void link() const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Language> languages_;
};

struct ParseOptions {
  std::vector<std::string>* trace = nullptr;  ///< tokens, actions, switches
};

class Parser {
 public:
  Parser(const LanguageRegistry& registry, Evaluator& evaluator, ParseOptions options = {});

  std::vector<TermPtr> parse(const std::string& lang, const std::string& entry, std::string_view input,
                             const std::vector<TermPtr>& args = {});

  /// Cursor after each consumed token or foreign region.
  const std::vector<std::size_t>& cursor_log() const { return cursor_log_; }

 private:
  std::vector<TermPtr> parse_rule(const Language& lang, const std::string& head, const std::vector<TermPtr>& args,
                                  bool foreign);
  std::vector<TermPtr> parse_foreign(const Language& from, const TermUse& u, const std::vector<TermPtr>& args);
  const Token& peek(const Language& lang, bool foreign);
  Token consume(const Language& lang, bool foreign);
  void advance(std::size_t to);
  void note(const std::string& line);
  SourcePos pos(std::size_t offset) const;

  const LanguageRegistry& registry_;
  Evaluator& ev_;
  ParseOptions options_;
  std::string_view input_;
  std::size_t cursor_ = 0;
  std::optional<Token> lookahead_;
  std::vector<std::size_t> cursor_log_;
};

}  // namespace manydsl
