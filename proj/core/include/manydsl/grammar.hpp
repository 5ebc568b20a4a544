#pragma once

// Attributed grammars with embedded actions, foreign nonterminals and
// first-order grammar templates.
//
// A grammar file holds `function` templates and `grammar` blocks:
//
//   function lassoc<elem, op, action> {
//     alias |v| = |elem:out|;
//     N|->(v)| ::= elem|->(v)| |(v)->|R|->(v)|;
//     |(v)->|R|->(v)| ::= epsilon | op elem|->(r.v)| |(v,r.v)->|action|->(v)| |(v)->|R|->(v)|;
//     return N;
//   }
//   grammar MinusDiv {
//     entry Diff|->(v)| ::= lassoc<Quotient, "-", |(l,r)->(v)| { "l-r" (d) return d }>;
//     ...
//   }
//
// See docs/grammar-format.md for the full notation.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "manydsl/error.hpp"
#include "manydsl/term.hpp"

namespace manydsl {

using NameList = std::vector<std::string>;
using OptNames = std::optional<NameList>;  ///< nullopt: filled in by default-argument completion

enum class UseKind { Literal, Token, Nonterminal, Foreign, Action, Epsilon, Call };

struct TermUse;

struct TemplateArg {
  enum class Kind { Name, Literal, Action, Epsilon, Tuple };
  Kind kind = Kind::Name;
  std::string text;                 ///< name or literal text
  NameList names;                   ///< tuple contents
  std::shared_ptr<TermUse> action;  ///< action argument
  bool operator==(const TemplateArg& other) const;
};

struct TermUse {
  UseKind kind = UseKind::Literal;
  std::string name;  ///< literal text, token class, rule, foreign entry or template name
  std::string lang;  ///< foreign language
  OptNames ins;
  OptNames outs;
  // actions: the lambda is `(declared_ins..., return)'[parse]'`
  NameList declared_ins;
  NameList declared_outs;
  TermPtr lambda;
  std::string source;
  std::vector<TemplateArg> args;  ///< template call arguments
  SourcePos pos;

  bool operator==(const TermUse& other) const;
};

struct Production {
  std::string head;
  OptNames ins;
  OptNames outs;
  std::vector<TermUse> body;
  bool entry = false;
  std::string id;  ///< `Head#n`, assigned by expansion
  SourcePos pos;

  bool operator==(const Production& other) const;
};

struct AliasDef {
  std::string name;
  std::string param;  ///< empty for a literal tuple
  bool out = true;
  NameList names;
  bool operator==(const AliasDef&) const = default;
};

struct Template {
  std::string name;
  NameList params;
  std::vector<AliasDef> aliases;
  std::vector<Production> productions;
  std::string result;
  bool operator==(const Template&) const = default;
};

struct GrammarDecl {
  std::string name;
  std::vector<Production> productions;
  NameList entries;
  std::set<std::pair<std::string, std::string>> foreign;
  bool operator==(const GrammarDecl&) const = default;
};

struct GrammarFile {
  std::vector<Template> templates;
  std::vector<GrammarDecl> grammars;
};

/// Token classes recognised by every lexer; their uses have no inputs and one output `value`.
bool is_token_class(std::string_view name);

GrammarFile read_grammar(std::string_view text, NameSupply& names);

/// lassoc and rassoc, parameter-aware.
const std::vector<Template>& prelude_templates();

// ---------------------------------------------------------------------------
// expanded grammars

struct Rule {
  std::string head;
  NameList ins;
  NameList outs;
  std::vector<Production> productions;
  bool entry = false;
};

struct Grammar {
  std::string name;
  std::vector<Rule> rules;
  NameList entries;
  std::set<std::pair<std::string, std::string>> foreign;

  const Rule* rule(std::string_view head) const;
  Rule* rule(std::string_view head);
};

struct Diagnostic {
  std::string message;
  SourcePos pos;
};

/// Expands every template call. Instantiation names fresh rules `N_k`, `R_k`.
GrammarDecl instantiate_templates(const GrammarDecl& g, const std::vector<Template>& templates);

/// Productions of one template instantiation; `result` receives the returned rule name.
std::vector<Production> instantiate(const Template& t, const std::vector<TemplateArg>& args,
                                    const GrammarDecl& context, std::set<std::string>& taken, std::string& result);

/// Groups productions into rules and marks entry rules (the first rule when none is marked).
Grammar group_rules(const GrammarDecl& g);

/// Diagnostics for rules whose productions disagree on input names or output count.
std::vector<Diagnostic> check_signatures(const GrammarDecl& g);

/// Fills missing arguments and adds head parameters for otherwise undefined names. Idempotent.
Grammar complete_default_args(Grammar g);

/// L-attribute and use-arity diagnostics on a completed grammar.
std::vector<Diagnostic> check_attributes(const Grammar& g);

/// Full pipeline: templates, signatures, grouping, defaults, attribute checks.
struct ExpandResult {
  Grammar grammar;
  std::vector<Diagnostic> diagnostics;
};
ExpandResult expand_grammar(const GrammarDecl& g, const std::vector<Template>& file_templates);

std::string print_grammar(const Grammar& g);
std::string print_names(const NameList& names);

// ---------------------------------------------------------------------------
// builder

namespace use {
TermUse literal(std::string text);
TermUse token(std::string cls, OptNames outs = std::nullopt);
TermUse nonterminal(std::string name, OptNames ins = std::nullopt, OptNames outs = std::nullopt);
TermUse foreign(std::string lang, std::string entry, OptNames ins = std::nullopt, OptNames outs = std::nullopt);
TermUse action(NameList ins, NameList outs, std::string_view body, NameSupply& names);
TermUse epsilon(OptNames ins = std::nullopt, OptNames outs = std::nullopt);
TermUse call(std::string name, std::vector<TemplateArg> args);
}  // namespace use

class GrammarBuilder {
 public:
  explicit GrammarBuilder(std::string name);
  GrammarBuilder& add_production(std::string head, OptNames ins, OptNames outs, std::vector<TermUse> body);
  GrammarBuilder& mark_entry(const std::string& head);
  GrammarBuilder& foreign_ref(const std::string& lang, const std::string& entry);
  GrammarDecl build() const;

 private:
  GrammarDecl decl_;
};

}  // namespace manydsl
