#include <algorithm>

#include "manydsl/grammar.hpp"
#include "manydsl/syntax.hpp"

namespace manydsl {

bool TemplateArg::operator==(const TemplateArg& o) const {
  if (kind != o.kind || text != o.text || names != o.names) return false;
  if (!action || !o.action) return action == o.action;
  return *action == *o.action;
}

bool TermUse::operator==(const TermUse& o) const {
  if (kind != o.kind || name != o.name || lang != o.lang || ins != o.ins || outs != o.outs) return false;
  if (declared_ins != o.declared_ins || declared_outs != o.declared_outs || args != o.args) return false;
  if (kind == UseKind::Action) {
    if (!lambda || !o.lambda) return lambda == o.lambda;
    return alpha_equal(lambda, o.lambda);
  }
  return true;
}

bool Production::operator==(const Production& o) const {
  return head == o.head && ins == o.ins && outs == o.outs && body == o.body && entry == o.entry;
}

bool is_token_class(std::string_view name) {
  return name == "Identifier" || name == "Integer" || name == "String";
}

const Rule* Grammar::rule(std::string_view head) const {
  auto it = std::find_if(rules.begin(), rules.end(), [&](const Rule& r) { return r.head == head; });
  return it == rules.end() ? nullptr : &*it;
}

Rule* Grammar::rule(std::string_view head) {
  auto it = std::find_if(rules.begin(), rules.end(), [&](const Rule& r) { return r.head == head; });
  return it == rules.end() ? nullptr : &*it;
}

namespace use {

TermUse literal(std::string text) {
  TermUse u;
  u.kind = UseKind::Literal;
  u.name = std::move(text);
  return u;
}

TermUse token(std::string cls, OptNames outs) {
  if (!is_token_class(cls)) fail(ErrorKind::Grammar, "unknown token class '" + cls + "'");
  TermUse u;
  u.kind = UseKind::Token;
  u.name = std::move(cls);
  u.outs = std::move(outs);
  return u;
}

TermUse nonterminal(std::string name, OptNames ins, OptNames outs) {
  TermUse u;
  u.kind = UseKind::Nonterminal;
  u.name = std::move(name);
  u.ins = std::move(ins);
  u.outs = std::move(outs);
  return u;
}

TermUse foreign(std::string lang, std::string entry, OptNames ins, OptNames outs) {
  TermUse u;
  u.kind = UseKind::Foreign;
  u.lang = std::move(lang);
  u.name = std::move(entry);
  u.ins = std::move(ins);
  u.outs = std::move(outs);
  return u;
}

TermUse action(NameList ins, NameList outs, std::string_view body, NameSupply& names) {
  NameList params = ins;
  params.push_back("return");
  std::string text(body);
  text += "}";
  LambdaRead r = read_lambda_body_at(text, 0, params, "parse", names);
  if (r.end != body.size()) fail(ErrorKind::Syntax, "trailing text after action body");
  TermUse u;
  u.kind = UseKind::Action;
  u.ins = ins;
  u.outs = outs;
  u.declared_ins = std::move(ins);
  u.declared_outs = std::move(outs);
  u.lambda = r.lambda;
  std::string src;
  bool space = false;
  for (char c : body) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      space = !src.empty();
      continue;
    }
    if (space) src += ' ';
    space = false;
    src += c;
  }
  u.source = std::move(src);
  return u;
}

TermUse epsilon(OptNames ins, OptNames outs) {
  TermUse u;
  u.kind = UseKind::Epsilon;
  u.name = "epsilon";
  u.ins = std::move(ins);
  u.outs = std::move(outs);
  return u;
}

TermUse call(std::string name, std::vector<TemplateArg> args) {
  TermUse u;
  u.kind = UseKind::Call;
  u.name = std::move(name);
  u.args = std::move(args);
  return u;
}

}  // namespace use

GrammarBuilder::GrammarBuilder(std::string name) { decl_.name = std::move(name); }

GrammarBuilder& GrammarBuilder::add_production(std::string head, OptNames ins, OptNames outs,
                                               std::vector<TermUse> body) {
  for (const auto& u : body) {
    if (u.kind == UseKind::Foreign) decl_.foreign.emplace(u.lang, u.name);
  }
  Production p;
  p.head = std::move(head);
  p.ins = std::move(ins);
  p.outs = std::move(outs);
  p.body = std::move(body);
  decl_.productions.push_back(std::move(p));
  return *this;
}

GrammarBuilder& GrammarBuilder::mark_entry(const std::string& head) {
  if (std::none_of(decl_.productions.begin(), decl_.productions.end(),
                   [&](const Production& p) { return p.head == head; })) {
    fail(ErrorKind::Grammar, "mark_entry: no rule named '" + head + "'");
  }
  if (std::find(decl_.entries.begin(), decl_.entries.end(), head) == decl_.entries.end()) {
    decl_.entries.push_back(head);
  }
  for (auto& p : decl_.productions) {
    if (p.head == head) p.entry = true;
  }
  return *this;
}

GrammarBuilder& GrammarBuilder::foreign_ref(const std::string& lang, const std::string& entry) {
  decl_.foreign.emplace(lang, entry);
  return *this;
}

GrammarDecl GrammarBuilder::build() const { return decl_; }

}  // namespace manydsl
