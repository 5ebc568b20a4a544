#include "manydsl/runtime.hpp"

#include <algorithm>
#include <cctype>

#include "manydsl/syntax.hpp"

namespace manydsl {

namespace {

SourcePos position(std::string_view text, std::size_t offset) {
  SourcePos p{offset, 1, 1};
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string values_text(const std::vector<TermPtr>& vs) {
  std::string s = "[";
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) s += ",";
    s += print_value(vs[i]);
  }
  return s + "]";
}

}  // namespace

// ---------------------------------------------------------------------------
// lexer

LexerDef LexerDef::for_grammar(const Grammar& g) {
  LexerDef d;
  for (const auto& r : g.rules) {
    for (const auto& p : r.productions) {
      for (const auto& u : p.body) {
        if (u.kind == UseKind::Literal) d.literals.insert(u.name);
        if (u.kind == UseKind::Token) d.classes.insert(u.name);
      }
    }
  }
  return d;
}

Token LexerDef::lex(std::string_view text, std::size_t offset) const {
  std::size_t i = offset;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    } else if (text.substr(i).starts_with("//")) {
      while (i < text.size() && text[i] != '\n') ++i;
    } else {
      break;
    }
  }
  Token t;
  t.start = t.end = i;
  if (i >= text.size()) {
    t.kind = kEndOfInput;
    return t;
  }
  std::size_t best = 0;
  for (const auto& lit : literals) {
    if (lit.size() > best && text.substr(i).starts_with(lit)) {
      best = lit.size();
      t.kind = "\"" + lit + "\"";
    }
  }
  auto offer = [&](std::size_t len, const char* cls) {
    if (len > best && classes.count(cls)) {
      best = len;
      t.kind = cls;
    }
  };
  if (ident_start(text[i])) {
    std::size_t j = i;
    while (j < text.size() && ident_char(text[j])) ++j;
    offer(j - i, "Identifier");
  }
  if (digit(text[i])) {
    std::size_t j = i;
    while (j < text.size() && digit(text[j])) ++j;
    offer(j - i, "Integer");
  }
  if (text[i] == '"') {
    std::size_t j = i + 1;
    while (j < text.size() && text[j] != '"') j += text[j] == '\\' ? 2 : 1;
    if (j < text.size()) offer(j + 1 - i, "String");
  }
  if (best == 0) {
    fail(ErrorKind::Lex, "no token matches at '" + std::string(text.substr(i, 12)) + "'", position(text, i));
  }
  t.end = i + best;
  t.lexeme = std::string(text.substr(i, best));
  if (t.kind == "Integer") {
    try {
      t.value = mk::integer(std::stoll(t.lexeme));
    } catch (const std::out_of_range&) {
      fail(ErrorKind::Lex, "integer literal out of range: " + t.lexeme, position(text, i));
    }
  } else if (t.kind == "String") {
    std::string s;
    for (std::size_t k = 1; k + 1 < t.lexeme.size(); ++k) {
      if (t.lexeme[k] == '\\' && k + 2 < t.lexeme.size()) ++k;
      s += t.lexeme[k];
    }
    t.value = mk::str(std::move(s));
  } else {
    t.value = mk::str(t.lexeme);
  }
  return t;
}

// ---------------------------------------------------------------------------
// languages

NativeLanguage core_language() {
  NativeLanguage lang;
  lang.entries = {"Lambda", "Term"};
  lang.parse = [](std::string_view text, std::size_t offset, const std::string& entry,
                  const std::vector<TermPtr>&, NameSupply& names) -> NativeLanguage::Result {
    TermRead r = read_core_term_at(text, offset, names);
    if (entry == "Lambda" && !r.term->as<Lambda>()) {
      fail(ErrorKind::UnexpectedToken, "expected a core lambda", position(text, offset));
    }
    return {{r.term}, r.end};
  };
  return lang;
}

bool Language::has_entry(const std::string& entry) const {
  if (native) return std::find(native->entries.begin(), native->entries.end(), entry) != native->entries.end();
  return std::find(grammar.entries.begin(), grammar.entries.end(), entry) != grammar.entries.end();
}

std::vector<std::string> LanguageRegistry::register_language(const GrammarDecl& decl,
                                                             const std::vector<Template>& templates) {
  ExpandResult r = expand_grammar(decl, templates);
  if (!r.diagnostics.empty()) {
    std::string msg = "grammar " + decl.name + " is not valid:";
    for (const auto& d : r.diagnostics) msg += "\n  " + d.message;
    fail(ErrorKind::Grammar, msg);
  }
  return register_language(decl.name, r.grammar);
}

std::vector<std::string> LanguageRegistry::register_language(const std::string& name, const Grammar& grammar) {
  Language lang;
  lang.name = name;
  lang.grammar = grammar;
  lang.table = build_table(grammar);
  if (!lang.table.ok()) {
    std::string msg = "grammar " + name + " is not LL(1):";
    for (const auto& c : lang.table.conflicts) msg += "\n  " + c.message;
    fail(ErrorKind::Ll1Conflict, msg);
  }
  auto foreign = validate_foreign_positions(grammar);
  if (!foreign.empty()) {
    std::string msg = "grammar " + name + ":";
    for (const auto& d : foreign) msg += "\n  " + d.message;
    fail(ErrorKind::Grammar, msg);
  }
  lang.lexer = LexerDef::for_grammar(grammar);
  std::vector<std::string> warnings;
  if (languages_.count(name)) warnings.push_back("language " + name + " replaced");
  languages_[name] = std::move(lang);
  return warnings;
}

std::vector<std::string> LanguageRegistry::register_native(const std::string& name, NativeLanguage native) {
  Language lang;
  lang.name = name;
  lang.grammar.name = name;
  lang.grammar.entries = native.entries;
  lang.native = std::move(native);
  std::vector<std::string> warnings;
  if (languages_.count(name)) warnings.push_back("language " + name + " replaced");
  languages_[name] = std::move(lang);
  return warnings;
}

const Language* LanguageRegistry::find(const std::string& name) const {
  auto it = languages_.find(name);
  return it == languages_.end() ? nullptr : &it->second;
}

void LanguageRegistry::link() const {
  for (const auto& [name, lang] : languages_) {
    for (const auto& [target, entry] : lang.grammar.foreign) {
      const Language* t = find(target);
      if (!t) fail(ErrorKind::Link, name + " refers to unregistered language " + target);
      if (!t->has_entry(entry)) fail(ErrorKind::Link, name + " refers to " + target + "." + entry + ", not an entry rule");
    }
  }
}

std::vector<std::string> LanguageRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, lang] : languages_) out.push_back(name);
  return out;
}

// ---------------------------------------------------------------------------
// parser

Parser::Parser(const LanguageRegistry& registry, Evaluator& evaluator, ParseOptions options)
    : registry_(registry), ev_(evaluator), options_(options) {}

void Parser::note(const std::string& line) {
  if (options_.trace) options_.trace->push_back(line);
}

SourcePos Parser::pos(std::size_t offset) const { return position(input_, offset); }

void Parser::advance(std::size_t to) {
  cursor_ = to;
  cursor_log_.push_back(to);
}

const Token& Parser::peek(const Language& lang, bool foreign) {
  if (!lookahead_) {
    try {
      lookahead_ = lang.lexer.lex(input_, cursor_);
    } catch (const Error& e) {
      // inside a foreign region, text the language cannot lex belongs to the caller
      if (!foreign || e.kind() != ErrorKind::Lex) throw;
      Token t;
      t.kind = kEndOfInput;
      t.start = t.end = e.pos().offset;
      lookahead_ = t;
    }
  }
  return *lookahead_;
}

Token Parser::consume(const Language& lang, bool foreign) {
  Token t = peek(lang, foreign);
  lookahead_.reset();
  advance(t.end);
  note("token " + t.kind + " " + t.lexeme + " @" + std::to_string(t.start));
  return t;
}

std::vector<TermPtr> Parser::parse(const std::string& lang_name, const std::string& entry, std::string_view input,
                                   const std::vector<TermPtr>& args) {
  registry_.link();
  const Language* lang = registry_.find(lang_name);
  if (!lang) fail(ErrorKind::UnknownLanguage, "no language named " + lang_name);
  if (!lang->has_entry(entry)) fail(ErrorKind::UnknownEntry, entry + " is not an entry rule of " + lang_name);
  input_ = input;
  cursor_ = 0;
  lookahead_.reset();
  cursor_log_.clear();

  std::vector<TermPtr> out;
  if (lang->native) {
    auto r = lang->native->parse(input_, 0, entry, args, ev_.names());
    advance(r.end);
    out = std::move(r.values);
    lookahead_ = lang->lexer.lex(input_, cursor_);
  } else {
    out = parse_rule(*lang, entry, args, false);
  }
  const Token& last = lang->native ? *lookahead_ : peek(*lang, false);
  if (last.kind != kEndOfInput) {
    fail(ErrorKind::UnexpectedToken, "expected end of input, found " + last.kind, pos(last.start));
  }
  return out;
}

std::vector<TermPtr> Parser::parse_rule(const Language& lang, const std::string& head,
                                        const std::vector<TermPtr>& args, bool foreign) {
  const Rule* rule = lang.grammar.rule(head);
  if (!rule) fail(ErrorKind::Grammar, "no rule " + head + " in " + lang.name);
  if (args.size() != rule->ins.size()) {
    fail(ErrorKind::ArityMismatch, head + " takes " + std::to_string(rule->ins.size()) + " arguments, given " +
                                       std::to_string(args.size()));
  }

  const Production* prod = nullptr;
  if (rule->productions.size() == 1) {
    prod = &rule->productions.front();
  } else {
    const Token& t = peek(lang, foreign);
    const std::string* id = lang.table.lookup(head, t.kind);
    if (!id && foreign) id = lang.table.lookup(head, kEndOfInput);
    if (!id) {
      std::vector<std::string> expected;
      for (const auto& [key, pid] : lang.table.cells) {
        if (key.first == head) expected.push_back(key.second);
      }
      std::sort(expected.begin(), expected.end());
      std::string list;
      for (const auto& e : expected) list += (list.empty() ? "" : ", ") + e;
      fail(ErrorKind::UnexpectedToken, "unexpected " + (t.kind == kEndOfInput ? std::string("end of input") : t.kind) +
                                           " in " + head + "; expected one of " + list,
           pos(t.start));
    }
    for (const auto& p : rule->productions) {
      if (p.id == *id) prod = &p;
    }
  }

  std::map<std::string, TermPtr> env;
  for (std::size_t i = 0; i < args.size(); ++i) env[rule->ins[i]] = args[i];
  auto fetch = [&](const OptNames& names, const TermUse& u) {
    std::vector<TermPtr> vs;
    for (const auto& n : names.value_or(NameList{})) {
      auto it = env.find(n);
      if (it == env.end()) fail(ErrorKind::UnboundName, "attribute '" + n + "' has no value", u.pos);
      vs.push_back(it->second);
    }
    return vs;
  };
  auto bind = [&](const OptNames& names, const std::vector<TermPtr>& vs, const TermUse& u) {
    NameList ns = names.value_or(NameList{});
    if (ns.size() != vs.size()) {
      fail(ErrorKind::Action, prod->id + ": " + std::to_string(vs.size()) + " values for " +
                                  std::to_string(ns.size()) + " outputs",
           u.pos);
    }
    for (std::size_t i = 0; i < ns.size(); ++i) env[ns[i]] = vs[i];
  };

  for (const auto& u : prod->body) {
    switch (u.kind) {
      case UseKind::Literal: {
        const Token& t = peek(lang, foreign);
        std::string want = terminal_key(u);
        if (t.kind != want) {
          fail(ErrorKind::UnexpectedToken,
               "expected " + want + ", found " + (t.kind == kEndOfInput ? std::string("end of input") : t.kind),
               pos(t.start));
        }
        consume(lang, foreign);
        break;
      }
      case UseKind::Token: {
        const Token& t = peek(lang, foreign);
        if (t.kind != u.name) {
          fail(ErrorKind::UnexpectedToken,
               "expected " + u.name + ", found " + (t.kind == kEndOfInput ? std::string("end of input") : t.kind),
               pos(t.start));
        }
        Token got = consume(lang, foreign);
        bind(u.outs, {got.value}, u);
        break;
      }
      case UseKind::Nonterminal:
        bind(u.outs, parse_rule(lang, u.name, fetch(u.ins, u), foreign), u);
        break;
      case UseKind::Foreign:
        bind(u.outs, parse_foreign(lang, u, fetch(u.ins, u)), u);
        break;
      case UseKind::Action: {
        std::vector<TermPtr> in = fetch(u.ins, u);
        if (in.size() > u.declared_ins.size()) in.erase(in.begin(), in.end() - static_cast<std::ptrdiff_t>(u.declared_ins.size()));
        auto out = ev_.apply_value(u.lambda, in);
        note("action " + prod->id + " " + values_text(in) + " -> " + values_text(out));
        bind(u.outs, out, u);
        break;
      }
      case UseKind::Epsilon: {
        std::vector<TermPtr> in = fetch(u.ins, u);
        std::size_t n = u.outs ? u.outs->size() : 0;
        bind(u.outs, std::vector<TermPtr>(in.end() - static_cast<std::ptrdiff_t>(n), in.end()), u);
        break;
      }
      case UseKind::Call:
        fail(ErrorKind::Grammar, "unexpanded template call " + u.name, u.pos);
    }
  }
  return fetch(prod->outs, TermUse{});
}

std::vector<TermPtr> Parser::parse_foreign(const Language& from, const TermUse& u, const std::vector<TermPtr>& args) {
  const Language* to = registry_.find(u.lang);
  if (!to) fail(ErrorKind::UnknownLanguage, "no language named " + u.lang, u.pos);
  if (!to->has_entry(u.name)) fail(ErrorKind::UnknownEntry, u.name + " is not an entry rule of " + u.lang, u.pos);

  // the outer lookahead was lexed with the wrong alphabet
  lookahead_.reset();
  note("switch " + from.name + " -> " + to->name + " @" + std::to_string(cursor_));

  std::vector<TermPtr> out;
  if (to->native) {
    auto r = to->native->parse(input_, cursor_, u.name, args, ev_.names());
    advance(r.end);
    out = std::move(r.values);
  } else {
    out = parse_rule(*to, u.name, args, true);
  }
  lookahead_.reset();
  note("return " + to->name + " -> " + from.name + " @" + std::to_string(cursor_));
  return out;
}

}  // namespace manydsl
