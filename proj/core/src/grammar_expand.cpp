#include <algorithm>
#include <map>

#include "manydsl/grammar.hpp"

namespace manydsl {

namespace {

const char* kPrelude = R"(
function lassoc<elem, op, action> {
  alias |v| = |elem:out|;
  N|->(v)| ::= elem|->(v)| |(v)->|R|->(v)|;
  |(v)->|R|->(v)| ::= epsilon;
  |(v)->|R|->(v)| ::= op elem|->(r.v)| |(v,r.v)->|action|->(v)| |(v)->|R|->(v)|;
  return N;
}
function rassoc<elem, op, action> {
  alias |v| = |elem:out|;
  N|->(v)| ::= elem|->(v)| |(v)->|R|->(v)|;
  |(v)->|R|->(v)| ::= epsilon;
  |(v)->|R|->(v)| ::= op elem|->(r.v)| |(r.v)->|R|->(r.v)| |(v,r.v)->|action|->(v)|;
  return N;
}
)";

bool contains(const NameList& xs, const std::string& x) { return std::find(xs.begin(), xs.end(), x) != xs.end(); }

// Signature of a rule as written in the unexpanded grammar; absent lists count as empty.
std::pair<NameList, NameList> declared_signature(const GrammarDecl& g, const std::string& head) {
  NameList ins;
  NameList outs;
  for (const auto& p : g.productions) {
    if (p.head != head) continue;
    if (p.ins && ins.empty()) ins = *p.ins;
    if (p.outs && outs.empty()) outs = *p.outs;
  }
  return {ins, outs};
}

class Instantiation {
 public:
  Instantiation(const Template& t, const std::vector<TemplateArg>& args, const GrammarDecl& context,
                std::set<std::string>& taken, const std::string& site)
      : t_(t), context_(context) {
    if (args.size() != t.params.size()) {
      fail(ErrorKind::KindMismatch, "template '" + t.name + "' takes " + std::to_string(t.params.size()) +
                                        " arguments, got " + std::to_string(args.size()));
    }
    for (std::size_t i = 0; i < args.size(); ++i) params_[t.params[i]] = &args[i];
    for (const auto& p : t.productions) {
      if (locals_.count(p.head)) continue;
      std::string base = p.head + "_" + site;
      std::string name = base;
      for (int k = 2; taken.count(name); ++k) name = base + "_" + std::to_string(k);
      taken.insert(name);
      locals_[p.head] = name;
    }
    for (const auto& a : t.aliases) tuples_[a.name] = alias(a);
  }

  std::vector<Production> run(std::string& result) {
    auto it = locals_.find(t_.result);
    if (it == locals_.end()) fail(ErrorKind::Grammar, "template '" + t_.name + "' returns an undefined rule");
    result = it->second;
    std::vector<Production> out;
    for (const auto& p : t_.productions) {
      Production q = p;
      q.head = locals_.at(p.head);
      q.entry = false;
      q.ins = names(p.ins);
      q.outs = names(p.outs);
      q.body.clear();
      for (const auto& u : p.body) q.body.push_back(use(u));
      out.push_back(std::move(q));
    }
    return out;
  }

 private:
  NameList alias(const AliasDef& a) {
    if (a.param.empty()) return a.names;
    auto it = params_.find(a.param);
    if (it == params_.end()) {
      fail(ErrorKind::UnknownSignatureQuery, "'" + a.param + "' is not a parameter of '" + t_.name + "'");
    }
    const TemplateArg& arg = *it->second;
    if (arg.kind != TemplateArg::Kind::Name) {
      fail(ErrorKind::KindMismatch, "signature query on '" + a.param + "', which is not bound to a grammar term");
    }
    if (is_token_class(arg.text)) return a.out ? NameList{"value"} : NameList{};
    auto [ins, outs] = declared_signature(context_, arg.text);
    return a.out ? outs : ins;
  }

  const NameList* tuple(const std::string& n) const {
    if (auto it = tuples_.find(n); it != tuples_.end()) return &it->second;
    if (auto it = params_.find(n); it != params_.end() && it->second->kind == TemplateArg::Kind::Tuple) {
      return &it->second->names;
    }
    return nullptr;
  }

  OptNames names(const OptNames& in) const {
    if (!in) return in;
    NameList out;
    for (const auto& n : *in) {
      auto dot = n.find('.');
      if (dot == std::string::npos) {
        if (const NameList* t = tuple(n)) {
          out.insert(out.end(), t->begin(), t->end());
        } else {
          out.push_back(n);
        }
        continue;
      }
      std::string prefix = n.substr(0, dot);
      std::string rest = n.substr(dot + 1);
      if (const NameList* t = tuple(rest)) {
        for (const auto& x : *t) out.push_back(prefix + "_" + x);
      } else {
        out.push_back(prefix + "_" + rest);
      }
    }
    return out;
  }

  TermUse use(const TermUse& u) const {
    TermUse r = u;
    r.ins = names(u.ins);
    r.outs = names(u.outs);
    if (u.kind == UseKind::Call) fail(ErrorKind::Grammar, "templates cannot call templates", u.pos);
    if (u.kind != UseKind::Nonterminal) return r;
    if (auto it = locals_.find(u.name); it != locals_.end()) {
      r.name = it->second;
      return r;
    }
    auto it = params_.find(u.name);
    if (it == params_.end()) return r;
    const TemplateArg& arg = *it->second;
    switch (arg.kind) {
      case TemplateArg::Kind::Name:
        r.name = arg.text;
        if (is_token_class(arg.text)) {
          if (r.ins && !r.ins->empty()) fail(ErrorKind::KindMismatch, "token '" + arg.text + "' takes no inputs", u.pos);
          r.kind = UseKind::Token;
          r.ins = std::nullopt;
        }
        return r;
      case TemplateArg::Kind::Literal:
        if ((r.ins && !r.ins->empty()) || (r.outs && !r.outs->empty())) {
          fail(ErrorKind::KindMismatch, "literal \"" + arg.text + "\" bound to '" + u.name + "' used with attributes",
               u.pos);
        }
        return use::literal(arg.text);
      case TemplateArg::Kind::Epsilon:
        return use::epsilon(r.ins, r.outs);
      case TemplateArg::Kind::Action: {
        TermUse a = *arg.action;
        if (r.ins) a.ins = r.ins;
        if (r.outs) a.outs = r.outs;
        return a;
      }
      case TemplateArg::Kind::Tuple:
        fail(ErrorKind::KindMismatch, "name tuple bound to '" + u.name + "' used as a grammar term", u.pos);
    }
    return r;
  }

  const Template& t_;
  const GrammarDecl& context_;
  std::map<std::string, const TemplateArg*> params_;
  std::map<std::string, std::string> locals_;
  std::map<std::string, NameList> tuples_;
};

std::string join(const NameList& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    s += xs[i];
  }
  return s;
}

std::string wrap(const NameList& ins, const std::string& core, const NameList& outs) {
  std::string s;
  if (!ins.empty()) s += "|(" + join(ins) + ")->|";
  s += core;
  if (!outs.empty()) s += "|->(" + join(outs) + ")|";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string print_use(const TermUse& u) {
  NameList ins = u.ins.value_or(NameList{});
  NameList outs = u.outs.value_or(NameList{});
  switch (u.kind) {
    case UseKind::Literal: return quote(u.name);
    case UseKind::Token:
    case UseKind::Nonterminal: return wrap(ins, u.name, outs);
    case UseKind::Foreign: return wrap(ins, "!" + u.lang + "." + u.name, outs);
    case UseKind::Epsilon: return wrap(ins, "epsilon", outs);
    case UseKind::Call: return u.name + "<...>";
    case UseKind::Action: {
      std::string code = "{ " + u.source + " }";
      if (ins == u.declared_ins && outs == u.declared_outs) {
        return "|(" + join(ins) + ")->(" + join(outs) + ")| " + code;
      }
      return "|(" + join(ins) + ")->|(" + join(u.declared_ins) + ")->(" + join(u.declared_outs) + ")| " + code +
             "|->(" + join(outs) + ")|";
    }
  }
  return {};
}

}  // namespace

const std::vector<Template>& prelude_templates() {
  static const std::vector<Template> prelude = [] {
    NameSupply names;
    return read_grammar(kPrelude, names).templates;
  }();
  return prelude;
}

std::vector<Production> instantiate(const Template& t, const std::vector<TemplateArg>& args,
                                    const GrammarDecl& context, std::set<std::string>& taken, std::string& result) {
  return Instantiation(t, args, context, taken, t.name).run(result);
}

GrammarDecl instantiate_templates(const GrammarDecl& g, const std::vector<Template>& templates) {
  std::set<std::string> taken;
  for (const auto& p : g.productions) {
    taken.insert(p.head);
    for (const auto& u : p.body) {
      if (u.kind == UseKind::Nonterminal) taken.insert(u.name);
    }
  }
  auto find = [&](const std::string& name) -> const Template* {
    for (const auto& t : templates) {
      if (t.name == name) return &t;
    }
    for (const auto& t : prelude_templates()) {
      if (t.name == name) return &t;
    }
    return nullptr;
  };

  GrammarDecl out = g;
  out.productions.clear();
  std::vector<Production> generated;
  for (const auto& p : g.productions) {
    Production q = p;
    q.body.clear();
    for (const auto& u : p.body) {
      if (u.kind != UseKind::Call) {
        q.body.push_back(u);
        continue;
      }
      const Template* t = find(u.name);
      if (!t) fail(ErrorKind::Grammar, "unknown template '" + u.name + "'", u.pos);
      std::string result;
      auto prods = Instantiation(*t, u.args, g, taken, p.head).run(result);
      generated.insert(generated.end(), prods.begin(), prods.end());
      TermUse r = use::nonterminal(result);
      r.pos = u.pos;
      if (p.body.size() == 1) {
        r.ins = p.ins;
        r.outs = p.outs;
      }
      q.body.push_back(std::move(r));
    }
    out.productions.push_back(std::move(q));
  }
  out.productions.insert(out.productions.end(), generated.begin(), generated.end());
  return out;
}

Grammar group_rules(const GrammarDecl& g) {
  Grammar out;
  out.name = g.name;
  out.foreign = g.foreign;
  for (const auto& p : g.productions) {
    Rule* r = out.rule(p.head);
    if (!r) {
      out.rules.push_back(Rule{p.head, {}, {}, {}, false});
      r = &out.rules.back();
      r->ins = p.ins.value_or(NameList{});
      r->outs = p.outs.value_or(NameList{});
    }
    if (r->ins.empty() && p.ins) r->ins = *p.ins;
    if (r->outs.empty() && p.outs) r->outs = *p.outs;
    Production q = p;
    q.id = p.head + "#" + std::to_string(r->productions.size() + 1);
    r->productions.push_back(std::move(q));
  }
  out.entries = g.entries;
  if (out.entries.empty() && !out.rules.empty()) out.entries.push_back(out.rules.front().head);
  for (const auto& e : out.entries) {
    Rule* r = out.rule(e);
    if (!r) fail(ErrorKind::Grammar, "entry rule '" + e + "' has no productions");
    r->entry = true;
  }
  for (auto& r : out.rules) {
    for (auto& p : r.productions) p.entry = r.entry;
  }
  return out;
}

std::vector<Diagnostic> check_signatures(const GrammarDecl& g) {
  std::vector<Diagnostic> out;
  std::map<std::string, const Production*> ins_first;
  std::map<std::string, const Production*> outs_first;
  for (const auto& p : g.productions) {
    if (p.ins) {
      auto [it, fresh] = ins_first.emplace(p.head, &p);
      if (!fresh && *it->second->ins != *p.ins) {
        out.push_back({"rule '" + p.head + "': input parameters (" + join(*p.ins) + ") differ from (" +
                           join(*it->second->ins) + ")",
                       p.pos});
      }
    }
    if (p.outs) {
      auto [it, fresh] = outs_first.emplace(p.head, &p);
      if (!fresh && it->second->outs->size() != p.outs->size()) {
        out.push_back({"rule '" + p.head + "': " + std::to_string(p.outs->size()) + " output values, expected " +
                           std::to_string(it->second->outs->size()),
                       p.pos});
      }
    }
  }
  return out;
}

Grammar complete_default_args(Grammar g) {
  const Grammar original = g;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t ri = 0; ri < g.rules.size(); ++ri) {
      Rule& rule = g.rules[ri];
      const Rule& orig = original.rules[ri];
      for (std::size_t pi = 0; pi < rule.productions.size(); ++pi) {
        Production& p = rule.productions[pi];
        const Production& op = orig.productions[pi];
        p.ins = rule.ins;
        if (!op.outs) p.outs = rule.outs;
        NameList defined = rule.ins;
        for (std::size_t ui = 0; ui < p.body.size(); ++ui) {
          TermUse& u = p.body[ui];
          const TermUse& ou = op.body[ui];
          switch (u.kind) {
            case UseKind::Nonterminal:
              if (const Rule* target = g.rule(u.name)) {
                if (!ou.ins) u.ins = target->ins;
                if (!ou.outs) u.outs = target->outs;
              }
              break;
            case UseKind::Token:
              u.ins = NameList{};
              if (!ou.outs) u.outs = NameList{"value"};
              break;
            default:
              if (!ou.ins) u.ins = NameList{};
              if (!ou.outs) u.outs = NameList{};
          }
          for (const auto& a : u.ins.value_or(NameList{})) {
            if (contains(defined, a)) continue;
            if (rule.entry) {
              fail(ErrorKind::EntryRuleWouldChange,
                   "entry rule '" + rule.head + "' would need input parameter '" + a + "'", u.pos);
            }
            rule.ins.push_back(a);
            defined.push_back(a);
            p.ins = rule.ins;
            changed = true;
          }
          for (const auto& o : u.outs.value_or(NameList{})) {
            if (!contains(defined, o)) defined.push_back(o);
          }
        }
        for (const auto& o : p.outs.value_or(NameList{})) {
          if (!contains(defined, o)) {
            fail(ErrorKind::UnresolvableDefault, "output '" + o + "' of " + p.head + " is never defined", p.pos);
          }
        }
      }
    }
  }
  for (auto& rule : g.rules) {
    for (auto& p : rule.productions) p.ins = rule.ins;
  }
  return g;
}

std::vector<Diagnostic> check_attributes(const Grammar& g) {
  std::vector<Diagnostic> out;
  auto count = [](const OptNames& n) { return n ? n->size() : 0; };
  for (const auto& rule : g.rules) {
    for (const auto& p : rule.productions) {
      NameList defined = p.ins.value_or(NameList{});
      for (const auto& u : p.body) {
        for (const auto& a : u.ins.value_or(NameList{})) {
          if (!contains(defined, a)) {
            out.push_back({p.id + ": '" + a + "' is used before it is defined", u.pos});
          }
        }
        if (u.kind == UseKind::Nonterminal) {
          const Rule* target = g.rule(u.name);
          if (!target) {
            out.push_back({p.id + ": unknown nonterminal '" + u.name + "'", u.pos});
          } else {
            if (count(u.ins) != target->ins.size()) {
              out.push_back({p.id + ": " + u.name + " expects " + std::to_string(target->ins.size()) +
                                 " inputs, given " + std::to_string(count(u.ins)),
                             u.pos});
            }
            if (count(u.outs) != target->outs.size()) {
              out.push_back({p.id + ": " + u.name + " returns " + std::to_string(target->outs.size()) +
                                 " values, bound " + std::to_string(count(u.outs)),
                             u.pos});
            }
          }
        } else if (u.kind == UseKind::Token && count(u.outs) > 1) {
          out.push_back({p.id + ": token " + u.name + " yields one value", u.pos});
        } else if (u.kind == UseKind::Action) {
          if (count(u.ins) < u.declared_ins.size()) {
            out.push_back({p.id + ": action takes " + std::to_string(u.declared_ins.size()) + " arguments, given " +
                               std::to_string(count(u.ins)),
                           u.pos});
          }
          if (count(u.outs) != u.declared_outs.size()) {
            out.push_back({p.id + ": action returns " + std::to_string(u.declared_outs.size()) + " values, bound " +
                               std::to_string(count(u.outs)),
                           u.pos});
          }
        } else if (u.kind == UseKind::Epsilon && count(u.outs) > count(u.ins)) {
          out.push_back({p.id + ": epsilon cannot define more values than it receives", u.pos});
        }
        for (const auto& o : u.outs.value_or(NameList{})) {
          if (!contains(defined, o)) defined.push_back(o);
        }
      }
      if (count(p.outs) != rule.outs.size()) {
        out.push_back({p.id + ": returns " + std::to_string(count(p.outs)) + " values, rule has " +
                           std::to_string(rule.outs.size()),
                       p.pos});
      }
    }
  }
  return out;
}

ExpandResult expand_grammar(const GrammarDecl& g, const std::vector<Template>& file_templates) {
  ExpandResult r;
  GrammarDecl flat = instantiate_templates(g, file_templates);
  r.diagnostics = check_signatures(flat);
  r.grammar = complete_default_args(group_rules(flat));
  auto more = check_attributes(r.grammar);
  r.diagnostics.insert(r.diagnostics.end(), more.begin(), more.end());
  return r;
}

std::string print_names(const NameList& names) { return "(" + join(names) + ")"; }

std::string print_grammar(const Grammar& g) {
  std::string out = "grammar " + g.name + " {\n";
  for (const auto& rule : g.rules) {
    for (const auto& p : rule.productions) {
      out += "  ";
      if (rule.entry) out += "entry ";
      out += wrap(p.ins.value_or(NameList{}), p.head, p.outs.value_or(NameList{})) + " ::=";
      if (p.body.empty()) out += " epsilon";
      for (const auto& u : p.body) out += " " + print_use(u);
      out += ";\n";
    }
  }
  return out + "}\n";
}

}  // namespace manydsl
