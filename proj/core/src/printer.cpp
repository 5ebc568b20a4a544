#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "manydsl/fragment.hpp"
#include "manydsl/syntax.hpp"

namespace manydsl {

namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out;
}

std::string quote(std::string_view s) { return "\"" + escape(s) + "\""; }

// Collects binder names and referenced names so free names can be reserved.
class NameCensus {
 public:
  std::unordered_set<std::string> bound;
  std::unordered_set<std::string> referenced;

  void term(const TermPtr& t) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, Lambda>) {
            for (const auto& p : n.params) bound.insert(p.name);
            bound.insert(n.stage);
            body(n.body);
          } else if constexpr (std::is_same_v<N, Var> || std::is_same_v<N, Splice>) {
            referenced.insert(n.name);
          } else if constexpr (std::is_same_v<N, TupleLit>) {
            for (const auto& e : n.elements) term(e);
          } else if constexpr (std::is_same_v<N, EnvLit>) {
            for (const auto& [k, v] : *n.entries) term(v);
          } else if constexpr (std::is_same_v<N, RecRef>) {
            referenced.insert(n.name);
          }
        },
        t->node);
  }

  void stage(const StageExprPtr& s) {
    if (!s) return;
    if (s->op == StageExpr::Op::Ref) referenced.insert(s->name);
    stage(s->lhs);
    stage(s->rhs);
  }

  void prim(const PrimPtr& p) {
    std::visit(
        [&](const auto& n) {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, PrimLeaf>) {
            term(n.term);
          } else if constexpr (std::is_same_v<N, PrimUnary>) {
            prim(n.operand);
          } else if constexpr (std::is_same_v<N, PrimBinary>) {
            prim(n.lhs);
            prim(n.rhs);
          } else if constexpr (std::is_same_v<N, PrimMethod>) {
            prim(n.object);
            for (const auto& a : n.args) prim(a);
          } else if constexpr (std::is_same_v<N, PrimCall>) {
            for (const auto& a : n.args) prim(a);
          } else {
            for (const auto& a : n.elements) prim(a);
          }
        },
        p->node);
  }

  void body(const BodyPtr& b) {
    stage(b->stage);
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Apply>) {
            term(f.callee);
            for (const auto& a : f.args) term(a);
          } else if constexpr (std::is_same_v<F, Fix>) {
            bound.insert(f.name);
            bound.insert(f.stage);
            term(f.value);
            body(f.rest);
          } else if constexpr (std::is_same_v<F, Prim>) {
            prim(f.expr);
            for (const auto& n : f.binds) bound.insert(n);
            bound.insert(f.stage);
            body(f.rest);
          }
        },
        b->form);
  }
};

class Printer {
 public:
  void reserve_free(const NameCensus& census) {
    for (const auto& r : census.referenced) {
      if (!census.bound.contains(r)) used_.insert(std::string(base_name(r)));
    }
  }

  std::string term(const TermPtr& t, int indent) {
    return std::visit(
        [&](const auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, Lambda>) {
            std::string out = "(";
            for (std::size_t i = 0; i < n.params.size(); ++i) {
              if (i) out += ", ";
              if (n.params[i].packed) out += "!";
              out += declare(n.params[i].name);
            }
            out += ")'[" + declare(n.stage) + "]' {\n";
            out += pad(indent + 1) + body(n.body, indent + 1) + "\n" + pad(indent) + "}";
            return out;
          } else if constexpr (std::is_same_v<N, Var>) {
            return name(n.name);
          } else if constexpr (std::is_same_v<N, IntLit>) {
            return std::to_string(n.value);
          } else if constexpr (std::is_same_v<N, StrLit>) {
            return quote(n.value);
          } else if constexpr (std::is_same_v<N, BoolLit>) {
            return n.value ? "true" : "false";
          } else if constexpr (std::is_same_v<N, StageLit>) {
            return n.value == Stage::Top ? "'always'" : "'never'";
          } else if constexpr (std::is_same_v<N, TupleLit>) {
            std::string out = "[";
            for (std::size_t i = 0; i < n.elements.size(); ++i) {
              if (i) out += ", ";
              out += term(n.elements[i], indent);
            }
            return out + "]";
          } else if constexpr (std::is_same_v<N, Splice>) {
            return "!" + name(n.name);
          } else if constexpr (std::is_same_v<N, BuiltinRef>) {
            return n.name;
          } else if constexpr (std::is_same_v<N, FragmentRef>) {
            return "<fragment/" + std::to_string(n.fragment->arity) + ">";
          } else if constexpr (std::is_same_v<N, EnvLit>) {
            std::string out = "env{";
            for (std::size_t i = 0; i < n.entries->size(); ++i) {
              if (i) out += ", ";
              out += quote((*n.entries)[i].first) + ": " + term((*n.entries)[i].second, indent);
            }
            return out + "}";
          } else if constexpr (std::is_same_v<N, HostRef>) {
            return "<host:" + n.label + ">";
          } else {
            return name(n.name);
          }
        },
        t->node);
  }

  std::string body(const BodyPtr& b, int indent) {
    std::string out = "'@" + stage(b->stage) + ":' ";
    std::visit(
        [&](const auto& f) {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Apply>) {
            out += term(f.callee, indent);
            for (const auto& a : f.args) out += " " + term(a, indent);
          } else if constexpr (std::is_same_v<F, Prim>) {
            out += quote(prim(f.expr, 0)) + " (";
            for (std::size_t i = 0; i < f.binds.size(); ++i) {
              if (i) out += ", ";
              out += declare(f.binds[i]);
            }
            out += ")'[" + declare(f.stage) + "]'\n";
            out += pad(indent) + body(f.rest, indent);
          } else if constexpr (std::is_same_v<F, Fix>) {
            std::string x = declare(f.name);
            std::string value = term(f.value, indent);
            out += "fix '[" + declare(f.stage) + "]' " + x + " " + value + "\n";
            out += pad(indent) + body(f.rest, indent);
          } else {
            out += "halt";
          }
        },
        b->form);
    return out;
  }

  std::string stage(const StageExprPtr& s, int level = 0) {
    switch (s->op) {
      case StageExpr::Op::Const: return s->value == Stage::Top ? "always" : "never";
      case StageExpr::Op::Ref: return name(s->name);
      case StageExpr::Op::Not: return "!" + stage(s->lhs, 3);
      case StageExpr::Op::And: {
        std::string e = stage(s->lhs, 2) + " & " + stage(s->rhs, 2);
        return level > 2 ? "(" + e + ")" : e;
      }
      case StageExpr::Op::Or: {
        std::string e = stage(s->lhs, 1) + " | " + stage(s->rhs, 2);
        return level > 1 ? "(" + e + ")" : e;
      }
    }
    return "?";
  }

  std::string prim(const PrimPtr& p, int level) {
    return std::visit(
        [&](const auto& n) -> std::string {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, PrimLeaf>) {
            return prim_leaf(n.term);
          } else if constexpr (std::is_same_v<N, PrimUnary>) {
            std::string e = std::string(1, n.op) + prim(n.operand, 6);
            return level > 6 ? "(" + e + ")" : e;
          } else if constexpr (std::is_same_v<N, PrimBinary>) {
            int op_level = binary_level(n.op);
            bool non_assoc = op_level == 3;
            std::string e = prim(n.lhs, non_assoc ? op_level + 1 : op_level) + n.op + prim(n.rhs, op_level + 1);
            return level > op_level ? "(" + e + ")" : e;
          } else if constexpr (std::is_same_v<N, PrimCall>) {
            return n.fn + "(" + prim_args(n.args) + ")";
          } else if constexpr (std::is_same_v<N, PrimMethod>) {
            return prim(n.object, 7) + "." + n.method + "(" + prim_args(n.args) + ")";
          } else {
            return "[" + prim_args(n.elements) + "]";
          }
        },
        p->node);
  }

 private:
  static int binary_level(const std::string& op) {
    if (op == "||") return 1;
    if (op == "&&") return 2;
    if (op == "+" || op == "-") return 4;
    if (op == "*" || op == "/" || op == "%") return 5;
    return 3;
  }

  std::string prim_args(const std::vector<PrimPtr>& args) {
    std::string out;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i) out += ",";
      out += prim(args[i], 0);
    }
    return out;
  }

  std::string prim_leaf(const TermPtr& t) {
    if (const auto* tup = t->as<TupleLit>()) {
      std::string out = "[";
      for (std::size_t i = 0; i < tup->elements.size(); ++i) {
        if (i) out += ",";
        out += prim_leaf(tup->elements[i]);
      }
      return out + "]";
    }
    if (const auto* e = t->as<EnvLit>()) {
      std::string out = "env{";
      for (std::size_t i = 0; i < e->entries->size(); ++i) {
        if (i) out += ",";
        out += quote((*e->entries)[i].first) + ":" + prim_leaf((*e->entries)[i].second);
      }
      return out + "}";
    }
    if (const auto* i = t->as<IntLit>(); i && i->value < 0) return std::to_string(i->value);
    return term(t, 0);
  }

  static std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

  std::string declare(const std::string& internal) {
    std::string base(base_name(internal));
    std::string candidate = base;
    for (int k = 2; used_.contains(candidate); ++k) candidate = base + std::to_string(k);
    used_.insert(candidate);
    display_[internal] = candidate;
    return candidate;
  }

  std::string name(const std::string& internal) const {
    auto it = display_.find(internal);
    return it != display_.end() ? it->second : std::string(base_name(internal));
  }

  std::unordered_map<std::string, std::string> display_;
  std::unordered_set<std::string> used_;
};

// ---------------------------------------------------------------------------
// alpha equivalence

class AlphaEq {
 public:
  bool term(const TermPtr& a, const TermPtr& b) {
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using N = std::decay_t<decltype(x)>;
          const auto& y = std::get<N>(b->node);
          if constexpr (std::is_same_v<N, Lambda>) {
            if (x.params.size() != y.params.size()) return false;
            std::size_t mark = pairs_.size();
            for (std::size_t i = 0; i < x.params.size(); ++i) {
              if (x.params[i].packed != y.params[i].packed) return false;
              pairs_.emplace_back(x.params[i].name, y.params[i].name);
            }
            pairs_.emplace_back(x.stage, y.stage);
            bool ok = body(x.body, y.body);
            pairs_.resize(mark);
            return ok;
          } else if constexpr (std::is_same_v<N, Var> || std::is_same_v<N, Splice> || std::is_same_v<N, RecRef>) {
            return same_name(x.name, y.name);
          } else if constexpr (std::is_same_v<N, IntLit> || std::is_same_v<N, StrLit> ||
                               std::is_same_v<N, BoolLit> || std::is_same_v<N, StageLit>) {
            return x.value == y.value;
          } else if constexpr (std::is_same_v<N, TupleLit>) {
            return terms(x.elements, y.elements);
          } else if constexpr (std::is_same_v<N, BuiltinRef>) {
            return x.name == y.name;
          } else if constexpr (std::is_same_v<N, FragmentRef>) {
            return x.fragment == y.fragment ||
                   (x.fragment->arity == y.fragment->arity && term(x.fragment->subject, y.fragment->subject));
          } else if constexpr (std::is_same_v<N, EnvLit>) {
            if (x.entries->size() != y.entries->size()) return false;
            for (std::size_t i = 0; i < x.entries->size(); ++i) {
              if ((*x.entries)[i].first != (*y.entries)[i].first) return false;
              if (!term((*x.entries)[i].second, (*y.entries)[i].second)) return false;
            }
            return true;
          } else {
            return x.fn == y.fn;
          }
        },
        a->node);
  }

  bool body(const BodyPtr& a, const BodyPtr& b) {
    if (!stage(a->stage, b->stage)) return false;
    if (a->form.index() != b->form.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using F = std::decay_t<decltype(x)>;
          const auto& y = std::get<F>(b->form);
          if constexpr (std::is_same_v<F, Apply>) {
            return term(x.callee, y.callee) && terms(x.args, y.args);
          } else if constexpr (std::is_same_v<F, Prim>) {
            if (!prim(x.expr, y.expr) || x.binds.size() != y.binds.size()) return false;
            std::size_t mark = pairs_.size();
            for (std::size_t i = 0; i < x.binds.size(); ++i) pairs_.emplace_back(x.binds[i], y.binds[i]);
            pairs_.emplace_back(x.stage, y.stage);
            bool ok = body(x.rest, y.rest);
            pairs_.resize(mark);
            return ok;
          } else if constexpr (std::is_same_v<F, Fix>) {
            std::size_t mark = pairs_.size();
            pairs_.emplace_back(x.name, y.name);
            bool ok = term(x.value, y.value);
            pairs_.emplace_back(x.stage, y.stage);
            ok = ok && body(x.rest, y.rest);
            pairs_.resize(mark);
            return ok;
          } else {
            return true;
          }
        },
        a->form);
  }

  bool prim(const PrimPtr& a, const PrimPtr& b) {
    if (a->node.index() != b->node.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
          using N = std::decay_t<decltype(x)>;
          const auto& y = std::get<N>(b->node);
          if constexpr (std::is_same_v<N, PrimLeaf>) {
            return term(x.term, y.term);
          } else if constexpr (std::is_same_v<N, PrimUnary>) {
            return x.op == y.op && prim(x.operand, y.operand);
          } else if constexpr (std::is_same_v<N, PrimBinary>) {
            return x.op == y.op && prim(x.lhs, y.lhs) && prim(x.rhs, y.rhs);
          } else if constexpr (std::is_same_v<N, PrimCall>) {
            return x.fn == y.fn && prims(x.args, y.args);
          } else if constexpr (std::is_same_v<N, PrimMethod>) {
            return x.method == y.method && prim(x.object, y.object) && prims(x.args, y.args);
          } else {
            return prims(x.elements, y.elements);
          }
        },
        a->node);
  }

 private:
  bool terms(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!term(a[i], b[i])) return false;
    }
    return true;
  }

  bool prims(const std::vector<PrimPtr>& a, const std::vector<PrimPtr>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!prim(a[i], b[i])) return false;
    }
    return true;
  }

  bool stage(const StageExprPtr& a, const StageExprPtr& b) {
    if (a->op != b->op) return false;
    switch (a->op) {
      case StageExpr::Op::Const: return a->value == b->value;
      case StageExpr::Op::Ref: return same_name(a->name, b->name);
      case StageExpr::Op::Not: return stage(a->lhs, b->lhs);
      default: return stage(a->lhs, b->lhs) && stage(a->rhs, b->rhs);
    }
  }

  bool same_name(const std::string& a, const std::string& b) const {
    for (auto it = pairs_.rbegin(); it != pairs_.rend(); ++it) {
      bool left = it->first == a;
      bool right = it->second == b;
      if (left || right) return left && right;
    }
    return a == b;
  }

  std::vector<std::pair<std::string, std::string>> pairs_;
};

}  // namespace

std::string print_core(const TermPtr& term) {
  NameCensus census;
  census.term(term);
  Printer p;
  p.reserve_free(census);
  return p.term(term, 0);
}

std::string print_body(const BodyPtr& body) {
  NameCensus census;
  census.body(body);
  Printer p;
  p.reserve_free(census);
  return p.body(body, 0);
}

std::string print_prim(const PrimPtr& prim) {
  Printer p;
  return p.prim(prim, 0);
}

std::string print_stage(const StageExprPtr& stage) {
  Printer p;
  return p.stage(stage);
}

bool alpha_equal(const TermPtr& a, const TermPtr& b) { return AlphaEq{}.term(a, b); }
bool alpha_equal(const BodyPtr& a, const BodyPtr& b) { return AlphaEq{}.body(a, b); }

}  // namespace manydsl
