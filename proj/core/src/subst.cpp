#include <optional>

#include "manydsl/eval.hpp"
#include "manydsl/fragment.hpp"

namespace manydsl {

namespace {

class Subst {
 public:
  Subst(const StageBindings& map, NameSupply& names) : map_(map), names_(names) {}

  TermPtr term(const TermPtr& t) {
    return std::visit(
        [&](const auto& n) -> TermPtr {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, Lambda>) {
            Scope scope(*this);
            std::vector<Param> params;
            params.reserve(n.params.size());
            for (const auto& p : n.params) params.push_back({scope.rename(p.name), p.packed});
            std::string stage = scope.rename(n.stage);
            return mk::lambda(std::move(params), std::move(stage), body(n.body));
          } else if constexpr (std::is_same_v<N, Var>) {
            const TermPtr* r = lookup(n.name);
            return r ? *r : t;
          } else if constexpr (std::is_same_v<N, Splice>) {
            auto items = splice_items(n.name, t);
            if (items.size() == 1) return items.front();
            return mk::tuple(std::move(items));
          } else if constexpr (std::is_same_v<N, TupleLit>) {
            return mk::tuple(list(n.elements));
          } else if constexpr (std::is_same_v<N, FragmentRef>) {
            auto f = std::make_shared<Fragment>(*n.fragment);
            f->subject = term(n.fragment->subject);
            return mk::fragment(std::move(f));
          } else if constexpr (std::is_same_v<N, EnvLit>) {
            EnvEntries entries;
            entries.reserve(n.entries->size());
            for (const auto& [k, v] : *n.entries) entries.emplace_back(k, term(v));
            return mk::env(std::move(entries));
          } else if constexpr (std::is_same_v<N, RecRef>) {
            Scope scope(*this);
            std::string name = scope.rename(n.name);
            return mk::rec(std::move(name), term(n.value));
          } else {
            return t;
          }
        },
        t->node);
  }

  BodyPtr body(const BodyPtr& b) {
    StageExprPtr st = stage(b->stage);
    return std::visit(
        [&](const auto& f) -> BodyPtr {
          using F = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<F, Apply>) {
            return mk::apply(st, term(f.callee), list(f.args));
          } else if constexpr (std::is_same_v<F, Fix>) {
            Scope scope(*this);
            std::string name = scope.rename(f.name);
            TermPtr value = term(f.value);
            std::string stage_param = scope.rename(f.stage);
            return mk::fix(st, std::move(stage_param), std::move(name), std::move(value), body(f.rest));
          } else if constexpr (std::is_same_v<F, Prim>) {
            PrimPtr expr = prim(f.expr);
            Scope scope(*this);
            std::vector<std::string> binds;
            for (const auto& n : f.binds) binds.push_back(scope.rename(n));
            std::string stage_param = scope.rename(f.stage);
            return mk::prim(st, std::move(expr), std::move(binds), std::move(stage_param), body(f.rest));
          } else {
            return mk::halt(st);
          }
        },
        b->form);
  }

 private:
  // Binder renamings shadow the incoming map and are undone on scope exit.
  class Scope {
   public:
    explicit Scope(Subst& s) : s_(s) {}
    ~Scope() {
      for (auto it = saved_.rbegin(); it != saved_.rend(); ++it) {
        if (it->second) {
          s_.local_[it->first] = *it->second;
        } else {
          s_.local_.erase(it->first);
        }
      }
    }
    std::string rename(const std::string& name) {
      auto found = s_.local_.find(name);
      saved_.emplace_back(name, found == s_.local_.end() ? std::nullopt : std::optional<TermPtr>(found->second));
      std::string fresh = s_.names_.fresh(name);
      s_.local_[name] = mk::var(fresh);
      return fresh;
    }

   private:
    Subst& s_;
    std::vector<std::pair<std::string, std::optional<TermPtr>>> saved_;
  };

  const TermPtr* lookup(const std::string& name) const {
    if (auto it = local_.find(name); it != local_.end()) return &it->second;
    if (auto it = map_.find(name); it != map_.end()) return &it->second;
    return nullptr;
  }

  std::vector<TermPtr> splice_items(const std::string& name, const TermPtr& original) {
    const TermPtr* r = lookup(name);
    if (!r) return {original};
    if (const auto* tup = (*r)->as<TupleLit>()) return tup->elements;
    if (const auto* v = (*r)->as<Var>()) return {mk::splice(v->name)};
    return {*r};
  }

  std::vector<TermPtr> list(const std::vector<TermPtr>& items) {
    std::vector<TermPtr> out;
    out.reserve(items.size());
    for (const auto& item : items) {
      if (const auto* sp = item->as<Splice>()) {
        for (auto& e : splice_items(sp->name, item)) out.push_back(std::move(e));
      } else {
        out.push_back(term(item));
      }
    }
    return out;
  }

  StageExprPtr stage(const StageExprPtr& s) {
    switch (s->op) {
      case StageExpr::Op::Const: return s;
      case StageExpr::Op::Ref: {
        const TermPtr* r = lookup(s->name);
        if (!r) return s;
        if (const auto* v = (*r)->as<Var>()) return StageExpr::ref(v->name);
        if (const auto* sp = (*r)->as<Splice>()) return StageExpr::ref(sp->name);
        if (const auto* lit = (*r)->as<StageLit>()) return StageExpr::constant(lit->value);
        return StageExpr::constant(Stage::Top);
      }
      case StageExpr::Op::Not: {
        StageExprPtr e = stage(s->lhs);
        if (e->op == StageExpr::Op::Const) return StageExpr::constant(e->value == Stage::Top ? Stage::Bottom : Stage::Top);
        return StageExpr::negate(e);
      }
      case StageExpr::Op::And:
      case StageExpr::Op::Or: {
        // a constant operand either decides the result or drops out
        StageExprPtr l = stage(s->lhs);
        StageExprPtr r = stage(s->rhs);
        Stage absorbing = s->op == StageExpr::Op::And ? Stage::Bottom : Stage::Top;
        for (const auto* side : {&l, &r}) {
          if ((*side)->op == StageExpr::Op::Const && (*side)->value == absorbing) return StageExpr::constant(absorbing);
        }
        if (l->op == StageExpr::Op::Const) return r;
        if (r->op == StageExpr::Op::Const) return l;
        return s->op == StageExpr::Op::And ? StageExpr::conj(l, r) : StageExpr::disj(l, r);
      }
    }
    return s;
  }

  PrimPtr prim(const PrimPtr& p) {
    return std::visit(
        [&](const auto& n) -> PrimPtr {
          using N = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<N, PrimLeaf>) {
            return mk::leaf(term(n.term));
          } else if constexpr (std::is_same_v<N, PrimUnary>) {
            return mk::unary(n.op, prim(n.operand));
          } else if constexpr (std::is_same_v<N, PrimBinary>) {
            return mk::binary(n.op, prim(n.lhs), prim(n.rhs));
          } else if constexpr (std::is_same_v<N, PrimCall>) {
            return mk::call(n.fn, prims(n.args));
          } else if constexpr (std::is_same_v<N, PrimMethod>) {
            return mk::method(prim(n.object), n.method, prims(n.args));
          } else {
            return mk::list(prims(n.elements));
          }
        },
        p->node);
  }

  std::vector<PrimPtr> prims(const std::vector<PrimPtr>& ps) {
    std::vector<PrimPtr> out;
    out.reserve(ps.size());
    for (const auto& p : ps) out.push_back(prim(p));
    return out;
  }

  const StageBindings& map_;
  NameSupply& names_;
  std::unordered_map<std::string, TermPtr> local_;
};

}  // namespace

TermPtr substitute(const TermPtr& term, const StageBindings& map, NameSupply& names) {
  return Subst(map, names).term(term);
}

BodyPtr substitute(const BodyPtr& body, const StageBindings& map, NameSupply& names) {
  return Subst(map, names).body(body);
}

}  // namespace manydsl
