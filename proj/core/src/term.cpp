#include "manydsl/term.hpp"

namespace manydsl {

StageExprPtr StageExpr::constant(Stage s) {
  auto e = std::make_shared<StageExpr>();
  e->op = Op::Const;
  e->value = s;
  return e;
}

StageExprPtr StageExpr::ref(std::string name) {
  auto e = std::make_shared<StageExpr>();
  e->op = Op::Ref;
  e->name = std::move(name);
  return e;
}

StageExprPtr StageExpr::conj(StageExprPtr l, StageExprPtr r) {
  auto e = std::make_shared<StageExpr>();
  e->op = Op::And;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

StageExprPtr StageExpr::disj(StageExprPtr l, StageExprPtr r) {
  auto e = std::make_shared<StageExpr>();
  e->op = Op::Or;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

StageExprPtr StageExpr::negate(StageExprPtr inner) {
  auto e = std::make_shared<StageExpr>();
  e->op = Op::Not;
  e->lhs = std::move(inner);
  return e;
}

namespace mk {

namespace {
template <typename T>
TermPtr make(T node) {
  return std::make_shared<const Term>(Term{std::move(node)});
}
template <typename T>
PrimPtr make_prim(T node) {
  return std::make_shared<const PrimNode>(PrimNode{std::move(node)});
}
}  // namespace

TermPtr lambda(std::vector<Param> params, std::string stage, BodyPtr body) {
  return make(Lambda{std::move(params), std::move(stage), std::move(body)});
}
TermPtr var(std::string name) { return make(Var{std::move(name)}); }
TermPtr integer(std::int64_t v) { return make(IntLit{v}); }
TermPtr str(std::string v) { return make(StrLit{std::move(v)}); }
TermPtr boolean(bool v) { return make(BoolLit{v}); }
TermPtr stage(Stage v) { return make(StageLit{v}); }
TermPtr tuple(std::vector<TermPtr> elements) { return make(TupleLit{std::move(elements)}); }
TermPtr splice(std::string name) { return make(Splice{std::move(name)}); }
TermPtr builtin(std::string name) { return make(BuiltinRef{std::move(name)}); }
TermPtr fragment(std::shared_ptr<const Fragment> f) { return make(FragmentRef{std::move(f)}); }
TermPtr env(EnvEntries entries) {
  return make(EnvLit{std::make_shared<const EnvEntries>(std::move(entries))});
}
TermPtr host(std::string label, HostFn fn) {
  return make(HostRef{std::move(label), std::make_shared<const HostFn>(std::move(fn))});
}
TermPtr rec(std::string name, TermPtr value) { return make(RecRef{std::move(name), std::move(value)}); }

BodyPtr apply(StageExprPtr stage, TermPtr callee, std::vector<TermPtr> args) {
  return std::make_shared<const Body>(Body{std::move(stage), Apply{std::move(callee), std::move(args)}});
}
BodyPtr fix(StageExprPtr stage, std::string stageParam, std::string name, TermPtr value, BodyPtr rest) {
  return std::make_shared<const Body>(
      Body{std::move(stage), Fix{std::move(stageParam), std::move(name), std::move(value), std::move(rest)}});
}
BodyPtr prim(StageExprPtr stage, PrimPtr expr, std::vector<std::string> binds, std::string stageParam,
             BodyPtr rest) {
  return std::make_shared<const Body>(
      Body{std::move(stage), Prim{std::move(expr), std::move(binds), std::move(stageParam), std::move(rest)}});
}
BodyPtr halt(StageExprPtr stage) { return std::make_shared<const Body>(Body{std::move(stage), Halt{}}); }

PrimPtr leaf(TermPtr t) { return make_prim(PrimLeaf{std::move(t)}); }
PrimPtr unary(char op, PrimPtr e) { return make_prim(PrimUnary{op, std::move(e)}); }
PrimPtr binary(std::string op, PrimPtr l, PrimPtr r) {
  return make_prim(PrimBinary{std::move(op), std::move(l), std::move(r)});
}
PrimPtr call(std::string fn, std::vector<PrimPtr> args) { return make_prim(PrimCall{std::move(fn), std::move(args)}); }
PrimPtr method(PrimPtr object, std::string name, std::vector<PrimPtr> args) {
  return make_prim(PrimMethod{std::move(object), std::move(name), std::move(args)});
}
PrimPtr list(std::vector<PrimPtr> elements) { return make_prim(PrimList{std::move(elements)}); }

}  // namespace mk

std::string_view base_name(std::string_view name) {
  auto hash = name.find('#');
  return hash == std::string_view::npos ? name : name.substr(0, hash);
}

std::string NameSupply::fresh(std::string_view base) {
  std::string out(base_name(base));
  if (out.empty()) out = "v";
  out += '#';
  out += std::to_string(next_++);
  return out;
}

bool is_symbolic(const TermPtr& t) { return t->is<Var>() || t->is<Splice>(); }

namespace {
std::size_t body_size(const BodyPtr& b);
}

std::size_t term_size(const TermPtr& t) {
  if (const auto* lam = t->as<Lambda>()) return 1 + body_size(lam->body);
  if (const auto* tup = t->as<TupleLit>()) {
    std::size_t n = 1;
    for (const auto& e : tup->elements) n += term_size(e);
    return n;
  }
  return 1;
}

namespace {
std::size_t body_size(const BodyPtr& b) {
  return std::visit(
      [](const auto& form) -> std::size_t {
        using F = std::decay_t<decltype(form)>;
        if constexpr (std::is_same_v<F, Apply>) {
          std::size_t n = 1 + term_size(form.callee);
          for (const auto& a : form.args) n += term_size(a);
          return n;
        } else if constexpr (std::is_same_v<F, Fix>) {
          return 1 + term_size(form.value) + body_size(form.rest);
        } else if constexpr (std::is_same_v<F, Prim>) {
          return 1 + body_size(form.rest);
        } else {
          return 1;
        }
      },
      b->form);
}
}  // namespace

}  // namespace manydsl
