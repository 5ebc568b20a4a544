#include "manydsl/fragment.hpp"

#include "manydsl/error.hpp"
#include "manydsl/eval.hpp"

namespace manydsl {

FragmentPtr build_fragment(long long arity, const TermPtr& subject) {
  if (arity < 0) fail(ErrorKind::NegativeArity, "fragment arity must not be negative");
  const auto* lam = subject->as<Lambda>();
  if (!lam) fail(ErrorKind::NonClosureSubject, "build expects a lambda as subject code");
  auto n = static_cast<std::size_t>(arity);
  if (n > lam->params.size()) {
    fail(ErrorKind::ArityMismatch, "arity " + std::to_string(arity) + " exceeds the subject's " +
                                       std::to_string(lam->params.size()) + " parameters");
  }
  for (std::size_t i = lam->params.size() - n; i < lam->params.size(); ++i) {
    if (lam->params[i].packed) fail(ErrorKind::ArityMismatch, "a continuation slot cannot be packed");
  }
  return std::make_shared<const Fragment>(Fragment{subject, static_cast<int>(arity)});
}

int fragment_arity(const FragmentPtr& f) { return f->arity; }

FragmentPtr merge_fragments(const FragmentPtr& f, const FragmentPtr& g, NameSupply& names) {
  if (f->arity < 1) fail(ErrorKind::ZeroArityLeft, "cannot merge into a fragment of arity 0");
  const auto& fl = std::get<Lambda>(f->subject->node);
  const auto& gl = std::get<Lambda>(g->subject->node);

  std::size_t f_fixed = fl.params.size() - static_cast<std::size_t>(f->arity);
  std::size_t g_fixed = gl.params.size() - static_cast<std::size_t>(g->arity);

  std::vector<Param> g_slots;
  StageBindings slot_map;
  for (std::size_t i = g_fixed; i < gl.params.size(); ++i) {
    g_slots.push_back({names.fresh(gl.params[i].name), false});
    slot_map[gl.params[i].name] = mk::var(g_slots.back().name);
  }
  std::vector<Param> g_params(gl.params.begin(), gl.params.begin() + static_cast<std::ptrdiff_t>(g_fixed));
  TermPtr inner = substitute(mk::lambda(std::move(g_params), gl.stage, gl.body), slot_map, names);

  std::vector<Param> params(fl.params.begin(), fl.params.begin() + static_cast<std::ptrdiff_t>(f_fixed));
  params.insert(params.end(), g_slots.begin(), g_slots.end());
  params.insert(params.end(), fl.params.begin() + static_cast<std::ptrdiff_t>(f_fixed) + 1, fl.params.end());

  BodyPtr body = substitute(fl.body, {{fl.params[f_fixed].name, inner}}, names);
  return std::make_shared<const Fragment>(
      Fragment{mk::lambda(std::move(params), fl.stage, std::move(body)), f->arity + g->arity - 1});
}

TermPtr finalize_fragment(const FragmentPtr& f, Evaluator& ev) {
  if (f->arity != 0) {
    fail(ErrorKind::UnfilledContinuations,
         "finalize needs arity 0, fragment has " + std::to_string(f->arity) + " unfilled continuations");
  }
  NameSupply& names = ev.names();
  std::string args = names.fresh("args");
  std::string ft = names.fresh("ft");
  BodyPtr call = mk::apply(StageExpr::constant(Stage::Top), mk::fragment(f),
                           {mk::stage(Stage::Top), mk::var(ft), mk::splice(args)});
  TermPtr program = mk::lambda({{args, true}}, ft, call);
  ev.mark("finalize begin");
  TermPtr residual = ev.run_to_normal(program);
  ev.mark("finalize end");
  return residual;
}

}  // namespace manydsl
