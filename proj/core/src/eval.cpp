#include "manydsl/eval.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <unordered_set>

#include "manydsl/error.hpp"
#include "manydsl/fragment.hpp"
#include "manydsl/syntax.hpp"

namespace manydsl {

Stage eval_stage(const StageExprPtr& expr, const StageBindings& bindings) {
  switch (expr->op) {
    case StageExpr::Op::Const: return expr->value;
    case StageExpr::Op::Ref: {
      auto it = bindings.find(expr->name);
      if (it == bindings.end()) fail(ErrorKind::UnboundStageName, "unbound stage name '" + expr->name + "'");
      if (const auto* lit = it->second->as<StageLit>()) return lit->value;
      return is_symbolic(it->second) ? Stage::Bottom : Stage::Top;
    }
    case StageExpr::Op::Not: return eval_stage(expr->lhs, bindings) == Stage::Top ? Stage::Bottom : Stage::Top;
    case StageExpr::Op::And:
      return eval_stage(expr->lhs, bindings) == Stage::Top && eval_stage(expr->rhs, bindings) == Stage::Top
                 ? Stage::Top
                 : Stage::Bottom;
    case StageExpr::Op::Or:
      return eval_stage(expr->lhs, bindings) == Stage::Top || eval_stage(expr->rhs, bindings) == Stage::Top
                 ? Stage::Top
                 : Stage::Bottom;
  }
  return Stage::Bottom;
}

Stage eval_stage_symbolic(const StageExprPtr& expr) {
  switch (expr->op) {
    case StageExpr::Op::Const: return expr->value;
    case StageExpr::Op::Ref: return Stage::Bottom;
    case StageExpr::Op::Not: return eval_stage_symbolic(expr->lhs) == Stage::Top ? Stage::Bottom : Stage::Top;
    case StageExpr::Op::And:
      return eval_stage_symbolic(expr->lhs) == Stage::Top && eval_stage_symbolic(expr->rhs) == Stage::Top
                 ? Stage::Top
                 : Stage::Bottom;
    case StageExpr::Op::Or:
      return eval_stage_symbolic(expr->lhs) == Stage::Top || eval_stage_symbolic(expr->rhs) == Stage::Top
                 ? Stage::Top
                 : Stage::Bottom;
  }
  return Stage::Bottom;
}

std::string print_value(const TermPtr& value) {
  if (const auto* i = value->as<IntLit>()) return std::to_string(i->value);
  if (const auto* s = value->as<StrLit>()) {
    std::string out = "\"";
    for (char c : s->value) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + "\"";
  }
  if (const auto* b = value->as<BoolLit>()) return b->value ? "true" : "false";
  if (const auto* t = value->as<TupleLit>()) {
    std::string out = "[";
    for (std::size_t k = 0; k < t->elements.size(); ++k) {
      if (k) out += ",";
      out += print_value(t->elements[k]);
    }
    return out + "]";
  }
  if (const auto* e = value->as<EnvLit>()) {
    std::string out = "[";
    for (std::size_t k = 0; k < e->entries->size(); ++k) {
      if (k) out += ",";
      out += "[" + print_value(mk::str((*e->entries)[k].first)) + "," + print_value((*e->entries)[k].second) + "]";
    }
    return out + "]";
  }
  if (const auto* f = value->as<FragmentRef>()) return "<fragment/" + std::to_string(f->fragment->arity) + ">";
  if (value->is<Lambda>()) return print_core(value);
  std::string out = print_core(value);
  return out;
}

namespace {

const TermPtr& top_literal() {
  static const TermPtr t = mk::stage(Stage::Top);
  return t;
}

StageExprPtr always() { return StageExpr::constant(Stage::Top); }

// ---------------------------------------------------------------------------
// primitive expressions

using Maybe = std::optional<TermPtr>;

[[noreturn]] void prim_error(const std::string& msg) { fail(ErrorKind::PrimType, msg); }

std::string kind_name(const TermPtr& t) {
  if (t->is<IntLit>()) return "int";
  if (t->is<StrLit>()) return "string";
  if (t->is<BoolLit>()) return "bool";
  if (t->is<TupleLit>()) return "tuple";
  if (t->is<EnvLit>()) return "env";
  if (t->is<StageLit>()) return "stage";
  if (t->is<FragmentRef>()) return "fragment";
  return "closure";
}

bool has_splice(const TupleLit& t) {
  return std::any_of(t.elements.begin(), t.elements.end(), [](const TermPtr& e) { return e->is<Splice>(); });
}

class PrimEval {
 public:
  Maybe eval(const PrimPtr& p) {
    return std::visit([&](const auto& n) -> Maybe { return node(n); }, p->node);
  }

 private:
  Maybe node(const PrimLeaf& n) {
    if (n.term->is<Splice>()) return std::nullopt;
    return n.term;
  }

  Maybe node(const PrimUnary& n) {
    auto v = concrete(n.operand);
    if (!v) return std::nullopt;
    if (n.op == '-') {
      if (const auto* i = (*v)->as<IntLit>()) return mk::integer(-i->value);
      prim_error("unary '-' expects int, got " + kind_name(*v));
    }
    if (const auto* b = (*v)->as<BoolLit>()) return mk::boolean(!b->value);
    prim_error("unary '!' expects bool, got " + kind_name(*v));
  }

  Maybe node(const PrimBinary& n) {
    auto l = concrete(n.lhs);
    auto r = concrete(n.rhs);
    if (!l || !r) return std::nullopt;
    const std::string& op = n.op;
    const auto* li = (*l)->as<IntLit>();
    const auto* ri = (*r)->as<IntLit>();
    if (op == "&&" || op == "||") {
      const auto* lb = (*l)->as<BoolLit>();
      const auto* rb = (*r)->as<BoolLit>();
      if (!lb || !rb) prim_error("'" + op + "' expects bools");
      return mk::boolean(op == "&&" ? (lb->value && rb->value) : (lb->value || rb->value));
    }
    if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") {
      if (op == "+") {
        const auto* ls = (*l)->as<StrLit>();
        const auto* rs = (*r)->as<StrLit>();
        if (ls && rs) return mk::str(ls->value + rs->value);
      }
      if (!li || !ri) prim_error("'" + op + "' expects ints, got " + kind_name(*l) + " and " + kind_name(*r));
      std::int64_t a = li->value;
      std::int64_t b = ri->value;
      if (op == "+") return mk::integer(a + b);
      if (op == "-") return mk::integer(a - b);
      if (op == "*") return mk::integer(a * b);
      if (b == 0) prim_error("division by zero");
      return mk::integer(op == "/" ? a / b : a % b);
    }
    int cmp = 0;
    if (li && ri) {
      cmp = li->value < ri->value ? -1 : (li->value > ri->value ? 1 : 0);
    } else if ((*l)->is<StrLit>() && (*r)->is<StrLit>()) {
      cmp = (*l)->as<StrLit>()->value.compare((*r)->as<StrLit>()->value);
      cmp = cmp < 0 ? -1 : (cmp > 0 ? 1 : 0);
    } else if ((*l)->is<BoolLit>() && (*r)->is<BoolLit>() && (op == "==" || op == "!=")) {
      cmp = (*l)->as<BoolLit>()->value == (*r)->as<BoolLit>()->value ? 0 : 1;
    } else if (op == "==" || op == "!=") {
      cmp = 1;
      if ((*l)->node.index() == (*r)->node.index()) cmp = alpha_equal(*l, *r) ? 0 : 1;
    } else {
      prim_error("cannot compare " + kind_name(*l) + " with " + kind_name(*r));
    }
    if (op == "==") return mk::boolean(cmp == 0);
    if (op == "!=") return mk::boolean(cmp != 0);
    if (op == "<") return mk::boolean(cmp < 0);
    if (op == ">") return mk::boolean(cmp > 0);
    if (op == "<=") return mk::boolean(cmp <= 0);
    if (op == ">=") return mk::boolean(cmp >= 0);
    prim_error("unknown operator '" + op + "'");
  }

  Maybe node(const PrimCall& n) {
    if (n.fn == "concat") {
      if (n.args.size() != 2) prim_error("concat expects 2 arguments");
      auto a = concrete(n.args[0]);
      auto b = concrete(n.args[1]);
      if (!a || !b) return std::nullopt;
      const auto* ta = (*a)->as<TupleLit>();
      const auto* tb = (*b)->as<TupleLit>();
      if (!ta || !tb) prim_error("concat expects tuples");
      if (has_splice(*ta) || has_splice(*tb)) return std::nullopt;
      std::vector<TermPtr> out = ta->elements;
      out.insert(out.end(), tb->elements.begin(), tb->elements.end());
      return mk::tuple(std::move(out));
    }
    if (n.fn == "size") {
      if (n.args.size() != 1) prim_error("size expects 1 argument");
      auto a = concrete(n.args[0]);
      if (!a) return std::nullopt;
      if (const auto* t = (*a)->as<TupleLit>()) {
        if (has_splice(*t)) return std::nullopt;
        return mk::integer(static_cast<std::int64_t>(t->elements.size()));
      }
      prim_error("size expects a tuple");
    }
    prim_error("unknown primitive function '" + n.fn + "'");
  }

  Maybe node(const PrimMethod& n) {
    auto obj = concrete(n.object);
    if (!obj) return std::nullopt;
    const auto* env = (*obj)->as<EnvLit>();
    if (!env) prim_error("method '" + n.method + "' needs an env, got " + kind_name(*obj));
    if (n.method == "insert") {
      if (n.args.size() != 2) prim_error("insert expects 2 arguments");
      auto key = concrete(n.args[0]);
      auto value = eval(n.args[1]);
      if (!key || !value) return std::nullopt;
      const auto* k = (*key)->as<StrLit>();
      if (!k) prim_error("env keys are strings");
      EnvEntries entries = *env->entries;
      auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.first == k->value; });
      if (it != entries.end()) {
        it->second = *value;
      } else {
        entries.emplace_back(k->value, *value);
      }
      return mk::env(std::move(entries));
    }
    if (n.method == "lookup") {
      if (n.args.size() != 1) prim_error("lookup expects 1 argument");
      auto key = concrete(n.args[0]);
      if (!key) return std::nullopt;
      const auto* k = (*key)->as<StrLit>();
      if (!k) prim_error("env keys are strings");
      for (const auto& [name, v] : *env->entries) {
        if (name == k->value) return v;
      }
      fail(ErrorKind::NameNotFound, "name '" + k->value + "' not found in environment");
    }
    if (n.method == "contains") {
      if (n.args.size() != 1) prim_error("contains expects 1 argument");
      auto key = concrete(n.args[0]);
      if (!key) return std::nullopt;
      const auto* k = (*key)->as<StrLit>();
      if (!k) prim_error("env keys are strings");
      bool found = std::any_of(env->entries->begin(), env->entries->end(),
                               [&](const auto& e) { return e.first == k->value; });
      return mk::boolean(found);
    }
    prim_error("unknown env method '" + n.method + "'");
  }

  Maybe node(const PrimList& n) {
    std::vector<TermPtr> out;
    for (const auto& e : n.elements) {
      auto v = eval(e);
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return mk::tuple(std::move(out));
  }

  Maybe concrete(const PrimPtr& p) {
    auto v = eval(p);
    if (!v || is_symbolic(*v)) return std::nullopt;
    return v;
  }
};

// ---------------------------------------------------------------------------
// parameter matching

struct Match {
  enum class Kind { Ok, Refine, Stuck } kind = Kind::Ok;
  StageBindings bindings;
  std::string splice;          // packed binder to refine
  std::vector<Param> refined;  // its replacement parameters
};

Match match_params(const std::vector<Param>& params, const std::vector<TermPtr>& args, NameSupply& names) {
  Match m;
  auto packed_it = std::find_if(params.begin(), params.end(), [](const Param& p) { return p.packed; });
  std::size_t n = params.size();
  std::size_t front = packed_it == params.end() ? n : static_cast<std::size_t>(packed_it - params.begin());
  bool has_pack = packed_it != params.end();

  auto arity_error = [&]() {
    fail(ErrorKind::ArityMismatch, "expected " + std::string(has_pack ? "at least " : "") +
                                       std::to_string(has_pack ? n - 1 : n) + " arguments, got " +
                                       std::to_string(args.size()));
  };
  auto refine = [&](const std::string& name, std::vector<Param> ps) {
    m.kind = Match::Kind::Refine;
    m.splice = name;
    m.refined = std::move(ps);
    return m;
  };
  auto fresh = [&](std::size_t from, std::size_t to) {
    std::vector<Param> ps;
    for (std::size_t i = from; i < to; ++i) ps.push_back({names.fresh(params[i].name), false});
    return ps;
  };

  std::size_t j = 0;
  for (std::size_t i = 0; i < front; ++i, ++j) {
    if (j >= args.size()) arity_error();
    if (const auto* sp = args[j]->as<Splice>()) {
      std::size_t rest = args.size() - j - 1;
      for (std::size_t k = j + 1; k < args.size(); ++k) {
        if (args[k]->is<Splice>()) {
          m.kind = Match::Kind::Stuck;
          return m;
        }
      }
      if (!has_pack) {
        if (n < i + rest) arity_error();
        return refine(sp->name, fresh(i, n - rest));
      }
      auto ps = fresh(i, front);
      ps.push_back({names.fresh(params[front].name), true});
      return refine(sp->name, std::move(ps));
    }
    m.bindings[params[i].name] = args[j];
  }
  if (!has_pack) {
    if (j != args.size()) arity_error();
    return m;
  }
  std::size_t e = args.size();
  for (std::size_t i = n; i-- > front + 1;) {
    if (e <= j) arity_error();
    --e;
    if (const auto* sp = args[e]->as<Splice>()) {
      std::vector<Param> ps{{names.fresh(params[front].name), true}};
      auto tail = fresh(front + 1, i + 1);
      ps.insert(ps.end(), tail.begin(), tail.end());
      return refine(sp->name, std::move(ps));
    }
    m.bindings[params[i].name] = args[e];
  }
  m.bindings[params[front].name] = mk::tuple(std::vector<TermPtr>(args.begin() + static_cast<std::ptrdiff_t>(j),
                                                                 args.begin() + static_cast<std::ptrdiff_t>(e)));
  return m;
}

// ---------------------------------------------------------------------------
// stepping

struct RefineRequest {
  std::string splice;
  std::vector<Param> params;
};

class Stepper {
 public:
  Stepper(Evaluator& ev) : ev_(ev) {}

  // One step over a root body; null when nothing ran.
  BodyPtr step(const BodyPtr& root) {
    while (true) {
      BodyPtr r = body(root);
      if (r) return r;
      if (!refine_) return nullptr;
      inert_bodies_.emplace(refine_origin_.get(), refine_origin_);
      refine_.reset();
    }
  }

  TermPtr step(const TermPtr& root) {
    while (true) {
      TermPtr r = term(root);
      if (r) return r;
      if (!refine_) return nullptr;
      inert_bodies_.emplace(refine_origin_.get(), refine_origin_);
      refine_.reset();
    }
  }

 private:
  TermPtr term(const TermPtr& t) {
    if (inert_terms_.contains(t.get())) return nullptr;
    if (const auto* lam = t->as<Lambda>()) {
      BodyPtr nb = body(lam->body);
      if (refine_) {
        auto it = std::find_if(lam->params.begin(), lam->params.end(),
                               [&](const Param& p) { return p.packed && p.name == refine_->splice; });
        if (it == lam->params.end()) return nullptr;
        return refine_lambda(*lam, it);
      }
      if (nb) return mk::lambda(lam->params, lam->stage, nb);
    } else if (const auto* tup = t->as<TupleLit>()) {
      for (std::size_t i = 0; i < tup->elements.size(); ++i) {
        TermPtr ne = term(tup->elements[i]);
        if (refine_) return nullptr;
        if (ne) {
          auto elements = tup->elements;
          elements[i] = ne;
          return mk::tuple(std::move(elements));
        }
      }
    }
    inert_terms_.emplace(t.get(), t);
    return nullptr;
  }

  TermPtr refine_lambda(const Lambda& lam, std::vector<Param>::const_iterator packed) {
    std::vector<Param> params(lam.params.begin(), packed);
    std::vector<TermPtr> items;
    for (const auto& p : refine_->params) {
      params.push_back(p);
      items.push_back(p.packed ? mk::splice(p.name) : mk::var(p.name));
    }
    params.insert(params.end(), packed + 1, lam.params.end());
    StageBindings map{{packed->name, mk::tuple(std::move(items))}};
    refine_.reset();
    return mk::lambda(std::move(params), lam.stage, substitute(lam.body, map, ev_.names()));
  }

  BodyPtr body(const BodyPtr& b) {
    if (inert_bodies_.contains(b.get())) return nullptr;
    BodyPtr child = std::visit([&](const auto& f) { return children(b, f); }, b->form);
    if (child || refine_) return child;
    if (eval_stage_symbolic(b->stage) == Stage::Top) {
      BodyPtr r = execute(b);
      if (r) return r;
      if (refine_) {
        refine_origin_ = b;
        return nullptr;
      }
    }
    inert_bodies_.emplace(b.get(), b);
    return nullptr;
  }

  BodyPtr children(const BodyPtr& b, const Apply& a) {
    if (TermPtr c = term(a.callee)) return mk::apply(b->stage, c, a.args);
    if (refine_) return nullptr;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
      TermPtr na = term(a.args[i]);
      if (refine_) return nullptr;
      if (na) {
        auto args = a.args;
        args[i] = na;
        return mk::apply(b->stage, a.callee, std::move(args));
      }
    }
    return nullptr;
  }

  BodyPtr children(const BodyPtr& b, const Fix& f) {
    if (TermPtr v = term(f.value)) return mk::fix(b->stage, f.stage, f.name, v, f.rest);
    if (refine_) return nullptr;
    if (BodyPtr r = body(f.rest)) return mk::fix(b->stage, f.stage, f.name, f.value, r);
    return nullptr;
  }

  BodyPtr children(const BodyPtr& b, const Prim& p) {
    if (BodyPtr r = body(p.rest)) return mk::prim(b->stage, p.expr, p.binds, p.stage, r);
    return nullptr;
  }

  BodyPtr children(const BodyPtr&, const Halt&) { return nullptr; }

  BodyPtr execute(const BodyPtr& b) {
    return std::visit([&](const auto& f) { return run(f); }, b->form);
  }

  BodyPtr run(const Halt&) { return nullptr; }

  BodyPtr run(const Fix& f) {
    StageBindings map{{f.name, mk::rec(f.name, f.value)}, {f.stage, top_literal()}};
    return substitute(f.rest, map, ev_.names());
  }

  BodyPtr run(const Prim& p) {
    Maybe v = PrimEval{}.eval(p.expr);
    if (!v) return nullptr;
    StageBindings map{{p.stage, top_literal()}};
    if (p.binds.size() == 1) {
      map[p.binds[0]] = *v;
    } else if (!p.binds.empty()) {
      const auto* tup = (*v)->as<TupleLit>();
      if (!tup || tup->elements.size() != p.binds.size()) {
        prim_error("expected a tuple of " + std::to_string(p.binds.size()) + " values");
      }
      for (std::size_t i = 0; i < p.binds.size(); ++i) map[p.binds[i]] = tup->elements[i];
    }
    if (ev_.options().trace) ev_.mark("prim \"" + print_prim(p.expr) + "\" -> " + print_value(*v));
    return substitute(p.rest, map, ev_.names());
  }

  BodyPtr run(const Apply& a) { return call(a.callee, a.args); }

  BodyPtr call(const TermPtr& callee, const std::vector<TermPtr>& args) {
    if (const auto* lam = callee->as<Lambda>()) {
      Match m = match_params(lam->params, args, ev_.names());
      if (!resolve(m)) return nullptr;
      m.bindings[lam->stage] = top_literal();
      return substitute(lam->body, m.bindings, ev_.names());
    }
    if (const auto* rec = callee->as<RecRef>()) {
      TermPtr unrolled = substitute(rec->value, {{rec->name, callee}}, ev_.names());
      return call(unrolled, args);
    }
    if (const auto* fr = callee->as<FragmentRef>()) return call_fragment(*fr->fragment, args);
    if (const auto* host = callee->as<HostRef>()) {
      BodyPtr r = (*host->fn)(args);
      return r ? r : mk::halt(always());
    }
    if (const auto* bi = callee->as<BuiltinRef>()) return builtin(bi->name, args);
    if (is_symbolic(callee)) return nullptr;
    fail(ErrorKind::ApplyNonClosure, "cannot apply a " + kind_name(callee));
  }

  bool resolve(const Match& m) {
    if (m.kind == Match::Kind::Ok) return true;
    if (m.kind == Match::Kind::Refine) refine_ = RefineRequest{m.splice, m.refined};
    return false;
  }

  BodyPtr call_fragment(const Fragment& f, const std::vector<TermPtr>& args) {
    if (f.arity != 0) {
      fail(ErrorKind::UnfilledContinuations,
           "fragment still has " + std::to_string(f.arity) + " unfilled continuations");
    }
    if (args.empty()) fail(ErrorKind::ArityMismatch, "a fragment call needs a stage trigger");
    if (args[0]->is<Splice>()) return nullptr;
    const auto& subject = std::get<Lambda>(f.subject->node);
    Match m = match_params(subject.params, std::vector<TermPtr>(args.begin() + 1, args.end()), ev_.names());
    if (!resolve(m)) return nullptr;
    m.bindings[subject.stage] = args[0];
    return substitute(subject.body, m.bindings, ev_.names());
  }

  static BodyPtr continue_with(const TermPtr& k, std::vector<TermPtr> values) {
    return mk::apply(always(), k, std::move(values));
  }

  BodyPtr builtin(const std::string& name, const std::vector<TermPtr>& args) {
    auto want = [&](std::size_t count) {
      if (args.size() != count) {
        fail(ErrorKind::ArityMismatch,
             name + " expects " + std::to_string(count) + " arguments, got " + std::to_string(args.size()));
      }
    };
    auto any_symbolic = [&](std::size_t upto) {
      for (std::size_t i = 0; i < upto; ++i) {
        if (is_symbolic(args[i])) return true;
      }
      return false;
    };

    if (name == "if") {
      want(3);
      if (is_symbolic(args[0])) return nullptr;
      bool cond = false;
      if (const auto* b = args[0]->as<BoolLit>()) {
        cond = b->value;
      } else if (const auto* i = args[0]->as<IntLit>()) {
        cond = i->value != 0;
      } else {
        prim_error("if expects a bool condition, got " + kind_name(args[0]));
      }
      return continue_with(cond ? args[1] : args[2], {});
    }
    if (name == "print") {
      if (args.empty()) fail(ErrorKind::ArityMismatch, "print expects a continuation");
      if (any_symbolic(args.size() - 1)) return nullptr;
      std::string line;
      for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (i) line += ' ';
        const auto* s = args[i]->as<StrLit>();
        line += s ? s->value : print_value(args[i]);
      }
      if (ev_.options().out) *ev_.options().out << line << '\n';
      if (ev_.options().trace) ev_.mark("print " + line);
      return continue_with(args.back(), {});
    }
    if (name == "exit") {
      if (ev_.options().trace) ev_.mark("exit");
      throw ProgramExit(2);
    }
    if (name == "newEnv") {
      want(1);
      return continue_with(args[0], {mk::env({})});
    }
    if (name == "build") {
      want(3);
      if (any_symbolic(2)) return nullptr;
      const auto* n = args[0]->as<IntLit>();
      if (!n) prim_error("build expects an int arity");
      auto f = build_fragment(n->value, args[1]);
      return continue_with(args[2], {mk::fragment(f)});
    }
    if (name == "merge") {
      want(3);
      if (any_symbolic(2)) return nullptr;
      const auto* f = args[0]->as<FragmentRef>();
      const auto* g = args[1]->as<FragmentRef>();
      if (!f || !g) fail(ErrorKind::NonClosureSubject, "merge expects two fragments");
      return continue_with(args[2], {mk::fragment(merge_fragments(f->fragment, g->fragment, ev_.names()))});
    }
    if (name == "finalize") {
      want(2);
      if (is_symbolic(args[0])) return nullptr;
      const auto* f = args[0]->as<FragmentRef>();
      if (!f) fail(ErrorKind::NonClosureSubject, "finalize expects a fragment");
      return continue_with(args[1], {finalize_fragment(f->fragment, ev_)});
    }
    if (name == "arity") {
      want(2);
      if (is_symbolic(args[0])) return nullptr;
      const auto* f = args[0]->as<FragmentRef>();
      if (!f) fail(ErrorKind::NonClosureSubject, "arity expects a fragment");
      return continue_with(args[1], {mk::integer(fragment_arity(f->fragment))});
    }
    if (name == "concat") {
      want(3);
      if (any_symbolic(2)) return nullptr;
      const auto* a = args[0]->as<TupleLit>();
      const auto* b = args[1]->as<TupleLit>();
      if (!a || !b) prim_error("concat expects tuples");
      std::vector<TermPtr> out = a->elements;
      out.insert(out.end(), b->elements.begin(), b->elements.end());
      return continue_with(args[2], {mk::tuple(std::move(out))});
    }
    fail(ErrorKind::ApplyNonClosure, "unknown builtin '" + name + "'");
  }

  Evaluator& ev_;
  std::optional<RefineRequest> refine_;
  BodyPtr refine_origin_;
  std::unordered_map<const Term*, TermPtr> inert_terms_;
  std::unordered_map<const Body*, BodyPtr> inert_bodies_;
};

}  // namespace

Evaluator::Evaluator(NameSupply& names, EvalOptions options) : names_(names), options_(options) {}

void Evaluator::mark(const std::string& line) {
  if (options_.trace) options_.trace->push_back(line);
}

namespace {
template <typename Ptr>
Ptr run_loop(Evaluator& ev, Ptr root, std::size_t& total) {
  Stepper stepper(ev);
  std::size_t steps = 0;
  while (Ptr next = stepper.step(root)) {
    root = std::move(next);
    ++total;
    if (++steps > ev.options().step_budget) {
      fail(ErrorKind::StepBudgetExceeded,
           "step budget of " + std::to_string(ev.options().step_budget) + " exhausted");
    }
  }
  return root;
}
}  // namespace

TermPtr Evaluator::run_to_normal(const TermPtr& term) { return run_loop(*this, term, total_steps_); }

BodyPtr Evaluator::run_body(const BodyPtr& body) { return run_loop(*this, body, total_steps_); }

std::vector<TermPtr> Evaluator::apply_value(const TermPtr& f, const std::vector<TermPtr>& args) {
  auto result = std::make_shared<std::optional<std::vector<TermPtr>>>();
  TermPtr ret = mk::host("return", [result](std::span<const TermPtr> values) -> BodyPtr {
    if (*result) fail(ErrorKind::ReturnCalledTwice, "return continuation invoked twice");
    *result = std::vector<TermPtr>(values.begin(), values.end());
    return nullptr;
  });
  std::vector<TermPtr> call_args = args;
  call_args.push_back(ret);
  run_body(mk::apply(always(), f, std::move(call_args)));
  if (!*result) fail(ErrorKind::ReturnNeverCalled, "normal form reached without invoking return");
  return std::move(**result);
}

}  // namespace manydsl
