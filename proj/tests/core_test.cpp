#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace manydsl;
using testing::value_of;

TEST_SUITE("core") {

TEST_CASE("stage algebra over every assignment") {
  const Stage values[] = {Stage::Bottom, Stage::Top};
  auto a = StageExpr::ref("a");
  auto b = StageExpr::ref("b");
  for (Stage x : values) {
    for (Stage y : values) {
      StageBindings env{{"a", mk::stage(x)}, {"b", mk::stage(y)}};
      bool bx = x == Stage::Top;
      bool by = y == Stage::Top;
      CHECK((eval_stage(StageExpr::conj(a, b), env) == Stage::Top) == (bx && by));
      CHECK((eval_stage(StageExpr::disj(a, b), env) == Stage::Top) == (bx || by));
      CHECK((eval_stage(StageExpr::negate(a), env) == Stage::Top) == !bx);
      // de Morgan
      CHECK(eval_stage(StageExpr::negate(StageExpr::conj(a, b)), env) ==
            eval_stage(StageExpr::disj(StageExpr::negate(a), StageExpr::negate(b)), env));
    }
  }
  CHECK(eval_stage(StageExpr::constant(Stage::Top), {}) == Stage::Top);
  CHECK(eval_stage(StageExpr::constant(Stage::Bottom), {}) == Stage::Bottom);
}

TEST_CASE("unbound stage names are reported") {
  try {
    eval_stage(StageExpr::ref("nowhere"), {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundStageName);
  }
}

TEST_CASE("symbolic stage references are inactive") {
  CHECK(eval_stage_symbolic(StageExpr::ref("s")) == Stage::Bottom);
  CHECK(eval_stage_symbolic(StageExpr::negate(StageExpr::constant(Stage::Bottom))) == Stage::Top);
}

TEST_CASE("printing is a fixpoint of reading") {
  const char* programs[] = {
      "(x, k)'[s]' { '@s:' k x }",
      "(k) { \"1+2\" (x) k x }",
      "(k)'[ft]' { '@ft & !always:' k 1 }",
      "(a, !rest)'[s]' { '@s | never:' a !rest [1, \"two\", true] }",
      "(k) { let '[y]' x 5 k x }",
      "(k) { fix '[y]' f (n, r) { r n } f 3 k }",
      "(v, exit)'[ft]' { '@ft:' \"v>0\" (p)'[s]' '@s:' if p ()'[a]' { '@a:' exit 1 } ()'[b]' { '@b:' exit 0 } }",
  };
  for (const char* src : programs) {
    NameSupply names;
    TermPtr t = read_core(src, names);
    std::string once = print_core(t);
    TermPtr again = read_core(once, names);
    CHECK_MESSAGE(alpha_equal(t, again), src);
    CHECK(print_core(again) == once);
  }
}

TEST_CASE("alpha equivalence ignores binder names only") {
  NameSupply names;
  auto a = read_core("(x, k)'[s]' { '@s:' k x }", names);
  auto b = read_core("(y, ret)'[t]' { '@t:' ret y }", names);
  auto c = read_core("(y, ret)'[t]' { '@t:' y ret }", names);
  auto d = read_core("(y, ret)'[t]' { '@always:' ret y }", names);
  CHECK(alpha_equal(a, b));
  CHECK_FALSE(alpha_equal(a, c));
  CHECK_FALSE(alpha_equal(a, d));
}

TEST_CASE("reader rejects malformed programs") {
  NameSupply names;
  auto kind_of = [&](const char* src) {
    try {
      read_core(src, names);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ProgramExit;
  };
  CHECK(kind_of("(k) { k y }") == ErrorKind::UnboundName);
  CHECK(kind_of("(k) { k 1 ") == ErrorKind::Syntax);
  CHECK(kind_of("(k) { k 1 } extra") == ErrorKind::Syntax);
}

TEST_CASE("substitution avoids capture") {
  NameSupply names;
  TermPtr inner = mk::lambda({{"y", false}}, "s",
                             mk::apply(StageExpr::ref("s"), mk::var("x"), {mk::var("y")}));
  TermPtr out = substitute(inner, {{"x", mk::var("y")}}, names);
  const auto& lam = std::get<Lambda>(out->node);
  const auto& app = std::get<Apply>(lam.body->form);
  REQUIRE(lam.params.size() == 1);
  CHECK(lam.params[0].name != "y");
  CHECK(app.callee->as<Var>()->name == "y");
  CHECK(app.args[0]->as<Var>()->name == lam.params[0].name);
}

TEST_CASE("substituting a stage folds constants") {
  NameSupply names;
  TermPtr t = mk::lambda({{"k", false}}, "s",
                         mk::apply(StageExpr::conj(StageExpr::ref("b"), StageExpr::ref("s")), mk::var("k"), {}));
  TermPtr out = substitute(t, {{"b", mk::stage(Stage::Top)}}, names);
  const auto& lam = std::get<Lambda>(out->node);
  CHECK(lam.body->stage->op == StageExpr::Op::Ref);
  CHECK(lam.body->stage->name == lam.stage);
}

TEST_CASE("primitive arithmetic and comparisons") {
  CHECK(value_of("(return) { \"1+2*3\" (x) return x }") == "7");
  CHECK(value_of("(return) { \"(1+2)*3-4/2\" (x) return x }") == "7");
  CHECK(value_of("(return) { \"7/2\" (x) return x }") == "3");
  CHECK(value_of("(return) { \"-7/2\" (x) return x }") == "-3");
  CHECK(value_of("(return) { \"3>2\" (x) return x }") == "true");
  CHECK(value_of("(return) { \"2==3\" (x) return x }") == "false");
}

TEST_CASE("let, fix and if") {
  CHECK(value_of("(return) { let '[y]' x 5 \"x-1\" (z) return z }") == "4");
  CHECK(value_of("(return) { fix '[y]' loop (n, k) { \"n==0\" (c) if c () { k 1 } () "
                 "{ \"n-1\" (m) loop m (r) \"n*r\" (p) k p } } loop 5 return }") == "120");
  CHECK(value_of("(return) { \"1<2\" (c) if c () { return \"yes\" } () { return \"no\" } }") == "\"yes\"");
}

TEST_CASE("tuples splice into argument lists") {
  CHECK(value_of("(return) { let '[y]' f (a, b, k) { \"a-b\" (d) k d } "
                 "let '[y2]' g (k, !rest) { f !rest k } g return 10 4 }") == "6");
}

TEST_CASE("print writes to the configured stream") {
  std::ostringstream out;
  NameSupply names;
  EvalOptions opts;
  opts.out = &out;
  testing::run_script("(return) { print \"hello\" () return 1 }", names, opts);
  CHECK(out.str() == "hello\n");
}

TEST_CASE("runtime errors carry kinds") {
  auto kind_of = [](const char* src, std::size_t budget = 1'000'000) {
    NameSupply names;
    EvalOptions opts;
    opts.step_budget = budget;
    try {
      testing::run_script(src, names, opts);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Syntax;
  };
  CHECK(kind_of("(return) { \"1/0\" (x) return x }") == ErrorKind::PrimType);
  CHECK(kind_of("(return) { exit }") == ErrorKind::ProgramExit);
  CHECK(kind_of("(return) { let '[y]' f 3 f return }") == ErrorKind::ApplyNonClosure);
  CHECK(kind_of("(return) { let '[y]' f (a, k) { k a } f return }") == ErrorKind::ArityMismatch);
  CHECK(kind_of("(return) { fix '[y]' f (k) { f k } f return }", 500) == ErrorKind::StepBudgetExceeded);
  CHECK(kind_of("(return) { if \"x\" () { return 1 } () { return 2 } }") == ErrorKind::PrimType);
}

TEST_CASE("bodies on an inactive stage are left in place") {
  NameSupply names;
  Evaluator ev(names);
  TermPtr t = read_core("(k)'[s]' { '@never:' \"1+1\" (x) k x }", names);
  TermPtr out = ev.run_to_normal(t);
  CHECK(alpha_equal(t, out));
}

TEST_CASE("active bodies inside a lambda run at normalisation") {
  NameSupply names;
  Evaluator ev(names);
  TermPtr t = read_core("(k)'[s]' { '@always:' \"1+1\" (x)'[y]' '@s:' k x }", names);
  TermPtr want = read_core("(k)'[s]' { '@s:' k 2 }", names);
  CHECK(alpha_equal(ev.run_to_normal(t), want));
}

TEST_CASE("environments are persistent") {
  CHECK(value_of("(return) { newEnv (e) \"e.insert(\\\"a\\\", 1)\" (e1) \"e.insert(\\\"b\\\", 2)\" (e2) "
                 "\"e1.lookup(\\\"a\\\")\" (a) return [e2, a] }") == "[[[\"b\",2]],1]");
}

}
