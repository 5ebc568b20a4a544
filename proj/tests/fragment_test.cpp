#include <doctest.h>

#include "support.hpp"

using namespace manydsl;
using testing::value_of;

namespace {

ErrorKind kind_of(const std::string& script) {
  NameSupply names;
  try {
    testing::run_script(script, names);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::ProgramExit;
}

TermPtr signum_residual(NameSupply& names) {
  auto script = testing::slurp(testing::source_dir() / "packs/signum_builder/signum.core");
  auto r = testing::run_script(script, names);
  REQUIRE(r.size() == 1);
  return r[0];
}

}  // namespace

TEST_SUITE("fragment") {

TEST_CASE("build validates its arguments") {
  NameSupply names;
  auto subject = read_core("('ft', x, k)'[bt]' { '@ft:' k x }", names);
  CHECK(build_fragment(1, subject)->arity == 1);
  CHECK_THROWS_AS(build_fragment(-1, subject), Error);
  CHECK(kind_of("(return) { build -1 ('ft', k)'[bt]' { '@ft:' k } (F) return F }") == ErrorKind::NegativeArity);
  CHECK(kind_of("(return) { build 0 5 (F) return F }") == ErrorKind::NonClosureSubject);
  CHECK(kind_of("(return) { build 3 ('ft', k)'[bt]' { '@ft:' k } (F) return F }") == ErrorKind::ArityMismatch);
}

TEST_CASE("merge fills the first slot and adds arities") {
  CHECK(value_of("(return) { build 2 ('ft', a, b)'[bt]' { '@ft:' a } (F) "
                 "build 1 ('ft', c)'[bt]' { '@ft:' c } (G) merge F G (H) arity H (n) return n }") == "2");
  CHECK(value_of("(return) { build 1 ('ft', a)'[bt]' { '@ft:' a } (F) "
                 "build 0 ('ft')'[bt]' { '@ft:' exit } (G) merge F G (H) arity H (n) return n }") == "0");
  CHECK(kind_of("(return) { build 0 ('ft')'[bt]' { '@ft:' exit } (F) merge F F (H) return H }") ==
        ErrorKind::ZeroArityLeft);
}

TEST_CASE("finalize needs every continuation filled") {
  CHECK(kind_of("(return) { build 1 ('ft', a)'[bt]' { '@ft:' a } (F) finalize F return }") ==
        ErrorKind::UnfilledContinuations);
}

TEST_CASE("finalized signum matches the hand-written residual") {
  NameSupply names;
  TermPtr got = signum_residual(names);
  TermPtr want = read_core(testing::slurp(testing::source_dir() / "tests/fixtures/signum_residual.core"), names);
  CHECK_MESSAGE(alpha_equal(got, want), print_core(got));
  CHECK(testing::residual_is_pure(got));
}

TEST_CASE("finalized signum computes the sign") {
  NameSupply names;
  TermPtr residual = signum_residual(names);
  Evaluator ev(names);
  for (auto [in, out] : {std::pair{5, 1}, {0, 0}, {-3, -1}, {1, 1}, {-1, -1}}) {
    auto r = ev.apply_value(residual, {mk::integer(in)});
    REQUIRE(r.size() == 1);
    CHECK(print_value(r[0]) == std::to_string(out));
  }
}

TEST_CASE("merge order changes the residual, not the arity") {
  NameSupply names;
  auto a = testing::run_script("(return) { build 1 ('ft', x, k)'[bt]' { '@bt:' k 'ft' x } (F) "
                               "build 0 ('ft', x)'[bt]' { '@ft:' \"x+1\" (y) exit } (G) "
                               "merge F G (H) finalize H return }",
                               names);
  REQUIRE(a.size() == 1);
  auto want = read_core("(x)'[ft]' { '@ft:' \"x+1\" (y) exit }", names);
  CHECK_MESSAGE(alpha_equal(a[0], want), print_core(a[0]));
}

}
