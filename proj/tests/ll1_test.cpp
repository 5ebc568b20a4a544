#include <doctest.h>

#include "support.hpp"

using namespace manydsl;

namespace {

Grammar expanded(const std::string& text) {
  NameSupply names;
  auto file = read_grammar(text, names);
  REQUIRE(file.grammars.size() == 1);
  auto r = expand_grammar(file.grammars[0], file.templates);
  REQUIRE(r.diagnostics.empty());
  return r.grammar;
}

using Set = std::set<std::string>;

}  // namespace

TEST_SUITE("ll1") {

TEST_CASE("FIRST and FOLLOW of MinusDiv") {
  Grammar g = expanded(testing::slurp(testing::source_dir() / "packs/minusdiv_immediate/minusdiv.grammar"));
  Ll1Sets s = analyze(g);
  CHECK(s.nullable == Set{"R_Diff", "R_Quotient"});
  CHECK(s.first["Diff"] == Set{"Integer"});
  CHECK(s.first["R_Diff"] == Set{"\"-\""});
  CHECK(s.first["R_Quotient"] == Set{"\"/\""});
  CHECK(s.follow["Diff"] == Set{"$"});
  CHECK(s.follow["R_Diff"] == Set{"$"});
  CHECK(s.follow["Quotient"] == Set{"\"-\"", "$"});
  CHECK(s.follow["R_Quotient"] == Set{"\"-\"", "$"});
}

TEST_CASE("MinusDiv table") {
  Grammar g = expanded(testing::slurp(testing::source_dir() / "packs/minusdiv_immediate/minusdiv.grammar"));
  ParseTable t = build_table(g);
  REQUIRE(t.ok());
  auto cell = [&](const char* rule, const char* term) {
    const std::string* id = t.lookup(rule, term);
    return id ? *id : std::string("-");
  };
  CHECK(cell("Diff", "Integer") == "Diff#1");
  CHECK(cell("R_Diff", "\"-\"") == "R_Diff#2");
  CHECK(cell("R_Diff", "$") == "R_Diff#1");
  CHECK(cell("R_Quotient", "\"/\"") == "R_Quotient#2");
  CHECK(cell("R_Quotient", "\"-\"") == "R_Quotient#1");
  CHECK(cell("R_Quotient", "$") == "R_Quotient#1");
  CHECK(cell("R_Diff", "\"/\"") == "-");
  CHECK(t.cells.size() == 9);
}

TEST_CASE("a shared prefix is a conflict naming the token") {
  Grammar g = expanded(testing::slurp(testing::source_dir() / "packs/ambiguous/ambiguous.grammar"));
  ParseTable t = build_table(g);
  REQUIRE(t.conflicts.size() == 1);
  CHECK(t.conflicts[0].message == "LL(1) conflict in Stmt on \"x\": Stmt#1 and Stmt#2");
  CHECK(t.cells.empty());
  CHECK(print_table(g, t) == "LL(1) conflict in Stmt on \"x\": Stmt#1 and Stmt#2\n");
}

TEST_CASE("left recursion is rejected") {
  ParseTable t = build_table(expanded("grammar G { entry E ::= E \"-\" Integer | Integer; }"));
  REQUIRE_FALSE(t.ok());
  CHECK(t.conflicts[0].message == "LL(1) conflict in E on Integer: E#1 and E#2");
}

TEST_CASE("nullable alternatives clash through FOLLOW") {
  ParseTable t = build_table(expanded("grammar G { entry S ::= A \"a\"; A ::= \"a\" | epsilon; }"));
  REQUIRE_FALSE(t.ok());
  CHECK(t.conflicts[0].message == "LL(1) conflict in A on \"a\": A#1 and A#2");
}

TEST_CASE("actions are transparent") {
  Grammar g = expanded("grammar G { entry S ::= |()->(x)| { return 1 } \"a\" | \"b\"; }");
  ParseTable t = build_table(g);
  REQUIRE(t.ok());
  CHECK(*t.lookup("S", "\"a\"") == "S#1");
  CHECK(*t.lookup("S", "\"b\"") == "S#2");
}

TEST_CASE("foreign terms contribute nothing and are not nullable") {
  Grammar g = expanded("grammar G { entry S ::= \"<\" !L.E \">\"; T ::= !L.E; }");
  Ll1Sets s = analyze(g);
  CHECK(s.first["T"].empty());
  CHECK_FALSE(s.nullable.count("T"));
  bool nullable = true;
  CHECK(first_of(g.rule("S")->productions[0].body, 1, s, nullable).empty());
  CHECK_FALSE(nullable);
}

TEST_CASE("foreign nonterminals cannot select an alternative") {
  Grammar bad = expanded("grammar G { entry S ::= !L.E | \"x\"; }");
  auto d = validate_foreign_positions(bad);
  REQUIRE(d.size() == 1);
  CHECK(d[0].message.find("S#1") == 0);
  CHECK(d[0].message.find("!L.E") != std::string::npos);

  Grammar nullable_prefix = expanded("grammar G { entry S ::= A !L.E | \"x\"; A ::= epsilon; }");
  CHECK(validate_foreign_positions(nullable_prefix).size() == 1);

  Grammar fine = expanded("grammar G { entry S ::= \"y\" !L.E | \"x\"; T ::= !L.E; }");
  CHECK(validate_foreign_positions(fine).empty());
}

TEST_CASE("sets print with epsilon for nullable rules") {
  Grammar g = expanded("grammar G { entry S ::= A \"b\"; A ::= \"a\" | epsilon; }");
  CHECK(print_sets(g, analyze(g)) ==
        "FIRST(S) = {\"a\", \"b\"}\n"
        "FIRST(A) = {\"a\", epsilon}\n"
        "FOLLOW(S) = {$}\n"
        "FOLLOW(A) = {\"b\"}\n");
}

}
