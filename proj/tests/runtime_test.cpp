#include <doctest.h>

#include "support.hpp"

using namespace manydsl;

namespace {

std::string pack_file(const std::string& rel) { return testing::slurp(testing::source_dir() / "packs" / rel); }

struct Session {
  NameSupply names;
  LanguageRegistry reg;
  std::vector<std::string> trace;

  explicit Session(const std::vector<std::string>& grammars) {
    for (const auto& text : grammars) {
      auto file = read_grammar(text, names);
      for (const auto& g : file.grammars) reg.register_language(g, file.templates);
    }
    reg.register_native("Core", core_language());
  }

  std::string run(const std::string& lang, const std::string& entry, const std::string& input,
                  std::vector<std::size_t>* cursors = nullptr) {
    Evaluator ev(names);
    ParseOptions opts;
    opts.trace = &trace;
    Parser p(reg, ev, opts);
    auto values = p.parse(lang, entry, input);
    if (cursors) *cursors = p.cursor_log();
    std::string out;
    for (const auto& v : values) out += (out.empty() ? "" : " ") + print_value(v);
    return out;
  }

  ErrorKind fails(const std::string& lang, const std::string& entry, const std::string& input) {
    try {
      run(lang, entry, input);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::ProgramExit;
  }

  std::vector<std::string> lines(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& l : trace) {
      if (l.rfind(prefix, 0) == 0) out.push_back(l);
    }
    return out;
  }
};

LexerDef minusdiv_lexer() {
  LexerDef d;
  d.literals = {"-", "/", "->", "<<"};
  d.classes = {"Integer", "Identifier"};
  return d;
}

}  // namespace

TEST_SUITE("runtime") {

TEST_CASE("lexer takes the longest match and prefers literals") {
  LexerDef d = minusdiv_lexer();
  Token t = d.lex("  -> x", 0);
  CHECK(t.kind == "\"->\"");
  CHECK(t.start == 2);
  CHECK(t.end == 4);
  t = d.lex("-5", 0);
  CHECK(t.kind == "\"-\"");
  t = d.lex("42abc", 0);
  CHECK(t.kind == "Integer");
  CHECK(t.lexeme == "42");
  CHECK(print_value(t.value) == "42");
  t = d.lex("abc42 ", 0);
  CHECK(t.kind == "Identifier");
  CHECK(t.lexeme == "abc42");
  t = d.lex("  // note\n  ", 0);
  CHECK(t.kind == "$");
}

TEST_CASE("keywords win over identifiers of equal length") {
  LexerDef d;
  d.literals = {"return"};
  d.classes = {"Identifier"};
  CHECK(d.lex("return", 0).kind == "\"return\"");
  CHECK(d.lex("returns", 0).kind == "Identifier");
}

TEST_CASE("unknown characters are lexical errors") {
  LexerDef d = minusdiv_lexer();
  try {
    d.lex("  #", 0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Lex);
  }
}

TEST_CASE("immediate MinusDiv") {
  Session s({pack_file("minusdiv_immediate/minusdiv.grammar")});
  CHECK(s.run("MinusDiv", "Diff", "1-4/2-3") == "-4");
  CHECK(s.run("MinusDiv", "Diff", "10-4/2") == "8");
  CHECK(s.run("MinusDiv", "Diff", "8-3-2") == "3");
  CHECK(s.run("MinusDiv", "Diff", "100/5/2") == "10");
  CHECK(s.run("MinusDiv", "Diff", " 7 ") == "7");
}

TEST_CASE("parse errors") {
  Session s({pack_file("minusdiv_immediate/minusdiv.grammar")});
  CHECK(s.fails("MinusDiv", "Diff", "1-") == ErrorKind::UnexpectedToken);
  CHECK(s.fails("MinusDiv", "Diff", "1 2") == ErrorKind::UnexpectedToken);
  CHECK(s.fails("MinusDiv", "Diff", "1+2") == ErrorKind::Lex);
  CHECK(s.fails("MinusDiv", "Quotient", "1") == ErrorKind::UnknownEntry);
  CHECK(s.fails("Nope", "Diff", "1") == ErrorKind::UnknownLanguage);
  CHECK(s.fails("MinusDiv", "Diff", "1/0") == ErrorKind::PrimType);
}

TEST_CASE("actions fire as soon as they are reached") {
  Session s({pack_file("minusdiv_immediate/minusdiv.grammar")});
  s.run("MinusDiv", "Diff", "8-3-2");
  // the first subtraction runs before the second operator is read
  auto first_action = std::find(s.trace.begin(), s.trace.end(), "action R_Diff#2 [8,3] -> [5]");
  auto second_minus = std::find(s.trace.begin(), s.trace.end(), "token \"-\" - @3");
  REQUIRE(first_action != s.trace.end());
  REQUIRE(second_minus != s.trace.end());
  CHECK(first_action < second_minus);
}

TEST_CASE("left and right association") {
  Session s({testing::slurp(testing::source_dir() / "tests/fixtures/minus_assoc.grammar")});
  CHECK(s.run("MinusL", "Diff", "8-3-2") == "3");
  CHECK(s.lines("action") == std::vector<std::string>{"action R_Diff#2 [8,3] -> [5]", "action R_Diff#2 [5,2] -> [3]"});
  s.trace.clear();
  CHECK(s.run("MinusR", "Diff", "8-3-2") == "7");
  CHECK(s.lines("action") == std::vector<std::string>{"action R_Diff#2 [3,2] -> [1]", "action R_Diff#2 [8,1] -> [7]"});
}

TEST_CASE("the cursor never moves backwards") {
  Session s({pack_file("minusdiv_immediate/minusdiv.grammar")});
  std::vector<std::size_t> cursors;
  std::string input = "1 - 4/2 - 3";
  s.run("MinusDiv", "Diff", input, &cursors);
  REQUIRE(cursors.size() == 7);
  CHECK(std::is_sorted(cursors.begin(), cursors.end()));
  CHECK(cursors.back() == input.size());
}

TEST_CASE("registry") {
  NameSupply names;
  LanguageRegistry reg;
  auto file = read_grammar(pack_file("minusdiv_immediate/minusdiv.grammar"), names);
  CHECK(reg.register_language(file.grammars[0], file.templates).empty());
  auto warnings = reg.register_language(file.grammars[0], file.templates);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("MinusDiv") != std::string::npos);
  CHECK(reg.names() == std::vector<std::string>{"MinusDiv"});

  auto amb = read_grammar(pack_file("ambiguous/ambiguous.grammar"), names);
  try {
    reg.register_language(amb.grammars[0]);
    FAIL("conflicting grammar was accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ll1Conflict);
    CHECK(e.detail().find("on \"x\"") != std::string::npos);
  }
  CHECK(reg.find("Ambiguous") == nullptr);

  auto foreign = read_grammar("grammar G { entry S ::= !Gone.E \"x\"; }", names);
  reg.register_language(foreign.grammars[0]);
  CHECK_THROWS_AS(reg.link(), Error);
}

TEST_CASE("foreign nonterminals switch lexer and parser") {
  Session s({pack_file("two_languages/outer.grammar"), pack_file("two_languages/nums.grammar")});
  CHECK(s.run("Outer", "Start", "<< total :: 1 :: 2 :: 3 <<") == "[\"total\",6]");
  CHECK(s.lines("switch") == std::vector<std::string>{"switch Outer -> Nums @8"});
  CHECK(s.lines("return") == std::vector<std::string>{"return Nums -> Outer @23"});
  CHECK(s.fails("Nums", "List", "<< total") == ErrorKind::Lex);
  CHECK(s.fails("Outer", "Start", ":: 1") == ErrorKind::Lex);
  CHECK(s.fails("Nums", "Items", ":: 1") == ErrorKind::UnknownEntry);
}

TEST_CASE("an empty foreign region hands control straight back") {
  Session s({pack_file("two_languages/outer.grammar"), pack_file("two_languages/nums.grammar")});
  CHECK(s.run("Outer", "Start", "<< none <<") == "[\"none\",0]");
}

TEST_CASE("core terms as a foreign language") {
  Session s({pack_file("core_actions/apply.grammar")});
  CHECK(s.run("Apply", "Prog", "apply (x, k) { \"x*2\" (y) k y } to 21") == "42");
  CHECK(s.lines("switch").size() == 1);
}

}
