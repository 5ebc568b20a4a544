// One line per acceptance criterion; exits non-zero when any fails.

#include <functional>
#include <iostream>
#include <random>
#include <regex>

#include <json.hpp>

#include "support.hpp"

using namespace manydsl;
namespace fs = std::filesystem;

namespace {

struct Failed {
  std::string why;
};

void expect(bool ok, const std::string& why) {
  if (!ok) throw Failed{why};
}

fs::path pack_dir(const std::string& id) { return testing::source_dir() / "packs" / id; }

struct Pack {
  nlohmann::json manifest;
  fs::path dir;
  NameSupply names;
  LanguageRegistry reg;
  std::vector<std::string> trace;

  explicit Pack(const std::string& id) : dir(pack_dir(id)) {
    manifest = nlohmann::json::parse(testing::slurp(dir / "manifest.json"));
    reg.register_native("Core", core_language());
    for (const auto& g : manifest.value("grammars", std::vector<std::string>{})) {
      auto file = read_grammar(testing::slurp(dir / g), names);
      for (const auto& d : file.grammars) reg.register_language(d, file.templates);
    }
  }

  std::string input() const { return testing::slurp(dir / manifest.at("input").get<std::string>()); }

  std::vector<TermPtr> parse(const std::string& text, std::string lang = {}, std::string entry = {},
                             std::vector<std::size_t>* cursors = nullptr) {
    if (lang.empty()) lang = manifest.at("lang");
    if (entry.empty()) entry = manifest.at("entry");
    EvalOptions eo;
    eo.trace = &trace;
    Evaluator ev(names, eo);
    ParseOptions po;
    po.trace = &trace;
    Parser p(reg, ev, po);
    struct Log {
      std::vector<std::size_t>* to;
      Parser& p;
      ~Log() {
        if (to) *to = p.cursor_log();
      }
    } log{cursors, p};
    return p.parse(lang, entry, text);
  }

  TermPtr residual(const std::string& text, std::string lang = {}, std::string entry = {}) {
    auto v = parse(text, std::move(lang), std::move(entry));
    expect(v.size() == 1, "expected one result");
    if (const auto* f = v[0]->as<FragmentRef>()) {
      Evaluator ev(names);
      return finalize_fragment(f->fragment, ev);
    }
    return v[0];
  }

  std::vector<TermPtr> invoke(const TermPtr& program, const std::vector<TermPtr>& args = {}) {
    EvalOptions eo;
    eo.trace = &trace;
    Evaluator ev(names, eo);
    return ev.apply_value(program, args);
  }
};

std::string one_value(const std::vector<TermPtr>& v) {
  expect(v.size() == 1, "expected one value, got " + std::to_string(v.size()));
  return print_value(v[0]);
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

// 1 -------------------------------------------------------------------------
void signum_pipeline() {
  NameSupply names;
  auto r = testing::run_script(testing::slurp(pack_dir("signum_builder") / "signum.core"), names);
  expect(r.size() == 1, "script returned " + std::to_string(r.size()) + " values");
  TermPtr residual = r[0];
  TermPtr want = read_core(testing::slurp(testing::source_dir() / "tests/fixtures/signum_residual.core"), names);
  expect(alpha_equal(residual, want), "residual differs:\n" + print_core(residual));
  std::string text = print_core(residual);
  expect(count_of(text, "if ") == 2, "expected two conditionals");
  expect(count_of(text, "exit ") == 3, "expected three exits");
  expect(testing::residual_is_pure(residual), "residual keeps build-time code");
  Evaluator ev(names);
  for (auto [in, out] : {std::pair{5, "1"}, {0, "0"}, {-3, "-1"}}) {
    std::string got = one_value(ev.apply_value(residual, {mk::integer(in)}));
    expect(got == out, "signum(" + std::to_string(in) + ") = " + got);
  }
}

// 2 -------------------------------------------------------------------------
void minusdiv_codegen() {
  Pack p("minusdiv_codegen");
  TermPtr residual = p.residual("1-4/2-3");
  TermPtr want = read_core(testing::slurp(testing::source_dir() / "tests/fixtures/minusdiv_residual.core"), p.names);
  expect(alpha_equal(residual, want), "residual differs:\n" + print_core(residual));
  expect(one_value(p.invoke(residual)) == "-4", "invocation is not -4");
}

// 3 -------------------------------------------------------------------------
std::string random_expr(std::mt19937& rng) {
  std::uniform_int_distribution<int> digit(1, 9), len(1, 7), op(0, 1);
  std::string out = std::to_string(digit(rng));
  for (int i = len(rng); i > 1; --i) {
    out += op(rng) ? "-" : "/";
    out += std::to_string(digit(rng));
  }
  return out;
}

void oracle_equivalence() {
  Pack now("minusdiv_immediate");
  Pack later("minusdiv_codegen");
  std::vector<std::string> corpus = {now.input(), later.input()};
  for (const auto* m : {&now.manifest, &later.manifest}) {
    for (const auto& c : m->at("cases")) {
      auto args = c.at("args").get<std::vector<std::string>>();
      auto it = std::find(args.begin(), args.end(), "--expr");
      if (it != args.end() && c.at("exit") == 0) corpus.push_back(*(it + 1));
    }
  }
  std::mt19937 rng(1234);
  for (int i = 0; i < 100; ++i) corpus.push_back(random_expr(rng));
  int agreed = 0;
  for (const auto& e : corpus) {
    std::string a = one_value(now.parse(e));
    std::string b = one_value(later.invoke(later.residual(e)));
    expect(a == b, "'" + e + "': immediate " + a + ", generated " + b);
    ++agreed;
  }
  expect(agreed >= 100, "corpus too small");
}

// 4 -------------------------------------------------------------------------
std::vector<std::string> actions_of(const std::vector<std::string>& trace) {
  std::vector<std::string> out;
  for (const auto& l : trace) {
    if (l.rfind("action ", 0) == 0) out.push_back(l);
  }
  return out;
}

void associativity() {
  NameSupply names;
  LanguageRegistry reg;
  auto file = read_grammar(testing::slurp(testing::source_dir() / "tests/fixtures/minus_assoc.grammar"), names);
  for (const auto& g : file.grammars) reg.register_language(g, file.templates);
  auto run = [&](const std::string& lang, std::vector<std::string>& trace) {
    Evaluator ev(names);
    ParseOptions po;
    po.trace = &trace;
    Parser p(reg, ev, po);
    return one_value(p.parse(lang, "Diff", "8-3-2"));
  };
  std::vector<std::string> lt, rt;
  expect(run("MinusL", lt) == "3", "lassoc does not give 3");
  expect(run("MinusR", rt) == "7", "rassoc does not give 7");
  // operands appear in source order for lassoc and innermost first for rassoc
  expect(actions_of(lt) == std::vector<std::string>{"action R_Diff#2 [8,3] -> [5]", "action R_Diff#2 [5,2] -> [3]"},
         "lassoc action order");
  expect(actions_of(rt) == std::vector<std::string>{"action R_Diff#2 [3,2] -> [1]", "action R_Diff#2 [8,1] -> [7]"},
         "rassoc action order");
}

// 5 -------------------------------------------------------------------------
void ll1_guarantees() {
  int inputs = 0;
  for (const auto& entry : fs::directory_iterator(testing::source_dir() / "packs")) {
    std::string id = entry.path().filename().string();
    auto manifest = nlohmann::json::parse(testing::slurp(entry.path() / "manifest.json"));
    if (!manifest.contains("grammars") || id == "ambiguous") continue;
    Pack p(id);
    std::vector<std::tuple<std::string, std::string, std::string>> runs;
    if (manifest.contains("input")) runs.emplace_back(p.input(), "", "");
    for (const auto& c : manifest.at("cases")) {
      if (c.value("command", std::string("run")) != "run") continue;
      auto args = c.at("args").get<std::vector<std::string>>();
      std::string expr, lang, ent;
      bool has_expr = false;
      for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--expr") expr = args[i + 1], has_expr = true;
        if (args[i] == "--lang") lang = args[i + 1];
        if (args[i] == "--entry") ent = args[i + 1];
      }
      if (has_expr) runs.emplace_back(expr, lang, ent);
    }
    for (const auto& [text, lang, ent] : runs) {
      std::vector<std::size_t> cursors;
      try {
        p.parse(text, lang, ent, &cursors);
      } catch (const Error&) {
      }
      expect(std::is_sorted(cursors.begin(), cursors.end()), id + ": cursor moved back on '" + text + "'");
      ++inputs;
    }
  }
  expect(inputs >= 20, "only " + std::to_string(inputs) + " corpus inputs");

  auto r = testing::cli({"check", "--pack", pack_dir("ambiguous").string()});
  expect(r.status == 1, "ambiguous grammar accepted by check");
  expect(r.out.find("LL(1) conflict in Stmt on \"x\"") != std::string::npos, "conflict does not name the token");
  NameSupply names;
  LanguageRegistry reg;
  auto file = read_grammar(testing::slurp(pack_dir("ambiguous") / "ambiguous.grammar"), names);
  try {
    reg.register_language(file.grammars[0]);
    expect(false, "registry accepted the ambiguous grammar");
  } catch (const Error& e) {
    expect(e.kind() == ErrorKind::Ll1Conflict, "wrong error kind");
  }
}

// 6 -------------------------------------------------------------------------
void default_arguments() {
  auto fixture = testing::source_dir() / "tests/fixtures";
  auto r = testing::cli({"expand", "--grammar", (fixture / "stack.grammar").string()});
  expect(r.status == 0, "expand failed: " + r.err);
  expect(r.out == testing::slurp(fixture / "stack.expand"), "expansion differs:\n" + r.out);
  NameSupply names;
  auto file = read_grammar(testing::slurp(fixture / "stack.grammar"), names);
  Grammar g = expand_grammar(file.grammars[0], file.templates).grammar;
  expect(print_grammar(complete_default_args(g)) == print_grammar(g), "completion is not idempotent");
}

// 7 -------------------------------------------------------------------------
void graph_dsl() {
  Pack p("graph");
  TermPtr program = p.residual(p.input());
  auto v = p.invoke(program);
  expect(v.size() == 2, "expected env and graph");
  expect(print_value(v[0]) == "[[\"Start\",1],[\"X\",2],[\"Y\",3]]", "env " + print_value(v[0]));
  expect(print_value(v[1]) == "[[2,3],[3],[2,1]]", "adjacency " + print_value(v[1]));

  std::ptrdiff_t last_decl = -1, first_def = -1;
  for (std::size_t i = 0; i < p.trace.size(); ++i) {
    const auto& l = p.trace[i];
    if (l.find(".insert(") != std::string::npos) last_decl = static_cast<std::ptrdiff_t>(i);
    if (l.find(".lookup(") != std::string::npos && first_def < 0) first_def = static_cast<std::ptrdiff_t>(i);
  }
  expect(last_decl >= 0 && first_def >= 0, "trace misses Decl or Def code");
  expect(last_decl < first_def, "Def code ran before all Decl code");
}

// 8 -------------------------------------------------------------------------
void residual_purity() {
  for (const char* id : {"minusdiv_codegen", "assignments", "graph"}) {
    Pack p(id);
    TermPtr r = p.residual(p.input());
    std::vector<StageExprPtr> stages;
    testing::collect_stages(r, stages);
    for (const auto& s : stages) {
      expect(s->op == StageExpr::Op::Ref, std::string(id) + ": body staged on " + print_stage(s));
    }
    std::string text = print_core(r);
    expect(text.find(".insert(") == std::string::npos, std::string(id) + ": env.insert left");
    expect(text.find(".lookup(") == std::string::npos, std::string(id) + ": env.lookup left");
    expect(testing::residual_is_pure(r), std::string(id) + ": not pure");
  }
}

// 9 -------------------------------------------------------------------------
void language_switching() {
  Pack p("two_languages");
  expect(one_value(p.parse(p.input())) == "[\"total\",6]", "boundary-crossing input");
  bool switched = false, returned = false;
  for (const auto& l : p.trace) {
    switched |= l.rfind("switch Outer -> Nums", 0) == 0;
    returned |= l.rfind("return Nums -> Outer", 0) == 0;
  }
  expect(switched && returned, "no switch in trace");

  auto lex_fails = [&](const std::string& text, const std::string& lang, const std::string& entry) {
    try {
      p.parse(text, lang, entry);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::Lex;
    }
    return false;
  };
  expect(lex_fails("<< total", "Nums", "List"), "Outer tokens lexed by Nums");
  expect(lex_fails(":: 1", "Outer", "Start"), "Nums tokens lexed by Outer");

  TermPtr program = p.residual(">> :: 1 :: 2 :: 3 >>", "Outer", "Prog");
  expect(testing::residual_is_pure(program), "fragment residual not pure");
  expect(one_value(p.invoke(program)) == "6", "fragment residual does not sum to 6");
}

// 10 ------------------------------------------------------------------------
void typed_minusdiv() {
  auto r = testing::cli({"run", "--pack", pack_dir("typed_minusdiv").string(), "--expr", "1-r4/r2", "--emit", "trace"});
  expect(r.status == 2, "exit status " + std::to_string(r.status));
  expect(r.out.rfind("Type mismatch!\n", 0) == 0, "no mismatch message");
  std::regex arithmetic(R"(^prim "[^"]*[-/])");
  std::istringstream lines(r.out);
  for (std::string l; std::getline(lines, l);) {
    expect(!std::regex_search(l, arithmetic), "function-time arithmetic ran: " + l);
    expect(l != "invoke begin", "program was invoked");
  }
  auto ok = testing::cli({"run", "--pack", pack_dir("typed_minusdiv").string(), "--expr", "r8-r4/r2", "--invoke"});
  expect(ok.status == 0 && ok.out == "6\n", "well-typed rational input");
}

// 11 ------------------------------------------------------------------------
void stage_algebra() {
  const Stage values[] = {Stage::Bottom, Stage::Top};
  auto a = StageExpr::ref("a");
  auto b = StageExpr::ref("b");
  for (Stage x : values) {
    for (Stage y : values) {
      StageBindings env{{"a", mk::stage(x)}, {"b", mk::stage(y)}};
      bool bx = x == Stage::Top, by = y == Stage::Top;
      expect((eval_stage(StageExpr::conj(a, b), env) == Stage::Top) == (bx && by), "And");
      expect((eval_stage(StageExpr::disj(a, b), env) == Stage::Top) == (bx || by), "Or");
      expect((eval_stage(StageExpr::negate(a), env) == Stage::Top) == !bx, "Not");
    }
  }

  int sources = 0;
  for (const auto& entry : fs::recursive_directory_iterator(testing::source_dir())) {
    const auto& path = entry.path();
    std::string s = path.string();
    if (s.find("/build") != std::string::npos || s.find("/.git") != std::string::npos) continue;
    NameSupply names;
    std::vector<TermPtr> terms;
    if (path.extension() == ".core") {
      terms.push_back(read_core(testing::slurp(path), names));
    } else if (path.extension() == ".grammar") {
      for (const auto& g : read_grammar(testing::slurp(path), names).grammars) {
        for (const auto& pr : g.productions) {
          for (const auto& u : pr.body) {
            if (u.kind == UseKind::Action) terms.push_back(u.lambda);
          }
        }
      }
    } else if (path.filename().string().rfind("residual", 0) == 0) {
      terms.push_back(read_core(testing::slurp(path), names));
    }
    for (const auto& t : terms) {
      expect(alpha_equal(t, read_core(print_core(t), names)), "round trip of " + s);
      ++sources;
    }
  }
  expect(sources >= 30, "only " + std::to_string(sources) + " sources");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void()>>> criteria = {
      {"signum pipeline", signum_pipeline},
      {"MinusDiv code generation", minusdiv_codegen},
      {"oracle equivalence", oracle_equivalence},
      {"associativity", associativity},
      {"LL(1) guarantees", ll1_guarantees},
      {"default-argument completion", default_arguments},
      {"graph DSL", graph_dsl},
      {"residual purity", residual_purity},
      {"language switching", language_switching},
      {"typed MinusDiv", typed_minusdiv},
      {"stage algebra and round trip", stage_algebra},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, check] = criteria[i];
    std::string why;
    try {
      check();
    } catch (const Failed& f) {
      why = f.why;
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    std::cout << (why.empty() ? "PASS " : "FAIL ") << i + 1 << ". " << name;
    if (!why.empty()) std::cout << ": " << why;
    std::cout << "\n";
    failed += !why.empty();
  }
  return failed == 0 ? 0 : 1;
}
