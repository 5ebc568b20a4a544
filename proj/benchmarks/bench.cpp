#include <benchmark/benchmark.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "manydsl/eval.hpp"
#include "manydsl/fragment.hpp"
#include "manydsl/ll1.hpp"
#include "manydsl/runtime.hpp"
#include "manydsl/syntax.hpp"

using namespace manydsl;

namespace {

std::string slurp(const std::string& rel) {
  std::ifstream in(std::filesystem::path(MANYDSL_SOURCE_DIR) / rel);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// n terms of 9-8/2 chained with '-'
std::string long_expr(int n) {
  std::string out = "9";
  for (int i = 1; i < n; ++i) out += i % 2 ? "-8/2" : "-1";
  return out;
}

struct MinusDiv {
  NameSupply names;
  LanguageRegistry reg;
  explicit MinusDiv(const char* rel) {
    auto file = read_grammar(slurp(rel), names);
    reg.register_language(file.grammars[0], file.templates);
  }
};

}  // namespace

static void BM_Lex(benchmark::State& state) {
  NameSupply names;
  auto file = read_grammar(slurp("packs/minusdiv_immediate/minusdiv.grammar"), names);
  Grammar g = expand_grammar(file.grammars[0], file.templates).grammar;
  LexerDef lexer = LexerDef::for_grammar(g);
  std::string text = long_expr(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    std::size_t at = 0;
    for (;;) {
      Token t = lexer.lex(text, at);
      if (t.kind == kEndOfInput) break;
      at = t.end;
    }
    benchmark::DoNotOptimize(at);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Lex)->Arg(10)->Arg(100)->Arg(1000);

static void BM_ParseImmediate(benchmark::State& state) {
  MinusDiv md("packs/minusdiv_immediate/minusdiv.grammar");
  std::string text = long_expr(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Evaluator ev(md.names);
    Parser p(md.reg, ev);
    benchmark::DoNotOptimize(p.parse("MinusDiv", "Diff", text));
  }
}
BENCHMARK(BM_ParseImmediate)->Arg(10)->Arg(100)->Arg(1000);

static void BM_GenerateAndFinalize(benchmark::State& state) {
  MinusDiv md("packs/minusdiv_codegen/minusdiv.grammar");
  std::string text = long_expr(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Evaluator ev(md.names);
    Parser p(md.reg, ev);
    benchmark::DoNotOptimize(p.parse("MinusDiv", "Expr", text));
  }
}
BENCHMARK(BM_GenerateAndFinalize)->Arg(10)->Arg(50)->Arg(200);

static void BM_SignumScript(benchmark::State& state) {
  std::string script = slurp("packs/signum_builder/signum.core");
  for (auto _ : state) {
    NameSupply names;
    Evaluator ev(names);
    benchmark::DoNotOptimize(ev.apply_value(read_core(script, names), {}));
  }
}
BENCHMARK(BM_SignumScript);

static void BM_BuildTable(benchmark::State& state) {
  NameSupply names;
  auto file = read_grammar(slurp("packs/graph/graph.grammar"), names);
  Grammar g = expand_grammar(file.grammars[0], file.templates).grammar;
  for (auto _ : state) benchmark::DoNotOptimize(build_table(g));
}
BENCHMARK(BM_BuildTable);

static void BM_ExpandGrammar(benchmark::State& state) {
  NameSupply names;
  auto file = read_grammar(slurp("packs/typed_minusdiv/typed.grammar"), names);
  for (auto _ : state) benchmark::DoNotOptimize(expand_grammar(file.grammars[0], file.templates));
}
BENCHMARK(BM_ExpandGrammar);
BENCHMARK_MAIN();
