#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "manydsl/eval.hpp"
#include "manydsl/fragment.hpp"
#include "manydsl/runtime.hpp"
#include "manydsl/syntax.hpp"

namespace testing {

inline std::filesystem::path source_dir() { return MANYDSL_SOURCE_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int status = 0;
  std::string out;
  std::string err;
};

inline CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "manydsl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.status = manydsl::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Evaluates a core script of shape `(return) { ... }` and returns what it passed to return.
inline std::vector<manydsl::TermPtr> run_script(const std::string& text, manydsl::NameSupply& names,
                                                manydsl::EvalOptions options = {}) {
  manydsl::Evaluator ev(names, options);
  return ev.apply_value(manydsl::read_core(text, names), {});
}

inline std::string value_of(const std::string& script) {
  manydsl::NameSupply names;
  auto r = run_script(script, names);
  return r.size() == 1 ? manydsl::print_value(r[0]) : "<" + std::to_string(r.size()) + " values>";
}

/// Registers the grammars of a file under their own names.
inline manydsl::LanguageRegistry registry_of(const std::string& grammar_text, manydsl::NameSupply& names) {
  manydsl::LanguageRegistry reg;
  auto file = manydsl::read_grammar(grammar_text, names);
  for (const auto& g : file.grammars) reg.register_language(g, file.templates);
  reg.register_native("Core", manydsl::core_language());
  return reg;
}

}  // namespace testing

namespace testing {

/// Every stage expression in a term, outermost first.
inline void collect_stages(const manydsl::TermPtr& t, std::vector<manydsl::StageExprPtr>& out);

inline void collect_stages(const manydsl::BodyPtr& b, std::vector<manydsl::StageExprPtr>& out) {
  using namespace manydsl;
  out.push_back(b->stage);
  if (const auto* a = std::get_if<Apply>(&b->form)) {
    collect_stages(a->callee, out);
    for (const auto& x : a->args) collect_stages(x, out);
  } else if (const auto* f = std::get_if<Fix>(&b->form)) {
    collect_stages(f->value, out);
    collect_stages(f->rest, out);
  } else if (const auto* p = std::get_if<Prim>(&b->form)) {
    collect_stages(p->rest, out);
  }
}

inline void collect_stages(const manydsl::TermPtr& t, std::vector<manydsl::StageExprPtr>& out) {
  using namespace manydsl;
  if (const auto* l = t->as<Lambda>()) collect_stages(l->body, out);
  if (const auto* tu = t->as<TupleLit>()) {
    for (const auto& e : tu->elements) collect_stages(e, out);
  }
}

/// A residual is pure when every body waits on a plain stage variable: no constant
/// stages, no fragment operators and no environment updates or lookups left inside.
inline bool residual_is_pure(const manydsl::TermPtr& t) {
  std::vector<manydsl::StageExprPtr> stages;
  collect_stages(t, stages);
  for (const auto& s : stages) {
    if (s->op != manydsl::StageExpr::Op::Ref) return false;
  }
  std::string text = manydsl::print_core(t);
  for (const char* bad : {"build", "merge", "finalize", ".insert(", ".lookup(", "always", "never"}) {
    if (text.find(bad) != std::string::npos) return false;
  }
  return true;
}

}  // namespace testing
