#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "manydsl/eval.hpp"
#include "manydsl/fragment.hpp"
#include "manydsl/grammar.hpp"
#include "manydsl/ll1.hpp"
#include "manydsl/runtime.hpp"
#include "manydsl/syntax.hpp"

namespace fs = std::filesystem;

namespace manydsl::cli {

namespace {

constexpr int kUsage = 64;
constexpr int kNoInput = 66;

struct MissingFile {
  std::string path;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile{path.string()};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Options {
  std::vector<std::string> grammars;
  std::string pack;
  std::string lang;
  std::string entry;
  std::string input;
  std::string expr;
  bool has_expr = false;
  std::string emit = "value";
  std::size_t steps = 1'000'000;
  std::uint64_t seed = 0;
  bool trace = false;
  std::string script;
  bool invoke = false;
  std::vector<std::string> with;
  bool emit_set = false;
};

struct Loaded {
  GrammarDecl decl;
  std::vector<Template> templates;
};

// Manifest values fill whatever the command line left unset; paths are relative to the pack.
void apply_pack(Options& o) {
  if (o.pack.empty()) return;
  fs::path dir(o.pack);
  auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  auto rel = [&](const std::string& arg) {
    auto eq = arg.find('=');
    if (eq == std::string::npos) return (dir / arg).string();
    return arg.substr(0, eq + 1) + (dir / arg.substr(eq + 1)).string();
  };
  if (o.grammars.empty()) {
    for (const auto& g : manifest.value("grammars", std::vector<std::string>{})) o.grammars.push_back(rel(g));
  }
  if (o.lang.empty()) o.lang = manifest.value("lang", "");
  if (o.entry.empty()) o.entry = manifest.value("entry", "");
  if (o.script.empty() && manifest.contains("script")) o.script = (dir / manifest["script"].get<std::string>()).string();
  if (!o.has_expr && o.input.empty() && manifest.contains("input")) {
    o.input = (dir / manifest["input"].get<std::string>()).string();
  }
  if (!o.emit_set) o.emit = manifest.value("emit", o.emit);
  if (!o.invoke) o.invoke = manifest.value("invoke", false);
  if (o.with.empty()) o.with = manifest.value("with", std::vector<std::string>{});
}

std::vector<Loaded> load_grammars(const Options& o, NameSupply& names) {
  std::vector<Loaded> out;
  for (const auto& arg : o.grammars) {
    auto eq = arg.find('=');
    std::string name = eq == std::string::npos ? "" : arg.substr(0, eq);
    std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
    GrammarFile file = read_grammar(slurp(path), names);
    bool picked = false;
    for (auto& g : file.grammars) {
      if (!name.empty() && file.grammars.size() > 1 && g.name != name) continue;
      if (!name.empty()) g.name = name;
      out.push_back({g, file.templates});
      picked = true;
    }
    if (!name.empty() && !picked) fail(ErrorKind::UnknownLanguage, "no grammar " + name + " in " + path);
  }
  return out;
}

std::string signature(const Rule& r) {
  std::string s;
  if (!r.ins.empty()) s += "|" + print_names(r.ins) + "->|";
  s += r.head;
  if (!r.outs.empty()) s += "|->" + print_names(r.outs) + "|";
  return s;
}

int check(const Options& o, std::ostream& out, std::ostream& err) {
  NameSupply names(o.seed);
  auto loaded = load_grammars(o, names);
  if (loaded.empty()) {
    err << "check: no grammar given\n";
    return kUsage;
  }
  bool clean = true;
  for (const auto& l : loaded) {
    out << "grammar " << l.decl.name << "\n";
    ExpandResult r;
    try {
      r = expand_grammar(l.decl, l.templates);
    } catch (const Error& e) {
      out << "  error: " << e.what() << "\n";
      clean = false;
      continue;
    }
    for (const auto& d : r.diagnostics) {
      out << "  diagnostic: " << d.message << "\n";
      clean = false;
    }
    out << "signatures:\n";
    for (const auto& rule : r.grammar.rules) out << "  " << (rule.entry ? "entry " : "") << signature(rule) << "\n";
    ParseTable table = build_table(r.grammar);
    out << "sets:\n";
    std::istringstream sets(print_sets(r.grammar, table.sets));
    for (std::string line; std::getline(sets, line);) out << "  " << line << "\n";
    auto foreign = validate_foreign_positions(r.grammar);
    for (const auto& d : foreign) out << "  diagnostic: " << d.message << "\n";
    clean = clean && foreign.empty() && table.ok();
    out << (table.ok() ? "table:\n" : "conflicts:\n");
    std::istringstream cells(print_table(r.grammar, table));
    for (std::string line; std::getline(cells, line);) out << "  " << line << "\n";
  }
  out << (clean ? "ok\n" : "failed\n");
  return clean ? 0 : 1;
}

int expand(const Options& o, std::ostream& out, std::ostream& err) {
  NameSupply names(o.seed);
  auto loaded = load_grammars(o, names);
  if (loaded.empty()) {
    err << "expand: no grammar given\n";
    return kUsage;
  }
  int status = 0;
  for (const auto& l : loaded) {
    ExpandResult r = expand_grammar(l.decl, l.templates);
    out << print_grammar(r.grammar);
    for (const auto& d : r.diagnostics) {
      err << "diagnostic: " << d.message << "\n";
      status = 1;
    }
  }
  return status;
}

TermPtr residual_of(const TermPtr& v, Evaluator& ev) {
  if (const auto* f = v->as<FragmentRef>()) return finalize_fragment(f->fragment, ev);
  return v;
}

int run_command(const Options& o, std::ostream& out, std::ostream& err) {
  NameSupply names(o.seed);
  std::vector<std::string> trace;
  EvalOptions eo;
  eo.step_budget = o.steps;
  eo.out = &out;
  eo.trace = &trace;
  Evaluator ev(names, eo);

  auto flush_trace = [&] {
    if (o.trace) {
      for (const auto& line : trace) err << line << "\n";
    }
  };

  std::vector<TermPtr> values;
  try {
    if (!o.script.empty()) {
      TermPtr script = read_core(slurp(o.script), names);
      values = ev.apply_value(script, {});
    } else {
      auto loaded = load_grammars(o, names);
      if (loaded.empty()) {
        err << "run: needs --grammar, --script or --pack\n";
        return kUsage;
      }
      LanguageRegistry reg;
      reg.register_native("Core", core_language());
      for (const auto& l : loaded) {
        for (const auto& w : reg.register_language(l.decl, l.templates)) err << "warning: " << w << "\n";
      }
      std::string lang = o.lang.empty() ? loaded.front().decl.name : o.lang;
      std::string entry = o.entry;
      if (entry.empty()) {
        const Language* l = reg.find(lang);
        if (!l) fail(ErrorKind::UnknownLanguage, "no language named " + lang);
        if (l->grammar.entries.empty()) fail(ErrorKind::UnknownEntry, lang + " has no entry rule");
        entry = l->grammar.entries.front();
      }
      std::string text;
      if (o.has_expr) {
        text = o.expr;
      } else if (!o.input.empty()) {
        text = slurp(o.input);
      } else {
        err << "run: needs --input or --expr\n";
        return kUsage;
      }
      ParseOptions po;
      po.trace = &trace;
      Parser parser(reg, ev, po);
      values = parser.parse(lang, entry, text);
    }

    if (o.invoke) {
      if (values.empty()) fail(ErrorKind::Action, "nothing to invoke");
      std::vector<TermPtr> args;
      for (const auto& w : o.with) args.push_back(read_core(w, names));
      TermPtr program = residual_of(values.back(), ev);
      ev.mark("invoke begin");
      values = ev.apply_value(program, args);
      ev.mark("invoke end");
    }

    if (o.emit == "residual") {
      if (values.empty()) fail(ErrorKind::Action, "no value to print as residual");
      TermPtr r = residual_of(values.back(), ev);
      out << (r->as<Lambda>() ? print_core(r) : print_value(r)) << "\n";
    } else if (o.emit == "trace") {
      for (const auto& line : trace) out << line << "\n";
    } else {
      for (const auto& v : values) out << print_value(v) << "\n";
    }
  } catch (...) {
    if (o.emit == "trace") {
      for (const auto& line : trace) out << line << "\n";
    }
    flush_trace();
    throw;
  }
  flush_trace();
  return 0;
}

}  // namespace

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax:
    case ErrorKind::DuplicateRuleSignatureMismatch:
    case ErrorKind::KindMismatch:
    case ErrorKind::UnknownSignatureQuery:
    case ErrorKind::UnresolvableDefault:
    case ErrorKind::EntryRuleWouldChange:
    case ErrorKind::Grammar:
    case ErrorKind::Ll1Conflict:
    case ErrorKind::Lex:
    case ErrorKind::UnexpectedToken:
    case ErrorKind::UnknownLanguage:
    case ErrorKind::UnknownEntry:
    case ErrorKind::Link:
      return 1;
    case ErrorKind::StepBudgetExceeded:
      return 3;
    default:
      return 2;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Workbench for staged, grammar-defined languages", "manydsl"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--grammar", o.grammars, "Grammar file, optionally NAME=PATH (repeatable)");
    sub->add_option("--pack", o.pack, "Example pack directory with a manifest.json");
    sub->add_option("--seed", o.seed, "Fresh-name seed");
  };
  auto* check_cmd = app.add_subcommand("check", "Validate grammars and print LL(1) sets and tables");
  auto* expand_cmd = app.add_subcommand("expand", "Print grammars after template and default expansion");
  auto* run_cmd = app.add_subcommand("run", "Parse an input with syntax-directed execution");
  common(check_cmd);
  common(expand_cmd);
  common(run_cmd);
  run_cmd->add_option("--lang", o.lang, "Language to start in");
  run_cmd->add_option("--entry", o.entry, "Entry rule");
  run_cmd->add_option("--input", o.input, "Input file");
  auto* expr = run_cmd->add_option("--expr", o.expr, "Inline input");
  auto* emit = run_cmd->add_option("--emit", o.emit, "value, residual or trace")
                   ->check(CLI::IsMember({"value", "residual", "trace"}));
  run_cmd->add_option("--steps", o.steps, "Evaluation step budget");
  run_cmd->add_flag("--trace", o.trace, "Print the parse and evaluation trace to stderr");
  run_cmd->add_option("--script", o.script, "Core-language script taking a return continuation");
  run_cmd->add_flag("--invoke", o.invoke, "Apply the resulting program");
  run_cmd->add_option("--with", o.with, "Core value passed when invoking (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsage;
  }
  o.has_expr = expr->count() > 0;
  o.emit_set = emit->count() > 0;

  try {
    apply_pack(o);
    if (check_cmd->parsed()) return check(o, out, err);
    if (expand_cmd->parsed()) return expand(o, out, err);
    return run_command(o, out, err);
  } catch (const MissingFile& m) {
    err << "cannot read " << m.path << "\n";
    return kNoInput;
  } catch (const ProgramExit& e) {
    out.flush();
    return e.status();
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.detail();
    if (e.pos().known()) err << " at " << e.pos().line << ":" << e.pos().column;
    err << "\n";
    return exit_code(e.kind());
  } catch (const nlohmann::json::exception& e) {
    err << "bad manifest: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace manydsl::cli
