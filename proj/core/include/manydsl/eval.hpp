#pragma once

// Staged evaluation of the core calculus.
//
// A body is active when its stage expression evaluates to Stage::Top. Each
// step executes the first active, runnable body in post-order; bodies whose
// operands are still symbolic are skipped until substitution makes them
// concrete. Evaluation never looks inside fragment or environment values.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "manydsl/term.hpp"

namespace manydsl {

using StageBindings = std::unordered_map<std::string, TermPtr>;

/// Stage evaluation against explicit bindings. Unbound references throw UnboundStageName.
Stage eval_stage(const StageExprPtr& expr, const StageBindings& bindings);

/// Stage evaluation inside a term: references that survived substitution are symbolic.
Stage eval_stage_symbolic(const StageExprPtr& expr);

struct EvalOptions {
  std::size_t step_budget = 1'000'000;
  std::ostream* out = nullptr;          ///< target of `print`; null discards
  std::vector<std::string>* trace = nullptr;  ///< prim executions and phase markers
};

/// Capture-avoiding substitution; every binder inside the target is renamed fresh.
/// Splices of names mapped to tuples are flattened into the surrounding list.
TermPtr substitute(const TermPtr& term, const StageBindings& map, NameSupply& names);
BodyPtr substitute(const BodyPtr& body, const StageBindings& map, NameSupply& names);

class Evaluator {
 public:
  Evaluator(NameSupply& names, EvalOptions options = {});

  /// Runs until no active body is left and returns the normal form.
  TermPtr run_to_normal(const TermPtr& term);
  BodyPtr run_body(const BodyPtr& body);

  /// Calls `f` with `args` plus a host return continuation and yields what return received.
  std::vector<TermPtr> apply_value(const TermPtr& f, const std::vector<TermPtr>& args);

  void mark(const std::string& line);

  NameSupply& names() { return names_; }
  const EvalOptions& options() const { return options_; }
  std::size_t steps_taken() const { return total_steps_; }

 private:
  NameSupply& names_;
  EvalOptions options_;
  std::size_t total_steps_ = 0;
};

/// Renders a runtime value: ints, quoted strings, `[a,b]` tuples, env as `[["k",v],...]`.
std::string print_value(const TermPtr& value);

}  // namespace manydsl
