#pragma once

// Textual reader and printer for the core calculus.
//
// Accepted surface forms (quotes around stage names are optional):
//
//   (x, y, !rest)'[s]' { body }     lambda; `'[s]'` omitted means a fresh stage
//   '@e:' callee a1 a2 ...          application staged on e
//   body without '@e:'              natural staging on the enclosing stage parameter
//   f a (x)'[y]' rest               last-argument lambda, body is the rest
//   "p" (x)'[y]' rest               non-CPS primitive expression
//   let '[y]' x v rest              let binding
//   let f(x, k)'[s]' { ... } rest   local function definition
//   fix '[y]' x v rest              fix-point
//   !t                              tuple splice;  [a, b] tuple;  env{"k": v} environment
//   always never true false 42 -1 "str"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "manydsl/term.hpp"

namespace manydsl {

/// Parses a complete core program; the text must hold exactly one term.
TermPtr read_core(std::string_view text, NameSupply& names);

/// Parses one term starting at `offset` and reports where it ended.
struct TermRead {
  TermPtr term;
  std::size_t end = 0;
};
TermRead read_core_term_at(std::string_view text, std::size_t offset, NameSupply& names);

/// Parses a lambda body that starts at `offset` and stops before the matching `}`.
/// The returned lambda binds `params` and the stage parameter `stage`.
struct LambdaRead {
  TermPtr lambda;
  std::size_t end = 0;
};
LambdaRead read_lambda_body_at(std::string_view text, std::size_t offset, const std::vector<std::string>& params,
                               std::string_view stage, NameSupply& names);

/// Parses a primitive expression. `resolve` maps source names to terms and may throw.
PrimPtr read_prim(std::string_view text, const std::function<TermPtr(std::string_view)>& resolve);

std::string print_core(const TermPtr& term);
std::string print_body(const BodyPtr& body);
std::string print_prim(const PrimPtr& prim);
std::string print_stage(const StageExprPtr& stage);

bool alpha_equal(const TermPtr& a, const TermPtr& b);
bool alpha_equal(const BodyPtr& a, const BodyPtr& b);

/// Names resolved to builtins when they are not bound by the program.
bool is_builtin_name(std::string_view name);

}  // namespace manydsl
