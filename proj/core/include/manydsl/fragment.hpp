#pragma once

// Fragment functions: opaque code builders with an arity (unfilled continuations).

#include <memory>

#include "manydsl/term.hpp"

namespace manydsl {

class Evaluator;

struct Fragment {
  TermPtr subject;  ///< lambda whose last `arity` parameters are continuation slots
  int arity = 0;
};
using FragmentPtr = std::shared_ptr<const Fragment>;

FragmentPtr build_fragment(long long arity, const TermPtr& subject);
FragmentPtr merge_fragments(const FragmentPtr& f, const FragmentPtr& g, NameSupply& names);
int fragment_arity(const FragmentPtr& f);

/// Fires the build-time chain and returns the residual `(!args)'[ft]'` lambda.
TermPtr finalize_fragment(const FragmentPtr& f, Evaluator& ev);

}  // namespace manydsl
