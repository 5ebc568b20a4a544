#pragma once

// LL(1) analysis over expanded grammars.
//
// Terminals are strings: literals keep their quotes (`"-"`), token classes are
// bare (`Integer`), end of input is `$`. Actions and epsilon are transparent;
// a foreign term contributes no tokens and is not nullable.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "manydsl/grammar.hpp"

namespace manydsl {

inline constexpr const char* kEndOfInput = "$";

/// Terminal key of a literal or token use; empty for any other use.
std::string terminal_key(const TermUse& u);

struct Ll1Sets {
  std::set<std::string> nullable;
  std::map<std::string, std::set<std::string>> first;
  std::map<std::string, std::set<std::string>> follow;
};

Ll1Sets analyze(const Grammar& g);

/// FIRST of `body[from..]`; `nullable` reports whether the whole suffix derives the empty string.
std::set<std::string> first_of(const std::vector<TermUse>& body, std::size_t from, const Ll1Sets& sets,
                               bool& nullable);

struct ParseTable {
  Ll1Sets sets;
  std::map<std::pair<std::string, std::string>, std::string> cells;  ///< (rule, terminal) -> production id
  std::vector<Diagnostic> conflicts;

  bool ok() const { return conflicts.empty(); }
  const std::string* lookup(const std::string& rule, const std::string& terminal) const;
};

ParseTable build_table(const Grammar& g);

std::vector<Diagnostic> validate_foreign_positions(const Grammar& g);

std::string print_sets(const Grammar& g, const Ll1Sets& sets);
std::string print_table(const Grammar& g, const ParseTable& table);

}  // namespace manydsl
