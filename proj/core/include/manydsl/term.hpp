#pragma once

// Term representation of the staged CPS calculus.
//
// Values and code share one representation: a value is any term in argument
// position. Every lambda carries an implicit staging parameter and every body
// carries exactly one stage expression; a body runs only while its stage
// expression evaluates to Stage::Top.
//
// Binder names produced by the reader and by instantiation are unique and have
// the form `base#n`. The printer strips the suffix and picks display names.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace manydsl {

enum class Stage : bool { Bottom = false, Top = true };

// ---------------------------------------------------------------------------
// stage expressions

struct StageExpr;
using StageExprPtr = std::shared_ptr<const StageExpr>;

struct StageExpr {
  enum class Op { Const, Ref, And, Or, Not };
  Op op = Op::Const;
  Stage value = Stage::Top;
  std::string name;
  StageExprPtr lhs;
  StageExprPtr rhs;

  static StageExprPtr constant(Stage s);
  static StageExprPtr ref(std::string name);
  static StageExprPtr conj(StageExprPtr l, StageExprPtr r);
  static StageExprPtr disj(StageExprPtr l, StageExprPtr r);
  static StageExprPtr negate(StageExprPtr e);
};

// ---------------------------------------------------------------------------
// terms and bodies

struct Term;
struct Body;
struct PrimNode;
struct Fragment;
using TermPtr = std::shared_ptr<const Term>;
using BodyPtr = std::shared_ptr<const Body>;
using PrimPtr = std::shared_ptr<const PrimNode>;

struct Param {
  std::string name;
  bool packed = false;
  bool operator==(const Param&) const = default;
};

struct Lambda {
  std::vector<Param> params;
  std::string stage;
  BodyPtr body;
};
struct Var { std::string name; };
struct IntLit { std::int64_t value = 0; };
struct StrLit { std::string value; };
struct BoolLit { bool value = false; };
struct StageLit { Stage value = Stage::Top; };
/// Elements may contain Splice terms naming a symbolic packed tail.
struct TupleLit { std::vector<TermPtr> elements; };
/// `!name` in argument position. After substitution the name is always symbolic.
struct Splice { std::string name; };
struct BuiltinRef { std::string name; };
struct FragmentRef { std::shared_ptr<const Fragment> fragment; };

/// Persistent insertion-ordered environment; insert returns a new map.
using EnvEntries = std::vector<std::pair<std::string, TermPtr>>;
struct EnvLit { std::shared_ptr<const EnvEntries> entries; };

/// Host callback. Returns the body that replaces the calling body, or nullptr to halt it.
using HostFn = std::function<BodyPtr(std::span<const TermPtr> args)>;
struct HostRef {
  std::string label;
  std::shared_ptr<const HostFn> fn;
};

/// Recursive reference introduced by `fix`; unrolled once per application.
struct RecRef {
  std::string name;
  TermPtr value;
};

struct Term {
  using Node = std::variant<Lambda, Var, IntLit, StrLit, BoolLit, StageLit, TupleLit, Splice,
                            BuiltinRef, FragmentRef, EnvLit, HostRef, RecRef>;
  Node node;

  template <typename T>
  [[nodiscard]] const T* as() const {
    return std::get_if<T>(&node);
  }
  template <typename T>
  [[nodiscard]] bool is() const {
    return std::holds_alternative<T>(node);
  }
};

struct Apply {
  TermPtr callee;
  std::vector<TermPtr> args;
};
struct Fix {
  std::string stage;
  std::string name;
  TermPtr value;
  BodyPtr rest;
};
/// Non-CPS primitive expression `"p" (x..)'[y]' rest`.
struct Prim {
  PrimPtr expr;
  std::vector<std::string> binds;
  std::string stage;
  BodyPtr rest;
};
/// Left behind when a host continuation consumes a body.
struct Halt {};

struct Body {
  using Form = std::variant<Apply, Fix, Prim, Halt>;
  StageExprPtr stage;
  Form form;
};

// ---------------------------------------------------------------------------
// primitive sublanguage

struct PrimLeaf { TermPtr term; };
struct PrimUnary {
  char op = '-';
  PrimPtr operand;
};
struct PrimBinary {
  std::string op;
  PrimPtr lhs;
  PrimPtr rhs;
};
struct PrimCall {
  std::string fn;
  std::vector<PrimPtr> args;
};
struct PrimMethod {
  PrimPtr object;
  std::string method;
  std::vector<PrimPtr> args;
};
struct PrimList { std::vector<PrimPtr> elements; };

struct PrimNode {
  std::variant<PrimLeaf, PrimUnary, PrimBinary, PrimCall, PrimMethod, PrimList> node;
};

// ---------------------------------------------------------------------------
// constructors

namespace mk {

TermPtr lambda(std::vector<Param> params, std::string stage, BodyPtr body);
TermPtr var(std::string name);
TermPtr integer(std::int64_t v);
TermPtr str(std::string v);
TermPtr boolean(bool v);
TermPtr stage(Stage v);
TermPtr tuple(std::vector<TermPtr> elements);
TermPtr splice(std::string name);
TermPtr builtin(std::string name);
TermPtr fragment(std::shared_ptr<const Fragment> f);
TermPtr env(EnvEntries entries);
TermPtr host(std::string label, HostFn fn);
TermPtr rec(std::string name, TermPtr value);

BodyPtr apply(StageExprPtr stage, TermPtr callee, std::vector<TermPtr> args);
BodyPtr fix(StageExprPtr stage, std::string stageParam, std::string name, TermPtr value, BodyPtr rest);
BodyPtr prim(StageExprPtr stage, PrimPtr expr, std::vector<std::string> binds, std::string stageParam,
             BodyPtr rest);
BodyPtr halt(StageExprPtr stage);

PrimPtr leaf(TermPtr t);
PrimPtr unary(char op, PrimPtr e);
PrimPtr binary(std::string op, PrimPtr l, PrimPtr r);
PrimPtr call(std::string fn, std::vector<PrimPtr> args);
PrimPtr method(PrimPtr object, std::string name, std::vector<PrimPtr> args);
PrimPtr list(std::vector<PrimPtr> elements);

}  // namespace mk

// ---------------------------------------------------------------------------
// names

/// Base of an internal name: `ft#12` -> `ft`.
std::string_view base_name(std::string_view name);

/// Source of unique binder names. Deterministic for a given seed.
class NameSupply {
 public:
  explicit NameSupply(std::uint64_t seed = 0) : next_(seed) {}
  std::string fresh(std::string_view base);

 private:
  std::uint64_t next_;
};

/// A value is symbolic when it is still a reference to an unsubstituted binder.
[[nodiscard]] bool is_symbolic(const TermPtr& t);

/// Number of bodies contained in a term, including nested lambdas.
[[nodiscard]] std::size_t term_size(const TermPtr& t);

}  // namespace manydsl
