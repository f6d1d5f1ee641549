#pragma once

#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deltabk/dual.hpp"

namespace deltabk {

// Scalar expressions over named variables:
//
//   expr    := term (('+' | '-') term)*
//   term    := '-' term | product
//   product := factor (('*' | '/') factor)*
//   factor  := base ('^' factor)?            right-associative
//   base    := '-' base | number | ident | ident '(' expr ')' | '(' expr ')'
//
// A leading minus negates a whole product ("-E*x2" is -(E*x2)); '^' binds
// tighter than any minus. No implicit multiplication. The full grammar with
// lexical rules lives in docs/expressions.md.

enum class Func { sin, cos, tan, cot, exp, ln, sqrt, abs };

struct Expression;
using ExprPtr = std::shared_ptr<const Expression>;

struct Expression {
  enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };
  Kind kind;
  double number = 0.0;     // Kind::number
  std::string name;        // Kind::variable
  Func fn = Func::sin;     // Kind::call
  ExprPtr a, b;            // operands; unary/call use a only
};

// Throws SyntaxError with a byte offset into `text` and a description of what
// was expected.
ExprPtr parse_expression(std::string_view text);

using Bindings = std::map<std::string, DualScalar, std::less<>>;

// Tree-walking evaluation. Throws UnboundVariableError for names missing from
// the bindings and DomainError when evaluation leaves the mathematical domain
// or produces a non-finite component; domain errors carry the binding values.
DualScalar evaluate(const Expression& e, const Bindings& b);

std::set<std::string> free_variables(const Expression& e);

// Prints with the fewest parentheses that keep parse(to_string(e))
// structurally identical to e (guaranteed for every parseable AST).
std::string to_string(const Expression& e);

bool structurally_equal(const Expression& x, const Expression& y);

// An expression bound to a fixed slot layout, for hot paths: evaluation takes
// a span of slot values instead of a name map. Compilation resolves every
// variable against `slot_names` and throws UnboundVariableError on a miss.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  static CompiledExpr compile(const Expression& e,
                              const std::vector<std::string>& slot_names);
  DualScalar eval(std::span<const DualScalar> slots) const;

 private:
  enum class Op : unsigned char {
    push_num, push_slot, neg, add, sub, mul, div, pow, call
  };
  struct Step {
    Op op;
    int slot = 0;      // push_slot
    double num = 0.0;  // push_num
    Func fn = Func::sin;
  };
  std::vector<Step> steps_;  // postfix order
};

}  // namespace deltabk
