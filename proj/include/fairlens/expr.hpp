#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fairlens/errors.hpp"

namespace fairlens::expr {

// Arithmetic over parent values and an optional noise symbol `eps`:
//   expr   := term (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | atom
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
//   func   := exp | tanh | sin | sigmoid
// Identifiers other than `eps` refer to parents of the node that owns the
// formula; they are resolved to slots when a model is built.

struct Ast {
  enum class Kind {
    Const, Var, Eps, Add, Sub, Mul, Div, Neg, Exp, Tanh, Sin, Sigmoid
  };
  struct Op {
    Kind kind;
    double value = 0.0;  // Const
    int name = -1;       // Var: index into `names`
    int a = -1, b = -1;  // operand slots
  };

  std::vector<Op> ops;  // root is the last entry
  std::vector<std::string> names;  // distinct identifiers, first-use order

  bool uses_eps() const;
  bool empty() const { return ops.empty(); }
};

// Thrown by parse_formula; `offset` is the byte position inside the formula
// string, so an enclosing parser can map it to file coordinates.
class FormulaSyntaxError : public Error {
 public:
  FormulaSyntaxError(std::string message, size_t offset)
      : Error(Errc::SyntaxError, std::move(message)), offset_(offset) {}
  size_t offset() const noexcept { return offset_; }

 private:
  size_t offset_;
};

Ast parse_formula(const std::string& text);

// Variable slots resolved against `parent_names`; unknown identifiers throw
// ParentMismatch.  Result: per-name parent slot, -1 reserved for eps.
std::vector<int> resolve_slots(const Ast& ast,
                               const std::vector<std::string>& parent_names,
                               const std::string& node_name);

// Evaluates with parent values indexed by the slots from resolve_slots.
double eval(const Ast& ast, const std::vector<int>& slots,
            const std::vector<double>& parent_values, double eps);

// Canonical text (round-trips through parse_formula).
std::string to_string(const Ast& ast);

}  // namespace fairlens::expr
