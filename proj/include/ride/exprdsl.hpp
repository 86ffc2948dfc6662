#pragma once

// A small expression language for p(t), tau(t) and phi(t).
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := NUMBER | 't' | 'pi' | 'e' | IDENT '(' expr ')' | '(' expr ')' | '-' factor
//
// IDENT is one of sin, cos, exp, abs, floor. Unary minus binds to a factor, so
// "-t*t" is (-t)*t.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "ride/core.hpp"

namespace ride::expr {

enum class BinaryOp { add, sub, mul, div };
enum class Function { sin, cos, exp, abs, floor };
enum class Constant { pi, e };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct Variable {};
struct NamedConstant {
  Constant which;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Function fn;
  NodePtr arg;
};

struct Node {
  std::variant<Number, Variable, NamedConstant, Negate, Binary, Call> kind;
};

/// Immutable expression tree.
class Expr {
 public:
  explicit Expr(NodePtr root) : root_(std::move(root)) {}
  const Node& root() const noexcept { return *root_; }
  const NodePtr& ptr() const noexcept { return root_; }

 private:
  NodePtr root_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string message_;
  std::size_t offset_;
};

Expr parse_expr(std::string_view src);

/// Throws EvaluationError on division by zero.
double eval_expr(const Expr& ast, double t);

/// Fully parenthesised source text that parses back to the same tree.
std::string to_string(const Expr& ast);

bool structurally_equal(const Expr& a, const Expr& b);

/// a*t + b when the tree is affine in t with constant-foldable coefficients.
std::optional<AffineForm> affine_form(const Expr& ast);

/// Parse and wrap as a TimeFunction carrying its affine form and source.
TimeFunction compile(std::string_view src);

}  // namespace ride::expr
