#include "ride/exprdsl.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ride::expr {

ParseError::ParseError(const std::string& message, std::size_t offset)
    : Error("syntax error at offset " + std::to_string(offset) + ": " + message),
      message_(message),
      offset_(offset) {}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

NodePtr make(auto kind) { return std::make_shared<const Node>(Node{std::move(kind)}); }

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    skip_space();
    if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
    auto root = expression();
    skip_space();
    if (pos_ != src_.size()) {
      throw ParseError("unexpected trailing input '" + std::string(src_.substr(pos_)) + "'", pos_);
    }
    return Expr(std::move(root));
  }

 private:
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      const char c = peek();
      if (c != '+' && c != '-') return lhs;
      ++pos_;
      auto rhs = term();
      lhs = make(Binary{c == '+' ? BinaryOp::add : BinaryOp::sub, lhs, rhs});
    }
  }

  NodePtr term() {
    auto lhs = factor();
    for (;;) {
      const char c = peek();
      if (c != '*' && c != '/') return lhs;
      ++pos_;
      auto rhs = factor();
      lhs = make(Binary{c == '*' ? BinaryOp::mul : BinaryOp::div, lhs, rhs});
    }
  }

  NodePtr factor() {
    const char c = peek();
    if (c == '\0') throw ParseError("expected an operand, found end of input", pos_);
    if (c == '-') {
      ++pos_;
      return make(Negate{factor()});
    }
    if (c == '(') {
      ++pos_;
      auto inner = expression();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  void expect(char c) {
    if (peek() != c) {
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
    ++pos_;
  }

  NodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double value = 0.0;
    const auto text = src_.substr(start, pos_ - start);
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw ParseError("malformed number '" + std::string(text) + "'", start);
    }
    return make(Number{value});
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string name(src_.substr(start, pos_ - start));
    if (name == "t") return make(Variable{});
    if (name == "pi") return make(NamedConstant{Constant::pi});
    if (name == "e") return make(NamedConstant{Constant::e});

    std::optional<Function> fn;
    if (name == "sin")
      fn = Function::sin;
    else if (name == "cos")
      fn = Function::cos;
    else if (name == "exp")
      fn = Function::exp;
    else if (name == "abs")
      fn = Function::abs;
    else if (name == "floor")
      fn = Function::floor;
    if (!fn) throw ParseError("unknown identifier '" + name + "'", start);

    expect('(');
    auto arg = expression();
    expect(')');
    return make(Call{*fn, std::move(arg)});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

double apply(Function fn, double x) {
  switch (fn) {
    case Function::sin:
      return std::sin(x);
    case Function::cos:
      return std::cos(x);
    case Function::exp:
      return std::exp(x);
    case Function::abs:
      return std::abs(x);
    case Function::floor:
      return std::floor(x);
  }
  return x;
}

double constant_value(Constant c) { return c == Constant::pi ? std::numbers::pi : std::numbers::e; }

const char* function_name(Function fn) {
  switch (fn) {
    case Function::sin:
      return "sin";
    case Function::cos:
      return "cos";
    case Function::exp:
      return "exp";
    case Function::abs:
      return "abs";
    case Function::floor:
      return "floor";
  }
  return "?";
}

double eval_node(const Node& node, double t) {
  return std::visit(overloaded{
                        [](const Number& n) { return n.value; },
                        [t](const Variable&) { return t; },
                        [](const NamedConstant& c) { return constant_value(c.which); },
                        [t](const Negate& n) { return -eval_node(*n.operand, t); },
                        [t](const Binary& b) {
                          const double l = eval_node(*b.lhs, t);
                          const double r = eval_node(*b.rhs, t);
                          switch (b.op) {
                            case BinaryOp::add:
                              return l + r;
                            case BinaryOp::sub:
                              return l - r;
                            case BinaryOp::mul:
                              return l * r;
                            case BinaryOp::div:
                              if (r == 0.0) throw EvaluationError("division by zero", t);
                              return l / r;
                          }
                          return 0.0;
                        },
                        [t](const Call& c) { return apply(c.fn, eval_node(*c.arg, t)); },
                    },
                    node.kind);
}

void print(const Node& node, std::ostringstream& out) {
  std::visit(overloaded{
                 [&](const Number& n) { out << n.value; },
                 [&](const Variable&) { out << 't'; },
                 [&](const NamedConstant& c) { out << (c.which == Constant::pi ? "pi" : "e"); },
                 [&](const Negate& n) {
                   out << '-';
                   print(*n.operand, out);
                 },
                 [&](const Binary& b) {
                   static constexpr char ops[] = {'+', '-', '*', '/'};
                   out << '(';
                   print(*b.lhs, out);
                   out << ' ' << ops[static_cast<int>(b.op)] << ' ';
                   print(*b.rhs, out);
                   out << ')';
                 },
                 [&](const Call& c) {
                   out << function_name(c.fn) << '(';
                   print(*c.arg, out);
                   out << ')';
                 },
             },
             node.kind);
}

bool equal_nodes(const Node& a, const Node& b) {
  if (a.kind.index() != b.kind.index()) return false;
  return std::visit(
      overloaded{
          [&](const Number& n) { return n.value == std::get<Number>(b.kind).value; },
          [](const Variable&) { return true; },
          [&](const NamedConstant& c) { return c.which == std::get<NamedConstant>(b.kind).which; },
          [&](const Negate& n) {
            return equal_nodes(*n.operand, *std::get<Negate>(b.kind).operand);
          },
          [&](const Binary& x) {
            const auto& y = std::get<Binary>(b.kind);
            return x.op == y.op && equal_nodes(*x.lhs, *y.lhs) && equal_nodes(*x.rhs, *y.rhs);
          },
          [&](const Call& x) {
            const auto& y = std::get<Call>(b.kind);
            return x.fn == y.fn && equal_nodes(*x.arg, *y.arg);
          },
      },
      a.kind);
}

std::optional<AffineForm> affine_node(const Node& node) {
  return std::visit(
      overloaded{
          [](const Number& n) -> std::optional<AffineForm> { return AffineForm{0.0, n.value}; },
          [](const Variable&) -> std::optional<AffineForm> { return AffineForm{1.0, 0.0}; },
          [](const NamedConstant& c) -> std::optional<AffineForm> {
            return AffineForm{0.0, constant_value(c.which)};
          },
          [](const Negate& n) -> std::optional<AffineForm> {
            auto a = affine_node(*n.operand);
            if (!a) return std::nullopt;
            return AffineForm{-a->slope, -a->intercept};
          },
          [](const Binary& b) -> std::optional<AffineForm> {
            auto l = affine_node(*b.lhs);
            auto r = affine_node(*b.rhs);
            if (!l || !r) return std::nullopt;
            switch (b.op) {
              case BinaryOp::add:
                return AffineForm{l->slope + r->slope, l->intercept + r->intercept};
              case BinaryOp::sub:
                return AffineForm{l->slope - r->slope, l->intercept - r->intercept};
              case BinaryOp::mul:
                if (l->is_constant())
                  return AffineForm{l->intercept * r->slope, l->intercept * r->intercept};
                if (r->is_constant())
                  return AffineForm{r->intercept * l->slope, r->intercept * l->intercept};
                return std::nullopt;
              case BinaryOp::div:
                if (!r->is_constant() || r->intercept == 0.0) return std::nullopt;
                return AffineForm{l->slope / r->intercept, l->intercept / r->intercept};
            }
            return std::nullopt;
          },
          [](const Call& c) -> std::optional<AffineForm> {
            auto a = affine_node(*c.arg);
            if (!a || !a->is_constant()) return std::nullopt;
            return AffineForm{0.0, apply(c.fn, a->intercept)};
          },
      },
      node.kind);
}

}  // namespace

Expr parse_expr(std::string_view src) { return Parser(src).parse(); }

double eval_expr(const Expr& ast, double t) { return eval_node(ast.root(), t); }

std::string to_string(const Expr& ast) {
  std::ostringstream out;
  out.precision(17);
  print(ast.root(), out);
  return out.str();
}

bool structurally_equal(const Expr& a, const Expr& b) { return equal_nodes(a.root(), b.root()); }

std::optional<AffineForm> affine_form(const Expr& ast) { return affine_node(ast.root()); }

TimeFunction compile(std::string_view src) {
  auto ast = parse_expr(src);
  auto affine = affine_form(ast);
  return TimeFunction([ast = std::move(ast)](double t) { return eval_expr(ast, t); }, affine,
                      std::string(src));
}

}  // namespace ride::expr
