#include "deltabk/expr.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

namespace deltabk {

namespace {

struct FuncName {
  std::string_view name;
  Func fn;
};

constexpr std::array<FuncName, 8> kFuncs{{{"sin", Func::sin},
                                          {"cos", Func::cos},
                                          {"tan", Func::tan},
                                          {"cot", Func::cot},
                                          {"exp", Func::exp},
                                          {"ln", Func::ln},
                                          {"sqrt", Func::sqrt},
                                          {"abs", Func::abs}}};

std::string_view func_name(Func f) {
  for (const auto& e : kFuncs)
    if (e.fn == f) return e.name;
  return "?";
}

ExprPtr make_number(double v) {
  return std::make_shared<Expression>(
      Expression{Expression::Kind::number, v, {}, Func::sin, nullptr, nullptr});
}

ExprPtr make_variable(std::string name) {
  return std::make_shared<Expression>(Expression{Expression::Kind::variable,
                                                 0.0, std::move(name),
                                                 Func::sin, nullptr, nullptr});
}

ExprPtr make_unary(Expression::Kind k, ExprPtr a) {
  return std::make_shared<Expression>(
      Expression{k, 0.0, {}, Func::sin, std::move(a), nullptr});
}

ExprPtr make_call(Func f, ExprPtr a) {
  return std::make_shared<Expression>(
      Expression{Expression::Kind::call, 0.0, {}, f, std::move(a), nullptr});
}

ExprPtr make_binary(Expression::Kind k, ExprPtr a, ExprPtr b) {
  return std::make_shared<Expression>(
      Expression{k, 0.0, {}, Func::sin, std::move(a), std::move(b)});
}

// Recursive-descent parser over the raw text; `pos_` tracks byte offsets for
// error reporting.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr run() {
    ExprPtr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      fail("expected an operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    std::ostringstream os;
    os << "parse error at offset " << pos_ << ": " << expected;
    throw SyntaxError(os.str(), pos_);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr parse_expr() {
    ExprPtr e = parse_term();
    for (;;) {
      if (consume('+'))
        e = make_binary(Expression::Kind::add, e, parse_term());
      else if (consume('-'))
        e = make_binary(Expression::Kind::sub, e, parse_term());
      else
        return e;
    }
  }

  ExprPtr parse_term() {
    if (consume('-')) return make_unary(Expression::Kind::negate, parse_term());
    return parse_product();
  }

  ExprPtr parse_product() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (consume('*'))
        e = make_binary(Expression::Kind::mul, e, parse_factor());
      else if (consume('/'))
        e = make_binary(Expression::Kind::div, e, parse_factor());
      else
        return e;
    }
  }

  ExprPtr parse_factor() {
    ExprPtr base = parse_base();
    if (consume('^'))
      return make_binary(Expression::Kind::pow, base, parse_factor());
    return base;
  }

  ExprPtr parse_base() {
    const char c = peek();
    if (c == '-') {
      ++pos_;
      return make_unary(Expression::Kind::negate, parse_base());
    }
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_expr();
      if (!consume(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (c == '.' && pos_ + 1 < text_.size() &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    fail("expected a number, identifier, '(', or '-'");
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-'))
        ++pos_;
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      } else {
        pos_ = mark;  // "2e" is the number 2 followed by identifier e
      }
    }
    const std::string slice(text_.substr(start, pos_ - start));
    return make_number(std::strtod(slice.c_str(), nullptr));
  }

  ExprPtr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (peek() == '(') {
      for (const auto& e : kFuncs)
        if (e.name == name) {
          ++pos_;  // '('
          ExprPtr arg = parse_expr();
          if (!consume(')')) fail("expected ')'");
          return make_call(e.fn, arg);
        }
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    return make_variable(std::move(name));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

DualScalar eval_node(const Expression& e, const Bindings& b) {
  switch (e.kind) {
    case Expression::Kind::number:
      return DualScalar(e.number);
    case Expression::Kind::variable: {
      const auto it = b.find(e.name);
      if (it == b.end()) throw UnboundVariableError(e.name);
      return it->second;
    }
    case Expression::Kind::negate:
      return -eval_node(*e.a, b);
    case Expression::Kind::add:
      return eval_node(*e.a, b) + eval_node(*e.b, b);
    case Expression::Kind::sub:
      return eval_node(*e.a, b) - eval_node(*e.b, b);
    case Expression::Kind::mul:
      return eval_node(*e.a, b) * eval_node(*e.b, b);
    case Expression::Kind::div:
      return eval_node(*e.a, b) / eval_node(*e.b, b);
    case Expression::Kind::pow:
      return pow(eval_node(*e.a, b), eval_node(*e.b, b));
    case Expression::Kind::call: {
      const DualScalar arg = eval_node(*e.a, b);
      switch (e.fn) {
        case Func::sin: return sin(arg);
        case Func::cos: return cos(arg);
        case Func::tan: return tan(arg);
        case Func::cot: return cot(arg);
        case Func::exp: return exp(arg);
        case Func::ln: return log(arg);
        case Func::sqrt: return sqrt(arg);
        case Func::abs: return abs(arg);
      }
      break;
    }
  }
  throw Error("corrupt expression node");
}

std::string binding_values(const Bindings& b) {
  std::ostringstream os;
  os << " with";
  bool first = true;
  for (const auto& [name, value] : b) {
    os << (first ? " " : ", ") << name << "=";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value.primal());
    os << buf;
    first = false;
  }
  return first ? std::string() : os.str();
}

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).run(); }

DualScalar evaluate(const Expression& e, const Bindings& b) {
  DualScalar result;
  try {
    result = eval_node(e, b);
  } catch (const DomainError& err) {
    throw DomainError(err.what() + binding_values(b));
  }
  if (!result.finite())
    throw DomainError("evaluation of '" + to_string(e) +
                      "' produced a non-finite value" + binding_values(b));
  return result;
}

namespace {

void collect_vars(const Expression& e, std::set<std::string>& out) {
  switch (e.kind) {
    case Expression::Kind::number:
      return;
    case Expression::Kind::variable:
      out.insert(e.name);
      return;
    default:
      if (e.a) collect_vars(*e.a, out);
      if (e.b) collect_vars(*e.b, out);
  }
}

// Shortest decimal form that parses back to the same double.
std::string print_number(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Binding strength for parenthesization; matches the grammar above.
int precedence(const Expression& e) {
  switch (e.kind) {
    case Expression::Kind::add:
    case Expression::Kind::sub: return 1;
    case Expression::Kind::negate: return 2;
    case Expression::Kind::mul:
    case Expression::Kind::div: return 3;
    case Expression::Kind::pow: return 4;
    default: return 5;
  }
}

void print_node(const Expression& e, std::ostringstream& os) {
  const auto wrap = [&os](const Expression& child, bool parens) {
    if (parens) os << '(';
    print_node(child, os);
    if (parens) os << ')';
  };
  switch (e.kind) {
    case Expression::Kind::number:
      os << print_number(e.number);
      return;
    case Expression::Kind::variable:
      os << e.name;
      return;
    case Expression::Kind::negate:
      os << '-';
      // The operand of a leading minus is a term, so only sums need parens.
      wrap(*e.a, precedence(*e.a) == 1);
      return;
    case Expression::Kind::add:
      wrap(*e.a, false);
      os << " + ";
      wrap(*e.b, precedence(*e.b) == 1);
      return;
    case Expression::Kind::sub:
      wrap(*e.a, false);
      os << " - ";
      wrap(*e.b, precedence(*e.b) <= 2);
      return;
    case Expression::Kind::mul:
      wrap(*e.a, precedence(*e.a) < 3);
      os << '*';
      wrap(*e.b, precedence(*e.b) < 3);
      return;
    case Expression::Kind::div:
      wrap(*e.a, precedence(*e.a) < 3);
      os << '/';
      wrap(*e.b, precedence(*e.b) <= 3);
      return;
    case Expression::Kind::pow:
      wrap(*e.a, precedence(*e.a) < 5);
      os << '^';
      // The exponent slot accepts '-' and chained '^'; anything else gets
      // parens.
      wrap(*e.b, precedence(*e.b) != 5 && precedence(*e.b) != 4 &&
                     e.b->kind != Expression::Kind::negate);
      return;
    case Expression::Kind::call:
      os << func_name(e.fn) << '(';
      print_node(*e.a, os);
      os << ')';
      return;
  }
}

}  // namespace

std::set<std::string> free_variables(const Expression& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

std::string to_string(const Expression& e) {
  std::ostringstream os;
  print_node(e, os);
  return os.str();
}

bool structurally_equal(const Expression& x, const Expression& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case Expression::Kind::number:
      return x.number == y.number;
    case Expression::Kind::variable:
      return x.name == y.name;
    case Expression::Kind::call:
      if (x.fn != y.fn) return false;
      break;
    default:
      break;
  }
  if (static_cast<bool>(x.a) != static_cast<bool>(y.a) ||
      static_cast<bool>(x.b) != static_cast<bool>(y.b))
    return false;
  if (x.a && !structurally_equal(*x.a, *y.a)) return false;
  if (x.b && !structurally_equal(*x.b, *y.b)) return false;
  return true;
}

CompiledExpr CompiledExpr::compile(const Expression& e,
                                   const std::vector<std::string>& slot_names) {
  CompiledExpr out;
  const std::function<void(const Expression&)> walk =
      [&](const Expression& node) {
        switch (node.kind) {
          case Expression::Kind::number:
            out.steps_.push_back({Op::push_num, 0, node.number, Func::sin});
            return;
          case Expression::Kind::variable: {
            for (std::size_t i = 0; i < slot_names.size(); ++i)
              if (slot_names[i] == node.name) {
                out.steps_.push_back(
                    {Op::push_slot, static_cast<int>(i), 0.0, Func::sin});
                return;
              }
            throw UnboundVariableError(node.name);
          }
          case Expression::Kind::negate:
            walk(*node.a);
            out.steps_.push_back({Op::neg, 0, 0.0, Func::sin});
            return;
          case Expression::Kind::call:
            walk(*node.a);
            out.steps_.push_back({Op::call, 0, 0.0, node.fn});
            return;
          default: {
            walk(*node.a);
            walk(*node.b);
            Op op = Op::add;
            if (node.kind == Expression::Kind::sub) op = Op::sub;
            if (node.kind == Expression::Kind::mul) op = Op::mul;
            if (node.kind == Expression::Kind::div) op = Op::div;
            if (node.kind == Expression::Kind::pow) op = Op::pow;
            out.steps_.push_back({op, 0, 0.0, Func::sin});
          }
        }
      };
  walk(e);
  return out;
}

DualScalar CompiledExpr::eval(std::span<const DualScalar> slots) const {
  // Stack machine over the postfix program; stack never outgrows the program.
  DualScalar stack[64];
  int top = 0;
  for (const Step& s : steps_) {
    switch (s.op) {
      case Op::push_num:
        stack[top++] = DualScalar(s.num);
        break;
      case Op::push_slot:
        stack[top++] = slots[static_cast<std::size_t>(s.slot)];
        break;
      case Op::neg:
        stack[top - 1] = -stack[top - 1];
        break;
      case Op::add:
        stack[top - 2] = stack[top - 2] + stack[top - 1];
        --top;
        break;
      case Op::sub:
        stack[top - 2] = stack[top - 2] - stack[top - 1];
        --top;
        break;
      case Op::mul:
        stack[top - 2] = stack[top - 2] * stack[top - 1];
        --top;
        break;
      case Op::div:
        stack[top - 2] = stack[top - 2] / stack[top - 1];
        --top;
        break;
      case Op::pow:
        stack[top - 2] = pow(stack[top - 2], stack[top - 1]);
        --top;
        break;
      case Op::call:
        switch (s.fn) {
          case Func::sin: stack[top - 1] = sin(stack[top - 1]); break;
          case Func::cos: stack[top - 1] = cos(stack[top - 1]); break;
          case Func::tan: stack[top - 1] = tan(stack[top - 1]); break;
          case Func::cot: stack[top - 1] = cot(stack[top - 1]); break;
          case Func::exp: stack[top - 1] = exp(stack[top - 1]); break;
          case Func::ln: stack[top - 1] = log(stack[top - 1]); break;
          case Func::sqrt: stack[top - 1] = sqrt(stack[top - 1]); break;
          case Func::abs: stack[top - 1] = abs(stack[top - 1]); break;
        }
        break;
    }
    if (top >= 63) throw Error("expression too deep to evaluate");
  }
  return stack[0];
}

}  // namespace deltabk
