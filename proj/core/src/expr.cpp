#include "qsplit/expr.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qsplit/error.hpp"

namespace qsplit {

namespace {

constexpr int kMaxParserRecursion = 512;

struct FunctionName {
  std::string_view name;
  Function function;
};

constexpr std::array<FunctionName, 6> kFunctions{{
    {"sin", Function::sin},
    {"cos", Function::cos},
    {"exp", Function::exp},
    {"tanh", Function::tanh},
    {"abs", Function::abs},
    {"sqrt", Function::sqrt},
}};

std::string_view function_name(Function f) {
  for (const auto& entry : kFunctions) {
    if (entry.function == f) return entry.name;
  }
  return "?";
}

std::string_view variable_name(Variable v) {
  switch (v) {
    case Variable::x1: return "x1";
    case Variable::x2: return "x2";
    case Variable::x3: return "x3";
    case Variable::t: return "t";
    case Variable::pi: return "pi";
  }
  return "?";
}

char op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return '+';
    case BinaryOp::sub: return '-';
    case BinaryOp::mul: return '*';
    case BinaryOp::div: return '/';
    case BinaryOp::pow: return '^';
  }
  return '?';
}

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  Parser(std::string_view text, int dimension) : text_(text), dimension_(dimension) {}

  ExprNodePtr parse() {
    skip_space();
    if (pos_ >= text_.size()) {
      throw ParseError(pos_, "empty expression", {"number", "identifier", "'('", "'-'"});
    }
    auto root = expr();
    skip_space();
    if (pos_ < text_.size()) {
      if (text_[pos_] == ',') throw ParseError(pos_, "wrong arity: functions take one argument");
      throw ParseError(pos_, std::string("unexpected '") + text_[pos_] + "'",
                       {"operator", "end of input"});
    }
    return root;
  }

 private:
  struct RecursionGuard {
    explicit RecursionGuard(Parser& p) : parser(p) {
      if (++parser.recursion_ > kMaxParserRecursion) {
        throw ParseError(parser.pos_, "expression nested too deeply");
      }
    }
    ~RecursionGuard() { --parser.recursion_; }
    Parser& parser;
  };

  void skip_space() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprNodePtr make_binary(BinaryOp op, ExprNodePtr lhs, ExprNodePtr rhs, std::size_t at) {
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::binary;
    node->op = op;
    node->depth = 1 + std::max(lhs->depth, rhs->depth);
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    check_depth(*node, at);
    return node;
  }

  ExprNodePtr make_unary(ExprNode::Kind kind, Function f, ExprNodePtr operand, std::size_t at) {
    auto node = std::make_shared<ExprNode>();
    node->kind = kind;
    node->function = f;
    node->depth = 1 + operand->depth;
    node->lhs = std::move(operand);
    check_depth(*node, at);
    return node;
  }

  void check_depth(const ExprNode& node, std::size_t at) const {
    if (node.depth > kMaxExprDepth) {
      throw ParseError(at, "expression tree deeper than " + std::to_string(kMaxExprDepth));
    }
  }

  ExprNodePtr expr() {
    RecursionGuard guard(*this);
    auto lhs = term();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('+')) {
        lhs = make_binary(BinaryOp::add, lhs, term(), at);
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::sub, lhs, term(), at);
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr term() {
    auto lhs = factor();
    for (;;) {
      skip_space();
      const std::size_t at = pos_;
      if (accept('*')) {
        lhs = make_binary(BinaryOp::mul, lhs, factor(), at);
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::div, lhs, factor(), at);
      } else {
        return lhs;
      }
    }
  }

  ExprNodePtr factor() {
    RecursionGuard guard(*this);
    auto base = unary();
    skip_space();
    const std::size_t at = pos_;
    if (accept('^')) return make_binary(BinaryOp::pow, base, factor(), at);
    return base;
  }

  ExprNodePtr unary() {
    skip_space();
    const std::size_t at = pos_;
    if (accept('-')) return make_unary(ExprNode::Kind::negate, Function::sin, atom(), at);
    return atom();
  }

  ExprNodePtr atom() {
    skip_space();
    if (pos_ >= text_.size()) {
      throw ParseError(pos_, "unexpected end of input", {"number", "identifier", "'('"});
    }
    const char c = text_[pos_];
    if (is_digit(c) || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    if (c == '(') {
      const std::size_t open = pos_;
      ++pos_;
      auto inner = expr();
      if (!accept(')')) {
        skip_space();
        throw ParseError(pos_, "unbalanced parenthesis opened at offset " + std::to_string(open),
                         {"')'"});
      }
      return inner;
    }
    throw ParseError(pos_, std::string("unexpected '") + c + "'", {"number", "identifier", "'('"});
  }

  ExprNodePtr number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    bool digits = false;
    while (end < text_.size() && is_digit(text_[end])) ++end, digits = true;
    if (end < text_.size() && text_[end] == '.') {
      ++end;
      while (end < text_.size() && is_digit(text_[end])) ++end, digits = true;
    }
    if (!digits) throw ParseError(start, "malformed number", {"digit"});
    if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
      std::size_t exp_end = end + 1;
      if (exp_end < text_.size() && (text_[exp_end] == '+' || text_[exp_end] == '-')) ++exp_end;
      if (exp_end >= text_.size() || !is_digit(text_[exp_end])) {
        throw ParseError(exp_end, "malformed exponent", {"digit"});
      }
      while (exp_end < text_.size() && is_digit(text_[exp_end])) ++exp_end;
      end = exp_end;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + end, value);
    if (ec == std::errc::result_out_of_range || !std::isfinite(value)) {
      throw ParseError(start, "number out of range");
    }
    if (ec != std::errc() || ptr != text_.data() + end) throw ParseError(start, "malformed number");
    pos_ = end;
    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::number;
    node->number = value;
    return node;
  }

  ExprNodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);

    for (const auto& entry : kFunctions) {
      if (entry.name != name) continue;
      skip_space();
      if (!accept('(')) throw ParseError(pos_, "function '" + std::string(name) + "' needs an argument", {"'('"});
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ')') {
        throw ParseError(pos_, "wrong arity: '" + std::string(name) + "' takes one argument");
      }
      auto arg = expr();
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        throw ParseError(pos_, "wrong arity: '" + std::string(name) + "' takes one argument");
      }
      if (!accept(')')) throw ParseError(pos_, "unclosed function call", {"')'"});
      return make_unary(ExprNode::Kind::call, entry.function, std::move(arg), start);
    }

    auto node = std::make_shared<ExprNode>();
    node->kind = ExprNode::Kind::variable;
    if (name == "t") {
      node->variable = Variable::t;
    } else if (name == "pi") {
      node->variable = Variable::pi;
    } else if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '3' &&
               name[1] - '0' <= dimension_) {
      node->variable = static_cast<Variable>(name[1] - '1');
    } else {
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == '(') {
        throw ParseError(start, "unknown function '" + std::string(name) + "'");
      }
      throw ParseError(start, "unknown identifier '" + std::string(name) + "' for dimension " +
                                  std::to_string(dimension_));
    }
    return node;
  }

  std::string_view text_;
  int dimension_;
  std::size_t pos_ = 0;
  int recursion_ = 0;
};

struct EvalContext {
  std::span<const double> x;
  double t;
};

[[noreturn]] void eval_fail(const char* what, const EvalContext& ctx) {
  throw EvalError(what, std::vector<double>(ctx.x.begin(), ctx.x.end()), ctx.t);
}

double eval_node(const ExprNode& node, const EvalContext& ctx) {
  switch (node.kind) {
    case ExprNode::Kind::number:
      return node.number;
    case ExprNode::Kind::variable:
      switch (node.variable) {
        case Variable::t: return ctx.t;
        case Variable::pi: return std::numbers::pi;
        default: return ctx.x[static_cast<std::size_t>(node.variable)];
      }
    case ExprNode::Kind::negate:
      return -eval_node(*node.lhs, ctx);
    case ExprNode::Kind::call: {
      const double a = eval_node(*node.lhs, ctx);
      switch (node.function) {
        case Function::sin: return std::sin(a);
        case Function::cos: return std::cos(a);
        case Function::exp: {
          const double r = std::exp(a);
          if (!std::isfinite(r)) eval_fail("exp overflow", ctx);
          return r;
        }
        case Function::tanh: return std::tanh(a);
        case Function::abs: return std::fabs(a);
        case Function::sqrt:
          if (a < 0.0) eval_fail("sqrt of a negative number", ctx);
          return std::sqrt(a);
      }
      return 0.0;
    }
    case ExprNode::Kind::binary: {
      const double a = eval_node(*node.lhs, ctx);
      const double b = eval_node(*node.rhs, ctx);
      double r = 0.0;
      switch (node.op) {
        case BinaryOp::add: r = a + b; break;
        case BinaryOp::sub: r = a - b; break;
        case BinaryOp::mul: r = a * b; break;
        case BinaryOp::div:
          if (b == 0.0) eval_fail("division by zero", ctx);
          r = a / b;
          break;
        case BinaryOp::pow:
          r = std::pow(a, b);
          break;
      }
      if (!std::isfinite(r)) eval_fail("non-finite result", ctx);
      return r;
    }
  }
  return 0.0;
}

void print_node(const ExprNode& node, std::string& out) {
  switch (node.kind) {
    case ExprNode::Kind::number: {
      std::array<char, 32> buf{};
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), node.number);
      out.append(buf.data(), res.ptr);
      return;
    }
    case ExprNode::Kind::variable:
      out += variable_name(node.variable);
      return;
    case ExprNode::Kind::negate:
      out += "-(";
      print_node(*node.lhs, out);
      out += ')';
      return;
    case ExprNode::Kind::call:
      out += function_name(node.function);
      out += '(';
      print_node(*node.lhs, out);
      out += ')';
      return;
    case ExprNode::Kind::binary:
      out += '(';
      print_node(*node.lhs, out);
      out += op_symbol(node.op);
      print_node(*node.rhs, out);
      out += ')';
      return;
  }
}

bool uses_node(const ExprNode& node, Variable v) {
  switch (node.kind) {
    case ExprNode::Kind::number: return false;
    case ExprNode::Kind::variable: return node.variable == v;
    case ExprNode::Kind::negate:
    case ExprNode::Kind::call: return uses_node(*node.lhs, v);
    case ExprNode::Kind::binary: return uses_node(*node.lhs, v) || uses_node(*node.rhs, v);
  }
  return false;
}

}  // namespace

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprNode::Kind::number:
      return std::bit_cast<std::uint64_t>(a.number) == std::bit_cast<std::uint64_t>(b.number);
    case ExprNode::Kind::variable:
      return a.variable == b.variable;
    case ExprNode::Kind::negate:
      return structurally_equal(*a.lhs, *b.lhs);
    case ExprNode::Kind::call:
      return a.function == b.function && structurally_equal(*a.lhs, *b.lhs);
    case ExprNode::Kind::binary:
      return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
  }
  return false;
}

Expr::Expr(ExprNodePtr root, int dimension) : root_(std::move(root)), dimension_(dimension) {}

double Expr::evaluate(std::span<const double> x, double t) const {
  return eval_node(*root_, EvalContext{x, t});
}

std::string Expr::to_string() const {
  std::string out;
  if (root_) print_node(*root_, out);
  return out;
}

bool Expr::uses(Variable v) const { return root_ && uses_node(*root_, v); }

int Expr::depth() const { return root_ ? root_->depth : 0; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.dimension_ != b.dimension_) return false;
  if (!a.root_ || !b.root_) return a.root_ == b.root_;
  return structurally_equal(*a.root_, *b.root_);
}

Expr parse_expression(std::string_view text, int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw Error(ErrorCode::invalid_argument, "expression dimension must be 1, 2 or 3");
  }
  if (text.size() > kMaxExprBytes) {
    throw ParseError(kMaxExprBytes, "expression longer than 64 KiB");
  }
  Parser parser(text, dimension);
  return Expr(parser.parse(), dimension);
}

}  // namespace qsplit
