#include "gsid/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "gsid/common.hpp"

namespace gsid {

namespace {

class Parser {
 public:
  Parser(std::string_view src, Expression& out) : src_(src), out_(out) {}

  int parse_all() {
    const int root = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      fail(pos_ < src_.size() ? "expected '" + std::string(1, c) + "'"
                              : "unexpected end of input, expected '" + std::string(1, c) + "'");
    }
  }

  int binary(Op op, int lhs, int rhs) {
    Expression::Node n;
    n.op = op;
    n.lhs = lhs;
    n.rhs = rhs;
    return out_.add_node(n);
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return binary(Op::Neg, parse_unary(), -1);
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return binary(Op::Pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t k = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++k;
      }
      return k;
    };
    std::size_t nd = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      const std::size_t save = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    const std::string text(src_.substr(start, pos_ - start));
    Expression::Node n;
    n.op = Op::Number;
    n.number = std::strtod(text.c_str(), nullptr);
    return out_.add_node(n);
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view id = src_.substr(start, pos_ - start);
    if (id == "sin" || id == "cos" || id == "exp") {
      const Op op = id == "sin" ? Op::Sin : (id == "cos" ? Op::Cos : Op::Exp);
      expect('(');
      const int arg = parse_expr();
      expect(')');
      return binary(op, arg, -1);
    }
    if (id.size() >= 3 && (id[0] == 'x' || id[0] == 'y') && id[1] == '_') {
      const std::string_view num = id.substr(2);
      bool all_digits = true;
      for (char ch : num) all_digits = all_digits && std::isdigit(static_cast<unsigned char>(ch));
      const int idx = all_digits && num.size() < 9 ? std::atoi(std::string(num).c_str()) : 0;
      if (idx >= 1) {
        Expression::Node n;
        n.op = id[0] == 'x' ? Op::VarX : Op::VarY;
        n.index = idx;
        return out_.add_node(n);
      }
    }
    throw ParseError("unknown identifier '" + std::string(id) + "'", start);
  }

  std::string_view src_;
  Expression& out_;
  std::size_t pos_ = 0;
};

bool nodes_equal(const Expression& a, int ia, const Expression& b, int ib) {
  if (ia < 0 || ib < 0) return ia == ib;
  const auto& na = a.nodes()[ia];
  const auto& nb = b.nodes()[ib];
  if (na.op != nb.op) return false;
  switch (na.op) {
    case Op::Number:
      return na.number == nb.number;
    case Op::VarX:
    case Op::VarY:
      return na.index == nb.index;
    default:
      return nodes_equal(a, na.lhs, b, nb.lhs) && nodes_equal(a, na.rhs, b, nb.rhs);
  }
}

std::string bindings(std::span<const double> x, std::span<const double> z) {
  std::string s;
  for (std::size_t j = 0; j < x.size(); ++j) {
    s += (s.empty() ? "" : ", ") + ("x_" + std::to_string(j + 1)) + "=" + format_double(x[j]);
  }
  for (std::size_t j = 0; j < z.size(); ++j) {
    s += (s.empty() ? "" : ", ") + ("y_" + std::to_string(j + 1)) + "=" + format_double(z[j]);
  }
  return s;
}

}  // namespace

int Expression::add_node(Node n) {
  if (n.op == Op::VarX && n.index > max_x_) max_x_ = n.index;
  if (n.op == Op::VarY && n.index > max_y_) max_y_ = n.index;
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

void Expression::set_root(int r) { root_ = r; }

Expression Expression::parse(std::string_view source) {
  Expression e;
  Parser p(source, e);
  e.root_ = p.parse_all();
  return e;
}

bool operator==(const Expression& a, const Expression& b) { return nodes_equal(a, a.root_, b, b.root_); }

void Expression::print_node(int id, std::string& out) const {
  const Node& n = nodes_[id];
  auto bin = [&](const char* sym) {
    out += '(';
    print_node(n.lhs, out);
    out += sym;
    print_node(n.rhs, out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    print_node(n.lhs, out);
    out += ')';
  };
  switch (n.op) {
    case Op::Number:
      out += n.number < 0 ? "(" + format_double(n.number) + ")" : format_double(n.number);
      break;
    case Op::VarX:
      out += "x_" + std::to_string(n.index);
      break;
    case Op::VarY:
      out += "y_" + std::to_string(n.index);
      break;
    case Op::Neg:
      out += "(-";
      print_node(n.lhs, out);
      out += ')';
      break;
    case Op::Add: bin(" + "); break;
    case Op::Sub: bin(" - "); break;
    case Op::Mul: bin(" * "); break;
    case Op::Div: bin(" / "); break;
    case Op::Pow: bin(" ^ "); break;
    case Op::Sin: call("sin"); break;
    case Op::Cos: call("cos"); break;
    case Op::Exp: call("exp"); break;
  }
}

std::string Expression::to_string() const {
  std::string out;
  if (root_ >= 0) print_node(root_, out);
  return out;
}

double Expression::eval_node(int id, std::span<const double> x, std::span<const double> z) const {
  const Node& n = nodes_[id];
  auto domain = [&](const std::string& what) -> double {
    throw DomainError("expression domain error: " + what + " with " + bindings(x, z));
  };
  switch (n.op) {
    case Op::Number:
      return n.number;
    case Op::VarX:
      if (static_cast<std::size_t>(n.index) > x.size()) domain("x_" + std::to_string(n.index) + " unbound");
      return x[n.index - 1];
    case Op::VarY:
      if (static_cast<std::size_t>(n.index) > z.size()) domain("y_" + std::to_string(n.index) + " unbound");
      return z[n.index - 1];
    case Op::Neg:
      return -eval_node(n.lhs, x, z);
    case Op::Add:
      return eval_node(n.lhs, x, z) + eval_node(n.rhs, x, z);
    case Op::Sub:
      return eval_node(n.lhs, x, z) - eval_node(n.rhs, x, z);
    case Op::Mul:
      return eval_node(n.lhs, x, z) * eval_node(n.rhs, x, z);
    case Op::Div: {
      const double num = eval_node(n.lhs, x, z);
      const double den = eval_node(n.rhs, x, z);
      if (den == 0.0) return domain("division by zero");
      return num / den;
    }
    case Op::Pow: {
      const double base = eval_node(n.lhs, x, z);
      const double ex = eval_node(n.rhs, x, z);
      if (base == 0.0 && ex < 0.0) return domain("0^" + format_double(ex));
      if (base < 0.0 && ex != std::trunc(ex)) {
        return domain(format_double(base) + "^" + format_double(ex) + " (non-integer exponent)");
      }
      return std::pow(base, ex);
    }
    case Op::Sin:
      return std::sin(eval_node(n.lhs, x, z));
    case Op::Cos:
      return std::cos(eval_node(n.lhs, x, z));
    case Op::Exp:
      return std::exp(eval_node(n.lhs, x, z));
  }
  return 0.0;
}

double Expression::evaluate(std::span<const double> x, std::span<const double> z) const {
  if (root_ < 0) throw DomainError("empty expression");
  const double v = eval_node(root_, x, z);
  if (!std::isfinite(v)) throw DomainError("expression domain error: non-finite value with " + bindings(x, z));
  return v;
}

}  // namespace gsid
