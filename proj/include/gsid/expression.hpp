#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gsid {

/// Syntax or identifier error, carrying the byte offset into the source.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

enum class Op { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };

/// Arithmetic AST over x_1..x_n (parameters) and y_1..y_m (regressor entries).
///
/// Nodes live in a flat arena; `root` indexes it. Children are referenced by
/// arena index, so copies are cheap and the type is a regular value.
class Expression {
 public:
  struct Node {
    Op op = Op::Number;
    double number = 0.0;  // Op::Number
    int index = 0;        // 1-based variable index for VarX / VarY
    int lhs = -1;
    int rhs = -1;
  };

  Expression() = default;

  static Expression parse(std::string_view source);

  /// Canonical, fully parenthesized text; `parse(to_string())` rebuilds an equal tree.
  std::string to_string() const;

  /// Highest variable indices referenced (0 if none).
  int max_x_index() const { return max_x_; }
  int max_y_index() const { return max_y_; }

  /// Throws DomainError (with the variable bindings) on 0^negative, division
  /// by zero, negative base with non-integer exponent, or non-finite results.
  double evaluate(std::span<const double> x, std::span<const double> z) const;

  /// Structural equality of the trees (arena layout is irrelevant).
  friend bool operator==(const Expression& a, const Expression& b);

  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

  // Builders for hand-constructed trees.
  int add_node(Node n);
  void set_root(int r);

 private:
  double eval_node(int id, std::span<const double> x, std::span<const double> z) const;
  void print_node(int id, std::string& out) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  int max_x_ = 0;
  int max_y_ = 0;
};

}  // namespace gsid
