#pragma once

// Small arithmetic expressions over named variables, for inline Hamiltonians
// and section functions in config files.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos tan exp log sqrt atan2. Constant: pi.

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cosymlab::cli {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class Expression {
 public:
  struct Node;

  /// Throws ParseError.
  static Expression parse(std::string_view text, std::vector<std::string> variables);

  double value(const Eigen::VectorXd& x) const;
  /// Gradient by forward-mode differentiation.
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }

 private:
  std::string text_;
  std::vector<std::string> variables_;
  std::shared_ptr<const Node> root_;
};

}  // namespace cosymlab::cli
