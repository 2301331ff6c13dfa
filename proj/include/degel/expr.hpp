#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>

namespace degel {

/// Value together with its gradient and Hessian at the evaluation point.
struct Taylor2 {
  double v = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;

  static Taylor2 constant(double c, int n);
  static Taylor2 variable(double x, int i, int n);
};

struct ExprError : std::runtime_error {
  std::size_t pos;
  ExprError(std::size_t p, const std::string& msg)
      : std::runtime_error(msg), pos(p) {}
};

/// Arithmetic expressions in the variables x1..xn with +, -, *, /, ^ and the
/// functions sin, cos, exp, min, max.  `pi` is available as a constant.
class Expression {
 public:
  Expression() = default;

  static Expression parse(const std::string& text, int n_vars);
  static Expression constant(double c, int n_vars);

  bool empty() const { return root_ == nullptr; }
  int vars() const { return n_vars_; }
  const std::string& text() const { return text_; }

  double eval(const Eigen::VectorXd& x) const;
  /// Value, gradient and Hessian, propagated exactly through the tree.
  Taylor2 eval2(const Eigen::VectorXd& x) const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  int n_vars_ = 0;
  std::string text_;
};

}  // namespace degel
