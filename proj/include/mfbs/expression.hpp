#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>

namespace mfbs {

/// A parsed scalar expression in the variables t1..tN.
///
/// Grammar: +, -, *, /, ^ (right-assoc), unary minus, parentheses, numeric
/// literals, pi, and the functions sigmoid, exp, log, sqrt, abs, sin, cos.
/// Used for user-supplied Hurst functionals declared in manifests.
class Expression {
public:
    static Expression parse(const std::string& text, int n_vars);

    double eval(const Eigen::VectorXd& t) const;

    /// True when the expression only references variable `axis` (0-based).
    bool depends_only_on(int axis) const;

    const std::string& text() const { return text_; }

    Expression();
    Expression(const Expression&);
    Expression(Expression&&) noexcept;
    Expression& operator=(const Expression&);
    Expression& operator=(Expression&&) noexcept;
    ~Expression();

private:
    struct Node;
    std::shared_ptr<const Node> root_;
    std::string text_;
    int n_vars_ = 0;
};

}  // namespace mfbs
