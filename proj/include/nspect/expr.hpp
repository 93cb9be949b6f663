#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nspect/common.hpp"

namespace nspect {

/// Parsed arithmetic expression over named variables.
///
/// Grammar: + - * / ^ with usual precedence, unary minus, parentheses,
/// decimal literals, variables from the declared list, and the functions
/// abs(e), min(a,b,...), max(a,b,...). '^' is right-associative.
class Expr {
public:
    static Expr parse(const std::string& text, const std::vector<std::string>& variables);

    double eval(const double* args) const;
    double eval(const std::vector<double>& args) const;
    double eval1(double x) const { return eval(&x); }

    const std::string& text() const { return text_; }
    int arity() const { return static_cast<int>(vars_.size()); }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::vector<std::string> vars_;
    std::string text_;
};

struct ExprError : ConfigError {
    using ConfigError::ConfigError;
};

}  // namespace nspect
