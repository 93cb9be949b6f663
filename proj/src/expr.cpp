#include "nspect/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace nspect {

struct Expr::Node {
    enum Kind { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Abs, Min, Max } kind;
    double value = 0;
    int var = 0;
    std::vector<std::shared_ptr<const Node>> args;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
    const std::string& s;
    size_t pos = 0;
    const std::vector<std::string>& vars;

    explicit Parser(const std::string& text, const std::vector<std::string>& variables)
        : s(text), vars(variables) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw ExprError("expression error at position " + std::to_string(pos) + " in '" + s +
                        "': " + msg);
    }

    NodePtr make(Expr::Node::Kind k, std::vector<NodePtr> args) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = k;
        n->args = std::move(args);
        return n;
    }

    NodePtr parse_expr() {  // + -
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            if (eat('+'))
                lhs = make(Expr::Node::Add, {lhs, parse_term()});
            else if (eat('-'))
                lhs = make(Expr::Node::Sub, {lhs, parse_term()});
            else
                return lhs;
        }
    }

    NodePtr parse_term() {  // * /
        NodePtr lhs = parse_factor();
        for (;;) {
            skip_ws();
            if (eat('*'))
                lhs = make(Expr::Node::Mul, {lhs, parse_factor()});
            else if (eat('/'))
                lhs = make(Expr::Node::Div, {lhs, parse_factor()});
            else
                return lhs;
        }
    }

    NodePtr parse_factor() {  // unary minus, then ^ (right assoc)
        skip_ws();
        if (eat('-')) return make(Expr::Node::Neg, {parse_factor()});
        if (eat('+')) return parse_factor();
        NodePtr base = parse_atom();
        skip_ws();
        if (eat('^')) return make(Expr::Node::Pow, {base, parse_factor()});
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of input");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            NodePtr e = parse_expr();
            if (!eat(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            double v = std::strtod(s.c_str() + pos, &end);
            if (end == s.c_str() + pos) fail("bad number");
            pos = end - s.c_str();
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Const;
            n->value = v;
            return n;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos;
            while (pos < s.size() &&
                   (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
                ++pos;
            std::string name = s.substr(start, pos - start);
            if (name == "abs" || name == "min" || name == "max") {
                if (!eat('(')) fail("expected '(' after " + name);
                std::vector<NodePtr> args;
                args.push_back(parse_expr());
                while (eat(',')) args.push_back(parse_expr());
                if (!eat(')')) fail("expected ')'");
                if (name == "abs") {
                    if (args.size() != 1) fail("abs takes one argument");
                    return make(Expr::Node::Abs, std::move(args));
                }
                if (args.size() < 2) fail(name + " takes at least two arguments");
                return make(name == "min" ? Expr::Node::Min : Expr::Node::Max, std::move(args));
            }
            if (name == "pi") {
                auto n = std::make_shared<Expr::Node>();
                n->kind = Expr::Node::Const;
                n->value = 3.14159265358979323846;
                return n;
            }
            for (size_t i = 0; i < vars.size(); ++i) {
                if (vars[i] == name) {
                    auto n = std::make_shared<Expr::Node>();
                    n->kind = Expr::Node::Var;
                    n->var = static_cast<int>(i);
                    return n;
                }
            }
            fail("unknown identifier '" + name + "'");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

double eval_node(const Expr::Node& n, const double* args) {
    using K = Expr::Node;
    switch (n.kind) {
        case K::Const:
            return n.value;
        case K::Var:
            return args[n.var];
        case K::Add:
            return eval_node(*n.args[0], args) + eval_node(*n.args[1], args);
        case K::Sub:
            return eval_node(*n.args[0], args) - eval_node(*n.args[1], args);
        case K::Mul:
            return eval_node(*n.args[0], args) * eval_node(*n.args[1], args);
        case K::Div:
            return eval_node(*n.args[0], args) / eval_node(*n.args[1], args);
        case K::Pow:
            return std::pow(eval_node(*n.args[0], args), eval_node(*n.args[1], args));
        case K::Neg:
            return -eval_node(*n.args[0], args);
        case K::Abs:
            return std::abs(eval_node(*n.args[0], args));
        case K::Min: {
            double v = eval_node(*n.args[0], args);
            for (size_t i = 1; i < n.args.size(); ++i)
                v = std::min(v, eval_node(*n.args[i], args));
            return v;
        }
        case K::Max: {
            double v = eval_node(*n.args[0], args);
            for (size_t i = 1; i < n.args.size(); ++i)
                v = std::max(v, eval_node(*n.args[i], args));
            return v;
        }
    }
    return 0;
}

}  // namespace

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables) {
    Parser p(text, variables);
    Expr e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters");
    e.vars_ = variables;
    e.text_ = text;
    return e;
}

double Expr::eval(const double* args) const { return eval_node(*root_, args); }

double Expr::eval(const std::vector<double>& args) const {
    if (static_cast<int>(args.size()) != arity())
        throw ExprError("expression '" + text_ + "' expects " + std::to_string(arity()) +
                        " arguments");
    return eval_node(*root_, args.data());
}

}  // namespace nspect
