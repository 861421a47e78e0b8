#include "mfbs/expression.hpp"

#include <cctype>
#include <cmath>
#include <vector>

#include "mfbs/errors.hpp"

namespace mfbs {

struct Expression::Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Func };
    Op op = Op::Const;
    double value = 0.0;
    int var = 0;
    int func = 0;  // 0 sigmoid, 1 exp, 2 log, 3 sqrt, 4 abs, 5 sin, 6 cos
    std::shared_ptr<const Node> a, b;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;

struct Parser {
    const std::string& s;
    size_t pos = 0;
    int n_vars;

    explicit Parser(const std::string& text, int nv) : s(text), n_vars(nv) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool consume(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& what) {
        throw FormatError("expression parse error at position " + std::to_string(pos) + " in '" + s +
                          "': " + what);
    }

    NodePtr make(Node n) { return std::make_shared<Node>(std::move(n)); }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            if (consume('+')) {
                Node n;
                n.op = Node::Op::Add;
                n.a = lhs;
                n.b = parse_term();
                lhs = make(std::move(n));
            } else if (consume('-')) {
                Node n;
                n.op = Node::Op::Sub;
                n.a = lhs;
                n.b = parse_term();
                lhs = make(std::move(n));
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_factor();
        for (;;) {
            if (consume('*')) {
                Node n;
                n.op = Node::Op::Mul;
                n.a = lhs;
                n.b = parse_factor();
                lhs = make(std::move(n));
            } else if (consume('/')) {
                Node n;
                n.op = Node::Op::Div;
                n.a = lhs;
                n.b = parse_factor();
                lhs = make(std::move(n));
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_factor() {
        if (consume('-')) {
            Node n;
            n.op = Node::Op::Neg;
            n.a = parse_factor();
            return make(std::move(n));
        }
        consume('+');
        NodePtr base = parse_atom();
        if (consume('^')) {
            Node n;
            n.op = Node::Op::Pow;
            n.a = base;
            n.b = parse_factor();  // right associative
            return make(std::move(n));
        }
        return base;
    }

    NodePtr parse_atom() {
        skip_ws();
        if (pos >= s.size()) fail("unexpected end of input");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            NodePtr e = parse_expr();
            if (!consume(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        fail(std::string("unexpected character '") + c + "'");
    }

    NodePtr parse_number() {
        size_t start = pos;
        while (pos < s.size() &&
               (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' || s[pos] == 'e' ||
                s[pos] == 'E' ||
                ((s[pos] == '+' || s[pos] == '-') && pos > start && (s[pos - 1] == 'e' || s[pos - 1] == 'E'))))
            ++pos;
        Node n;
        n.op = Node::Op::Const;
        try {
            n.value = std::stod(s.substr(start, pos - start));
        } catch (const std::exception&) {
            fail("bad numeric literal");
        }
        return make(std::move(n));
    }

    NodePtr parse_ident() {
        size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        std::string name = s.substr(start, pos - start);
        if (name == "pi") {
            Node n;
            n.op = Node::Op::Const;
            n.value = 3.14159265358979323846;
            return make(std::move(n));
        }
        if (name.size() >= 2 && name[0] == 't') {
            bool digits = true;
            for (size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(name[i]))) digits = false;
            if (digits) {
                int idx = std::stoi(name.substr(1));
                if (idx < 1 || idx > n_vars) fail("variable " + name + " out of range (N=" + std::to_string(n_vars) + ")");
                Node n;
                n.op = Node::Op::Var;
                n.var = idx - 1;
                return make(std::move(n));
            }
        }
        static const char* funcs[] = {"sigmoid", "exp", "log", "sqrt", "abs", "sin", "cos"};
        for (int f = 0; f < 7; ++f) {
            if (name == funcs[f]) {
                if (!consume('(')) fail("expected '(' after " + name);
                NodePtr arg = parse_expr();
                if (!consume(')')) fail("missing ')'");
                Node n;
                n.op = Node::Op::Func;
                n.func = f;
                n.a = arg;
                return make(std::move(n));
            }
        }
        fail("unknown identifier '" + name + "'");
    }
};

double eval_node(const Node& n, const Eigen::VectorXd& t) {
    using Op = Node::Op;
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return t[n.var];
        case Op::Add: return eval_node(*n.a, t) + eval_node(*n.b, t);
        case Op::Sub: return eval_node(*n.a, t) - eval_node(*n.b, t);
        case Op::Mul: return eval_node(*n.a, t) * eval_node(*n.b, t);
        case Op::Div: return eval_node(*n.a, t) / eval_node(*n.b, t);
        case Op::Pow: return std::pow(eval_node(*n.a, t), eval_node(*n.b, t));
        case Op::Neg: return -eval_node(*n.a, t);
        case Op::Func: {
            double x = eval_node(*n.a, t);
            switch (n.func) {
                case 0: return 1.0 / (1.0 + std::exp(-x));
                case 1: return std::exp(x);
                case 2: return std::log(x);
                case 3: return std::sqrt(x);
                case 4: return std::abs(x);
                case 5: return std::sin(x);
                case 6: return std::cos(x);
            }
        }
    }
    return 0.0;
}

void collect_vars(const Node& n, std::vector<bool>& used) {
    if (n.op == Node::Op::Var) used[n.var] = true;
    if (n.a) collect_vars(*n.a, used);
    if (n.b) collect_vars(*n.b, used);
}

}  // namespace

Expression::Expression() = default;
Expression::Expression(const Expression&) = default;
Expression::Expression(Expression&&) noexcept = default;
Expression& Expression::operator=(const Expression&) = default;
Expression& Expression::operator=(Expression&&) noexcept = default;
Expression::~Expression() = default;

Expression Expression::parse(const std::string& text, int n_vars) {
    Parser p(text, n_vars);
    Expression e;
    e.root_ = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    e.text_ = text;
    e.n_vars_ = n_vars;
    return e;
}

double Expression::eval(const Eigen::VectorXd& t) const {
    if (!root_) throw ArgumentError("eval on empty expression");
    if (t.size() != n_vars_) throw ArgumentError("expression expects " + std::to_string(n_vars_) + " variables");
    return eval_node(*root_, t);
}

bool Expression::depends_only_on(int axis) const {
    if (!root_) return true;
    std::vector<bool> used(static_cast<size_t>(n_vars_), false);
    collect_vars(*root_, used);
    for (int i = 0; i < n_vars_; ++i)
        if (used[static_cast<size_t>(i)] && i != axis) return false;
    return true;
}

}  // namespace mfbs
