#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cusplab/core.hpp"
#include "cusplab/kernellab/cutoff.hpp"

namespace cusplab::kernellab {

/// Named 3-vector of scalar variables, e.g. block "t" with components t1, t2, t3.
struct VariableBlock {
    std::string name;
    std::array<std::string, 3> components;
};

/// Ordered list of variable blocks; variable index = 3 * block + component.
class Variables {
public:
    Variables() = default;
    explicit Variables(std::vector<VariableBlock> blocks) : blocks_(std::move(blocks)) {}

    /// Block "t" and block "x": the (t, x) pair space R^3 x R^3.
    static Variables pair() { return Variables({block("t"), block("x")}); }
    /// A single block named `name`.
    static Variables point(const std::string& name) { return Variables({block(name)}); }
    /// Blocks r1..r{count} with components r1_1, r1_2, ...; optional trailing block "x".
    static Variables particles(std::size_t count, bool with_x = false) {
        std::vector<VariableBlock> b;
        for (std::size_t i = 1; i <= count; ++i) {
            const std::string n = "r" + std::to_string(i);
            b.push_back({n, {n + "_1", n + "_2", n + "_3"}});
        }
        if (with_x) b.push_back(block("x"));
        return Variables(std::move(b));
    }

    [[nodiscard]] std::size_t dim() const { return 3 * blocks_.size(); }
    [[nodiscard]] const std::vector<VariableBlock>& blocks() const { return blocks_; }

    [[nodiscard]] int scalar_index(std::string_view name) const {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            for (std::size_t c = 0; c < 3; ++c)
                if (blocks_[b].components[c] == name) return static_cast<int>(3 * b + c);
        return -1;
    }
    [[nodiscard]] int block_index(std::string_view name) const {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            if (blocks_[b].name == name) return static_cast<int>(b);
        return -1;
    }

private:
    static VariableBlock block(const std::string& n) { return {n, {n + "1", n + "2", n + "3"}}; }
    std::vector<VariableBlock> blocks_;
};

namespace detail {

struct Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos, Sqrt, Theta, Zeta, Norm };
    Op op = Op::Const;
    double value = 0.0;
    int var = -1;
    int power = 0;
    std::vector<std::shared_ptr<const Node>> args;
};
using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make(Node::Op op, std::vector<NodePtr> args, double v = 0.0, int var = -1, int power = 0) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->args = std::move(args);
    n->value = v;
    n->var = var;
    n->power = power;
    return n;
}

inline double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

inline double eval(const Node& n, std::span<const double> z) {
    using Op = Node::Op;
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return z[static_cast<std::size_t>(n.var)];
        case Op::Add: return eval(*n.args[0], z) + eval(*n.args[1], z);
        case Op::Sub: return eval(*n.args[0], z) - eval(*n.args[1], z);
        case Op::Mul: return eval(*n.args[0], z) * eval(*n.args[1], z);
        case Op::Div: return eval(*n.args[0], z) / eval(*n.args[1], z);
        case Op::Neg: return -eval(*n.args[0], z);
        case Op::Pow: return ipow(eval(*n.args[0], z), n.power);
        case Op::Exp: return std::exp(eval(*n.args[0], z));
        case Op::Sin: return std::sin(eval(*n.args[0], z));
        case Op::Cos: return std::cos(eval(*n.args[0], z));
        case Op::Sqrt: return std::sqrt(eval(*n.args[0], z));
        case Op::Theta: return CutoffProfile{}.theta(eval(*n.args[0], z));
        case Op::Zeta: return CutoffProfile{}.zeta(eval(*n.args[0], z));
        case Op::Norm: {
            double s = 0.0;
            for (const auto& a : n.args) {
                const double v = eval(*a, z);
                s += v * v;
            }
            return std::sqrt(s);
        }
    }
    return 0.0;
}

// Forward-mode evaluation; grad has size dim and is overwritten.
inline double eval_grad(const Node& n, std::span<const double> z, std::span<double> grad) {
    using Op = Node::Op;
    const std::size_t d = grad.size();
    std::fill(grad.begin(), grad.end(), 0.0);
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: grad[static_cast<std::size_t>(n.var)] = 1.0; return z[static_cast<std::size_t>(n.var)];
        case Op::Neg: {
            const double v = eval_grad(*n.args[0], z, grad);
            for (auto& g : grad) g = -g;
            return -v;
        }
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div: {
            std::vector<double> gb(d);
            const double a = eval_grad(*n.args[0], z, grad);
            const double b = eval_grad(*n.args[1], z, gb);
            for (std::size_t i = 0; i < d; ++i) {
                switch (n.op) {
                    case Op::Add: grad[i] += gb[i]; break;
                    case Op::Sub: grad[i] -= gb[i]; break;
                    case Op::Mul: grad[i] = grad[i] * b + a * gb[i]; break;
                    default: grad[i] = (grad[i] * b - a * gb[i]) / (b * b); break;
                }
            }
            if (n.op == Op::Add) return a + b;
            if (n.op == Op::Sub) return a - b;
            if (n.op == Op::Mul) return a * b;
            return a / b;
        }
        case Op::Pow: {
            const double a = eval_grad(*n.args[0], z, grad);
            const double scale = n.power == 0 ? 0.0 : n.power * ipow(a, n.power - 1);
            for (auto& g : grad) g *= scale;
            return ipow(a, n.power);
        }
        case Op::Exp:
        case Op::Sin:
        case Op::Cos:
        case Op::Sqrt:
        case Op::Theta:
        case Op::Zeta: {
            const double a = eval_grad(*n.args[0], z, grad);
            double v = 0.0, dv = 0.0;
            if (n.op == Op::Exp) {
                v = std::exp(a);
                dv = v;
            } else if (n.op == Op::Sin) {
                v = std::sin(a);
                dv = std::cos(a);
            } else if (n.op == Op::Cos) {
                v = std::cos(a);
                dv = -std::sin(a);
            } else if (n.op == Op::Sqrt) {
                v = std::sqrt(a);
                dv = v > 0 ? 0.5 / v : 0.0;
            } else {
                const auto j = CutoffProfile{}.theta_jet(a);
                v = n.op == Op::Theta ? j.value : 1.0 - j.value;
                dv = n.op == Op::Theta ? j.d1 : -j.d1;
            }
            for (auto& g : grad) g *= dv;
            return v;
        }
        case Op::Norm: {
            std::vector<double> vals(n.args.size());
            std::vector<std::vector<double>> grads(n.args.size(), std::vector<double>(d));
            double s = 0.0;
            for (std::size_t k = 0; k < n.args.size(); ++k) {
                vals[k] = eval_grad(*n.args[k], z, grads[k]);
                s += vals[k] * vals[k];
            }
            const double r = std::sqrt(s);
            if (r > 0)
                for (std::size_t k = 0; k < n.args.size(); ++k)
                    for (std::size_t i = 0; i < d; ++i) grad[i] += vals[k] / r * grads[k][i];
            return r;
        }
    }
    return 0.0;
}

// Recursive-descent parser.
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' integer)?
//   primary := number | scalar-var | func '(' expr ')' | sq '(' vec ')' | norm '(' vec ')' | '(' expr ')'
//   vec     := vterm (('+' | '-') vterm)*
//   vterm   := block-name | '[' expr ',' expr ',' expr ']'
class Parser {
public:
    Parser(std::string_view text, const Variables& vars) : s_(text), vars_(vars) {}

    NodePtr parse() {
        auto n = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return n;
    }

private:
    using Vec = std::array<NodePtr, 3>;

    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("expression '" + std::string(s_) + "' at " + std::to_string(pos_) + ": " + why);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    std::string ident() {
        skip();
        const std::size_t b = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        return std::string(s_.substr(b, pos_ - b));
    }

    NodePtr expr() {
        auto n = term();
        for (;;) {
            if (accept('+'))
                n = make(Node::Op::Add, {n, term()});
            else if (accept('-'))
                n = make(Node::Op::Sub, {n, term()});
            else
                return n;
        }
    }
    NodePtr term() {
        auto n = unary();
        for (;;) {
            if (accept('*'))
                n = make(Node::Op::Mul, {n, unary()});
            else if (accept('/'))
                n = make(Node::Op::Div, {n, unary()});
            else
                return n;
        }
    }
    NodePtr unary() {
        if (accept('-')) return make(Node::Op::Neg, {unary()});
        if (accept('+')) return unary();
        return power();
    }
    NodePtr power() {
        auto base = primary();
        if (accept('^')) {
            skip();
            const std::size_t b = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (b == pos_) fail("exponent must be a non-negative integer");
            const int p = std::stoi(std::string(s_.substr(b, pos_ - b)));
            return make(Node::Op::Pow, {base}, 0.0, -1, p);
        }
        return base;
    }
    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        const char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (accept('(')) {
            auto n = expr();
            expect(')');
            return n;
        }
        const std::string name = ident();
        if (name.empty()) fail("unexpected character");
        if (name == "exp" || name == "sin" || name == "cos" || name == "sqrt" || name == "theta" || name == "zeta") {
            expect('(');
            auto a = expr();
            expect(')');
            const Node::Op op = name == "exp"     ? Node::Op::Exp
                                : name == "sin"   ? Node::Op::Sin
                                : name == "cos"   ? Node::Op::Cos
                                : name == "sqrt"  ? Node::Op::Sqrt
                                : name == "theta" ? Node::Op::Theta
                                                  : Node::Op::Zeta;
            return make(op, {a});
        }
        if (name == "sq" || name == "norm") {
            expect('(');
            Vec v = vec();
            expect(')');
            if (name == "norm") return make(Node::Op::Norm, {v[0], v[1], v[2]});
            NodePtr s;
            for (const auto& comp : v) {
                auto sq = make(Node::Op::Pow, {comp}, 0.0, -1, 2);
                s = s ? make(Node::Op::Add, {s, sq}) : sq;
            }
            return s;
        }
        if (name == "pi") return make(Node::Op::Const, {}, cusplab::pi);
        const int idx = vars_.scalar_index(name);
        if (idx < 0) fail("unknown identifier '" + name + "'");
        return make(Node::Op::Var, {}, 0.0, idx);
    }
    NodePtr number() {
        skip();
        char* end = nullptr;
        const std::string tmp(s_.substr(pos_));
        const double v = std::strtod(tmp.c_str(), &end);
        const std::size_t used = static_cast<std::size_t>(end - tmp.c_str());
        if (used == 0) fail("bad number");
        pos_ += used;
        return make(Node::Op::Const, {}, v);
    }
    Vec vec() {
        Vec v = vterm();
        for (;;) {
            Node::Op op;
            if (accept('+'))
                op = Node::Op::Add;
            else if (accept('-'))
                op = Node::Op::Sub;
            else
                return v;
            Vec w = vterm();
            for (int i = 0; i < 3; ++i) v[i] = make(op, {v[i], w[i]});
        }
    }
    Vec vterm() {
        if (accept('[')) {
            Vec v;
            v[0] = expr();
            expect(',');
            v[1] = expr();
            expect(',');
            v[2] = expr();
            expect(']');
            return v;
        }
        const std::string name = ident();
        const int b = vars_.block_index(name);
        if (b < 0) fail("unknown vector block '" + name + "'");
        Vec v;
        for (int i = 0; i < 3; ++i) v[i] = make(Node::Op::Var, {}, 0.0, 3 * b + i);
        return v;
    }

    std::string_view s_;
    const Variables& vars_;
    std::size_t pos_ = 0;
};

}  // namespace detail

}  // namespace cusplab::kernellab
