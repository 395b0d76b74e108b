#include "varcheck/expr.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>

namespace varcheck {

namespace {

// Value together with a directional derivative; one sweep per direction.
struct Dual {
    double v = 0.0;
    double d = 0.0;
};

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

std::string format_double(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return std::string(buf.data());
}

struct FunctionInfo {
    const char* name;
    LagrangianExpr::Op op;
    int arity;
};

constexpr FunctionInfo kFunctions[] = {
    {"pow", LagrangianExpr::Op::Power, 2},
    {"abs", LagrangianExpr::Op::Abs, 1},
    {"sqrt", LagrangianExpr::Op::Sqrt, 1},
    {"exp", LagrangianExpr::Op::Exp, 1},
    {"log", LagrangianExpr::Op::Log, 1},
    {"sin", LagrangianExpr::Op::Sin, 1},
    {"cos", LagrangianExpr::Op::Cos, 1},
    {"min", LagrangianExpr::Op::Min, 2},
    {"max", LagrangianExpr::Op::Max, 2},
};

}  // namespace

class ExprParser {
public:
    ExprParser(const std::string& text, int n) : text_(text), n_(n) {}

    LagrangianExpr run() {
        if (n_ < 1) throw ParseError("dimension n must be positive", 0);
        LagrangianExpr result;
        result.nodes_.clear();
        std::int32_t root = parse_expr(result.nodes_);
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError("unexpected trailing input", pos_);
        (void)root;  // root is by construction the last node
        result.n_ = n_;
        result.autonomous_ = true;
        for (const auto& node : result.nodes_) {
            if (node.op == LagrangianExpr::Op::Variable &&
                node.group == LagrangianExpr::VarGroup::Time) {
                result.autonomous_ = false;
                break;
            }
        }
        return result;
    }

private:
    using Op = LagrangianExpr::Op;
    using Node = LagrangianExpr::Node;
    using Nodes = std::vector<Node>;

    const std::string& text_;
    int n_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool peek_is(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool consume(char c) {
        if (peek_is(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c, const char* what) {
        if (!consume(c)) throw ParseError(std::string("expected ") + what, pos_);
    }

    static std::int32_t push(Nodes& nodes, Node node) {
        nodes.push_back(node);
        return static_cast<std::int32_t>(nodes.size()) - 1;
    }

    // expr := term (("+"|"-") term)*
    std::int32_t parse_expr(Nodes& nodes) {
        std::int32_t lhs = parse_term(nodes);
        for (;;) {
            skip_ws();
            std::size_t off = pos_;
            if (consume('+')) {
                std::int32_t rhs = parse_term(nodes);
                lhs = push(nodes, {Op::Add, lhs, rhs, 0.0, {}, 0, (std::int32_t)off});
            } else if (consume('-')) {
                std::int32_t rhs = parse_term(nodes);
                lhs = push(nodes, {Op::Subtract, lhs, rhs, 0.0, {}, 0, (std::int32_t)off});
            } else {
                return lhs;
            }
        }
    }

    // term := factor (("*"|"/") factor)*
    std::int32_t parse_term(Nodes& nodes) {
        std::int32_t lhs = parse_factor(nodes);
        for (;;) {
            skip_ws();
            std::size_t off = pos_;
            if (consume('*')) {
                std::int32_t rhs = parse_factor(nodes);
                lhs = push(nodes, {Op::Multiply, lhs, rhs, 0.0, {}, 0, (std::int32_t)off});
            } else if (consume('/')) {
                std::int32_t rhs = parse_factor(nodes);
                lhs = push(nodes, {Op::Divide, lhs, rhs, 0.0, {}, 0, (std::int32_t)off});
            } else {
                return lhs;
            }
        }
    }

    // factor := ["-"] atom
    std::int32_t parse_factor(Nodes& nodes) {
        skip_ws();
        std::size_t off = pos_;
        if (consume('-')) {
            std::int32_t inner = parse_atom(nodes);
            // Fold a negated literal into the constant so pow exponents and
            // round-trips see a single node.
            if (nodes[inner].op == Op::Constant &&
                inner == static_cast<std::int32_t>(nodes.size()) - 1) {
                nodes[inner].value = -nodes[inner].value;
                return inner;
            }
            return push(nodes, {Op::Negate, inner, -1, 0.0, {}, 0, (std::int32_t)off});
        }
        return parse_atom(nodes);
    }

    // atom := number | ident | ident "(" expr ("," expr)* ")" | "(" expr ")"
    std::int32_t parse_atom(Nodes& nodes) {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            std::int32_t inner = parse_expr(nodes);
            expect(')', "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number(nodes);
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident(nodes);
        throw ParseError("unexpected character", pos_);
    }

    std::int32_t parse_number(Nodes& nodes) {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && text_[start] == '.'))
            throw ParseError("malformed number", start);
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                pos_ = mark;  // not an exponent after all
            } else {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            }
        }
        double value = std::strtod(text_.substr(start, pos_ - start).c_str(), nullptr);
        return push(nodes, {Op::Constant, -1, -1, value, {}, 0, (std::int32_t)start});
    }

    std::int32_t parse_ident(Nodes& nodes) {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_]))))
            ++pos_;
        std::string name = text_.substr(start, pos_ - start);

        if (peek_is('(')) return parse_call(nodes, name, start);

        // variable: t | x<i> | xd<i> | xdd<i>
        if (name == "t")
            return push(nodes, {Op::Variable, -1, -1, 0.0, LagrangianExpr::VarGroup::Time, 0,
                                (std::int32_t)start});
        std::size_t digits = 0;
        while (digits < name.size() &&
               std::isdigit(static_cast<unsigned char>(name[name.size() - 1 - digits])))
            ++digits;
        if (digits == 0 || digits == name.size())
            throw ParseError("unknown identifier '" + name + "'", start);
        std::string base = name.substr(0, name.size() - digits);
        LagrangianExpr::VarGroup group;
        if (base == "x")
            group = LagrangianExpr::VarGroup::State;
        else if (base == "xd")
            group = LagrangianExpr::VarGroup::Velocity;
        else if (base == "xdd")
            group = LagrangianExpr::VarGroup::Acceleration;
        else
            throw ParseError("unknown identifier '" + name + "'", start);
        long idx = std::strtol(name.c_str() + (name.size() - digits), nullptr, 10);
        if (idx < 1 || idx > n_)
            throw ParseError("variable index out of range in '" + name + "' (n = " +
                                 std::to_string(n_) + ")",
                             start);
        return push(nodes, {Op::Variable, -1, -1, 0.0, group, (std::int32_t)(idx - 1),
                            (std::int32_t)start});
    }

    std::int32_t parse_call(Nodes& nodes, const std::string& name, std::size_t start) {
        const FunctionInfo* info = nullptr;
        for (const auto& f : kFunctions)
            if (name == f.name) {
                info = &f;
                break;
            }
        if (!info) throw ParseError("unknown function '" + name + "'", start);
        expect('(', "'('");
        if (info->op == Op::Power) {
            std::int32_t base = parse_expr(nodes);
            expect(',', "','");
            // Exponent must reduce to a numeric literal; parse it as a full
            // expression, verify, then drop the literal's node.
            skip_ws();
            std::size_t exp_off = pos_;
            std::size_t mark = nodes.size();
            std::int32_t exp_node = parse_expr(nodes);
            if (nodes[exp_node].op != Op::Constant || nodes.size() != mark + 1)
                throw ParseError("pow exponent must be a numeric literal", exp_off);
            double exponent = nodes[exp_node].value;
            nodes.resize(mark);
            expect(')', "')'");
            return push(nodes, {Op::Power, base, -1, exponent, {}, 0, (std::int32_t)start});
        }
        std::int32_t first = parse_expr(nodes);
        std::int32_t second = -1;
        if (info->arity == 2) {
            expect(',', "','");
            second = parse_expr(nodes);
        }
        expect(')', "')'");
        return push(nodes, {info->op, first, second, 0.0, {}, 0, (std::int32_t)start});
    }
};

LagrangianExpr LagrangianExpr::parse(const std::string& text, int n) {
    return ExprParser(text, n).run();
}

namespace {

using Op = LagrangianExpr::Op;
using Node = LagrangianExpr::Node;

Dual eval_node(const Node& node, Dual a, Dual b) {
    switch (node.op) {
        case Op::Negate:
            return {-a.v, -a.d};
        case Op::Add:
            return {a.v + b.v, a.d + b.d};
        case Op::Subtract:
            return {a.v - b.v, a.d - b.d};
        case Op::Multiply:
            return {a.v * b.v, a.d * b.v + a.v * b.d};
        case Op::Divide:
            if (b.v == 0.0) throw EvalDomainError("division by zero", node.src_offset);
            return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
        case Op::Power: {
            double c = node.value;
            bool integral = std::floor(c) == c && std::abs(c) < 1e9;
            if (!integral && a.v < 0.0)
                throw EvalDomainError("pow of negative base with non-integer exponent",
                                      node.src_offset);
            if (a.v == 0.0 && c < 0.0)
                throw EvalDomainError("pow of zero with negative exponent", node.src_offset);
            if (c == 0.0) return {1.0, 0.0};
            if (c == 1.0) return {a.v, a.d};
            if (c == 2.0) return {a.v * a.v, 2.0 * a.v * a.d};
            double v = std::pow(a.v, c);
            double dv;
            if (a.v == 0.0) {
                dv = (c > 1.0) ? 0.0 : c * a.d;  // c in (0,1): derivative is +inf * d
                if (c < 1.0 && a.d != 0.0) dv = std::copysign(INFINITY, c * a.d);
            } else {
                dv = c * std::pow(a.v, c - 1.0) * a.d;
            }
            return {v, dv};
        }
        case Op::Abs:
            return {std::abs(a.v), sign0(a.v) * a.d};
        case Op::Sqrt:
            if (a.v < 0.0) throw EvalDomainError("sqrt of negative operand", node.src_offset);
            {
                double r = std::sqrt(a.v);
                double dv = (a.v == 0.0) ? (a.d == 0.0 ? 0.0 : std::copysign(INFINITY, a.d))
                                         : 0.5 * a.d / r;
                return {r, dv};
            }
        case Op::Exp: {
            double e = std::exp(a.v);
            return {e, e * a.d};
        }
        case Op::Log:
            if (a.v <= 0.0) throw EvalDomainError("log of non-positive operand", node.src_offset);
            return {std::log(a.v), a.d / a.v};
        case Op::Sin:
            return {std::sin(a.v), std::cos(a.v) * a.d};
        case Op::Cos:
            return {std::cos(a.v), -std::sin(a.v) * a.d};
        case Op::Min:
            return a.v <= b.v ? a : b;  // ties take the first argument
        case Op::Max:
            return a.v >= b.v ? a : b;
        default:
            return a;
    }
}

// direction < 0: value-only sweep; otherwise direction indexes (t, x.., xd.., xdd..).
Dual sweep(const LagrangianExpr& expr, const EvalPoint& p, int direction,
           std::vector<Dual>& work) {
    const auto& nodes = expr.nodes();
    const int n = expr.dimension();
    work.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& node = nodes[i];
        if (node.op == Op::Constant) {
            work[i] = {node.value, 0.0};
        } else if (node.op == Op::Variable) {
            double v = 0.0;
            int var_id = 0;
            switch (node.group) {
                case LagrangianExpr::VarGroup::Time:
                    v = p.t;
                    var_id = 0;
                    break;
                case LagrangianExpr::VarGroup::State:
                    v = p.x[node.index];
                    var_id = 1 + node.index;
                    break;
                case LagrangianExpr::VarGroup::Velocity:
                    v = p.xd[node.index];
                    var_id = 1 + n + node.index;
                    break;
                case LagrangianExpr::VarGroup::Acceleration:
                    v = p.xdd[node.index];
                    var_id = 1 + 2 * n + node.index;
                    break;
            }
            work[i] = {v, direction == var_id ? 1.0 : 0.0};
        } else {
            Dual a = work[node.lhs];
            Dual b = node.rhs >= 0 ? work[node.rhs] : Dual{};
            work[i] = eval_node(node, a, b);
        }
    }
    return work.back();
}

void check_dimension(const LagrangianExpr& expr, const EvalPoint& p) {
    const auto n = static_cast<std::size_t>(expr.dimension());
    if (p.x.size() != n || p.xd.size() != n || p.xdd.size() != n)
        throw std::invalid_argument("EvalPoint dimension does not match Lagrangian");
}

}  // namespace

double LagrangianExpr::eval(const EvalPoint& p) const {
    check_dimension(*this, p);
    std::vector<Dual> work;
    return sweep(*this, p, -1, work).v;
}

Partials LagrangianExpr::partials(const EvalPoint& p) const {
    check_dimension(*this, p);
    Partials out;
    out.dx.resize(n_);
    out.dxd.resize(n_);
    out.dxdd.resize(n_);
    std::vector<Dual> work;
    out.dt = sweep(*this, p, 0, work).d;
    for (int i = 0; i < n_; ++i) out.dx[i] = sweep(*this, p, 1 + i, work).d;
    for (int i = 0; i < n_; ++i) out.dxd[i] = sweep(*this, p, 1 + n_ + i, work).d;
    for (int i = 0; i < n_; ++i) out.dxdd[i] = sweep(*this, p, 1 + 2 * n_ + i, work).d;
    return out;
}

namespace {

int precedence(Op op) {
    switch (op) {
        case Op::Add:
        case Op::Subtract:
            return 1;
        case Op::Multiply:
        case Op::Divide:
            return 2;
        case Op::Negate:
            return 3;
        default:
            return 4;
    }
}

void print_node(const LagrangianExpr& expr, std::int32_t idx, std::string& out);

void print_child(const LagrangianExpr& expr, std::int32_t child, int parent_prec, bool is_right,
                 std::string& out) {
    const Node& node = expr.nodes()[child];
    int prec = precedence(node.op);
    bool negative_const = node.op == Op::Constant && std::signbit(node.value);
    bool parens = prec < parent_prec || (prec == parent_prec && is_right) || negative_const;
    if (parens) out += '(';
    print_node(expr, child, out);
    if (parens) out += ')';
}

void print_node(const LagrangianExpr& expr, std::int32_t idx, std::string& out) {
    const Node& node = expr.nodes()[idx];
    switch (node.op) {
        case Op::Constant:
            out += format_double(node.value);
            return;
        case Op::Variable:
            switch (node.group) {
                case LagrangianExpr::VarGroup::Time: out += 't'; return;
                case LagrangianExpr::VarGroup::State: out += 'x'; break;
                case LagrangianExpr::VarGroup::Velocity: out += "xd"; break;
                case LagrangianExpr::VarGroup::Acceleration: out += "xdd"; break;
            }
            out += std::to_string(node.index + 1);
            return;
        case Op::Negate:
            out += '-';
            print_child(expr, node.lhs, precedence(Op::Negate) + 1, false, out);
            return;
        case Op::Add:
        case Op::Subtract:
        case Op::Multiply:
        case Op::Divide: {
            int prec = precedence(node.op);
            print_child(expr, node.lhs, prec, false, out);
            switch (node.op) {
                case Op::Add: out += '+'; break;
                case Op::Subtract: out += '-'; break;
                case Op::Multiply: out += '*'; break;
                default: out += '/'; break;
            }
            print_child(expr, node.rhs, prec, true, out);
            return;
        }
        case Op::Power:
            out += "pow(";
            print_node(expr, node.lhs, out);
            out += ',';
            if (std::signbit(node.value)) {
                out += '(';
                out += format_double(node.value);
                out += ')';
            } else {
                out += format_double(node.value);
            }
            out += ')';
            return;
        default: {
            const char* name = "";
            switch (node.op) {
                case Op::Abs: name = "abs"; break;
                case Op::Sqrt: name = "sqrt"; break;
                case Op::Exp: name = "exp"; break;
                case Op::Log: name = "log"; break;
                case Op::Sin: name = "sin"; break;
                case Op::Cos: name = "cos"; break;
                case Op::Min: name = "min"; break;
                case Op::Max: name = "max"; break;
                default: break;
            }
            out += name;
            out += '(';
            print_node(expr, node.lhs, out);
            if (node.rhs >= 0) {
                out += ',';
                print_node(expr, node.rhs, out);
            }
            out += ')';
            return;
        }
    }
}

bool equal_subtree(const LagrangianExpr& a, std::int32_t ia, const LagrangianExpr& b,
                   std::int32_t ib) {
    const Node& na = a.nodes()[ia];
    const Node& nb = b.nodes()[ib];
    if (na.op != nb.op) return false;
    switch (na.op) {
        case Op::Constant:
            return na.value == nb.value;
        case Op::Variable:
            return na.group == nb.group && na.index == nb.index;
        case Op::Power:
            if (na.value != nb.value) return false;
            return equal_subtree(a, na.lhs, b, nb.lhs);
        default:
            if ((na.rhs >= 0) != (nb.rhs >= 0)) return false;
            if (!equal_subtree(a, na.lhs, b, nb.lhs)) return false;
            if (na.rhs >= 0) return equal_subtree(a, na.rhs, b, nb.rhs);
            return true;
    }
}

}  // namespace

std::string LagrangianExpr::to_string() const {
    std::string out;
    print_node(*this, root(), out);
    return out;
}

bool LagrangianExpr::structurally_equal(const LagrangianExpr& other) const {
    if (n_ != other.n_) return false;
    return equal_subtree(*this, root(), other, other.root());
}

}  // namespace varcheck
