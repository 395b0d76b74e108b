#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace varcheck {

/// Argument tuple (t, x, xd, xdd) at which a Lagrangian is evaluated.
struct EvalPoint {
    double t = 0.0;
    std::vector<double> x;    // state, length n
    std::vector<double> xd;   // first derivative, length n
    std::vector<double> xdd;  // second derivative, length n
};

/// First partial derivatives of L at a point: d/dt plus the three n-vectors.
struct Partials {
    double dt = 0.0;
    std::vector<double> dx;
    std::vector<double> dxd;
    std::vector<double> dxdd;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class EvalDomainError : public std::runtime_error {
public:
    EvalDomainError(const std::string& what, std::size_t node_offset)
        : std::runtime_error(what + " (expression offset " + std::to_string(node_offset) + ")"),
          node_offset_(node_offset) {}
    std::size_t node_offset() const { return node_offset_; }

private:
    std::size_t node_offset_;
};

/// Parsed Lagrangian L(t, x1..xn, xd1..xdn, xdd1..xddn).
///
/// Immutable after parse; eval/partials are pure and re-entrant, so a single
/// instance may be shared across threads.
class LagrangianExpr {
public:
    enum class Op : std::uint8_t {
        Constant, Variable, Negate,
        Add, Subtract, Multiply, Divide,
        Power,  // exponent is a numeric literal stored in Node::value
        Abs, Sqrt, Exp, Log, Sin, Cos, Min, Max,
    };
    enum class VarGroup : std::uint8_t { Time, State, Velocity, Acceleration };

    struct Node {
        Op op = Op::Constant;
        std::int32_t lhs = -1;
        std::int32_t rhs = -1;
        double value = 0.0;  // constant value, or pow exponent
        VarGroup group = VarGroup::Time;
        std::int32_t index = 0;  // 0-based component index for State/Velocity/Acceleration
        std::int32_t src_offset = 0;
    };

    /// Constant-zero expression of dimension 1.
    LagrangianExpr() { nodes_.push_back(Node{}); }

    /// Parse `text` against the expression grammar with dimension n.
    /// Throws ParseError on syntax errors, unknown identifiers, or indices > n.
    static LagrangianExpr parse(const std::string& text, int n);

    double eval(const EvalPoint& p) const;
    Partials partials(const EvalPoint& p) const;

    /// Canonical text form; re-parsing it yields a structurally identical tree.
    std::string to_string() const;

    int dimension() const { return n_; }
    bool declared_autonomous() const { return autonomous_; }

    const std::vector<Node>& nodes() const { return nodes_; }
    std::int32_t root() const { return static_cast<std::int32_t>(nodes_.size()) - 1; }

    bool structurally_equal(const LagrangianExpr& other) const;

private:
    std::vector<Node> nodes_;  // postorder: children precede parents; root is last
    int n_ = 1;
    bool autonomous_ = true;

    friend class ExprParser;
};

}  // namespace varcheck
