#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fdwfm::expr {

using Complex = std::complex<double>;

class ParseError : public std::runtime_error {
 public:
    ParseError(std::size_t position, const std::string& message);
    /// 0-based byte offset into the source text.
    std::size_t position() const noexcept { return position_; }
    const std::string& message() const noexcept { return message_; }

 private:
    std::size_t position_;
    std::string message_;
};

class EvalError : public std::runtime_error {
 public:
    using std::runtime_error::runtime_error;
};

enum class NodeKind { Constant, NamedConstant, ImaginaryUnit, Variable, Negate, Add, Sub, Mul, Div, Pow, Call };

enum class Func { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs };

struct Node {
    NodeKind kind;
    double value = 0.0;          // Constant, NamedConstant
    std::string name;            // NamedConstant, Variable, Call
    std::size_t var_index = 0;   // Variable
    Func func = Func::Sin;       // Call
    std::shared_ptr<const Node> lhs;  // unary operand, left operand, call argument
    std::shared_ptr<const Node> rhs;
};

/// Immutable parsed expression bound to an ordered variable list.
class Expr {
 public:
    Expr() = default;
    Expr(std::shared_ptr<const Node> root, std::vector<std::string> variables)
        : root_(std::move(root)), variables_(std::move(variables)) {}

    const Node& root() const { return *root_; }
    const std::vector<std::string>& variables() const noexcept { return variables_; }
    bool empty() const noexcept { return !root_; }

    /// values[i] binds variables()[i].
    double eval_real(std::span<const double> values) const;
    Complex eval_complex(std::span<const Complex> values) const;

 private:
    std::shared_ptr<const Node> root_;
    std::vector<std::string> variables_;
};

/// Grammar: see docs/grammar.md. "i" is the imaginary unit unless listed in
/// variables; "pi" and "e" are constants; multiplication must be explicit.
Expr parse(std::string_view source, const std::vector<std::string>& variables);

double eval_real(const Expr& e, const std::map<std::string, double>& bindings);
Complex eval_complex(const Expr& e, const std::map<std::string, Complex>& bindings);

/// Canonical text with minimal parentheses; numbers printed round-trip exact.
std::string print(const Expr& e);

bool structurally_equal(const Node& a, const Node& b);
inline bool structurally_equal(const Expr& a, const Expr& b) { return structurally_equal(a.root(), b.root()); }

/// Identifiers in source that are not functions or constants, in order of
/// first appearance. "i" is treated as the imaginary unit.
std::vector<std::string> free_identifiers(std::string_view source);

bool is_function_name(std::string_view name);

}  // namespace fdwfm::expr
