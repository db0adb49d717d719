#include "fdwfm/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

namespace fdwfm::expr {

ParseError::ParseError(std::size_t position, const std::string& message)
    : std::runtime_error("parse error at position " + std::to_string(position) + ": " + message),
      position_(position),
      message_(message) {}

namespace {

struct FuncName {
    std::string_view name;
    Func func;
};

constexpr FuncName kFunctions[] = {
    {"sin", Func::Sin}, {"cos", Func::Cos},   {"tan", Func::Tan}, {"exp", Func::Exp},
    {"ln", Func::Ln},   {"sqrt", Func::Sqrt}, {"abs", Func::Abs},
};

std::optional<Func> lookup_function(std::string_view name) {
    for (const auto& f : kFunctions)
        if (f.name == name) return f.func;
    return std::nullopt;
}

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string_view text;
    double number = 0.0;
};

class Lexer {
 public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        std::size_t start = pos_;
        if (pos_ >= src_.size()) return {Tok::End, start, {}};
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number(start);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            return {Tok::Ident, start, src_.substr(start, pos_ - start)};
        }
        ++pos_;
        switch (c) {
            case '+': return {Tok::Plus, start, src_.substr(start, 1)};
            case '-': return {Tok::Minus, start, src_.substr(start, 1)};
            case '*': return {Tok::Star, start, src_.substr(start, 1)};
            case '/': return {Tok::Slash, start, src_.substr(start, 1)};
            case '^': return {Tok::Caret, start, src_.substr(start, 1)};
            case '(': return {Tok::LParen, start, src_.substr(start, 1)};
            case ')': return {Tok::RParen, start, src_.substr(start, 1)};
            default: break;
        }
        throw ParseError(start, std::string("unknown token '") + c + "'");
    }

 private:
    Token number(std::size_t start) {
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
            return n;
        };
        std::size_t n = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) throw ParseError(start, "malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            // only an exponent if digits follow; otherwise 'e' is left for the next token
            std::size_t save = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;
        }
        std::string_view text = src_.substr(start, pos_ - start);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size()) throw ParseError(start, "malformed number");
        return {Tok::Number, start, text, v};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

using NodePtr = std::shared_ptr<const Node>;

NodePtr make(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
 public:
    Parser(std::string_view src, const std::vector<std::string>& vars) : lex_(src), vars_(vars) { advance(); }

    NodePtr parse_all() {
        if (tok_.kind == Tok::End) throw ParseError(0, "empty expression");
        NodePtr e = expression();
        if (tok_.kind == Tok::RParen) throw ParseError(tok_.pos, "unbalanced ')'");
        if (tok_.kind != Tok::End) throw ParseError(tok_.pos, "unexpected '" + std::string(tok_.text) + "'");
        return e;
    }

 private:
    void advance() { tok_ = lex_.next(); }

    NodePtr expression() {
        NodePtr lhs = term();
        while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
            NodeKind k = tok_.kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
            advance();
            lhs = make(k, lhs, term());
        }
        return lhs;
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
            NodeKind k = tok_.kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
            advance();
            lhs = make(k, lhs, unary());
        }
        return lhs;
    }

    NodePtr unary() {
        if (tok_.kind == Tok::Minus) {
            advance();
            return make(NodeKind::Negate, unary());
        }
        if (tok_.kind == Tok::Plus) {
            advance();
            return unary();
        }
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (tok_.kind == Tok::Caret) {
            advance();
            return make(NodeKind::Pow, base, unary());
        }
        return base;
    }

    NodePtr primary() {
        Token t = tok_;
        switch (t.kind) {
            case Tok::Number: {
                advance();
                auto n = std::make_shared<Node>();
                n->kind = NodeKind::Constant;
                n->value = t.number;
                return n;
            }
            case Tok::LParen: {
                advance();
                NodePtr e = expression();
                if (tok_.kind != Tok::RParen) throw ParseError(t.pos, "unbalanced '('");
                advance();
                return e;
            }
            case Tok::Ident: return identifier(t);
            case Tok::End: throw ParseError(t.pos, "unexpected end of expression");
            default: throw ParseError(t.pos, "unexpected '" + std::string(t.text) + "'");
        }
    }

    NodePtr identifier(const Token& t) {
        advance();
        std::string name(t.text);
        auto var = std::find(vars_.begin(), vars_.end(), name);
        if (var != vars_.end()) {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Variable;
            n->name = name;
            n->var_index = static_cast<std::size_t>(var - vars_.begin());
            return n;
        }
        if (auto f = lookup_function(name)) {
            if (tok_.kind != Tok::LParen) throw ParseError(tok_.pos, "expected '(' after " + name);
            std::size_t open = tok_.pos;
            advance();
            NodePtr arg = expression();
            if (tok_.kind != Tok::RParen) throw ParseError(open, "unbalanced '('");
            advance();
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::Call;
            n->func = *f;
            n->name = name;
            n->lhs = std::move(arg);
            return n;
        }
        if (name == "pi" || name == "e") {
            auto n = std::make_shared<Node>();
            n->kind = NodeKind::NamedConstant;
            n->name = name;
            n->value = name == "pi" ? std::numbers::pi : std::numbers::e;
            return n;
        }
        if (name == "i") return make(NodeKind::ImaginaryUnit);
        throw ParseError(t.pos, "unknown identifier '" + name + "'");
    }

    Lexer lex_;
    const std::vector<std::string>& vars_;
    Token tok_{Tok::End, 0, {}};
};

constexpr int kMaxRepeatedPower = 64;

std::optional<int> small_integer(double b) {
    if (b >= 0.0 && b <= kMaxRepeatedPower && b == std::floor(b)) return static_cast<int>(b);
    return std::nullopt;
}

template <class T>
T repeated_power(T a, int n) {
    if (n == 0) return T(1.0);
    T r = a;
    for (int k = 1; k < n; ++k) r *= a;
    return r;
}

bool is_e(const Node& n) { return n.kind == NodeKind::NamedConstant && n.name == "e"; }

double eval_r(const Node& n, std::span<const double> v) {
    switch (n.kind) {
        case NodeKind::Constant:
        case NodeKind::NamedConstant: return n.value;
        case NodeKind::ImaginaryUnit: throw EvalError("imaginary unit in real expression");
        case NodeKind::Variable: return v[n.var_index];
        case NodeKind::Negate: return -eval_r(*n.lhs, v);
        case NodeKind::Add: return eval_r(*n.lhs, v) + eval_r(*n.rhs, v);
        case NodeKind::Sub: return eval_r(*n.lhs, v) - eval_r(*n.rhs, v);
        case NodeKind::Mul: return eval_r(*n.lhs, v) * eval_r(*n.rhs, v);
        case NodeKind::Div: return eval_r(*n.lhs, v) / eval_r(*n.rhs, v);
        case NodeKind::Pow: {
            if (is_e(*n.lhs)) return std::exp(eval_r(*n.rhs, v));
            double a = eval_r(*n.lhs, v);
            double b = eval_r(*n.rhs, v);
            if (auto k = small_integer(b)) return repeated_power(a, *k);
            if (a < 0.0 && b != std::floor(b)) throw EvalError("negative base with non-integer exponent");
            return std::pow(a, b);
        }
        case NodeKind::Call: {
            double a = eval_r(*n.lhs, v);
            switch (n.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Exp: return std::exp(a);
                case Func::Ln:
                    if (a <= 0.0) throw EvalError("ln of non-positive argument");
                    return std::log(a);
                case Func::Sqrt:
                    if (a < 0.0) throw EvalError("sqrt of negative argument");
                    return std::sqrt(a);
                case Func::Abs: return std::abs(a);
            }
        }
    }
    throw EvalError("malformed expression tree");
}

Complex eval_c(const Node& n, std::span<const Complex> v) {
    switch (n.kind) {
        case NodeKind::Constant:
        case NodeKind::NamedConstant: return {n.value, 0.0};
        case NodeKind::ImaginaryUnit: return {0.0, 1.0};
        case NodeKind::Variable: return v[n.var_index];
        case NodeKind::Negate: return -eval_c(*n.lhs, v);
        case NodeKind::Add: return eval_c(*n.lhs, v) + eval_c(*n.rhs, v);
        case NodeKind::Sub: return eval_c(*n.lhs, v) - eval_c(*n.rhs, v);
        case NodeKind::Mul: return eval_c(*n.lhs, v) * eval_c(*n.rhs, v);
        case NodeKind::Div: return eval_c(*n.lhs, v) / eval_c(*n.rhs, v);
        case NodeKind::Pow: {
            if (is_e(*n.lhs)) return std::exp(eval_c(*n.rhs, v));
            Complex a = eval_c(*n.lhs, v);
            Complex b = eval_c(*n.rhs, v);
            if (b.imag() == 0.0)
                if (auto k = small_integer(b.real())) return repeated_power(a, *k);
            return std::pow(a, b);
        }
        case NodeKind::Call: {
            Complex a = eval_c(*n.lhs, v);
            switch (n.func) {
                case Func::Sin: return std::sin(a);
                case Func::Cos: return std::cos(a);
                case Func::Tan: return std::tan(a);
                case Func::Exp: return std::exp(a);
                case Func::Ln: return std::log(a);
                case Func::Sqrt: return std::sqrt(a);
                case Func::Abs: return {std::abs(a), 0.0};
            }
        }
    }
    throw EvalError("malformed expression tree");
}

// Printer precedence levels.
int prec(const Node& n) {
    switch (n.kind) {
        case NodeKind::Add:
        case NodeKind::Sub: return 1;
        case NodeKind::Mul:
        case NodeKind::Div: return 2;
        case NodeKind::Negate: return 3;
        case NodeKind::Pow: return 4;
        default: return 5;
    }
}

std::string format_number(double v) {
    char buf[32];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void print_node(const Node& n, std::string& out);

void print_wrapped(const Node& n, bool wrap, std::string& out) {
    if (wrap) out += '(';
    print_node(n, out);
    if (wrap) out += ')';
}

void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case NodeKind::Constant: out += format_number(n.value); return;
        case NodeKind::NamedConstant:
        case NodeKind::Variable: out += n.name; return;
        case NodeKind::ImaginaryUnit: out += 'i'; return;
        case NodeKind::Negate:
            out += '-';
            print_wrapped(*n.lhs, prec(*n.lhs) < 3, out);
            return;
        case NodeKind::Call:
            out += n.name;
            out += '(';
            print_node(*n.lhs, out);
            out += ')';
            return;
        case NodeKind::Pow:
            // base must be atomic; exponent may chain right-associatively
            print_wrapped(*n.lhs, prec(*n.lhs) < 5, out);
            out += '^';
            print_wrapped(*n.rhs, prec(*n.rhs) < 4, out);
            return;
        default: {
            int p = prec(n);
            const char* op = n.kind == NodeKind::Add ? "+" : n.kind == NodeKind::Sub ? "-" : n.kind == NodeKind::Mul ? "*" : "/";
            print_wrapped(*n.lhs, prec(*n.lhs) < p, out);
            out += op;
            // right operand: same level needs parentheses (left associativity);
            // a negation is parenthesized for readability
            print_wrapped(*n.rhs, prec(*n.rhs) <= p || n.rhs->kind == NodeKind::Negate, out);
            return;
        }
    }
}

}  // namespace

Expr parse(std::string_view source, const std::vector<std::string>& variables) {
    for (const auto& v : variables)
        if (is_function_name(v)) throw ParseError(0, "variable name '" + v + "' is a function name");
    Parser p(source, variables);
    return Expr(p.parse_all(), variables);
}

double Expr::eval_real(std::span<const double> values) const {
    if (values.size() != variables_.size()) throw EvalError("wrong number of variable values");
    return eval_r(*root_, values);
}

Complex Expr::eval_complex(std::span<const Complex> values) const {
    if (values.size() != variables_.size()) throw EvalError("wrong number of variable values");
    return eval_c(*root_, values);
}

double eval_real(const Expr& e, const std::map<std::string, double>& bindings) {
    std::vector<double> v;
    for (const auto& name : e.variables()) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw EvalError("unbound variable '" + name + "'");
        v.push_back(it->second);
    }
    return e.eval_real(v);
}

Complex eval_complex(const Expr& e, const std::map<std::string, Complex>& bindings) {
    std::vector<Complex> v;
    for (const auto& name : e.variables()) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw EvalError("unbound variable '" + name + "'");
        v.push_back(it->second);
    }
    return e.eval_complex(v);
}

std::string print(const Expr& e) {
    std::string out;
    print_node(e.root(), out);
    return out;
}

bool structurally_equal(const Node& a, const Node& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Constant: return a.value == b.value;
        case NodeKind::NamedConstant:
        case NodeKind::Variable: return a.name == b.name;
        case NodeKind::ImaginaryUnit: return true;
        case NodeKind::Negate: return structurally_equal(*a.lhs, *b.lhs);
        case NodeKind::Call: return a.func == b.func && structurally_equal(*a.lhs, *b.lhs);
        default: return structurally_equal(*a.lhs, *b.lhs) && structurally_equal(*a.rhs, *b.rhs);
    }
}

bool is_function_name(std::string_view name) { return lookup_function(name).has_value(); }

std::vector<std::string> free_identifiers(std::string_view source) {
    std::vector<std::string> out;
    Lexer lex(source);
    for (Token t = lex.next(); t.kind != Tok::End; t = lex.next()) {
        if (t.kind != Tok::Ident) continue;
        std::string name(t.text);
        if (is_function_name(name) || name == "pi" || name == "e" || name == "i") continue;
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    }
    return out;
}

}  // namespace fdwfm::expr
