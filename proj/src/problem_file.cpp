#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fdwfm/corpus.hpp"

namespace fdwfm {

std::string_view to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::RealScalar: return "real";
        case ProblemKind::ComplexScalar: return "complex";
        case ProblemKind::System: return "system";
    }
    return "?";
}

std::string_view to_string(Flag f) {
    switch (f) {
        case Flag::PaperSignTypo: return "paper_sign_typo";
        case Flag::SourceUncertain: return "source_uncertain";
        case Flag::PaperValuesUnverifiable: return "paper_values_unverifiable";
    }
    return "?";
}

std::string_view to_string(MethodId m) {
    switch (m) {
        case MethodId::Secant: return "secant";
        case MethodId::Newton: return "newton";
        case MethodId::WFM: return "wfm";
        case MethodId::FDWFM: return "fdwfm";
        case MethodId::Broyden: return "broyden";
    }
    return "?";
}

std::optional<ProblemKind> parse_kind(std::string_view s) {
    for (auto k : {ProblemKind::RealScalar, ProblemKind::ComplexScalar, ProblemKind::System})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

std::optional<Flag> parse_flag(std::string_view s) {
    for (auto f : {Flag::PaperSignTypo, Flag::SourceUncertain, Flag::PaperValuesUnverifiable})
        if (to_string(f) == s) return f;
    return std::nullopt;
}

std::optional<MethodId> parse_method(std::string_view s) {
    for (auto m : {MethodId::Secant, MethodId::Newton, MethodId::WFM, MethodId::FDWFM, MethodId::Broyden})
        if (to_string(m) == s) return m;
    if (s == "bmfsm") return MethodId::Broyden;
    if (s == "sct") return MethodId::Secant;
    if (s == "nm") return MethodId::Newton;
    return std::nullopt;
}

int ProblemSpec::table() const {
    if (id.rfind("table", 0) != 0) return 0;
    int n = 0;
    auto [ptr, ec] = std::from_chars(id.data() + 5, id.data() + id.size(), n);
    if (ec != std::errc() || ptr == id.data() + id.size() || *ptr != '/') return 0;
    return n;
}

FormatError::FormatError(std::string source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

ValidationError::ValidationError(std::string problem_id, int line, std::string invariant)
    : std::runtime_error("problem '" + problem_id + "' (line " + std::to_string(line) + "): " + invariant),
      id_(std::move(problem_id)),
      line_(line),
      invariant_(std::move(invariant)) {}

// ---- number and point text ----

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<int> parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

std::string format_real(double v) {
    char buf[32];
    for (int digits = 1; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string format_complex(Complex z) {
    std::string im = format_real(std::abs(z.imag()));
    return format_real(z.real()) + (std::signbit(z.imag()) ? "-" : "+") + im + "i";
}

std::optional<Complex> parse_complex(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.back() != 'i') {
        auto re = parse_number(s);
        if (!re) return std::nullopt;
        return Complex(*re, 0.0);
    }
    std::string_view body = s.substr(0, s.size() - 1);
    // split at the last sign that is not leading and not an exponent sign
    std::size_t split_at = std::string_view::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split_at = k;
            break;
        }
    }
    auto imag_part = [](std::string_view t) -> std::optional<double> {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        return parse_number(t);
    };
    if (split_at == std::string_view::npos) {
        auto im = imag_part(body);
        if (!im) return std::nullopt;
        return Complex(0.0, *im);
    }
    auto re = parse_number(body.substr(0, split_at));
    auto im = imag_part(body.substr(split_at));
    if (!re || !im) return std::nullopt;
    return Complex(*re, *im);
}

std::string format_point(const PointValue& p, ProblemKind kind) {
    if (kind == ProblemKind::ComplexScalar) return p.empty() ? std::string() : format_complex(p[0]);
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) out += ", ";
        out += format_real(p[i].real());
    }
    return out;
}

// ---- problem-file parser ----

namespace {

struct Field {
    std::string value;
    int line = 0;
};

struct RawProblem {
    std::string id;
    int line = 0;
    std::map<std::string, Field> single;
    std::vector<Field> exprs, jac, paper, comments;
};

const std::set<std::string> kSingleKeys = {"kind", "vars", "deriv", "x0", "x1", "root", "flags"};

class FileParser {
 public:
    FileParser(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

    std::vector<RawProblem> run() {
        std::vector<RawProblem> out;
        std::optional<RawProblem> cur;
        bool header = false;
        std::size_t pos = 0;
        int lineno = 0;
        while (pos <= text_.size()) {
            std::size_t nl = text_.find('\n', pos);
            std::string_view raw = text_.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text_.size() + 1 : nl + 1;
            ++lineno;
            std::string_view line = trim(raw);
            if (line.empty() || line.front() == '#') continue;

            auto [key, value] = split_key(line);
            if (!header) {
                if (key != "fdwfm-problems" || value != "1")
                    throw FormatError(source_, lineno, "expected header 'fdwfm-problems 1'");
                header = true;
                continue;
            }
            if (!cur) {
                if (key != "problem") throw FormatError(source_, lineno, "expected 'problem <id>'");
                if (value.empty() || value.find_first_of(" \t") != std::string_view::npos)
                    throw FormatError(source_, lineno, "problem id must be a single non-empty word");
                cur.emplace();
                cur->id = std::string(value);
                cur->line = lineno;
                continue;
            }
            if (key == "end") {
                if (!value.empty()) throw FormatError(source_, lineno, "unexpected text after 'end'");
                out.push_back(std::move(*cur));
                cur.reset();
                continue;
            }
            if (key == "problem") throw FormatError(source_, lineno, "missing 'end' before next problem");
            Field f{std::string(value), lineno};
            if (kSingleKeys.count(std::string(key))) {
                if (!cur->single.emplace(std::string(key), f).second)
                    throw FormatError(source_, lineno, "duplicate field '" + std::string(key) + "'");
            } else if (key == "expr") {
                cur->exprs.push_back(f);
            } else if (key == "jac") {
                cur->jac.push_back(f);
            } else if (key == "paper") {
                cur->paper.push_back(f);
            } else if (key == "comment") {
                cur->comments.push_back(f);
            } else {
                throw FormatError(source_, lineno, "unknown field '" + std::string(key) + "'");
            }
            if (f.value.empty() && key != "comment")
                throw FormatError(source_, lineno, "field '" + std::string(key) + "' has no value");
        }
        if (cur) throw FormatError(source_, cur->line, "problem '" + cur->id + "' has no 'end'");
        // a file of only comments and blank lines (no header) is an empty corpus
        return out;
    }

 private:
    static std::pair<std::string_view, std::string_view> split_key(std::string_view line) {
        std::size_t sp = line.find_first_of(" \t");
        if (sp == std::string_view::npos) return {line, {}};
        return {line.substr(0, sp), trim(line.substr(sp))};
    }

    std::string_view text_;
    std::string source_;
};

class Builder {
 public:
    Builder(const RawProblem& raw, const std::string& source) : raw_(raw), source_(source) {}

    ProblemSpec build() {
        ProblemSpec spec;
        spec.id = raw_.id;
        spec.line = raw_.line;

        const Field* kind = find("kind");
        if (!kind) invalid("missing field 'kind'");
        auto k = parse_kind(kind->value);
        if (!k) throw FormatError(source_, kind->line, "unknown kind '" + kind->value + "'");
        spec.kind = *k;

        const Field* vars = find("vars");
        if (!vars) invalid("missing field 'vars'");
        for (auto v : split(vars->value, ',')) {
            if (v.empty()) throw FormatError(source_, vars->line, "empty variable name");
            spec.variables.emplace_back(v);
        }

        for (const auto& e : raw_.exprs) spec.expressions.push_back(e.value);
        if (const Field* d = find("deriv")) spec.derivative = d->value;
        for (const auto& row : raw_.jac) {
            std::vector<std::string> entries;
            for (auto e : split(row.value, ',')) entries.emplace_back(e);
            spec.jacobian.push_back(std::move(entries));
        }

        const Field* x0 = find("x0");
        if (!x0) invalid("missing field 'x0'");
        spec.initial.push_back(point(*x0, spec.kind));
        if (const Field* x1 = find("x1")) spec.initial.push_back(point(*x1, spec.kind));
        if (const Field* r = find("root")) spec.expected_root = point(*r, spec.kind);

        if (const Field* fl = find("flags")) {
            for (auto name : split(fl->value, ',')) {
                auto f = parse_flag(name);
                if (!f) throw FormatError(source_, fl->line, "unknown flag '" + std::string(name) + "'");
                spec.flags.insert(*f);
            }
        }
        for (const auto& p : raw_.paper) parse_metric(p, spec);
        for (std::size_t i = 0; i < raw_.comments.size(); ++i) {
            if (i) spec.comment += '\n';
            spec.comment += raw_.comments[i].value;
        }
        return spec;
    }

    /// Throws for each invariant of ProblemSpec.
    void validate(const ProblemSpec& spec) {
        const bool scalar = spec.kind != ProblemKind::System;
        const std::size_t n = spec.variables.size();
        if (scalar && n != 1) invalid("scalar problems take exactly one variable");
        if (scalar && spec.expressions.size() != 1) invalid("scalar problems take exactly one expression");
        if (!scalar && spec.expressions.size() != n)
            invalid("system has " + std::to_string(spec.expressions.size()) + " expressions but " +
                    std::to_string(n) + " variables");
        std::set<std::string> seen;
        for (const auto& v : spec.variables)
            if (!seen.insert(v).second) invalid("variable '" + v + "' declared twice");
        if (scalar && !spec.jacobian.empty()) invalid("jac is only allowed for systems");
        if (!scalar && spec.derivative) invalid("deriv is only allowed for scalar problems");
        if (!scalar && !spec.jacobian.empty()) {
            if (spec.jacobian.size() != n) invalid("jacobian must have one row per equation");
            for (const auto& row : spec.jacobian)
                if (row.size() != n) invalid("jacobian rows must have one entry per variable");
        }
        if (!scalar && spec.initial.size() > 1) invalid("x1 is only allowed for scalar problems");
        for (const auto& p : spec.initial)
            if (p.size() != (scalar ? 1 : n)) invalid("initial point has the wrong number of components");
        if (spec.expected_root && spec.expected_root->size() != (scalar ? 1 : n))
            invalid("root has the wrong number of components");
        if (spec.initial.size() == 2 && spec.initial[0] == spec.initial[1]) invalid("x0 and x1 must differ");

        CompiledProblem compiled = compile(spec);
        for (std::size_t i = 0; i < spec.initial.size(); ++i)
            if (!std::isfinite(compiled.residual(spec.initial[i])))
                invalid("F is not finite at x" + std::to_string(i));
        if (spec.expected_root && !spec.has(Flag::PaperValuesUnverifiable)) {
            double r = compiled.residual(*spec.expected_root);
            if (!(r <= kRootResidualLimit))
                invalid("residual at expected root is " + format_real(r) + " (limit 1e-4)");
        }
    }

 private:
    const Field* find(const std::string& key) const {
        auto it = raw_.single.find(key);
        return it == raw_.single.end() ? nullptr : &it->second;
    }

    [[noreturn]] void invalid(const std::string& what) const { throw ValidationError(raw_.id, raw_.line, what); }

    PointValue point(const Field& f, ProblemKind kind) const {
        PointValue out;
        std::string_view v = trim(f.value);
        if (kind == ProblemKind::ComplexScalar) {
            auto z = parse_complex(v);
            if (!z) throw FormatError(source_, f.line, "malformed complex value '" + f.value + "'");
            out.push_back(*z);
            return out;
        }
        if (v.size() >= 2 && v.front() == '(' && v.back() == ')') v = v.substr(1, v.size() - 2);
        for (auto c : split(v, ',')) {
            auto x = parse_number(c);
            if (!x) throw FormatError(source_, f.line, "malformed number '" + std::string(c) + "'");
            out.emplace_back(*x, 0.0);
        }
        return out;
    }

    void parse_metric(const Field& f, ProblemSpec& spec) const {
        auto parts = split_words(f.value);
        auto m = parse_method(parts.empty() ? std::string_view() : parts[0]);
        if (!m) throw FormatError(source_, f.line, "unknown method in paper entry");
        ReferenceMetric metric;
        for (std::size_t i = 1; i < parts.size(); ++i) {
            auto eq = parts[i].find('=');
            if (eq == std::string_view::npos) throw FormatError(source_, f.line, "expected key=value");
            auto key = parts[i].substr(0, eq), val = parts[i].substr(eq + 1);
            if (key == "i") {
                metric.iterations = parse_int(val);
                if (!metric.iterations) throw FormatError(source_, f.line, "bad iteration count");
            } else if (key == "nfe") {
                metric.nfe = parse_int(val);
                if (!metric.nfe) throw FormatError(source_, f.line, "bad nfe");
            } else if (key == "coc") {
                if (val == "ND") {
                    metric.coc_not_defined = true;
                } else {
                    metric.coc = parse_number(val);
                    if (!metric.coc) throw FormatError(source_, f.line, "bad coc");
                }
            } else {
                throw FormatError(source_, f.line, "unknown key '" + std::string(key) + "'");
            }
        }
        spec.paper_metrics[*m] = metric;
    }

    static std::vector<std::string_view> split_words(std::string_view s) {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
            std::size_t j = i;
            while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j > i) out.push_back(s.substr(i, j - i));
            i = j;
        }
        return out;
    }

    CompiledProblem compile(const ProblemSpec& spec) const {
        // map expression parse errors back to their source lines
        try {
            return CompiledProblem(spec);
        } catch (const expr::ParseError& e) {
            int line = raw_.line;
            for (const auto& f : raw_.exprs)
                if (expr_fails(f.value, spec.variables)) { line = f.line; break; }
            if (line == raw_.line) {
                if (const Field* d = find("deriv"); d && expr_fails(d->value, spec.variables)) line = d->line;
                for (const auto& row : raw_.jac)
                    for (auto entry : split(row.value, ','))
                        if (line == raw_.line && expr_fails(std::string(entry), spec.variables)) line = row.line;
            }
            throw FormatError(source_, line, std::string(e.what()));
        }
    }

    static bool expr_fails(const std::string& s, const std::vector<std::string>& vars) {
        try {
            expr::parse(s, vars);
            return false;
        } catch (const expr::ParseError&) {
            return true;
        }
    }

    const RawProblem& raw_;
    const std::string& source_;
};

}  // namespace

std::vector<ProblemSpec> parse_problems(std::string_view text, const std::string& source_name) {
    std::vector<ProblemSpec> out;
    std::set<std::string> ids;
    for (const auto& raw : FileParser(text, source_name).run()) {
        Builder b(raw, source_name);
        ProblemSpec spec = b.build();
        b.validate(spec);
        if (!ids.insert(spec.id).second) throw ValidationError(spec.id, spec.line, "duplicate problem id");
        out.push_back(std::move(spec));
    }
    return out;
}

std::vector<ProblemSpec> load_problems(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_problems(ss.str(), path);
}

std::string format_problems(const std::vector<ProblemSpec>& problems) {
    std::string out = "fdwfm-problems 1\n";
    auto field = [&](std::string_view key, const std::string& value) {
        out += "  ";
        out += key;
        out.append(key.size() < 9 ? 9 - key.size() : 1, ' ');
        out += value;
        out += '\n';
    };
    for (const auto& p : problems) {
        out += "\nproblem " + p.id + "\n";
        field("kind", std::string(to_string(p.kind)));
        std::string vars;
        for (std::size_t i = 0; i < p.variables.size(); ++i) vars += (i ? ", " : "") + p.variables[i];
        field("vars", vars);
        for (const auto& e : p.expressions) field("expr", e);
        if (p.derivative) field("deriv", *p.derivative);
        for (const auto& row : p.jacobian) {
            std::string r;
            for (std::size_t i = 0; i < row.size(); ++i) r += (i ? ", " : "") + row[i];
            field("jac", r);
        }
        for (std::size_t i = 0; i < p.initial.size(); ++i) field(i == 0 ? "x0" : "x1", format_point(p.initial[i], p.kind));
        if (p.expected_root) field("root", format_point(*p.expected_root, p.kind));
        if (!p.flags.empty()) {
            std::string f;
            for (auto fl : p.flags) f += (f.empty() ? "" : ", ") + std::string(to_string(fl));
            field("flags", f);
        }
        for (const auto& [m, metric] : p.paper_metrics) {
            std::string s(to_string(m));
            if (metric.iterations) s += " i=" + std::to_string(*metric.iterations);
            if (metric.coc_not_defined) s += " coc=ND";
            else if (metric.coc) s += " coc=" + format_real(*metric.coc);
            if (metric.nfe) s += " nfe=" + std::to_string(*metric.nfe);
            field("paper", s);
        }
        std::size_t start = 0;
        while (!p.comment.empty() && start <= p.comment.size()) {
            std::size_t nl = p.comment.find('\n', start);
            field("comment", p.comment.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
        out += "end\n";
    }
    return out;
}

}  // namespace fdwfm
