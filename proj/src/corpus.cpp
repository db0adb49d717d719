#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "fdwfm/corpus.hpp"

namespace fdwfm {

namespace detail {
extern const char* const kBuiltinCorpus;
}

std::vector<ProblemSpec> builtin_corpus() {
    static const std::vector<ProblemSpec> corpus = parse_problems(detail::kBuiltinCorpus, "<builtin>");
    return corpus;
}

std::vector<ProblemSpec> select_tables(const std::vector<ProblemSpec>& all, const std::vector<int>& tables) {
    std::vector<ProblemSpec> out;
    for (const auto& p : all)
        if (std::find(tables.begin(), tables.end(), p.table()) != tables.end()) out.push_back(p);
    return out;
}

SolverConfig benchmark_config() {
    SolverConfig c;
    c.residual_tol = 1e-14;
    c.step_tol = 1e-12;
    c.max_iter = 200;
    return c;
}

// ---- CompiledProblem ----

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

CompiledProblem::CompiledProblem(ProblemSpec spec) : spec_(std::move(spec)) {
    for (const auto& e : spec_.expressions) equations_.push_back(expr::parse(e, spec_.variables));
    if (spec_.derivative) derivative_ = expr::parse(*spec_.derivative, spec_.variables);
    for (const auto& row : spec_.jacobian) {
        std::vector<expr::Expr> r;
        for (const auto& e : row) r.push_back(expr::parse(e, spec_.variables));
        jacobian_.push_back(std::move(r));
    }
}

namespace {

double real_at(const expr::Expr& e, std::span<const double> x) {
    try {
        return e.eval_real(x);
    } catch (const expr::EvalError&) {
        return kNaN;
    }
}

}  // namespace

ScalarProblem CompiledProblem::scalar() const {
    ScalarProblem p;
    const expr::Expr f = equations_.at(0);
    p.f = [f](double x) { return real_at(f, std::span<const double>(&x, 1)); };
    if (derivative_) {
        const expr::Expr d = *derivative_;
        p.df = [d](double x) { return real_at(d, std::span<const double>(&x, 1)); };
    }
    p.x0 = spec_.initial.at(0).at(0).real();
    if (spec_.initial.size() > 1) p.x1 = spec_.initial[1].at(0).real();
    return p;
}

ComplexProblem CompiledProblem::complex() const {
    ComplexProblem p;
    const expr::Expr f = equations_.at(0);
    p.f = [f](Complex z) { return f.eval_complex(std::span<const Complex>(&z, 1)); };
    if (derivative_) {
        const expr::Expr d = *derivative_;
        p.df = [d](Complex z) { return d.eval_complex(std::span<const Complex>(&z, 1)); };
    }
    p.x0 = spec_.initial.at(0).at(0);
    if (spec_.initial.size() > 1) p.x1 = spec_.initial[1].at(0);
    return p;
}

SystemProblem CompiledProblem::system() const {
    SystemProblem p;
    const auto eqs = equations_;
    p.F = [eqs](const Vector& x) {
        Vector out(eqs.size());
        for (std::size_t i = 0; i < eqs.size(); ++i) out[i] = real_at(eqs[i], x);
        return out;
    };
    if (!jacobian_.empty()) {
        const auto jac = jacobian_;
        p.J = [jac](const Vector& x) {
            Matrix m(jac.size(), jac.size());
            for (std::size_t i = 0; i < jac.size(); ++i)
                for (std::size_t j = 0; j < jac[i].size(); ++j) m(i, j) = real_at(jac[i][j], x);
            return m;
        };
    }
    for (const auto& c : spec_.initial.at(0)) p.x0.push_back(c.real());
    return p;
}

double CompiledProblem::residual(const PointValue& p) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    try {
        switch (spec_.kind) {
            case ProblemKind::RealScalar: {
                double x = p.at(0).real();
                double v = std::abs(real_at(equations_.at(0), std::span<const double>(&x, 1)));
                return std::isfinite(v) ? v : inf;
            }
            case ProblemKind::ComplexScalar: {
                double v = std::abs(equations_.at(0).eval_complex(std::span<const Complex>(p.data(), 1)));
                return std::isfinite(v) ? v : inf;
            }
            case ProblemKind::System: {
                Vector x;
                for (const auto& c : p) x.push_back(c.real());
                Vector f(equations_.size());
                for (std::size_t i = 0; i < f.size(); ++i) f[i] = real_at(equations_[i], x);
                double v = magnitude(f);
                return std::isfinite(v) ? v : inf;
            }
        }
    } catch (const std::exception&) {
    }
    return inf;
}

// ---- running ----

namespace {

template <class Point>
void copy_report(const SolverReport<Point>& r, MethodResult& out) {
    out.status = r.status;
    out.iterations = r.iterations;
    out.nfe = r.nfe;
    out.derivative_evals = r.derivative_evals;
    out.coc = r.coc;
    out.detail = r.detail;
}

std::optional<Method> univariate_method(MethodId m) {
    switch (m) {
        case MethodId::Secant: return Method::Secant;
        case MethodId::Newton: return Method::Newton;
        case MethodId::WFM: return Method::WFM;
        case MethodId::FDWFM: return Method::FDWFM;
        case MethodId::Broyden: return std::nullopt;
    }
    return std::nullopt;
}

std::optional<SystemMethod> system_method(MethodId m) {
    switch (m) {
        case MethodId::Newton: return SystemMethod::Newton;
        case MethodId::WFM: return SystemMethod::WFM;
        case MethodId::Broyden: return SystemMethod::Broyden;
        case MethodId::FDWFM: return SystemMethod::FDWFM;
        case MethodId::Secant: return std::nullopt;
    }
    return std::nullopt;
}

MethodResult not_applicable(MethodId m, std::string why) {
    MethodResult r;
    r.method = m;
    r.applicable = false;
    r.detail = std::move(why);
    return r;
}

}  // namespace

MethodResult run_method(const CompiledProblem& problem, MethodId method, const SolverConfig& config) {
    const ProblemSpec& spec = problem.spec();
    MethodResult out;
    out.method = method;
    const bool needs_derivative = method == MethodId::Newton || method == MethodId::WFM;

    if (spec.kind == ProblemKind::System) {
        auto m = system_method(method);
        if (!m) return not_applicable(method, "secant is scalar only");
        if (needs_derivative && !problem.has_derivative()) return not_applicable(method, "no jacobian given");
        auto r = solve_system(problem.system(), *m, config);
        copy_report(r, out);
        for (double v : r.root) out.root.emplace_back(v, 0.0);
    } else {
        auto m = univariate_method(method);
        if (!m) return not_applicable(method, "broyden is for systems only");
        if (needs_derivative && !problem.has_derivative()) return not_applicable(method, "no derivative given");
        if (!needs_derivative && spec.initial.size() < 2) return not_applicable(method, "no second starting point");
        if (spec.kind == ProblemKind::RealScalar) {
            auto r = solve_scalar(problem.scalar(), *m, config);
            copy_report(r, out);
            out.root = {Complex(r.root, 0.0)};
        } else {
            auto r = solve_complex(problem.complex(), *m, config);
            copy_report(r, out);
            out.root = {r.root};
        }
    }
    out.residual = problem.residual(out.root);
    return out;
}

ComparisonReport run_comparison(const std::vector<ProblemSpec>& problems, const std::vector<MethodId>& methods,
                                const SolverConfig& config, int jobs) {
    config.validate();
    ComparisonReport report;
    report.config = config;
    report.methods = methods;
    report.rows.resize(problems.size());

    std::vector<std::optional<CompiledProblem>> compiled(problems.size());
    std::vector<std::string> compile_errors(problems.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
        report.rows[i].problem = problems[i];
        report.rows[i].results.resize(methods.size());
        try {
            compiled[i].emplace(problems[i]);
        } catch (const std::exception& e) {
            compile_errors[i] = e.what();
        }
    }

    const std::size_t tasks = problems.size() * methods.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            std::size_t i = t / methods.size(), j = t % methods.size();
            MethodResult& slot = report.rows[i].results[j];
            if (!compiled[i]) {
                slot = not_applicable(methods[j], compile_errors[i]);
                continue;
            }
            try {
                slot = run_method(*compiled[i], methods[j], config);
            } catch (const std::exception& e) {
                slot = not_applicable(methods[j], e.what());
            }
        }
    };

    unsigned n = jobs > 0 ? static_cast<unsigned>(jobs) : std::max(1u, std::thread::hardware_concurrency());
    n = static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(tasks, 1)));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return report;
}

}  // namespace fdwfm
