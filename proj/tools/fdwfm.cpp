#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fdwfm/corpus.hpp"

namespace {

using namespace fdwfm;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitStrict = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigFlags {
    std::optional<double> tol, step_tol, guard;
    std::optional<int> max_iter;
    std::string a0 = "fd";
    std::string on_singular = "fail";
    bool count_formal = false;
    bool fallback = false;
    bool literal_step1 = false;

    void add(CLI::App& app) {
        app.add_option("--tol", tol, "Residual tolerance");
        app.add_option("--step-tol", step_tol, "Step tolerance");
        app.add_option("--max-iter", max_iter, "Iteration cap");
        app.add_option("--denom-guard", guard, "Relative denominator guard");
        app.add_option("--a0", a0, "Initial Jacobian for quasi-Newton methods")
            ->check(CLI::IsMember({"fd", "identity"}));
        app.add_option("--on-singular", on_singular, "What to do with a singular Jacobian approximation")
            ->check(CLI::IsMember({"fail", "reinit"}));
        app.add_flag("--count-formal", count_formal, "Count every formal evaluation (no memo)");
        app.add_flag("--fallback-to-secant", fallback, "Accept the predictor on a degenerate corrector");
        app.add_flag("--literal-step1", literal_step1, "Systems FDWFM: solve A I = F(X*) - F(X)");
    }

    SolverConfig apply(SolverConfig c) const {
        if (tol) c.residual_tol = *tol;
        if (step_tol) c.step_tol = *step_tol;
        if (max_iter) c.max_iter = *max_iter;
        if (guard) c.denom_guard = *guard;
        c.jacobian_init = a0 == "identity" ? JacobianInit::Identity : JacobianInit::FiniteDifference;
        c.on_singular = on_singular == "reinit" ? SingularPolicy::ReinitJacobian : SingularPolicy::Fail;
        c.count_formal = count_formal;
        c.fallback_to_secant = fallback;
        c.literal_step1 = literal_step1;
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        return c;
    }
};

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

// identifiers sorted so that x2 comes before x10
bool natural_less(const std::string& a, const std::string& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
            std::size_t i2 = i, j2 = j;
            while (i2 < a.size() && std::isdigit(static_cast<unsigned char>(a[i2]))) ++i2;
            while (j2 < b.size() && std::isdigit(static_cast<unsigned char>(b[j2]))) ++j2;
            unsigned long long na = std::stoull(a.substr(i, i2 - i)), nb = std::stoull(b.substr(j, j2 - j));
            if (na != nb) return na < nb;
            i = i2;
            j = j2;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

void write_output(const std::string& body, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << body;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << body)) throw std::runtime_error("cannot write '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- solve ----

struct SolveArgs {
    std::string method;
    std::vector<std::string> exprs;
    std::string vars;
    bool complex = false;
    std::string x0, x1, derivative;
    std::vector<std::string> jacobian;
    bool trace = false;
    ConfigFlags flags;
};

template <class Point>
void print_report(const SolverReport<Point>& r, const std::function<std::string(const Point&)>& show, bool trace,
                  long derivative_evals) {
    std::cout << "status      " << to_string(r.status) << "\n";
    std::cout << "root        " << show(r.root) << "\n";
    std::cout << "iterations  " << r.iterations << "\n";
    std::cout << "nfe         " << r.nfe << "\n";
    if (derivative_evals) std::cout << "derivative  " << derivative_evals << "\n";
    std::cout << "coc         " << (r.coc ? format_real(*r.coc) : std::string("ND")) << "\n";
    if (!r.detail.empty()) std::cout << "detail      " << r.detail << "\n";
    if (trace) {
        std::cout << "trace\n";
        for (std::size_t k = 0; k < r.trace.size(); ++k)
            std::cout << "  " << k << "  " << show(r.trace.iterates[k]) << "  |f|=" << format_real(r.trace.residual_norms[k])
                      << "  nfe=" << r.trace.nfe_at_step[k] << "\n";
    }
}

int cmd_solve(const SolveArgs& a) {
    auto method = parse_method(a.method);
    if (!method) throw UsageError("unknown method '" + a.method + "'");
    if (a.exprs.empty()) throw UsageError("--expr is required");
    SolverConfig config = a.flags.apply(SolverConfig{});

    ProblemSpec spec;
    spec.id = "cli";
    std::vector<std::string> vars;
    if (!a.vars.empty()) {
        vars = split_list(a.vars);
    } else {
        std::set<std::string> seen;
        for (const auto& e : a.exprs)
            for (auto& v : expr::free_identifiers(e)) seen.insert(v);
        vars.assign(seen.begin(), seen.end());
        std::sort(vars.begin(), vars.end(), natural_less);
        if (vars.empty()) throw UsageError("expression has no variables; pass --vars");
    }
    const bool system = a.exprs.size() > 1 || vars.size() > 1;
    if (system && a.complex) throw UsageError("--complex applies to scalar problems only");
    spec.kind = system ? ProblemKind::System : a.complex ? ProblemKind::ComplexScalar : ProblemKind::RealScalar;
    spec.variables = vars;
    spec.expressions = a.exprs;
    if (system && a.exprs.size() != vars.size())
        throw UsageError("system needs one --expr per variable (" + std::to_string(vars.size()) + ")");
    if (!a.derivative.empty()) {
        if (system) throw UsageError("--derivative is for scalar problems; use --jacobian");
        spec.derivative = a.derivative;
    }
    if (!a.jacobian.empty()) {
        if (!system) throw UsageError("--jacobian is for systems; use --derivative");
        for (const auto& row : a.jacobian) spec.jacobian.push_back(split_list(row));
        if (spec.jacobian.size() != vars.size()) throw UsageError("--jacobian needs one row per equation");
        for (const auto& row : spec.jacobian)
            if (row.size() != vars.size()) throw UsageError("--jacobian rows need one entry per variable");
    }

    auto point = [&](const std::string& text, const char* name) {
        PointValue p;
        if (spec.kind == ProblemKind::ComplexScalar) {
            auto z = parse_complex(text);
            if (!z) throw UsageError(std::string("malformed ") + name + " '" + text + "'");
            p.push_back(*z);
        } else {
            for (const auto& c : split_list(text)) {
                auto z = parse_complex(c);
                if (!z || z->imag() != 0.0) throw UsageError(std::string("malformed ") + name + " '" + text + "'");
                p.push_back(*z);
            }
        }
        std::size_t want = system ? vars.size() : 1;
        if (p.size() != want)
            throw UsageError(std::string(name) + " needs " + std::to_string(want) + " component(s)");
        return p;
    };
    if (a.x0.empty()) throw UsageError("--x0 is required");
    spec.initial.push_back(point(a.x0, "--x0"));
    if (!a.x1.empty()) {
        if (system) throw UsageError("--x1 is for scalar problems");
        spec.initial.push_back(point(a.x1, "--x1"));
    }

    const bool needs_derivative = *method == MethodId::Newton || *method == MethodId::WFM;
    if (system && *method == MethodId::Secant) throw UsageError("secant is scalar only; use broyden");
    if (!system && *method == MethodId::Broyden) throw UsageError("broyden is for systems; use secant");
    if (needs_derivative && !system && !spec.derivative) throw UsageError(a.method + " needs --derivative");
    if (needs_derivative && system && spec.jacobian.empty()) throw UsageError(a.method + " needs --jacobian");
    if (!needs_derivative && !system && spec.initial.size() < 2) throw UsageError(a.method + " needs --x1");

    std::optional<CompiledProblem> compiled;
    try {
        compiled.emplace(spec);
    } catch (const expr::ParseError& e) {
        throw UsageError(std::string("parse error: ") + e.what());
    }

    Status status = Status::NonFiniteValue;
    switch (spec.kind) {
        case ProblemKind::RealScalar: {
            Method m = *method == MethodId::Secant ? Method::Secant
                       : *method == MethodId::Newton ? Method::Newton
                       : *method == MethodId::WFM    ? Method::WFM
                                                     : Method::FDWFM;
            auto r = solve_scalar(compiled->scalar(), m, config);
            print_report<double>(r, [](const double& x) { return format_real(x); }, a.trace, r.derivative_evals);
            status = r.status;
            break;
        }
        case ProblemKind::ComplexScalar: {
            Method m = *method == MethodId::Secant ? Method::Secant
                       : *method == MethodId::Newton ? Method::Newton
                       : *method == MethodId::WFM    ? Method::WFM
                                                     : Method::FDWFM;
            auto r = solve_complex(compiled->complex(), m, config);
            print_report<Complex>(r, [](const Complex& z) { return format_complex(z); }, a.trace, r.derivative_evals);
            status = r.status;
            break;
        }
        case ProblemKind::System: {
            SystemMethod m = *method == MethodId::Broyden ? SystemMethod::Broyden
                             : *method == MethodId::Newton ? SystemMethod::Newton
                             : *method == MethodId::WFM    ? SystemMethod::WFM
                                                           : SystemMethod::FDWFM;
            auto r = solve_system(compiled->system(), m, config);
            print_report<Vector>(
                r,
                [](const Vector& v) {
                    PointValue p(v.begin(), v.end());
                    return format_point(p, ProblemKind::System);
                },
                a.trace, r.derivative_evals);
            status = r.status;
            break;
        }
    }
    return status == Status::Converged ? kExitOk : kExitNotConverged;
}

// ---- bench ----

struct BenchArgs {
    std::string tables;
    std::string problems;
    std::string methods = "secant,newton,fdwfm";
    std::string format = "markdown";
    std::string out;
    std::string profile = "benchmark";
    bool strict = false;
    std::optional<int> jobs;
    ConfigFlags flags;
};

int resolve_jobs(const std::optional<int>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("FDWFM_JOBS"); env && *env) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 0) throw UsageError("FDWFM_JOBS must be a non-negative integer");
        return static_cast<int>(v);
    }
    return 0;
}

int cmd_bench(const BenchArgs& a) {
    auto format = parse_format(a.format);
    if (!format) throw UsageError("unknown format '" + a.format + "'");
    std::vector<MethodId> methods;
    for (const auto& m : split_list(a.methods)) {
        auto id = parse_method(m);
        if (!id) throw UsageError("unknown method '" + m + "'");
        methods.push_back(*id);
    }
    if (methods.empty()) throw UsageError("--methods must name at least one method");
    SolverConfig base = a.profile == "default" ? SolverConfig{} : benchmark_config();
    SolverConfig config = a.flags.apply(base);
    int jobs = resolve_jobs(a.jobs);

    std::vector<ProblemSpec> problems;
    if (!a.problems.empty()) {
        problems = load_problems(a.problems);
    } else {
        problems = builtin_corpus();
        if (!a.tables.empty()) {
            std::vector<int> tables;
            for (const auto& t : split_list(a.tables)) {
                try {
                    std::size_t used = 0;
                    int n = std::stoi(t, &used);
                    if (used != t.size() || n < 1 || n > 7) throw std::invalid_argument(t);
                    tables.push_back(n);
                } catch (const std::exception&) {
                    throw UsageError("--tables takes numbers 1 to 7, got '" + t + "'");
                }
            }
            problems = select_tables(problems, tables);
        }
    }

    std::cerr << "running " << problems.size() << " problem(s) x " << methods.size() << " method(s)\n";
    ComparisonReport report = run_comparison(problems, methods, config, jobs);
    write_output(render_report(report, *format), a.out);

    if (a.strict) {
        for (const auto& row : report.rows)
            for (const auto& r : row.results)
                if (r.applicable && r.status != Status::Converged) {
                    std::cerr << "strict: " << row.problem.id << " " << to_string(r.method) << " " << to_string(r.status)
                              << "\n";
                    return kExitStrict;
                }
    }
    return kExitOk;
}

// ---- report ----

int cmd_report(const std::string& in, const std::string& format_name, const std::string& out) {
    auto format = parse_format(format_name);
    if (!format) throw UsageError("unknown format '" + format_name + "'");
    ComparisonReport report = report_from_json(read_file(in));
    write_output(render_report(report, *format), out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Derivative-free root finding: FDWFM, secant, Newton, WFM and Broyden"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Solve one scalar, complex or system problem");
    s->add_option("--method,-m", solve.method, "secant, newton, wfm, fdwfm or broyden")->required();
    s->add_option("--expr,-e", solve.exprs, "Function expression; repeat for each equation of a system")->required();
    s->add_option("--vars", solve.vars, "Comma-separated variable order (default: sorted free identifiers)");
    s->add_flag("--complex", solve.complex, "Evaluate over the complex numbers");
    s->add_option("--x0", solve.x0, "Starting point; comma-separated for systems, a+bi for complex")->required();
    s->add_option("--x1", solve.x1, "Second starting point (secant, fdwfm)");
    s->add_option("--derivative,-d", solve.derivative, "Derivative expression (newton, wfm)");
    s->add_option("--jacobian,-j", solve.jacobian, "One comma-separated Jacobian row; repeat per equation");
    s->add_flag("--trace", solve.trace, "Print every iterate");
    solve.flags.add(*s);

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Run methods over the built-in tables or a problem file");
    auto* tables = b->add_option("--tables", bench.tables, "Comma-separated table numbers (default: all)");
    b->add_option("--problems", bench.problems, "Problem file instead of the built-in corpus")->excludes(tables);
    b->add_option("--methods", bench.methods, "Comma-separated methods")->capture_default_str();
    b->add_option("--format,-f", bench.format, "csv, json or markdown")->capture_default_str();
    b->add_option("--out,-o", bench.out, "Write the report here instead of stdout");
    b->add_option("--profile", bench.profile, "Base config before overrides")
        ->check(CLI::IsMember({"default", "benchmark"}))
        ->capture_default_str();
    b->add_flag("--strict", bench.strict, "Exit 3 if any applicable run did not converge");
    b->add_option("--jobs,-J", bench.jobs, "Worker threads (0 = all cores; fallback FDWFM_JOBS)");
    bench.flags.add(*b);

    std::string report_in, report_format = "markdown", report_out;
    auto* r = app.add_subcommand("report", "Re-render a saved JSON report");
    r->add_option("--in,-i", report_in, "JSON report written by bench --format json")->required();
    r->add_option("--format,-f", report_format, "csv, json or markdown")->capture_default_str();
    r->add_option("--out,-o", report_out, "Write here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, std::cerr, std::cerr);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (s->parsed()) return cmd_solve(solve);
        if (b->parsed()) return cmd_bench(bench);
        return cmd_report(report_in, report_format, report_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
