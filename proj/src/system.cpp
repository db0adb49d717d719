#include "fdwfm/system.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fdwfm {

std::string_view to_string(SystemMethod m) {
    switch (m) {
        case SystemMethod::Newton: return "newton";
        case SystemMethod::WFM: return "wfm";
        case SystemMethod::Broyden: return "broyden";
        case SystemMethod::FDWFM: return "fdwfm";
    }
    return "?";
}

Matrix fd_jacobian(CountedFunction<Vector>& F, const Vector& x) {
    const std::size_t n = x.size();
    Vector f0 = F(x);
    if (f0.size() != n) throw std::invalid_argument("fd_jacobian: F returned wrong length");
    if (!is_finite(f0)) throw NonFiniteValue("fd_jacobian: non-finite F(x)");
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    Matrix J(n, n);
    Vector xp = x;
    for (std::size_t j = 0; j < n; ++j) {
        double h = root_eps * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        h = xp[j] - x[j];  // the step actually representable
        Vector fj = F(xp);
        if (fj.size() != n || !is_finite(fj)) throw NonFiniteValue("fd_jacobian: non-finite F");
        for (std::size_t i = 0; i < n; ++i) J(i, j) = (fj[i] - f0[i]) / h;
        xp[j] = x[j];
    }
    if (!is_finite(J.data())) throw NonFiniteValue("fd_jacobian: non-finite entry");
    return J;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector axpy(const Vector& x, double a, const Vector& y) {
    Vector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + a * y[i];
    return r;
}

Vector diff(const Vector& a, const Vector& b) {
    Vector r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

/// Shared driver state: counted F, trace, and report assembly.
class Run {
 public:
    Run(const SystemProblem& p, const SolverConfig& c) : problem(p), config(c), F(p.F, !c.count_formal) {
        config.validate();
        if (!problem.F) throw std::invalid_argument("system problem has no F");
        if (problem.x0.empty()) throw std::invalid_argument("system problem has empty x0");
        report.trace.initial_count = 1;
    }

    /// Evaluates F, checks shape and finiteness.
    Vector eval(const Vector& x) {
        Vector fx = F(x);
        if (fx.size() != problem.dimension()) throw std::invalid_argument("F returned wrong length");
        if (!is_finite(fx)) throw NonFiniteValue("non-finite F");
        return fx;
    }

    Matrix jacobian(const Vector& x) {
        ++jacobian_calls;
        Matrix J = problem.J(x);
        if (J.rows() != problem.dimension() || J.cols() != problem.dimension())
            throw std::invalid_argument("Jacobian has wrong shape");
        if (!is_finite(J.data())) throw NonFiniteValue("non-finite Jacobian");
        return J;
    }

    Matrix initial_matrix(const Vector& x) {
        if (problem.initial_jacobian) {
            const Matrix& A = *problem.initial_jacobian;
            if (A.rows() != problem.dimension() || A.cols() != problem.dimension())
                throw std::invalid_argument("initial_jacobian has wrong shape");
            return A;
        }
        if (config.jacobian_init == JacobianInit::Identity) return Matrix::identity(problem.dimension());
        return fd_jacobian(F, x);
    }

    void record(const Vector& x, const Vector& fx) { report.trace.record(x, magnitude(fx), F.eval_count()); }

    SolverReport<Vector> finish(Status s, const Vector& root, std::string detail = {}) {
        auto& t = report.trace;
        report.status = s;
        report.root = root;
        report.iterations = static_cast<int>(t.size() > t.initial_count ? t.size() - t.initial_count : 0);
        report.nfe = F.eval_count();
        report.derivative_evals = jacobian_calls;
        report.coc = coc_or_undefined(t);
        report.detail = std::move(detail);
        return report;
    }

    static Status to_status(StopDecision d) {
        return d == StopDecision::Converged ? Status::Converged : Status::MaxIterExceeded;
    }

    const SystemProblem& problem;
    const SolverConfig& config;
    CountedFunction<Vector> F;
    SolverReport<Vector> report;
    long jacobian_calls = 0;
};

/// Maps solver exceptions onto report statuses.
/// The reported root on failure is the last recorded iterate.
template <class Body>
SolverReport<Vector> guarded(Run& run, Body&& body) {
    auto last = [&] { return run.report.trace.iterates.empty() ? run.problem.x0 : run.report.trace.iterates.back(); };
    try {
        return body();
    } catch (const SingularMatrix& e) {
        return run.finish(Status::SingularMatrix, last(), e.what());
    } catch (const DegenerateDenominator& e) {
        return run.finish(Status::DegenerateDenominator, last(), e.what());
    } catch (const NonFiniteValue& e) {
        return run.finish(Status::NonFiniteValue, last(), e.what());
    }
}

bool all_equal(const Vector& a, const Vector& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

/// Quasi-Newton driver shared by Broyden and FDWFM. `step` maps (x, F(x), A)
/// to the new iterate, or nullopt at a floating-point fixed point.
template <class Step>
SolverReport<Vector> quasi_newton(Run& run, Step&& step) {
    return guarded(run, [&]() -> SolverReport<Vector> {
        const SolverConfig& cfg = run.config;
        Vector x = run.problem.x0;
        Vector fx = run.eval(x);
        run.record(x, fx);
        if (magnitude(fx) <= cfg.residual_tol) return run.finish(Status::Converged, x);
        Matrix A = run.initial_matrix(x);

        Vector x_prev, s;
        int iter = 0;
        double step_norm = kInf;
        for (;;) {
            if (iter > 0) {
                Vector f_prev = run.eval(x_prev);  // memo hit unless counting formally
                fx = run.eval(x);
                run.record(x, fx);
                StopDecision d = check_stop(magnitude(fx), step_norm, iter, cfg);
                if (d != StopDecision::Continue) return run.finish(Run::to_status(d), x);
                A = broyden_update(A, s, diff(fx, f_prev));
            } else {
                StopDecision d = check_stop(magnitude(fx), step_norm, iter, cfg);
                if (d != StopDecision::Continue) return run.finish(Run::to_status(d), x);
            }

            std::optional<Vector> next;
            bool retried = false;
            for (;;) {
                try {
                    next = step(x, fx, A);
                    break;
                } catch (const SingularMatrix&) {
                    if (cfg.on_singular != SingularPolicy::ReinitJacobian || retried) throw;
                    retried = true;
                    A = fd_jacobian(run.F, x);
                }
            }
            if (!next) return run.finish(Run::to_status(check_stop(magnitude(fx), 0.0, iter, cfg)), x);
            if (!is_finite(*next)) throw NonFiniteValue("non-finite iterate");
            s = diff(*next, x);
            step_norm = magnitude(s);
            x_prev = x;
            x = std::move(*next);
            ++iter;
        }
    });
}

Vector negated_solve(const Matrix& A, const Vector& b) {
    Vector r = lu_solve(A, b);
    for (double& v : r) v = -v;
    return r;
}

}  // namespace

SolverReport<Vector> solve_broyden(const SystemProblem& problem, const SolverConfig& config) {
    Run run(problem, config);
    return quasi_newton(run, [&](const Vector& x, const Vector& fx, const Matrix& A) -> std::optional<Vector> {
        Vector s = negated_solve(A, fx);
        Vector next = axpy(x, 1.0, s);
        if (all_equal(next, x)) return std::nullopt;
        return next;
    });
}

SolverReport<Vector> solve_fdwfm_system(const SystemProblem& problem, const SolverConfig& config) {
    Run run(problem, config);
    return quasi_newton(run, [&](const Vector& x, const Vector& fx, const Matrix& A) -> std::optional<Vector> {
        Vector pred = axpy(x, 1.0, negated_solve(A, fx));
        if (all_equal(pred, x)) return std::nullopt;
        Vector f_pred = run.eval(pred);
        Vector df = diff(f_pred, fx);
        Vector inc;
        if (config.literal_step1) {
            inc = lu_solve(A, df);
        } else {
            Matrix B = broyden_update(A, diff(pred, x), df);
            inc = negated_solve(B, fx);
        }
        return axpy(x, 1.0, inc);
    });
}

namespace {

SolverReport<Vector> newton_like(const SystemProblem& problem, const SolverConfig& config, bool wfm) {
    Run run(problem, config);
    if (!problem.J) throw std::invalid_argument("method needs an analytic Jacobian");
    return guarded(run, [&]() -> SolverReport<Vector> {
        Vector x = problem.x0;
        Vector fx = run.eval(x);
        run.record(x, fx);
        int iter = 0;
        double step_norm = kInf;
        for (;;) {
            StopDecision d = check_stop(magnitude(fx), step_norm, iter, config);
            if (d != StopDecision::Continue) return run.finish(Run::to_status(d), x);
            Matrix Jx = run.jacobian(x);
            Vector s = negated_solve(Jx, fx);
            if (wfm) {
                Vector pred = axpy(x, 1.0, s);
                if (!is_finite(pred)) throw NonFiniteValue("non-finite predictor");
                Matrix sum = Jx + run.jacobian(pred);
                s = negated_solve(sum, fx);
                for (double& v : s) v *= 2.0;
            }
            Vector next = axpy(x, 1.0, s);
            if (!is_finite(next)) throw NonFiniteValue("non-finite iterate");
            step_norm = magnitude(diff(next, x));
            ++iter;
            fx = run.eval(next);
            x = std::move(next);
            run.record(x, fx);
        }
    });
}

}  // namespace

SolverReport<Vector> solve_newton_system(const SystemProblem& problem, const SolverConfig& config) {
    return newton_like(problem, config, false);
}

SolverReport<Vector> solve_wfm_system(const SystemProblem& problem, const SolverConfig& config) {
    return newton_like(problem, config, true);
}

SolverReport<Vector> solve_system(const SystemProblem& problem, SystemMethod method, const SolverConfig& config) {
    switch (method) {
        case SystemMethod::Newton: return solve_newton_system(problem, config);
        case SystemMethod::WFM: return solve_wfm_system(problem, config);
        case SystemMethod::Broyden: return solve_broyden(problem, config);
        case SystemMethod::FDWFM: return solve_fdwfm_system(problem, config);
    }
    throw std::invalid_argument("unknown system method");
}

}  // namespace fdwfm
