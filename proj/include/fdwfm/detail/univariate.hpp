#pragma once

// Secant, Newton, WFM and FDWFM over a single real or complex unknown. The
// real and complex front ends instantiate these with double and Complex.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "fdwfm/coc.hpp"
#include "fdwfm/core.hpp"

namespace fdwfm {

enum class Method { Secant, Newton, WFM, FDWFM };

std::string_view to_string(Method m);

/// Absolute floor under the relative denominator guard.
inline constexpr double kDenominatorFloor = 1e-300;

template <class T>
struct UnivariateProblem {
    std::function<T(T)> f;
    /// Required by Newton and WFM.
    std::function<T(T)> df;
    T x0{};
    /// Required by secant and FDWFM.
    std::optional<T> x1;
};

template <class T>
struct FdwfmStep {
    T next;
    T predictor;
};

namespace detail {

/// |den| <= guard * (|a| + |b|), or below the absolute floor.
inline bool degenerate(double den, double a, double b, double guard) {
    return !(den > std::max(guard * (a + b), kDenominatorFloor));
}

template <class T>
T secant_step(T x_prev, T x_curr, T f_prev, T f_curr, double guard, Stage stage = Stage::Predictor) {
    T den = f_curr - f_prev;
    if (degenerate(std::abs(den), std::abs(f_curr), std::abs(f_prev), guard)) throw DegenerateDenominator(stage);
    return x_curr - f_curr * (x_curr - x_prev) / den;
}

template <class T>
T fdwfm_corrector(T x_curr, T f_curr, T predictor, T f_pred, double guard) {
    T den = f_pred - f_curr;
    if (degenerate(std::abs(den), std::abs(f_pred), std::abs(f_curr), guard))
        throw DegenerateDenominator(Stage::Corrector);
    return x_curr - f_curr * (predictor - x_curr) / den;
}

template <class T>
FdwfmStep<T> fdwfm_step(T x_prev, T x_curr, T f_prev, T f_curr, CountedFunction<T>& f, double guard) {
    T pred = secant_step(x_prev, x_curr, f_prev, f_curr, guard);
    T f_pred = f(pred);
    if (!is_finite(f_pred)) throw NonFiniteValue("non-finite f at predictor");
    return {fdwfm_corrector(x_curr, f_curr, pred, f_pred, guard), pred};
}

template <class T>
T newton_step(T x, T f_val, T df_val, double guard) {
    if (!(std::abs(df_val) > std::max(guard * std::abs(f_val), kDenominatorFloor)))
        throw DegenerateDenominator(Stage::Derivative);
    return x - f_val / df_val;
}

template <class T>
T wfm_step(T x, T f_val, T df_x, T df_pred, double guard) {
    T den = df_x + df_pred;
    if (degenerate(std::abs(den), std::abs(df_x), std::abs(df_pred), guard))
        throw DegenerateDenominator(Stage::Corrector);
    return x - 2.0 * f_val / den;
}

template <class T>
SolverReport<T> solve_univariate(const UnivariateProblem<T>& problem, Method method, const SolverConfig& config) {
    config.validate();
    if (!problem.f) throw std::invalid_argument("problem has no function");
    const bool two_point = method == Method::Secant || method == Method::FDWFM;
    if (two_point) {
        if (!problem.x1) throw std::invalid_argument(std::string(to_string(method)) + " needs x1");
        if (*problem.x1 == problem.x0) throw std::invalid_argument("x0 and x1 must differ");
    } else if (!problem.df) {
        throw std::invalid_argument(std::string(to_string(method)) + " needs a derivative");
    }

    CountedFunction<T> f(problem.f, !config.count_formal);
    long derivative_calls = 0;
    auto df = [&](T x) {
        ++derivative_calls;
        T d = problem.df(x);
        if (!is_finite(d)) throw NonFiniteValue("non-finite derivative");
        return d;
    };

    SolverReport<T> report;
    auto& trace = report.trace;
    trace.initial_count = two_point ? 2 : 1;
    auto finish = [&](Status status, T root, std::string detail = {}) {
        report.status = status;
        report.root = root;
        report.iterations = static_cast<int>(trace.size() > trace.initial_count ? trace.size() - trace.initial_count : 0);
        report.nfe = f.eval_count();
        report.derivative_evals = derivative_calls;
        report.coc = coc_or_undefined(trace);
        report.detail = std::move(detail);
        return report;
    };
    auto to_status = [](StopDecision d) {
        return d == StopDecision::Converged ? Status::Converged : Status::MaxIterExceeded;
    };
    constexpr double kInf = std::numeric_limits<double>::infinity();

    if (two_point) {
        T x_prev = problem.x0, x_curr = *problem.x1;
        T f_prev = f(x_prev);
        if (!is_finite(f_prev)) return finish(Status::NonFiniteValue, x_prev, "non-finite f(x0)");
        trace.record(x_prev, std::abs(f_prev), f.eval_count());
        T f_curr = f(x_curr);
        if (!is_finite(f_curr)) return finish(Status::NonFiniteValue, x_curr, "non-finite f(x1)");
        trace.record(x_curr, std::abs(f_curr), f.eval_count());
        if (std::abs(f_prev) <= config.residual_tol && std::abs(f_prev) <= std::abs(f_curr)) {
            // x0 already solves; report it without iterating
            return finish(Status::Converged, x_prev);
        }

        int iter = 0;
        double step = kInf;
        for (;;) {
            StopDecision d = check_stop(std::abs(f_curr), step, iter, config);
            if (d != StopDecision::Continue) return finish(to_status(d), x_curr);

            T x_next;
            // set when the corrector degenerates and the secant predictor is taken instead
            bool recovered = false;
            try {
                if (method == Method::Secant) {
                    x_next = secant_step(x_prev, x_curr, f_prev, f_curr, config.denom_guard);
                } else {
                    T pred = secant_step(x_prev, x_curr, f_prev, f_curr, config.denom_guard);
                    if (pred == x_curr) {
                        // floating-point fixed point: the predictor cannot move
                        return finish(to_status(check_stop(std::abs(f_curr), 0.0, iter, config)), x_curr);
                    }
                    T f_pred = f(pred);
                    if (!is_finite(f_pred)) return finish(Status::NonFiniteValue, x_curr, "non-finite f at predictor");
                    try {
                        x_next = fdwfm_corrector(x_curr, f_curr, pred, f_pred, config.denom_guard);
                    } catch (const DegenerateDenominator&) {
                        if (!config.fallback_to_secant) throw;
                        x_next = pred;
                        recovered = true;
                    }
                }
            } catch (const DegenerateDenominator& e) {
                return finish(Status::DegenerateDenominator, x_curr, e.what());
            }
            if (!is_finite(x_next)) return finish(Status::NonFiniteValue, x_curr, "non-finite iterate");

            step = std::abs(x_next - x_curr);
            ++iter;
            // f(pred) matched f(x_curr), so pairing pred with x_curr would be
            // flat again; the older point keeps the next secant well posed
            if (!recovered) x_prev = x_curr;
            x_curr = x_next;
            // formal requests of the next iteration: f(x_prev) is a memo hit
            f_prev = f(x_prev);
            f_curr = f(x_curr);
            if (!is_finite(f_curr)) return finish(Status::NonFiniteValue, x_prev, "non-finite residual");
            trace.record(x_curr, std::abs(f_curr), f.eval_count());
        }
    }

    T x = problem.x0;
    T fx = f(x);
    if (!is_finite(fx)) return finish(Status::NonFiniteValue, x, "non-finite f(x0)");
    trace.record(x, std::abs(fx), f.eval_count());
    int iter = 0;
    double step = kInf;
    for (;;) {
        StopDecision d = check_stop(std::abs(fx), step, iter, config);
        if (d != StopDecision::Continue) return finish(to_status(d), x);
        T x_next;
        try {
            T dfx = df(x);
            T pred = newton_step(x, fx, dfx, config.denom_guard);
            if (method == Method::Newton) {
                x_next = pred;
            } else {
                if (!is_finite(pred)) return finish(Status::NonFiniteValue, x, "non-finite predictor");
                x_next = wfm_step(x, fx, dfx, df(pred), config.denom_guard);
            }
        } catch (const DegenerateDenominator& e) {
            return finish(Status::DegenerateDenominator, x, e.what());
        } catch (const NonFiniteValue& e) {
            return finish(Status::NonFiniteValue, x, e.what());
        }
        if (!is_finite(x_next)) return finish(Status::NonFiniteValue, x, "non-finite iterate");
        step = std::abs(x_next - x);
        ++iter;
        T fx_next = f(x_next);
        if (!is_finite(fx_next)) return finish(Status::NonFiniteValue, x, "non-finite residual");
        x = x_next;
        fx = fx_next;
        trace.record(x, std::abs(fx), f.eval_count());
    }
}

}  // namespace detail
}  // namespace fdwfm
