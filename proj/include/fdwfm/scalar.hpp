#pragma once

#include "fdwfm/detail/univariate.hpp"

namespace fdwfm {

using ScalarProblem = UnivariateProblem<double>;

/// x_curr - f_curr (x_curr - x_prev) / (f_curr - f_prev).
/// Throws DegenerateDenominator when |f_curr - f_prev| <= guard (|f_curr| + |f_prev|).
double secant_step(double x_prev, double x_curr, double f_prev, double f_curr, double guard = 1e-14);

/// Secant predictor followed by the divided-difference corrector
/// x_curr - f(x_curr) (x* - x_curr) / (f(x*) - f(x_curr)).
FdwfmStep<double> fdwfm_step(double x_prev, double x_curr, CountedFunction<double>& f, double guard = 1e-14);
FdwfmStep<double> fdwfm_step(double x_prev, double x_curr, double f_prev, double f_curr, CountedFunction<double>& f,
                             double guard = 1e-14);

double newton_step(double x_curr, double f_val, double df_val, double guard = 1e-14);

/// x - 2 f(x) / (f'(x) + f'(x*)) with the Newton predictor x*.
double wfm_step(double x_curr, CountedFunction<double>& f, const std::function<double(double)>& df,
                double guard = 1e-14);

SolverReport<double> solve_scalar(const ScalarProblem& problem, Method method, const SolverConfig& config = {});

}  // namespace fdwfm
