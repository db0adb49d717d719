#pragma once

#include "fdwfm/detail/univariate.hpp"

namespace fdwfm {

using ComplexProblem = UnivariateProblem<Complex>;

Complex secant_step_complex(Complex z_prev, Complex z_curr, Complex f_prev, Complex f_curr, double guard = 1e-14);

FdwfmStep<Complex> fdwfm_step_complex(Complex z_prev, Complex z_curr, CountedFunction<Complex>& f,
                                      double guard = 1e-14);

Complex newton_step_complex(Complex z, Complex f_val, Complex df_val, double guard = 1e-14);

Complex wfm_step_complex(Complex z, CountedFunction<Complex>& f, const std::function<Complex(Complex)>& df,
                         double guard = 1e-14);

/// Residuals are moduli of f; guards compare moduli.
SolverReport<Complex> solve_complex(const ComplexProblem& problem, Method method, const SolverConfig& config = {});

}  // namespace fdwfm
