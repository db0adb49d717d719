#include "fdwfm/complex.hpp"
#include "fdwfm/scalar.hpp"

namespace fdwfm {

std::string_view to_string(Method m) {
    switch (m) {
        case Method::Secant: return "secant";
        case Method::Newton: return "newton";
        case Method::WFM: return "wfm";
        case Method::FDWFM: return "fdwfm";
    }
    return "?";
}

namespace {

template <class T>
FdwfmStep<T> fdwfm_from_points(T x_prev, T x_curr, CountedFunction<T>& f, double guard) {
    T f_prev = f(x_prev);
    T f_curr = f(x_curr);
    if (!is_finite(f_prev) || !is_finite(f_curr)) throw NonFiniteValue("non-finite f");
    return detail::fdwfm_step(x_prev, x_curr, f_prev, f_curr, f, guard);
}

template <class T>
T wfm_from_point(T x, CountedFunction<T>& f, const std::function<T(T)>& df, double guard) {
    T fx = f(x);
    T dfx = df(x);
    T pred = detail::newton_step(x, fx, dfx, guard);
    return detail::wfm_step(x, fx, dfx, df(pred), guard);
}

}  // namespace

double secant_step(double x_prev, double x_curr, double f_prev, double f_curr, double guard) {
    return detail::secant_step(x_prev, x_curr, f_prev, f_curr, guard);
}

FdwfmStep<double> fdwfm_step(double x_prev, double x_curr, CountedFunction<double>& f, double guard) {
    return fdwfm_from_points(x_prev, x_curr, f, guard);
}

FdwfmStep<double> fdwfm_step(double x_prev, double x_curr, double f_prev, double f_curr, CountedFunction<double>& f,
                             double guard) {
    return detail::fdwfm_step(x_prev, x_curr, f_prev, f_curr, f, guard);
}

double newton_step(double x_curr, double f_val, double df_val, double guard) {
    return detail::newton_step(x_curr, f_val, df_val, guard);
}

double wfm_step(double x_curr, CountedFunction<double>& f, const std::function<double(double)>& df, double guard) {
    return wfm_from_point(x_curr, f, df, guard);
}

SolverReport<double> solve_scalar(const ScalarProblem& problem, Method method, const SolverConfig& config) {
    return detail::solve_univariate(problem, method, config);
}

Complex secant_step_complex(Complex z_prev, Complex z_curr, Complex f_prev, Complex f_curr, double guard) {
    return detail::secant_step(z_prev, z_curr, f_prev, f_curr, guard);
}

FdwfmStep<Complex> fdwfm_step_complex(Complex z_prev, Complex z_curr, CountedFunction<Complex>& f, double guard) {
    return fdwfm_from_points(z_prev, z_curr, f, guard);
}

Complex newton_step_complex(Complex z, Complex f_val, Complex df_val, double guard) {
    return detail::newton_step(z, f_val, df_val, guard);
}

Complex wfm_step_complex(Complex z, CountedFunction<Complex>& f, const std::function<Complex(Complex)>& df,
                         double guard) {
    return wfm_from_point(z, f, df, guard);
}

SolverReport<Complex> solve_complex(const ComplexProblem& problem, Method method, const SolverConfig& config) {
    return detail::solve_univariate(problem, method, config);
}

}  // namespace fdwfm
