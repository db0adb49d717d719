#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fdwfm/core.hpp"

using namespace fdwfm;

TEST(Config, DefaultsValidate) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_DOUBLE_EQ(c.residual_tol, 1e-10);
    EXPECT_DOUBLE_EQ(c.step_tol, 1e-12);
    EXPECT_EQ(c.max_iter, 100);
}

TEST(Config, RejectsBadValues) {
    SolverConfig c;
    c.residual_tol = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.step_tol = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.max_iter = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = {};
    c.denom_guard = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(CheckStop, Decisions) {
    SolverConfig c;
    EXPECT_EQ(check_stop(1e-11, 1.0, 1, c), StopDecision::Converged);
    EXPECT_EQ(check_stop(1.0, 1e-13, 1, c), StopDecision::Converged);
    EXPECT_EQ(check_stop(1.0, 1.0, 5, c), StopDecision::Continue);
    EXPECT_EQ(check_stop(1.0, 1.0, 100, c), StopDecision::MaxIterExceeded);
    // convergence wins over the cap on the last allowed iteration
    EXPECT_EQ(check_stop(1e-11, 1.0, 100, c), StopDecision::Converged);
}

TEST(Residual, NormsAndNonFinite) {
    EXPECT_DOUBLE_EQ(residual_norm(-3.0), 3.0);
    EXPECT_DOUBLE_EQ(residual_norm(Complex(3, 4)), 5.0);
    EXPECT_DOUBLE_EQ(residual_norm(Vector{3, 4}), 5.0);
    EXPECT_THROW(residual_norm(std::numeric_limits<double>::infinity()), NonFiniteValue);
    EXPECT_THROW(residual_norm(Vector{1, std::nan("")}), NonFiniteValue);
}

TEST(Residual, NoSpuriousOverflow) {
    EXPECT_DOUBLE_EQ(magnitude(Vector{3e200, 4e200}), 5e200);
    EXPECT_DOUBLE_EQ(distance(Vector{1, 1}, Vector{4, 5}), 5.0);
}

TEST(CountedFunction, CountsAndMemoizes) {
    int calls = 0;
    CountedFunction<double> f([&](const double& x) {
        ++calls;
        return x * x;
    });
    EXPECT_EQ(f(2.0), 4.0);
    EXPECT_EQ(f(2.0), 4.0);
    EXPECT_EQ(f(3.0), 9.0);
    EXPECT_EQ(f(2.0), 4.0);
    EXPECT_EQ(f.eval_count(), 2);
    EXPECT_EQ(calls, 2);
    f(4.0);  // evicts 2.0
    f(2.0);
    EXPECT_EQ(f.eval_count(), 4);
}

TEST(CountedFunction, FormalCountingDisablesMemo) {
    CountedFunction<double> f([](const double& x) { return x; }, false);
    f(1.0);
    f(1.0);
    EXPECT_EQ(f.eval_count(), 2);
    EXPECT_FALSE(f.memoizing());
}

TEST(CountedFunction, SignedZeroIsDistinct) {
    CountedFunction<double> f([](const double& x) { return x; });
    f(0.0);
    f(-0.0);
    EXPECT_EQ(f.eval_count(), 2);
}

TEST(Errors, Messages) {
    DegenerateDenominator d(Stage::Corrector);
    EXPECT_EQ(d.stage(), Stage::Corrector);
    EXPECT_NE(std::string(d.what()).find("corrector"), std::string::npos);
    SingularMatrix s(2, 1e-20);
    EXPECT_EQ(s.column(), 2u);
}

TEST(Names, StatusStrings) {
    EXPECT_EQ(to_string(Status::Converged), "Converged");
    EXPECT_EQ(to_string(Status::MaxIterExceeded), "MaxIterExceeded");
    EXPECT_EQ(to_string(Status::NonFiniteValue), "NonFiniteValue");
    EXPECT_EQ(to_string(JacobianInit::Identity), "identity");
}
