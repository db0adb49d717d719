#include <gtest/gtest.h>

#include <cmath>

#include "fdwfm/coc.hpp"

using namespace fdwfm;

namespace {

/// Trace whose iterates have the given distances to a final iterate at 0.
IterationTrace<double> trace_from_errors(const std::vector<double>& errors, std::size_t initial = 0) {
    IterationTrace<double> t;
    t.initial_count = initial;
    for (double e : errors) t.record(e, e, 0);
    t.record(0.0, 0.0, 0);
    return t;
}

}  // namespace

TEST(Coc, QuadraticModel) {
    // e_n = 10^(-2^n), n = 1..4; the window uses the three before the proxy
    auto t = trace_from_errors({1e-2, 1e-4, 1e-8, 1e-16}, 0);
    t.iterates.back() = 0.0;
    auto est = estimate_coc(t, 0.0);
    ASSERT_TRUE(est.defined());
    EXPECT_NEAR(*est.rho, 2.0, 1e-9);
}

TEST(Coc, LinearModel) {
    auto t = trace_from_errors({0.5, 0.25, 0.125, 0.0625});
    auto est = estimate_coc(t);
    ASSERT_TRUE(est.defined());
    EXPECT_NEAR(*est.rho, 1.0, 1e-9);
}

TEST(Coc, SyntheticOrders) {
    for (double p : {1.5, 2.0, 2.5, 3.0}) {
        std::vector<double> e = {1e-2};
        while (e.size() < 3) e.push_back(std::pow(e.back(), p));
        auto est = estimate_coc(trace_from_errors(e), 0.0);
        ASSERT_TRUE(est.defined()) << p;
        EXPECT_NEAR(*est.rho, p, 1e-6) << p;
    }
}

TEST(Coc, ScaleInvariance) {
    std::vector<double> e = {1e-1, 1e-2, 1e-4};
    auto base = estimate_coc(trace_from_errors(e));
    for (double c : {1e-3, 0.5, 7.0}) {
        std::vector<double> scaled;
        for (double v : e) scaled.push_back(v * c);
        auto est = estimate_coc(trace_from_errors(scaled));
        ASSERT_TRUE(est.defined());
        EXPECT_NEAR(*est.rho, *base.rho, 1e-12);
    }
}

TEST(Coc, WindowIndicesAndProxy) {
    auto t = trace_from_errors({8, 4, 2, 1});
    auto est = estimate_coc(t);
    EXPECT_EQ(est.iterates_used, (std::array<std::size_t, 3>{1, 2, 3}));
    EXPECT_EQ(est.root_proxy, 0.0);
}

TEST(Coc, NotDefinedCases) {
    // not strictly decreasing
    EXPECT_FALSE(estimate_coc(trace_from_errors({1e-1, 1e-1, 1e-3})).defined());
    // window touches a starting point
    EXPECT_FALSE(estimate_coc(trace_from_errors({1e-1, 1e-2, 1e-4}, 1)).defined());
    // error at noise level relative to the proxy
    IterationTrace<double> t;
    for (double x : {1.1, 1.0 + 1e-6, 1.0 + 1e-16, 1.0}) t.record(x, 0, 0);
    EXPECT_FALSE(estimate_coc(t).defined());
    // identical iterates give a zero error
    EXPECT_FALSE(estimate_coc(trace_from_errors({1e-1, 0.0, 0.0})).defined());
}

TEST(Coc, TooShort) {
    IterationTrace<double> t;
    t.record(1, 1, 0);
    t.record(0.5, 0.5, 0);
    t.record(0, 0, 0);
    EXPECT_THROW(estimate_coc(t), TraceTooShort);
    EXPECT_FALSE(coc_or_undefined(t).has_value());
}

TEST(Coc, VectorAndComplexPoints) {
    IterationTrace<Vector> tv;
    for (double e : {1e-1, 1e-2, 1e-4, 0.0}) tv.record(Vector{e, 0.0}, 0, 0);
    EXPECT_NEAR(*estimate_coc(tv).rho, 2.0, 1e-12);
    IterationTrace<Complex> tc;
    for (double e : {1e-1, 1e-2, 1e-4, 0.0}) tc.record(Complex(0, e), 0, 0);
    EXPECT_NEAR(*estimate_coc(tc).rho, 2.0, 1e-12);
}
