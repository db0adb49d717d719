#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fdwfm/scalar.hpp"
#include "fdwfm/system.hpp"

using namespace fdwfm;

namespace {

double max_abs_diff(const Vector& a, const Vector& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Vector F31(const Vector& v) { return {v[0] + v[1] - 3, v[0] * v[0] + v[1] * v[1] - 9}; }

Vector F5(const Vector& x) {
    return {x[0] + x[1] - 2, x[0] * x[2] + x[1] * x[3], x[0] * x[2] * x[2] + x[1] * x[3] * x[3] - 2.0 / 3,
            x[0] * x[2] * x[2] * x[2] + x[1] * x[3] * x[3] * x[3]};
}

Matrix J5(const Vector& x) {
    double a = x[0], b = x[1], c = x[2], d = x[3];
    return {{1, 1, 0, 0}, {c, d, a, b}, {c * c, d * d, 2 * a * c, 2 * b * d}, {c * c * c, d * d * d, 3 * a * c * c, 3 * b * d * d}};
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, bool dominant) {
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = u(rng);
    if (dominant)
        for (std::size_t i = 0; i < n; ++i) A(i, i) += static_cast<double>(n);
    return A;
}

Vector random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1, 1);
    Vector v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST(LuSolve, Examples) {
    EXPECT_EQ(lu_solve(Matrix::identity(2), Vector{3, 7}), (Vector{3, 7}));
    EXPECT_EQ(lu_solve(Matrix{{2, 0}, {0, 4}}, Vector{2, 8}), (Vector{1, 2}));
    EXPECT_EQ(lu_solve(Matrix{{0, 1}, {1, 0}}, Vector{5, 6}), (Vector{6, 5}));
}

TEST(LuSolve, Singular) {
    EXPECT_THROW(lu_solve(Matrix{{1, 2}, {2, 4}}, Vector{1, 1}), SingularMatrix);
    EXPECT_THROW(lu_solve(Matrix(3, 3), Vector{1, 1, 1}), SingularMatrix);
    EXPECT_THROW(lu_solve(Matrix(2, 3), Vector{1, 1}), std::invalid_argument);
}

TEST(LuSolve, RandomRoundTrip) {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 100; ++k) {
        Matrix A = random_matrix(rng, 10, true);
        Vector b = random_vector(rng, 10);
        Vector x = lu_solve(A, b);
        Vector r = A * x;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
        EXPECT_LE(magnitude(r), 1e-9 * magnitude(b));
    }
}

TEST(LuSolve, AgreesWithEigen) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k) {
        std::size_t n = 2 + k % 9;
        Matrix A = random_matrix(rng, n, false);
        Vector b = random_vector(rng, n);
        Eigen::MatrixXd E(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) E(i, j) = A(i, j);
        Eigen::VectorXd eb = Eigen::Map<Eigen::VectorXd>(b.data(), n);
        Eigen::VectorXd ex = E.partialPivLu().solve(eb);
        Vector x = lu_solve(A, b);
        double cond = E.jacobiSvd().singularValues()(0) / E.jacobiSvd().singularValues()(n - 1);
        for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], ex(i), 1e-12 * cond * (1 + std::abs(ex(i))));
    }
}

TEST(Broyden, UpdateExamples) {
    Matrix A{{1, 2}, {3, 4}};
    Vector s{1, -1};
    Vector y = A * s;
    EXPECT_EQ(broyden_update(A, s, y), A);
    EXPECT_EQ(broyden_update(Matrix(2, 2), Vector{1, 0}, Vector{2, 3}), (Matrix{{2, 0}, {3, 0}}));
    EXPECT_THROW(broyden_update(A, Vector{0, 0}, Vector{1, 1}), DegenerateDenominator);
}

TEST(Broyden, SecantConditionAndRankOne) {
    std::mt19937_64 rng(17);
    for (int k = 0; k < 1000; ++k) {
        std::size_t n = 2 + k % 9;
        Matrix A = random_matrix(rng, n, false);
        Vector s = random_vector(rng, n), y = random_vector(rng, n);
        Matrix B = broyden_update(A, s, y);
        Vector Bs = B * s;
        for (std::size_t i = 0; i < n; ++i) Bs[i] -= y[i];
        EXPECT_LE(magnitude(Bs), 1e-12 * (magnitude(y) + 1));
        if (k % 10 == 0) {
            Eigen::MatrixXd D(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) D(i, j) = B(i, j) - A(i, j);
            Eigen::VectorXd sv = D.jacobiSvd().singularValues();
            for (Eigen::Index i = 1; i < sv.size(); ++i) EXPECT_LE(sv(i), 1e-12 * (1 + sv(0)));
        }
    }
}

TEST(FdJacobian, Examples) {
    CountedFunction<Vector> F(F31);
    Matrix J = fd_jacobian(F, {1, 3});
    EXPECT_NEAR(J(0, 0), 1, 1e-6);
    EXPECT_NEAR(J(0, 1), 1, 1e-6);
    EXPECT_NEAR(J(1, 0), 2, 1e-6);
    EXPECT_NEAR(J(1, 1), 6, 1e-6);
    EXPECT_EQ(F.eval_count(), 3);

    Matrix M{{2, -1, 0.5}, {0.25, 3, 1}, {-4, 0, 1}};
    CountedFunction<Vector> lin([&](const Vector& x) {
        Vector r = M * x;
        r[0] -= 1;
        return r;
    });
    Matrix L = fd_jacobian(lin, {0.3, -2, 7});
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(L(i, j), M(i, j), 1e-9);

    CountedFunction<Vector> boom([](const Vector& x) { return Vector{std::exp(x[0] * 1e3), x[1]}; });
    EXPECT_THROW(fd_jacobian(boom, {1, 1}), NonFiniteValue);
}

TEST(SystemSolve, TableThreeRowOne) {
    SystemProblem p{F31, {}, {1, 3}, {}};
    for (auto m : {SystemMethod::Broyden, SystemMethod::FDWFM}) {
        auto r = solve_system(p, m);
        EXPECT_TRUE(r.converged()) << to_string(m);
        EXPECT_LT(max_abs_diff(r.root, {0, 3}), 1e-6);
    }
    p.J = [](const Vector& v) { return Matrix{{1, 1}, {2 * v[0], 2 * v[1]}}; };
    for (auto m : {SystemMethod::Newton, SystemMethod::WFM}) {
        SolverConfig c;
        c.residual_tol = 1e-14;
        auto r = solve_system(p, m, c);
        EXPECT_TRUE(r.converged()) << to_string(m);
        EXPECT_LT(max_abs_diff(r.root, {0, 3}), 1e-9);
    }
}

TEST(SystemSolve, TableThreeRowFour) {
    SystemProblem p{[](const Vector& v) { return Vector{v[0] - std::cos(v[1]), std::sin(v[0]) + 0.5 * v[1]}; }, {}, {0, -0.5}, {}};
    auto r = solve_fdwfm_system(p);
    EXPECT_TRUE(r.converged());
    EXPECT_LT(max_abs_diff(r.root, {0.53038868, -1.01173734}), 1e-7);
}

TEST(SystemSolve, LinearSystems) {
    Matrix M{{4, 1, 0}, {1, 3, -1}, {0, -1, 2}};
    Vector b{1, 2, 3};
    auto F = [&](const Vector& x) {
        Vector r = M * x;
        for (std::size_t i = 0; i < 3; ++i) r[i] -= b[i];
        return r;
    };
    SystemProblem p{F, [&](const Vector&) { return M; }, {0, 0, 0}, {}};
    Vector truth = lu_solve(M, b);
    EXPECT_EQ(solve_newton_system(p).iterations, 1);
    EXPECT_EQ(solve_wfm_system(p).iterations, 1);
    auto br = solve_broyden(p);
    EXPECT_TRUE(br.converged());
    EXPECT_LE(br.iterations, 2);
    EXPECT_LT(max_abs_diff(br.root, truth), 1e-8);
}

TEST(SystemSolve, TableFiveNewton) {
    SystemProblem p{F5, J5, {10, 10, 2, -1}, {}};
    auto r = solve_newton_system(p);
    EXPECT_TRUE(r.converged());
    EXPECT_LT(max_abs_diff(r.root, {1, 1, 1 / std::sqrt(3.0), -1 / std::sqrt(3.0)}), 1e-8);
    EXPECT_EQ(r.derivative_evals, r.iterations);
}

TEST(SystemSolve, SingularJacobian) {
    SystemProblem p{[](const Vector& x) { return Vector{x[0] + x[1] - 1, 2 * x[0] + 2 * x[1] - 3}; },
                    [](const Vector&) { return Matrix{{1, 1}, {2, 2}}; },
                    {0, 0},
                    {}};
    EXPECT_EQ(solve_newton_system(p).status, Status::SingularMatrix);
    EXPECT_EQ(solve_broyden(p).status, Status::SingularMatrix);
}

TEST(SystemSolve, ReinitJacobianRecovers) {
    // a deliberately singular initial matrix is replaced by fd_jacobian once
    SystemProblem p{F31, {}, {1, 3}, Matrix{{1, 1}, {1, 1}}};
    EXPECT_EQ(solve_fdwfm_system(p).status, Status::SingularMatrix);
    SolverConfig c;
    c.on_singular = SingularPolicy::ReinitJacobian;
    auto r = solve_fdwfm_system(p, c);
    EXPECT_TRUE(r.converged());
    EXPECT_LT(max_abs_diff(r.root, {0, 3}), 1e-6);
}

TEST(SystemSolve, NfeMatchesSpy) {
    for (bool formal : {false, true}) {
        long spy = 0;
        SystemProblem p{[&](const Vector& v) {
                            ++spy;
                            return F31(v);
                        },
                        {},
                        {1, 3},
                        {}};
        SolverConfig c;
        c.count_formal = formal;
        for (auto m : {SystemMethod::Broyden, SystemMethod::FDWFM}) {
            spy = 0;
            auto r = solve_system(p, m, c);
            EXPECT_EQ(r.nfe, spy) << to_string(m);
        }
    }
}

TEST(SystemSolve, MissingJacobian) {
    SystemProblem p{F31, {}, {1, 3}, {}};
    EXPECT_THROW(solve_newton_system(p), std::invalid_argument);
}

TEST(SystemSolve, IdentityInit) {
    SystemProblem p{F31, {}, {1, 3}, {}};
    SolverConfig c;
    c.jacobian_init = JacobianInit::Identity;
    auto r = solve_broyden(p, c);
    EXPECT_EQ(r.trace.nfe_at_step[0], 1);  // no finite-difference columns
}

TEST(SystemSolve, OneDimensionalReduction) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int k = 0; k < 20; ++k) {
        double a = u(rng), b = u(rng), c = u(rng);
        auto f = [=](double x) { return a * x * x * x + b * x - c - 1.0; };
        double x0 = 0.1 * u(rng), x1 = x0 + 0.5 * u(rng);
        double slope = (f(x1) - f(x0)) / (x1 - x0);
        SystemProblem sp{[&](const Vector& v) { return Vector{f(v[0])}; }, {}, {x1}, Matrix{{slope}}};
        ScalarProblem scalar;
        scalar.f = f;
        scalar.x0 = x0;
        scalar.x1 = x1;
        for (auto [sm, m] : {std::pair{SystemMethod::FDWFM, Method::FDWFM}, std::pair{SystemMethod::Broyden, Method::Secant}}) {
            auto rs = solve_system(sp, sm);
            auto r1 = solve_scalar(scalar, m);
            ASSERT_EQ(rs.trace.size() + 1, r1.trace.size()) << k << to_string(sm);
            for (std::size_t i = 0; i < rs.trace.size(); ++i)
                EXPECT_NEAR(rs.trace.iterates[i][0], r1.trace.iterates[i + 1], 1e-12) << k << " " << i;
        }
    }
}

TEST(SystemSolve, PermutationInvariance) {
    auto F = [](const Vector& v) {
        return Vector{v[0] * v[0] + v[1] * v[1] + v[2] - 3, std::exp(v[0] - 1) + v[1] * v[2] - 2, v[0] + 2 * v[1] - v[2] * v[2] - 2};
    };
    const std::array<std::size_t, 3> perm = {2, 0, 1};  // new index i holds old index perm[i]
    auto permuted = [&](const Vector& w) {
        Vector v(3);
        for (std::size_t i = 0; i < 3; ++i) v[perm[i]] = w[i];
        Vector f = F(v), g(3);
        for (std::size_t i = 0; i < 3; ++i) g[i] = f[perm[i]];
        return g;
    };
    Vector x0{0.8, 1.2, 0.9}, w0(3);
    for (std::size_t i = 0; i < 3; ++i) w0[i] = x0[perm[i]];
    for (auto m : {SystemMethod::Broyden, SystemMethod::FDWFM}) {
        auto a = solve_system({F, {}, x0, {}}, m);
        auto b = solve_system({permuted, {}, w0, {}}, m);
        ASSERT_EQ(a.trace.size(), b.trace.size()) << to_string(m);
        for (std::size_t k = 0; k < a.trace.size(); ++k)
            for (std::size_t i = 0; i < 3; ++i)
                EXPECT_NEAR(b.trace.iterates[k][i], a.trace.iterates[k][perm[i]], 1e-12);
    }
}

TEST(SystemSolve, LiteralStepOneIsAvailable) {
    SystemProblem p{F31, {}, {1, 3}, {}};
    SolverConfig c;
    c.literal_step1 = true;
    auto r = solve_fdwfm_system(p, c);
    auto base = solve_fdwfm_system(p);
    ASSERT_GE(r.trace.size(), 3u);
    ASSERT_GE(base.trace.size(), 3u);
    // same start, different first corrector
    EXPECT_EQ(r.trace.iterates[0], base.trace.iterates[0]);
    EXPECT_GT(distance(r.trace.iterates[1], base.trace.iterates[1]), 1e-12);
}
