#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fdwfm/core.hpp"

namespace fdwfm {

/// Dense row-major matrix.
class Matrix {
 public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

    Vector operator*(std::span<const double> x) const;
    Matrix operator+(const Matrix& other) const;
    Matrix operator-(const Matrix& other) const;

    bool operator==(const Matrix&) const = default;

 private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Relative pivot threshold used by lu_solve.
inline constexpr double kPivotTolerance = 1e-12;

/// Solves A x = b by LU with partial pivoting.
///
/// Throws SingularMatrix when a pivot is below kPivotTolerance times the
/// largest magnitude in that column of the input matrix.
Vector lu_solve(const Matrix& A, std::span<const double> b);

/// A + (y - A s) s^T / (s^T s). Throws DegenerateDenominator when s^T s <= 1e-300.
Matrix broyden_update(const Matrix& A, std::span<const double> s, std::span<const double> y);

}  // namespace fdwfm
