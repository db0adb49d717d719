#include "fdwfm/linalg.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace fdwfm {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector Matrix::operator*(std::span<const double> x) const {
    if (x.size() != cols_) throw std::invalid_argument("Matrix*vector: size mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

Matrix Matrix::operator+(const Matrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw std::invalid_argument("Matrix+: shape mismatch");
    Matrix r = *this;
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] += o.data_[k];
    return r;
}

Matrix Matrix::operator-(const Matrix& o) const {
    if (o.rows_ != rows_ || o.cols_ != cols_) throw std::invalid_argument("Matrix-: shape mismatch");
    Matrix r = *this;
    for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] -= o.data_[k];
    return r;
}

Vector lu_solve(const Matrix& A, std::span<const double> b) {
    const std::size_t n = A.rows();
    if (A.cols() != n) throw std::invalid_argument("lu_solve: matrix not square");
    if (b.size() != n) throw std::invalid_argument("lu_solve: rhs size mismatch");

    std::vector<double> colmax(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) colmax[j] = std::max(colmax[j], std::abs(A(i, j)));

    Matrix lu = A;
    Vector x(b.begin(), b.end());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(p, k))) p = i;
        double pivot = lu(p, k);
        if (!(std::abs(pivot) >= kPivotTolerance * colmax[k]) || pivot == 0.0) throw SingularMatrix(k, pivot);
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(p, j), lu(k, j));
            std::swap(x[p], x[k]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double m = lu(i, k) / pivot;
            lu(i, k) = m;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= m * lu(k, j);
            x[i] -= m * x[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double acc = x[k];
        for (std::size_t j = k + 1; j < n; ++j) acc -= lu(k, j) * x[j];
        x[k] = acc / lu(k, k);
    }
    return x;
}

Matrix broyden_update(const Matrix& A, std::span<const double> s, std::span<const double> y) {
    const std::size_t n = A.rows();
    if (A.cols() != s.size() || y.size() != n) throw std::invalid_argument("broyden_update: size mismatch");
    double ss = 0.0;
    for (double v : s) ss += v * v;
    if (!(ss > 1e-300)) throw DegenerateDenominator(Stage::Update);
    Vector As = A * s;
    Matrix out = A;
    for (std::size_t i = 0; i < n; ++i) {
        double r = (y[i] - As[i]) / ss;
        for (std::size_t j = 0; j < s.size(); ++j) out(i, j) += r * s[j];
    }
    return out;
}

}  // namespace fdwfm
