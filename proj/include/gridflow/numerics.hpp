#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "gridflow/errors.hpp"

namespace gridflow {

using Complex = std::complex<double>;

/// Dense row-major matrix over double or Complex. The systems in this
/// library are desk scale (a handful of buses), so dense storage is the
/// whole story; a sparse backend would slot in behind lu_factor/lu_solve.
template <typename T>
class DenseMatrix {
  public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

    const std::vector<T>& entries() const { return entries_; }

    std::vector<T> multiply(const std::vector<T>& x) const {
        if (x.size() != cols_)
            throw DimensionMismatchError("matrix-vector product: " + std::to_string(cols_) +
                                         " columns vs vector of " + std::to_string(x.size()));
        std::vector<T> y(rows_, T{});
        for (std::size_t i = 0; i < rows_; ++i) {
            T acc{};
            for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
            y[i] = acc;
        }
        return y;
    }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> entries_;
};

/// Row-pivoted LU factors: P·A = L·U packed into one matrix, unit diagonal
/// of L implicit. `permutation[i]` is the original row now in position i.
template <typename T>
struct LuFactors {
    DenseMatrix<T> lu;
    std::vector<std::size_t> permutation;

    std::size_t order() const { return lu.rows(); }
};

namespace detail {
inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const Complex& v) { return std::abs(v); }
}  // namespace detail

/// Pivots are compared by raw magnitude (plain partial pivoting, so |L| <= 1);
/// singularity is declared when the chosen pivot is below 1e-12 relative to
/// its row's initial infinity norm, which separates rank deficiency from
/// mere ill-conditioning at this scale.
inline constexpr double kSingularPivotThreshold = 1e-12;

template <typename T>
LuFactors<T> lu_factor(const DenseMatrix<T>& m) {
    if (m.rows() != m.cols())
        throw DimensionMismatchError("lu_factor requires a square matrix, got " +
                                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    const std::size_t n = m.rows();
    LuFactors<T> f{m, std::vector<std::size_t>(n)};
    std::iota(f.permutation.begin(), f.permutation.end(), std::size_t{0});

    std::vector<double> row_scale(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            row_scale[i] = std::max(row_scale[i], detail::magnitude(m(i, j)));
        if (row_scale[i] == 0.0) throw SingularMatrixError("matrix has an all-zero row");
    }

    auto& lu = f.lu;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot_row = k;
        double pivot_mag = detail::magnitude(lu(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double mag = detail::magnitude(lu(i, k));
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if (pivot_mag < kSingularPivotThreshold * row_scale[f.permutation[pivot_row]])
            throw SingularMatrixError("singular matrix: pivot " + std::to_string(pivot_mag) +
                                      " at column " + std::to_string(k));
        if (pivot_row != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(pivot_row, j));
            std::swap(f.permutation[k], f.permutation[pivot_row]);
        }
        const T pivot = lu(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const T factor = lu(i, k) / pivot;
            lu(i, k) = factor;
            for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= factor * lu(k, j);
        }
    }
    return f;
}

template <typename T>
std::vector<T> lu_solve(const LuFactors<T>& f, const std::vector<T>& rhs) {
    const std::size_t n = f.order();
    if (rhs.size() != n)
        throw DimensionMismatchError("lu_solve: system of order " + std::to_string(n) +
                                     " vs rhs of " + std::to_string(rhs.size()));
    std::vector<T> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[f.permutation[i]];
    // forward substitution (unit lower)
    for (std::size_t i = 1; i < n; ++i) {
        T acc = x[i];
        for (std::size_t j = 0; j < i; ++j) acc -= f.lu(i, j) * x[j];
        x[i] = acc;
    }
    // back substitution
    for (std::size_t ii = n; ii-- > 0;) {
        T acc = x[ii];
        for (std::size_t j = ii + 1; j < n; ++j) acc -= f.lu(ii, j) * x[j];
        x[ii] = acc / f.lu(ii, ii);
    }
    return x;
}

/// One-shot factor + solve.
template <typename T>
std::vector<T> solve_linear_system(const DenseMatrix<T>& a, const std::vector<T>& b) {
    return lu_solve(lu_factor(a), b);
}

template <typename T>
double infinity_norm(const std::vector<T>& v) {
    double m = 0.0;
    for (const auto& e : v) m = std::max(m, detail::magnitude(e));
    return m;
}

}  // namespace gridflow
