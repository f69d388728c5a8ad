#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ftfusion {

/// Small dense row-major matrix. Sized for m agents (m <= 16 in practice).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t size);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double> operator*(std::span<const double> v) const;
    Matrix operator*(const Matrix& rhs) const;
    Matrix transposed() const;

    /// Max column sum.
    double norm1() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// LU factorization with partial pivoting.
class LuDecomposition {
public:
    /// Throws SingularMatrixError on an exactly zero pivot.
    explicit LuDecomposition(const Matrix& a);

    std::vector<double> solve(std::span<const double> rhs) const;
    Matrix inverse() const;

    /// ||A||_1 * ||A^-1||_1, computed from the explicit inverse.
    double condition_number() const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
    double norm1_ = 0.0;
};

}  // namespace ftfusion
