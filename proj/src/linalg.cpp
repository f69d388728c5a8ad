#include "ftfusion/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ftfusion {

Matrix Matrix::identity(std::size_t size) {
    Matrix out(size, size);
    for (std::size_t i = 0; i < size; ++i) out(i, i) = 1.0;
    return out;
}

std::vector<double> Matrix::operator*(std::span<const double> v) const {
    if (v.size() != cols_) throw std::invalid_argument("Matrix*vector: size mismatch");
    std::vector<double> out(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out[r] += (*this)(r, c) * v[c];
    return out;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("Matrix*Matrix: size mismatch");
    Matrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t k = 0; k < cols_; ++k)
            for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += (*this)(r, k) * rhs(k, c);
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

double Matrix::norm1() const {
    double best = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < rows_; ++r) sum += std::abs((*this)(r, c));
        best = std::max(best, sum);
    }
    return best;
}

LuDecomposition::LuDecomposition(const Matrix& a) : lu_(a), perm_(a.rows()), norm1_(a.norm1()) {
    if (a.rows() != a.cols()) throw std::invalid_argument("LuDecomposition: matrix is not square");
    const std::size_t size = a.rows();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});

    for (std::size_t k = 0; k < size; ++k) {
        std::size_t pivot = k;
        for (std::size_t r = k + 1; r < size; ++r)
            if (std::abs(lu_(r, k)) > std::abs(lu_(pivot, k))) pivot = r;
        if (lu_(pivot, k) == 0.0) throw SingularMatrixError("LuDecomposition: zero pivot");
        if (pivot != k) {
            for (std::size_t c = 0; c < size; ++c) std::swap(lu_(k, c), lu_(pivot, c));
            std::swap(perm_[k], perm_[pivot]);
        }
        for (std::size_t r = k + 1; r < size; ++r) {
            lu_(r, k) /= lu_(k, k);
            for (std::size_t c = k + 1; c < size; ++c) lu_(r, c) -= lu_(r, k) * lu_(k, c);
        }
    }
}

std::vector<double> LuDecomposition::solve(std::span<const double> rhs) const {
    const std::size_t size = lu_.rows();
    if (rhs.size() != size) throw std::invalid_argument("LuDecomposition::solve: size mismatch");
    std::vector<double> y(size);
    for (std::size_t r = 0; r < size; ++r) {
        double acc = rhs[perm_[r]];
        for (std::size_t c = 0; c < r; ++c) acc -= lu_(r, c) * y[c];
        y[r] = acc;
    }
    for (std::size_t r = size; r-- > 0;) {
        double acc = y[r];
        for (std::size_t c = r + 1; c < size; ++c) acc -= lu_(r, c) * y[c];
        y[r] = acc / lu_(r, r);
    }
    return y;
}

Matrix LuDecomposition::inverse() const {
    const std::size_t size = lu_.rows();
    Matrix inv(size, size);
    std::vector<double> unit(size, 0.0);
    for (std::size_t c = 0; c < size; ++c) {
        std::fill(unit.begin(), unit.end(), 0.0);
        unit[c] = 1.0;
        const auto col = solve(unit);
        for (std::size_t r = 0; r < size; ++r) inv(r, c) = col[r];
    }
    return inv;
}

double LuDecomposition::condition_number() const { return norm1_ * inverse().norm1(); }

}  // namespace ftfusion
