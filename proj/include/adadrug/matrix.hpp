#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace adadrug {

/// Dense row-major matrix of doubles. Vectors are 1×n or n×1 matrices.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    /// Row-wise literal, e.g. `Matrix{{1, 2}, {3, 4}}`. Rows must be equally long.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

    bool same_shape(const Matrix& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }
    std::string shape() const;
    bool all_finite() const;

    void fill(double v);

    /// Rows picked by index, in the given order (indices may repeat).
    Matrix select_rows(std::span<const std::size_t> indices) const;
    Matrix select_cols(std::span<const std::size_t> indices) const;
    Matrix transposed() const;

    /// Bitwise value equality (same shape, same doubles).
    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

/// Stacks matrices with equal column counts on top of each other.
Matrix vstack(std::span<const Matrix> parts);

namespace kernels {

// Plain matrix kernels shared by the tape ops and the tape-free inference path.
// All of them throw ShapeError on mismatched operands.

Matrix matmul(const Matrix& a, const Matrix& b);
/// out += aᵀ·b
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& out);
/// out += a·bᵀ
void matmul_nt_acc(const Matrix& a, const Matrix& b, Matrix& out);
/// Adds the 1×n row `bias` to every row of `x`.
void add_row_inplace(Matrix& x, const Matrix& bias);
void relu_inplace(Matrix& x);
void sigmoid_inplace(Matrix& x);

}  // namespace kernels

}  // namespace adadrug
