#pragma once

#include <cstddef>
#include <vector>

namespace sideflow {

// Dense row-major double matrix, just enough linear algebra for the
// classifier. Loops are ordered so the inner dimension is contiguous on
// both operands.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    double* row(std::size_t r) { return data.data() + r * cols; }
    const double* row(std::size_t r) const { return data.data() + r * cols; }

    bool operator==(const Matrix&) const = default;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);

// C = A * B^T   (dot products of rows against rows)
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

} // namespace sideflow
