#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bigat {

// Dense row-major 64-bit matrix. Small model (4 layers, ~130 nodes), so no
// BLAS, no views, just value semantics.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    std::span<double> row(std::size_t i) { return {values.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

    std::size_t size() const { return values.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    void fill(double v) { values.assign(values.size(), v); }

    bool operator==(const Matrix& o) const = default;
};

// Learnable parameter: value plus accumulated gradient of matching shape.
struct Param {
    Matrix value;
    Matrix grad;

    Param() = default;
    Param(std::size_t r, std::size_t c) : value(r, c), grad(r, c) {}

    void reset_grad() { grad.fill(0.0); }
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

Matrix leaky_relu(const Matrix& x, double slope);
double leaky_relu_grad_factor(double x, double slope);  // subgradient at 0 is 1

// Softmax with max-subtraction over one normalization set. Errors on empty.
std::vector<double> softmax(std::span<const double> scores);

// Per-node softmax over ragged normalization sets (the alpha normalization).
std::vector<std::vector<double>> masked_softmax_rows(
    const std::vector<std::vector<double>>& scores);

bool all_finite(const Matrix& m);

}  // namespace bigat
