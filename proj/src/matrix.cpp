#include "bigat/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bigat/errors.hpp"

namespace bigat {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) {
        throw DimensionError("matmul: shape mismatch " + std::to_string(a.rows) + "x" +
                             std::to_string(a.cols) + " * " + std::to_string(b.rows) + "x" +
                             std::to_string(b.cols));
    }
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out(j, i) = m(i, j);
    return out;
}

Matrix leaky_relu(const Matrix& x, double slope) {
    Matrix out = x;
    for (double& v : out.values) {
        if (v < 0.0) v *= slope;
    }
    return out;
}

double leaky_relu_grad_factor(double x, double slope) {
    return x >= 0.0 ? 1.0 : slope;
}

std::vector<double> softmax(std::span<const double> scores) {
    if (scores.empty()) throw DataError("softmax: empty normalization set");
    const double mx = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out(scores.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

std::vector<std::vector<double>> masked_softmax_rows(
    const std::vector<std::vector<double>>& scores) {
    std::vector<std::vector<double>> out;
    out.reserve(scores.size());
    for (const auto& row : scores) out.push_back(softmax(row));
    return out;
}

bool all_finite(const Matrix& m) {
    return std::all_of(m.values.begin(), m.values.end(),
                       [](double v) { return std::isfinite(v); });
}

}  // namespace bigat
