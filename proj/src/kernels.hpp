#pragma once

#include "densitrace/model.hpp"

#include <cmath>

namespace densitrace::detail {

using RowVector = Eigen::Matrix<float, 1, Eigen::Dynamic>;

/// LayerNorm of one row; an all-zero row maps to `bias`.
template <typename Row>
RowVector layer_norm(const Row& x, const Vector& weight, const Vector& bias, float eps) {
    const auto d = x.size();
    double mean = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) mean += x(c);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
        const double z = x(c) - mean;
        var += z * z;
    }
    var /= static_cast<double>(d);
    const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
    RowVector out(d);
    for (Eigen::Index c = 0; c < d; ++c)
        out(c) = static_cast<float>((x(c) - mean) * inv) * weight(c) + bias(c);
    return out;
}

inline Matrix layer_norm_rows(const Matrix& x, const Vector& weight, const Vector& bias, float eps) {
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = layer_norm(x.row(r), weight, bias, eps);
    return out;
}

/// Tanh-approximated GELU, as in GPT-2.
inline float gelu(float x) {
    constexpr float k = 0.7978845608028654f;  // sqrt(2/pi)
    return 0.5f * x * (1.0f + std::tanh(k * (x + 0.044715f * x * x * x)));
}

template <typename M>
void gelu_inplace(M& m) {
    m = m.unaryExpr([](float v) { return gelu(v); });
}

Distribution softmax(const Vector& logits);

/// Final LayerNorm of the last-position state, unembedding, softmax.
Distribution output_distribution(const Model& model, const RowVector& final_state);

}  // namespace densitrace::detail
