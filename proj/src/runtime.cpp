#include "densitrace/runtime.hpp"

#include "densitrace/errors.hpp"
#include "kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace densitrace {

using detail::RowVector;

namespace {

/// Causal multi-head attention of one query row against cached rows [0, count).
RowVector attend(const RowVector& q, const Matrix& keys, const Matrix& values, int count, const ModelConfig& cfg) {
    RowVector z = RowVector::Zero(cfg.d_model);
    const float scale = 1.0f / std::sqrt(static_cast<float>(cfg.d_head));
    std::vector<float> w(static_cast<std::size_t>(count));
    for (int h = 0; h < cfg.n_heads; ++h) {
        const auto qh = q.segment(h * cfg.d_head, cfg.d_head);
        float m = -INFINITY;
        for (int j = 0; j < count; ++j) {
            w[static_cast<std::size_t>(j)] = qh.dot(keys.row(j).segment(h * cfg.d_head, cfg.d_head)) * scale;
            m = std::max(m, w[static_cast<std::size_t>(j)]);
        }
        float sum = 0.0f;
        for (int j = 0; j < count; ++j) {
            w[static_cast<std::size_t>(j)] = std::exp(w[static_cast<std::size_t>(j)] - m);
            sum += w[static_cast<std::size_t>(j)];
        }
        auto zh = z.segment(h * cfg.d_head, cfg.d_head);
        for (int j = 0; j < count; ++j)
            zh += (w[static_cast<std::size_t>(j)] / sum) * values.row(j).segment(h * cfg.d_head, cfg.d_head);
    }
    return z;
}

RowVector mlp_block(const LayerWeights& w, const RowVector& x, float eps) {
    const RowVector b = detail::layer_norm(x, w.ln2_weight, w.ln2_bias, eps);
    RowVector hidden = b * w.mlp_in + w.mlp_in_bias.transpose();
    detail::gelu_inplace(hidden);
    return hidden * w.mlp_out + w.mlp_out_bias.transpose();
}

}  // namespace

Distribution forward_dense(const Model& model, const TokenSequence& tokens) {
    validate_tokens(model.config, tokens);
    const auto& cfg = model.config;
    const int n = static_cast<int>(tokens.size());

    Matrix x(n, cfg.d_model);
    for (int i = 0; i < n; ++i)
        x.row(i) = model.token_embedding.row(tokens[static_cast<std::size_t>(i)]) + model.position_embedding.row(i);

    for (const auto& w : model.layers) {
        const Matrix a = detail::layer_norm_rows(x, w.ln1_weight, w.ln1_bias, cfg.ln_epsilon);
        Matrix q = a * w.wq;
        q.rowwise() += w.bq.transpose();
        Matrix k = a * w.wk;
        k.rowwise() += w.bk.transpose();
        Matrix v = a * w.wv;
        v.rowwise() += w.bv.transpose();

        Matrix z(n, cfg.d_model);
        for (int i = 0; i < n; ++i) z.row(i) = attend(q.row(i), k, v, i + 1, cfg);
        Matrix attn = z * w.wo;
        attn.rowwise() += w.bo.transpose();
        x += attn;
        for (int i = 0; i < n; ++i) x.row(i) += mlp_block(w, x.row(i), cfg.ln_epsilon);
    }
    return detail::output_distribution(model, x.row(n - 1));
}

DenseSession::DenseSession(const Model& model) : model_(model) {
    const auto& cfg = model.config;
    keys_.assign(static_cast<std::size_t>(cfg.n_layers), Matrix(cfg.max_seq_len, cfg.d_model));
    values_.assign(static_cast<std::size_t>(cfg.n_layers), Matrix(cfg.max_seq_len, cfg.d_model));
}

Distribution DenseSession::append(TokenId token) {
    const auto& cfg = model_.config;
    if (length_ >= cfg.max_seq_len) fail(ErrorKind::InputTooLong, "session reached max_seq_len");
    if (token < 0 || token >= cfg.vocab_size) fail(ErrorKind::InvalidToken, "token id " + std::to_string(token));

    RowVector x = model_.token_embedding.row(token) + model_.position_embedding.row(length_);
    for (std::size_t l = 0; l < model_.layers.size(); ++l) {
        const auto& w = model_.layers[l];
        const RowVector a = detail::layer_norm(x, w.ln1_weight, w.ln1_bias, cfg.ln_epsilon);
        const RowVector q = a * w.wq + w.bq.transpose();
        keys_[l].row(length_) = a * w.wk + w.bk.transpose();
        values_[l].row(length_) = a * w.wv + w.bv.transpose();
        const RowVector z = attend(q, keys_[l], values_[l], length_ + 1, cfg);
        x += z * w.wo + w.bo.transpose();
        x += mlp_block(w, x, cfg.ln_epsilon);
    }
    ++length_;
    return detail::output_distribution(model_, x);
}

TokenId nucleus_sample(const Distribution& dist, double p, Rng& rng) {
    if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::InvalidP, "p must lie in (0, 1], got " + std::to_string(p));
    if (dist.probs.empty()) fail(ErrorKind::InvalidArgument, "empty distribution");

    std::vector<TokenId> order(dist.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](TokenId a, TokenId b) {
        const float pa = dist.probs[static_cast<std::size_t>(a)];
        const float pb = dist.probs[static_cast<std::size_t>(b)];
        return pa != pb ? pa > pb : a < b;
    });

    double mass = 0.0;
    std::size_t size = 0;
    while (size < order.size() && mass < p) mass += dist.probs[static_cast<std::size_t>(order[size++])];

    const double r = rng.uniform() * mass;
    double cum = 0.0;
    for (std::size_t k = 0; k < size; ++k) {
        cum += dist.probs[static_cast<std::size_t>(order[k])];
        if (r < cum) return order[k];
    }
    return order[size - 1];
}

TokenSequence generate(const Model& model, const TokenSequence& prompt, int n_new, double p, std::uint64_t seed) {
    validate_tokens(model.config, prompt);
    if (n_new < 0) fail(ErrorKind::InvalidArgument, "n_new must be >= 0");
    if (prompt.size() + static_cast<std::size_t>(n_new) > static_cast<std::size_t>(model.config.max_seq_len))
        fail(ErrorKind::InputTooLong, std::to_string(prompt.size()) + " + " + std::to_string(n_new) +
                                          " tokens exceed max_seq_len " + std::to_string(model.config.max_seq_len));
    if (!(p > 0.0 && p <= 1.0)) fail(ErrorKind::InvalidP, "p must lie in (0, 1], got " + std::to_string(p));

    TokenSequence out = prompt;
    if (n_new == 0) return out;

    Rng rng(seed);
    DenseSession session(model);
    Distribution next;
    for (auto id : prompt.ids) next = session.append(id);
    for (int t = 0; t < n_new; ++t) {
        const TokenId tok = nucleus_sample(next, p, rng);
        out.ids.push_back(tok);
        if (t + 1 < n_new) next = session.append(tok);
    }
    return out;
}

}  // namespace densitrace
