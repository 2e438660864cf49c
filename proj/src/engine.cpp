#include "engine.hpp"

#include <algorithm>
#include <limits>

namespace densitrace::detail {

Distribution softmax(const Vector& logits) {
    Distribution dist;
    dist.probs.resize(static_cast<std::size_t>(logits.size()));
    const float max_logit = logits.maxCoeff();
    double sum = 0.0;
    for (Eigen::Index v = 0; v < logits.size(); ++v) {
        const double e = std::exp(static_cast<double>(logits(v) - max_logit));
        dist.probs[static_cast<std::size_t>(v)] = static_cast<float>(e);
        sum += e;
    }
    for (auto& p : dist.probs) p = static_cast<float>(p / sum);
    return dist;
}

Distribution output_distribution(const Model& model, const RowVector& final_state) {
    const RowVector normed = layer_norm(final_state, model.ln_f_weight, model.ln_f_bias, model.config.ln_epsilon);
    const Vector logits = model.output_embedding() * normed.transpose();
    return softmax(logits);
}

RowVector run_edge_graph(const Model& model, const TokenSequence& tokens, std::span<const std::uint8_t> keep,
                         EngineRecording* recording) {
    const auto& cfg = model.config;
    const int n = static_cast<int>(tokens.size());
    const int d = cfg.d_model;
    const int n_heads = cfg.n_heads;
    const int d_head = cfg.d_head;
    const GraphLayout layout(cfg.n_layers, n_heads, n);
    auto kept = [&](std::size_t e) { return keep.empty() || keep[e] != 0; };
    const float scale = 1.0f / std::sqrt(static_cast<float>(d_head));

    Matrix x(n, d);
    for (int i = 0; i < n; ++i)
        x.row(i) = model.token_embedding.row(tokens[static_cast<std::size_t>(i)]) + model.position_embedding.row(i);

    if (recording) {
        recording->node_states.setZero(static_cast<Eigen::Index>(layout.node_count()), d);
        recording->alpha.assign(static_cast<std::size_t>(cfg.n_layers), {});
        recording->head_values.assign(static_cast<std::size_t>(cfg.n_layers), {});
        recording->mlp_out.assign(static_cast<std::size_t>(cfg.n_layers), {});
        for (int i = 0; i < n; ++i)
            recording->node_states.row(static_cast<Eigen::Index>(layout.node_index(NodeId::embedding(i)))) = x.row(i);
    }

    std::vector<float> scores(static_cast<std::size_t>(n));
    for (int l = 0; l < cfg.n_layers; ++l) {
        const auto& w = model.layers[static_cast<std::size_t>(l)];
        // The last layer only feeds the output node, unless every node is being recorded.
        const int first = (l == cfg.n_layers - 1 && !recording) ? n - 1 : 0;
        const int rows = n - first;
        const std::size_t layer_base = layout.edges_per_layer() * static_cast<std::size_t>(l);

        const Matrix a = layer_norm_rows(x, w.ln1_weight, w.ln1_bias, cfg.ln_epsilon);
        Matrix q = a.bottomRows(rows) * w.wq;
        q.rowwise() += w.bq.transpose();
        Matrix k = a * w.wk;
        k.rowwise() += w.bk.transpose();
        Matrix v = a * w.wv;
        v.rowwise() += w.bv.transpose();

        // Value vectors of each head pushed through that head's slice of the output projection.
        Matrix head_values(static_cast<Eigen::Index>(n_heads) * n, d);
        for (int h = 0; h < n_heads; ++h)
            head_values.middleRows(static_cast<Eigen::Index>(h) * n, n) =
                v.middleCols(h * d_head, d_head) * w.wo.middleRows(h * d_head, d_head);

        std::vector<float> alpha(static_cast<std::size_t>(n_heads) * n * n, 0.0f);
        for (int h = 0; h < n_heads; ++h) {
            for (int i = first; i < n; ++i) {
                const auto qi = q.row(i - first).segment(h * d_head, d_head);
                float max_score = -std::numeric_limits<float>::infinity();
                for (int j = 0; j <= i; ++j) {
                    scores[static_cast<std::size_t>(j)] = qi.dot(k.row(j).segment(h * d_head, d_head)) * scale;
                    max_score = std::max(max_score, scores[static_cast<std::size_t>(j)]);
                }
                float sum = 0.0f;
                for (int j = 0; j <= i; ++j) {
                    scores[static_cast<std::size_t>(j)] = std::exp(scores[static_cast<std::size_t>(j)] - max_score);
                    sum += scores[static_cast<std::size_t>(j)];
                }
                float* row = alpha.data() + (static_cast<std::size_t>(h) * n + i) * n;
                for (int j = 0; j <= i; ++j) row[j] = scores[static_cast<std::size_t>(j)] / sum;
            }
        }

        Matrix after_attn = Matrix::Zero(n, d);
        for (int i = first; i < n; ++i) {
            const std::size_t base = layer_base + layout.index_of(EdgeId::attn_residual(0, i));
            RowVector acc = w.bo.transpose();
            if (kept(base)) acc += x.row(i);
            for (int h = 0; h < n_heads; ++h) {
                const float* row = alpha.data() + (static_cast<std::size_t>(h) * n + i) * n;
                const std::size_t head_base = base + 1 + static_cast<std::size_t>(h) * (i + 1);
                for (int j = 0; j <= i; ++j)
                    if (kept(head_base + static_cast<std::size_t>(j)))
                        acc += row[j] * head_values.row(static_cast<Eigen::Index>(h) * n + j);
            }
            after_attn.row(i) = acc;
        }

        const Matrix b = layer_norm_rows(after_attn.bottomRows(rows), w.ln2_weight, w.ln2_bias, cfg.ln_epsilon);
        Matrix hidden = b * w.mlp_in;
        hidden.rowwise() += w.mlp_in_bias.transpose();
        gelu_inplace(hidden);
        Matrix mlp = hidden * w.mlp_out;
        mlp.rowwise() += w.mlp_out_bias.transpose();

        Matrix next = Matrix::Zero(n, d);
        for (int i = first; i < n; ++i) {
            const std::size_t base = layer_base + layout.index_of(EdgeId::mlp_residual(0, i));
            if (kept(base)) next.row(i) += after_attn.row(i);
            if (kept(base + 1)) next.row(i) += mlp.row(i - first);
        }

        if (recording) {
            for (int i = 0; i < n; ++i) {
                recording->node_states.row(static_cast<Eigen::Index>(layout.node_index(NodeId::after_attention(l, i)))) =
                    after_attn.row(i);
                recording->node_states.row(static_cast<Eigen::Index>(layout.node_index(NodeId::after_mlp(l, i)))) =
                    next.row(i);
            }
            recording->alpha[static_cast<std::size_t>(l)] = std::move(alpha);
            recording->head_values[static_cast<std::size_t>(l)] = std::move(head_values);
            recording->mlp_out[static_cast<std::size_t>(l)] = std::move(mlp);
        }
        x = std::move(next);
    }
    return x.row(n - 1);
}

}  // namespace densitrace::detail
