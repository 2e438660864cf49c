#include "densitrace/graph.hpp"

#include "densitrace/errors.hpp"
#include "engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <sstream>

namespace densitrace {

namespace {

const char* kind_name(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::AttnResidual: return "attn_residual";
        case EdgeKind::Attention: return "attention";
        case EdgeKind::MlpResidual: return "mlp_residual";
        case EdgeKind::Mlp: return "mlp";
    }
    return "?";
}

}  // namespace

std::string to_string(const EdgeId& id) {
    std::ostringstream os;
    os << kind_name(id.kind) << "(l=" << id.layer;
    if (id.kind == EdgeKind::Attention)
        os << ", h=" << id.head << ", src=" << id.source << ", tgt=" << id.target;
    else
        os << ", pos=" << id.target;
    os << ")";
    return os.str();
}

std::string to_string(const NodeId& id) {
    switch (id.stage) {
        case NodeStage::Embedding: return "embedding(pos=" + std::to_string(id.position) + ")";
        case NodeStage::AfterAttention:
            return "after_attention(l=" + std::to_string(id.layer) + ", pos=" + std::to_string(id.position) + ")";
        case NodeStage::AfterMlp:
            return "after_mlp(l=" + std::to_string(id.layer) + ", pos=" + std::to_string(id.position) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// GraphLayout

GraphLayout::GraphLayout(int n_layers, int n_heads, int n_tokens)
    : n_layers_(n_layers), n_heads_(n_heads), n_tokens_(n_tokens) {
    if (n_layers < 1 || n_heads < 1 || n_tokens < 1) fail(ErrorKind::InvalidArgument, "graph dimensions must be >= 1");
    const auto n = static_cast<std::size_t>(n_tokens);
    attention_block_ = static_cast<std::size_t>(n_heads) * n * (n + 1) / 2 + n;
    edges_per_layer_ = attention_block_ + 2 * n;
}

std::size_t GraphLayout::attention_offset(int position) const {
    const auto i = static_cast<std::size_t>(position);
    return static_cast<std::size_t>(n_heads_) * i * (i + 1) / 2 + i;
}

std::size_t GraphLayout::mlp_offset(int position) const { return attention_block_ + 2 * static_cast<std::size_t>(position); }

bool GraphLayout::contains(const EdgeId& id) const {
    if (id.layer < 0 || id.layer >= n_layers_) return false;
    if (id.target < 0 || id.target >= n_tokens_) return false;
    if (id.kind == EdgeKind::Attention)
        return id.head >= 0 && id.head < n_heads_ && id.source >= 0 && id.source <= id.target;
    return id.head == 0 && id.source == id.target;
}

EdgeIndex GraphLayout::index_of(const EdgeId& id) const {
    if (!contains(id)) fail(ErrorKind::UnknownEdge, to_string(id));
    const std::size_t base = edges_per_layer_ * static_cast<std::size_t>(id.layer);
    switch (id.kind) {
        case EdgeKind::AttnResidual: return static_cast<EdgeIndex>(base + attention_offset(id.target));
        case EdgeKind::Attention:
            return static_cast<EdgeIndex>(base + attention_offset(id.target) + 1 +
                                          static_cast<std::size_t>(id.head) * static_cast<std::size_t>(id.target + 1) +
                                          static_cast<std::size_t>(id.source));
        case EdgeKind::MlpResidual: return static_cast<EdgeIndex>(base + mlp_offset(id.target));
        case EdgeKind::Mlp: return static_cast<EdgeIndex>(base + mlp_offset(id.target) + 1);
    }
    fail(ErrorKind::UnknownEdge, to_string(id));
}

EdgeId GraphLayout::edge_at(EdgeIndex index) const {
    if (index >= edge_count()) fail(ErrorKind::UnknownEdge, "edge index " + std::to_string(index));
    const int layer = static_cast<int>(index / edges_per_layer_);
    const std::size_t r = index % edges_per_layer_;
    if (r >= attention_block_) {
        const auto k = r - attention_block_;
        const int pos = static_cast<int>(k / 2);
        return k % 2 == 0 ? EdgeId::mlp_residual(layer, pos) : EdgeId::mlp(layer, pos);
    }
    // Largest target i with attention_offset(i) <= r.
    int lo = 0;
    int hi = n_tokens_ - 1;
    while (lo < hi) {
        const int mid = (lo + hi + 1) / 2;
        if (attention_offset(mid) <= r)
            lo = mid;
        else
            hi = mid - 1;
    }
    const std::size_t off = r - attention_offset(lo);
    if (off == 0) return EdgeId::attn_residual(layer, lo);
    const auto span = static_cast<std::size_t>(lo + 1);
    return EdgeId::attention(layer, static_cast<int>((off - 1) / span), static_cast<int>((off - 1) % span), lo);
}

std::size_t GraphLayout::node_index(const NodeId& id) const {
    const auto n = static_cast<std::size_t>(n_tokens_);
    const auto i = static_cast<std::size_t>(id.position);
    const auto l = static_cast<std::size_t>(id.layer);
    switch (id.stage) {
        case NodeStage::Embedding: return i;
        case NodeStage::AfterAttention: return n * (1 + 2 * l) + i;
        case NodeStage::AfterMlp: return n * (2 + 2 * l) + i;
    }
    return 0;
}

NodeId GraphLayout::node_at(std::size_t index) const {
    const auto n = static_cast<std::size_t>(n_tokens_);
    const int pos = static_cast<int>(index % n);
    const auto block = index / n;
    if (block == 0) return NodeId::embedding(pos);
    const int layer = static_cast<int>((block - 1) / 2);
    return (block - 1) % 2 == 0 ? NodeId::after_attention(layer, pos) : NodeId::after_mlp(layer, pos);
}

NodeId GraphLayout::layer_input(int layer, int position) const {
    return layer == 0 ? NodeId::embedding(position) : NodeId::after_mlp(layer - 1, position);
}

NodeId GraphLayout::source(const EdgeId& id) const {
    switch (id.kind) {
        case EdgeKind::AttnResidual:
        case EdgeKind::Attention: return layer_input(id.layer, id.source);
        case EdgeKind::MlpResidual:
        case EdgeKind::Mlp: return NodeId::after_attention(id.layer, id.target);
    }
    return {};
}

NodeId GraphLayout::target(const EdgeId& id) const {
    if (id.kind == EdgeKind::AttnResidual || id.kind == EdgeKind::Attention)
        return NodeId::after_attention(id.layer, id.target);
    return NodeId::after_mlp(id.layer, id.target);
}

std::pair<EdgeIndex, EdgeIndex> GraphLayout::incoming(const NodeId& node) const {
    const std::size_t base = edges_per_layer_ * static_cast<std::size_t>(node.layer);
    switch (node.stage) {
        case NodeStage::Embedding: return {0, 0};
        case NodeStage::AfterAttention: {
            const auto begin = base + attention_offset(node.position);
            const auto count = static_cast<std::size_t>(n_heads_) * static_cast<std::size_t>(node.position + 1) + 1;
            return {static_cast<EdgeIndex>(begin), static_cast<EdgeIndex>(begin + count)};
        }
        case NodeStage::AfterMlp: {
            const auto begin = base + mlp_offset(node.position);
            return {static_cast<EdgeIndex>(begin), static_cast<EdgeIndex>(begin + 2)};
        }
    }
    return {0, 0};
}

// ---------------------------------------------------------------------------
// EdgeSet

bool EdgeSet::insert(EdgeIndex e) {
    if (e >= bits_.size()) fail(ErrorKind::UnknownEdge, "edge index " + std::to_string(e));
    if (bits_[e]) return false;
    bits_[e] = 1;
    ++count_;
    return true;
}

bool EdgeSet::erase(EdgeIndex e) {
    if (e >= bits_.size() || !bits_[e]) return false;
    bits_[e] = 0;
    --count_;
    return true;
}

std::vector<EdgeIndex> EdgeSet::indices() const {
    std::vector<EdgeIndex> out;
    out.reserve(count_);
    for (std::size_t e = 0; e < bits_.size(); ++e)
        if (bits_[e]) out.push_back(static_cast<EdgeIndex>(e));
    return out;
}

bool EdgeSet::is_subset_of(const EdgeSet& other) const {
    if (other.bits_.size() != bits_.size()) return false;
    for (std::size_t e = 0; e < bits_.size(); ++e)
        if (bits_[e] && !other.bits_[e]) return false;
    return true;
}

EdgeSet ancestor_edges(const GraphLayout& layout) {
    EdgeSet out(layout.edge_count());
    std::vector<std::uint8_t> seen(layout.node_count(), 0);
    std::deque<NodeId> queue{layout.output_node()};
    seen[layout.node_index(layout.output_node())] = 1;
    while (!queue.empty()) {
        const NodeId node = queue.front();
        queue.pop_front();
        const auto [begin, end] = layout.incoming(node);
        for (EdgeIndex e = begin; e < end; ++e) {
            out.insert(e);
            const NodeId src = layout.source(layout.edge_at(e));
            auto& flag = seen[layout.node_index(src)];
            if (!flag) {
                flag = 1;
                queue.push_back(src);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// DecomposedRun

Eigen::Map<const Vector> DecomposedRun::node_state(const NodeId& node) const {
    const auto row = static_cast<Eigen::Index>(layout_.node_index(node));
    return {node_states_.data() + row * node_states_.cols(), node_states_.cols()};
}

float DecomposedRun::attention_weight(int layer, int head, int target, int source) const {
    const auto n = static_cast<std::size_t>(layout_.n_tokens());
    if (source > target) return 0.0f;
    return alpha_[static_cast<std::size_t>(layer)][(static_cast<std::size_t>(head) * n + static_cast<std::size_t>(target)) * n +
                                                   static_cast<std::size_t>(source)];
}

Vector DecomposedRun::edge_vector(EdgeIndex e) const {
    const EdgeId id = layout_.edge_at(e);
    const auto l = static_cast<std::size_t>(id.layer);
    switch (id.kind) {
        case EdgeKind::AttnResidual: return node_state(layout_.layer_input(id.layer, id.target));
        case EdgeKind::Attention:
            return attention_weight(id.layer, id.head, id.target, id.source) *
                   head_values_[l].row(static_cast<Eigen::Index>(id.head) * layout_.n_tokens() + id.source).transpose();
        case EdgeKind::MlpResidual: return node_state(NodeId::after_attention(id.layer, id.target));
        case EdgeKind::Mlp: return mlp_out_[l].row(id.target).transpose();
    }
    return {};
}

EdgeRecord DecomposedRun::record(EdgeIndex e) const {
    return {layout_.edge_at(e), edge_vector(e), importance_raw_[e], importance_norm_[e]};
}

Vector DecomposedRun::reassembly_residual(const NodeId& node) const {
    Vector state = node_state(node);
    if (node.stage == NodeStage::Embedding) return Vector::Zero(state.size());
    Vector sum = node.stage == NodeStage::AfterAttention ? attention_bias(node.layer) : Vector::Zero(state.size());
    const auto [begin, end] = layout_.incoming(node);
    for (EdgeIndex e = begin; e < end; ++e) sum += edge_vector(e);
    return state - sum;
}

DecomposedRun decompose_forward(const Model& model, const TokenSequence& tokens) {
    validate_tokens(model.config, tokens);
    const auto& cfg = model.config;
    const int n = static_cast<int>(tokens.size());

    detail::EngineRecording rec;
    detail::run_edge_graph(model, tokens, {}, &rec);

    DecomposedRun run;
    run.tokens_ = tokens;
    run.config_ = cfg;
    run.layout_ = GraphLayout(cfg.n_layers, cfg.n_heads, n);
    run.node_states_ = std::move(rec.node_states);
    run.alpha_ = std::move(rec.alpha);
    run.head_values_ = std::move(rec.head_values);
    run.mlp_out_ = std::move(rec.mlp_out);
    for (const auto& layer : model.layers) run.attention_bias_.push_back(layer.bo);

    const auto& layout = run.layout_;
    const std::size_t n_edges = layout.edge_count();
    run.importance_raw_.assign(n_edges, 0.0);
    run.importance_norm_.assign(n_edges, 0.0);

    auto l1 = [](const auto& v) {
        double s = 0.0;
        for (Eigen::Index c = 0; c < v.size(); ++c) s += std::abs(static_cast<double>(v(c)));
        return s;
    };

    for (int l = 0; l < cfg.n_layers; ++l) {
        const auto& hv = run.head_values_[static_cast<std::size_t>(l)];
        std::vector<double> hv_norm(static_cast<std::size_t>(hv.rows()));
        for (Eigen::Index r = 0; r < hv.rows(); ++r) hv_norm[static_cast<std::size_t>(r)] = l1(hv.row(r));
        for (int i = 0; i < n; ++i) {
            const EdgeIndex res = layout.index_of(EdgeId::attn_residual(l, i));
            run.importance_raw_[res] = l1(run.node_state(layout.layer_input(l, i)));
            for (int h = 0; h < cfg.n_heads; ++h)
                for (int j = 0; j <= i; ++j)
                    run.importance_raw_[res + 1 + static_cast<EdgeIndex>(h * (i + 1) + j)] =
                        static_cast<double>(run.attention_weight(l, h, i, j)) *
                        hv_norm[static_cast<std::size_t>(h) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
            const EdgeIndex mres = layout.index_of(EdgeId::mlp_residual(l, i));
            run.importance_raw_[mres] = l1(run.node_state(NodeId::after_attention(l, i)));
            run.importance_raw_[mres + 1] = l1(run.mlp_out_[static_cast<std::size_t>(l)].row(i));
        }
    }

    for (std::size_t node = static_cast<std::size_t>(n); node < layout.node_count(); ++node) {
        const auto [begin, end] = layout.incoming(layout.node_at(node));
        double total = 0.0;
        for (EdgeIndex e = begin; e < end; ++e) total += run.importance_raw_[e];
        if (total > 0.0)
            for (EdgeIndex e = begin; e < end; ++e) run.importance_norm_[e] = run.importance_raw_[e] / total;
    }

    run.ancestors_ = ancestor_edges(layout);
    run.output_ = detail::output_distribution(model, run.node_state(layout.output_node()).transpose());
    return run;
}

double normalized_importance(const DecomposedRun& run, const EdgeId& edge) {
    return run.importance_norm(run.layout().index_of(edge));
}

EdgeSet ancestor_edges(const DecomposedRun& run) { return run.ancestors(); }

std::string edges_to_jsonl(const DecomposedRun& run) {
    std::string out;
    const auto& layout = run.layout();
    for (EdgeIndex e = 0; e < layout.edge_count(); ++e) {
        const EdgeId id = layout.edge_at(e);
        nlohmann::ordered_json j;
        j["kind"] = kind_name(id.kind);
        j["layer"] = id.layer;
        j["head"] = id.head;
        j["source"] = id.source;
        j["target"] = id.target;
        j["importance_raw"] = run.importance_raw(e);
        j["importance_norm"] = run.importance_norm(e);
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace densitrace
