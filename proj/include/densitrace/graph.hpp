#pragma once

#include "densitrace/model.hpp"

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace densitrace {

// Positions are 0-based throughout: position n-1 is the last input token.

enum class NodeStage : std::uint8_t { Embedding, AfterAttention, AfterMlp };

/// One intermediate token representation. Embedding nodes ignore `layer`.
/// AfterAttention(l, i) is the residual stream after layer l's attention
/// sublayer; AfterMlp(l, i) is the output of layer l.
struct NodeId {
    NodeStage stage = NodeStage::Embedding;
    int layer = 0;
    int position = 0;

    static NodeId embedding(int position) { return {NodeStage::Embedding, 0, position}; }
    static NodeId after_attention(int layer, int position) { return {NodeStage::AfterAttention, layer, position}; }
    static NodeId after_mlp(int layer, int position) { return {NodeStage::AfterMlp, layer, position}; }

    auto operator<=>(const NodeId&) const = default;
};

enum class EdgeKind : std::uint8_t { AttnResidual, Attention, MlpResidual, Mlp };

/// One additive contribution to a node. For non-attention edges `head` is 0
/// and `source == target` is the position.
struct EdgeId {
    EdgeKind kind = EdgeKind::AttnResidual;
    int layer = 0;
    int head = 0;
    int source = 0;
    int target = 0;

    static EdgeId attn_residual(int layer, int position) { return {EdgeKind::AttnResidual, layer, 0, position, position}; }
    static EdgeId attention(int layer, int head, int source, int target) {
        return {EdgeKind::Attention, layer, head, source, target};
    }
    static EdgeId mlp_residual(int layer, int position) { return {EdgeKind::MlpResidual, layer, 0, position, position}; }
    static EdgeId mlp(int layer, int position) { return {EdgeKind::Mlp, layer, 0, position, position}; }

    bool is_residual() const { return kind == EdgeKind::AttnResidual || kind == EdgeKind::MlpResidual; }

    auto operator<=>(const EdgeId&) const = default;
};

std::string to_string(const EdgeId& id);
std::string to_string(const NodeId& id);

using EdgeIndex = std::uint32_t;

/// Dense numbering of the unrolled graph for a given (L, N_H, n).
///
/// Edges are laid out layer-major. Within a layer, the attention sublayer
/// comes first, grouped by target position i: [AttnResidual(i), then
/// Attention(k, j, i) for head k, source j <= i]. The MLP sublayer follows
/// as [MlpResidual(i), Mlp(i)] pairs. Every node's incoming edges therefore
/// occupy one contiguous index range.
class GraphLayout {
public:
    GraphLayout() = default;
    GraphLayout(int n_layers, int n_heads, int n_tokens);

    int n_layers() const { return n_layers_; }
    int n_heads() const { return n_heads_; }
    int n_tokens() const { return n_tokens_; }

    std::size_t edge_count() const { return edges_per_layer_ * static_cast<std::size_t>(n_layers_); }
    std::size_t edges_per_layer() const { return edges_per_layer_; }
    std::size_t node_count() const { return static_cast<std::size_t>(n_tokens_) * (1 + 2 * static_cast<std::size_t>(n_layers_)); }

    bool contains(const EdgeId& id) const;
    /// Throws UnknownEdge for ids outside this graph (including causal j > i).
    EdgeIndex index_of(const EdgeId& id) const;
    EdgeId edge_at(EdgeIndex index) const;

    std::size_t node_index(const NodeId& id) const;
    NodeId node_at(std::size_t index) const;

    /// Node feeding layer `layer` at `position`: Embedding for layer 0, else AfterMlp(layer-1).
    NodeId layer_input(int layer, int position) const;
    NodeId source(const EdgeId& id) const;
    NodeId target(const EdgeId& id) const;
    NodeId output_node() const { return NodeId::after_mlp(n_layers_ - 1, n_tokens_ - 1); }

    /// Half-open index range of the node's incoming edges (empty for Embedding nodes).
    std::pair<EdgeIndex, EdgeIndex> incoming(const NodeId& node) const;

    bool operator==(const GraphLayout&) const = default;

private:
    std::size_t attention_offset(int position) const;  // within a layer
    std::size_t mlp_offset(int position) const;

    int n_layers_ = 0;
    int n_heads_ = 0;
    int n_tokens_ = 0;
    std::size_t attention_block_ = 0;  // attention-sublayer edges per layer
    std::size_t edges_per_layer_ = 0;
};

/// Membership set over a layout's edge indices.
class EdgeSet {
public:
    EdgeSet() = default;
    explicit EdgeSet(std::size_t universe) : bits_(universe, 0) {}

    std::size_t universe() const { return bits_.size(); }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }
    bool contains(EdgeIndex e) const { return e < bits_.size() && bits_[e] != 0; }

    bool insert(EdgeIndex e);
    bool erase(EdgeIndex e);

    /// Sorted member indices.
    std::vector<EdgeIndex> indices() const;
    std::span<const std::uint8_t> bits() const { return bits_; }

    bool is_subset_of(const EdgeSet& other) const;
    bool operator==(const EdgeSet& other) const { return bits_ == other.bits_; }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t count_ = 0;
};

/// Every edge lying on some directed path to the output node; found by
/// backward breadth-first reachability over the layout.
EdgeSet ancestor_edges(const GraphLayout& layout);

struct EdgeRecord {
    EdgeId id;
    Vector vector;
    double importance_raw = 0.0;
    double importance_norm = 0.0;
};

/// One input's decomposed forward pass. Attention edge vectors are stored in
/// factored form (weight alpha times the per-head projected value of the
/// source) and materialized on request.
class DecomposedRun {
public:
    const TokenSequence& tokens() const { return tokens_; }
    const ModelConfig& config() const { return config_; }
    const GraphLayout& layout() const { return layout_; }

    /// Residual-stream value at a node.
    Eigen::Map<const Vector> node_state(const NodeId& node) const;

    Vector edge_vector(EdgeIndex e) const;
    double importance_raw(EdgeIndex e) const { return importance_raw_[e]; }
    double importance_norm(EdgeIndex e) const { return importance_norm_[e]; }
    std::span<const double> importances_norm() const { return importance_norm_; }
    EdgeRecord record(EdgeIndex e) const;

    /// Softmax weight of head `head` at layer `layer` from target to source (source <= target).
    float attention_weight(int layer, int head, int target, int source) const;

    /// Attention output bias of a layer. It is added once per target token as an
    /// unconditional part of the sublayer update and is not an edge, so
    /// AfterAttention(l, i) == sum of incoming edges + attention_bias(l).
    const Vector& attention_bias(int layer) const { return attention_bias_[static_cast<std::size_t>(layer)]; }

    /// Node state minus (sum of incoming edge vectors + unconditional addend).
    Vector reassembly_residual(const NodeId& node) const;

    /// The full model's next-token distribution, reassembled from the final node.
    const Distribution& output() const { return output_; }

    const EdgeSet& ancestors() const { return ancestors_; }

private:
    friend DecomposedRun decompose_forward(const Model& model, const TokenSequence& tokens);

    TokenSequence tokens_;
    ModelConfig config_;
    GraphLayout layout_;
    Matrix node_states_;                 // [node_count, d_model]
    std::vector<std::vector<float>> alpha_;  // per layer: [head][target][source], n*n each
    std::vector<Matrix> head_values_;    // per layer: [head * n + source, d_model]
    std::vector<Matrix> mlp_out_;        // per layer: [n, d_model]
    std::vector<Vector> attention_bias_;
    std::vector<double> importance_raw_;
    std::vector<double> importance_norm_;
    EdgeSet ancestors_;
    Distribution output_;
};

/// Runs the forward pass materializing every edge of the computational graph.
DecomposedRun decompose_forward(const Model& model, const TokenSequence& tokens);

/// L1 norm of the edge vector divided by the L1 total over all edges sharing
/// its target node (0 when that total is 0). Throws UnknownEdge.
double normalized_importance(const DecomposedRun& run, const EdgeId& edge);

EdgeSet ancestor_edges(const DecomposedRun& run);

/// JSON lines, one object per edge: kind, layer, head, source, target,
/// importance_raw, importance_norm.
std::string edges_to_jsonl(const DecomposedRun& run);

}  // namespace densitrace
