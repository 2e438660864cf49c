#pragma once

#include "densitrace/graph.hpp"
#include "kernels.hpp"

#include <span>

namespace densitrace::detail {

/// Intermediate values captured by a recording run.
struct EngineRecording {
    Matrix node_states;                      // [node_count, d_model]
    std::vector<std::vector<float>> alpha;   // per layer: [head][target][source]
    std::vector<Matrix> head_values;         // per layer: [head * n + source, d_model]
    std::vector<Matrix> mlp_out;             // per layer: [n, d_model]
};

/// Forward pass in edge form. Each edge contribution is multiplied by its
/// keep bit (`keep[index]`, indices per GraphLayout); an empty span keeps
/// everything. Attention weights are recomputed from the (masked) stream.
/// Returns the pre-LayerNorm state of the last position after the last layer.
RowVector run_edge_graph(const Model& model, const TokenSequence& tokens, std::span<const std::uint8_t> keep,
                         EngineRecording* recording);

}  // namespace densitrace::detail
