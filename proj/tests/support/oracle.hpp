#pragma once

// Independent reference implementations for tests: plain nested loops in
// double precision over the raw weights, with no Eigen and no shared code
// beyond the Model struct and EdgeId.

#include "densitrace/graph.hpp"
#include "densitrace/model.hpp"

#include <functional>
#include <set>
#include <vector>

namespace densitrace::oracle {

using Vec = std::vector<double>;
using KeepFn = std::function<bool(const EdgeId&)>;

struct OracleRun {
    // states[0] = embeddings; states[1 + 2l] = after attention l; states[2 + 2l] = after MLP l.
    // Each is [n][d].
    std::vector<std::vector<Vec>> states;
    Vec probs;
};

/// Forward pass with zero-ablation of every edge for which keep() is false.
/// Attention weights and LayerNorm statistics come from the masked stream.
OracleRun forward(const Model& model, const std::vector<TokenId>& tokens, const KeepFn& keep = {});

/// Edge vector of `edge` in the unmasked run, recomputed from scratch.
Vec edge_vector(const Model& model, const std::vector<TokenId>& tokens, const EdgeId& edge);

/// All edges of the graph, enumerated directly from the definition.
std::vector<EdgeId> all_edges(int n_layers, int n_heads, int n_tokens);

/// Edges with a directed path to AfterMlp(L-1, n-1), by breadth-first search
/// over an explicit adjacency list built from all_edges().
std::set<EdgeId> ancestors(int n_layers, int n_heads, int n_tokens);

double tv(const Vec& p, const Vec& q);

}  // namespace densitrace::oracle
