#pragma once

#include "densitrace/graph.hpp"
#include "densitrace/model.hpp"
#include "densitrace/trace.hpp"

namespace densitrace {

/// Forward pass where only the trace's edges contribute (zero-ablation of
/// every other edge). Attention weights and LayerNorm statistics are
/// recomputed from the masked stream. Throws TraceMismatch when the trace
/// was built for a different graph shape.
Distribution run_masked(const Model& model, const TokenSequence& tokens, const Trace& trace);

/// Same machinery with every edge kept except `ablate`.
/// Throws ResidualAblationForbidden if `ablate` holds a residual edge.
Distribution run_ablated(const Model& model, const TokenSequence& tokens, const EdgeSet& ablate);

/// Low-level entry: `keep` is indexed by GraphLayout edge index.
Distribution run_with_mask(const Model& model, const TokenSequence& tokens, const EdgeSet& keep);

}  // namespace densitrace
