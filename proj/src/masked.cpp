#include "densitrace/masked.hpp"

#include "densitrace/errors.hpp"
#include "engine.hpp"

namespace densitrace {

namespace {

GraphLayout layout_for(const Model& model, const TokenSequence& tokens) {
    return GraphLayout(model.config.n_layers, model.config.n_heads, static_cast<int>(tokens.size()));
}

}  // namespace

Distribution run_with_mask(const Model& model, const TokenSequence& tokens, const EdgeSet& keep) {
    validate_tokens(model.config, tokens);
    if (keep.universe() != layout_for(model, tokens).edge_count())
        fail(ErrorKind::TraceMismatch, "mask size does not match the graph of this input");
    const auto final_state = detail::run_edge_graph(model, tokens, keep.bits(), nullptr);
    return detail::output_distribution(model, final_state);
}

Distribution run_masked(const Model& model, const TokenSequence& tokens, const Trace& trace) {
    validate_tokens(model.config, tokens);
    const GraphLayout layout = layout_for(model, tokens);
    if (!(trace.layout == layout))
        fail(ErrorKind::TraceMismatch, "trace covers " + std::to_string(trace.layout.n_tokens()) + " positions, input has " +
                                           std::to_string(tokens.size()));
    return run_with_mask(model, tokens, trace.kept);
}

Distribution run_ablated(const Model& model, const TokenSequence& tokens, const EdgeSet& ablate) {
    validate_tokens(model.config, tokens);
    const GraphLayout layout = layout_for(model, tokens);
    if (ablate.universe() != layout.edge_count()) fail(ErrorKind::TraceMismatch, "ablation set built for a different graph");
    EdgeSet keep(layout.edge_count());
    for (EdgeIndex e = 0; e < layout.edge_count(); ++e) {
        if (!ablate.contains(e)) {
            keep.insert(e);
        } else if (layout.edge_at(e).is_residual()) {
            fail(ErrorKind::ResidualAblationForbidden, to_string(layout.edge_at(e)));
        }
    }
    return run_with_mask(model, tokens, keep);
}

}  // namespace densitrace
