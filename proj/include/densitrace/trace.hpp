#pragma once

#include "densitrace/graph.hpp"
#include "densitrace/random.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace densitrace {

enum class TraceOrigin { Thresholded, Random, Complement, Full, Empty };

std::string_view to_string(TraceOrigin origin);

/// A binary edge mask over one run's graph. Only ancestor edges are ever kept;
/// size_ratio = |kept| / |ancestor edges|.
struct Trace {
    GraphLayout layout;
    EdgeSet kept;
    double size_ratio = 0.0;
    std::optional<double> tau;
    TraceOrigin origin = TraceOrigin::Empty;
};

/// Strictly increasing thresholds in [0, 1].
class ThresholdGrid {
public:
    explicit ThresholdGrid(std::vector<double> taus);

    /// 1e-7 .. 1.0, 15 values.
    static ThresholdGrid default_grid();
    /// "default" or a comma-separated list of reals.
    static ThresholdGrid parse(std::string_view list);

    const std::vector<double>& taus() const { return taus_; }
    std::size_t size() const { return taus_.size(); }

private:
    std::vector<double> taus_;
};

/// Backward traversal from the output node: an incoming edge is kept when its
/// normalized importance is >= tau, and its source node is then expanded.
Trace extract_trace(const DecomposedRun& run, double tau);

Trace full_trace(const DecomposedRun& run);
Trace empty_trace(const DecomposedRun& run);

/// Fraction of ancestor edges that are residual edges; the smallest size a
/// random trace can have.
double min_random_size(const DecomposedRun& run);

/// Random connected trace of size s. All residual ancestor edges are kept;
/// non-residual edges are drawn uniformly from the frontier of nodes already
/// connected to the output until |kept| = ceil(s * |ancestors|).
/// Throws SizeInfeasible when s < min_random_size(run).
Trace random_trace(const DecomposedRun& run, double size_ratio, Rng& rng);

/// Same sampler, stopping after exactly `count` non-residual edges.
Trace random_trace_with_nonresidual(const DecomposedRun& run, std::size_t count, Rng& rng);

/// Edges to zero-ablate in the necessity check: the trace's edges minus every
/// residual edge.
EdgeSet complement_for_necessity(const DecomposedRun& run, const Trace& trace);

/// {"origin", "tau", "size_ratio", "layout": {n_layers, n_heads, n_tokens}, "edges": [dense indices]}
std::string trace_to_json(const Trace& trace);
Trace trace_from_json(std::string_view json);

}  // namespace densitrace
