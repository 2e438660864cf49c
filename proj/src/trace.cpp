#include "densitrace/trace.hpp"

#include "densitrace/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <deque>
#include <sstream>

namespace densitrace {

std::string_view to_string(TraceOrigin origin) {
    switch (origin) {
        case TraceOrigin::Thresholded: return "thresholded";
        case TraceOrigin::Random: return "random";
        case TraceOrigin::Complement: return "complement";
        case TraceOrigin::Full: return "full";
        case TraceOrigin::Empty: return "empty";
    }
    return "?";
}

namespace {

TraceOrigin origin_from_string(std::string_view s) {
    for (auto o : {TraceOrigin::Thresholded, TraceOrigin::Random, TraceOrigin::Complement, TraceOrigin::Full,
                   TraceOrigin::Empty})
        if (to_string(o) == s) return o;
    fail(ErrorKind::ParseError, "unknown trace origin: " + std::string(s));
}

Trace make_trace(const DecomposedRun& run, EdgeSet kept, TraceOrigin origin, std::optional<double> tau) {
    Trace t;
    t.layout = run.layout();
    t.size_ratio = static_cast<double>(kept.size()) / static_cast<double>(run.ancestors().size());
    t.kept = std::move(kept);
    t.origin = origin;
    t.tau = tau;
    return t;
}

std::size_t residual_ancestor_count(const DecomposedRun& run) {
    std::size_t count = 0;
    const auto& layout = run.layout();
    for (EdgeIndex e : run.ancestors().indices())
        if (layout.edge_at(e).is_residual()) ++count;
    return count;
}

}  // namespace

ThresholdGrid::ThresholdGrid(std::vector<double> taus) : taus_(std::move(taus)) {
    if (taus_.empty()) fail(ErrorKind::InvalidArgument, "threshold grid is empty");
    for (std::size_t k = 0; k < taus_.size(); ++k) {
        if (!(taus_[k] >= 0.0 && taus_[k] <= 1.0)) fail(ErrorKind::InvalidArgument, "thresholds must lie in [0, 1]");
        if (k > 0 && !(taus_[k] > taus_[k - 1])) fail(ErrorKind::InvalidArgument, "thresholds must be strictly increasing");
    }
}

ThresholdGrid ThresholdGrid::default_grid() {
    return ThresholdGrid({1e-7, 1e-6, 1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 0.1, 0.2, 0.4, 0.8, 1.0});
}

ThresholdGrid ThresholdGrid::parse(std::string_view list) {
    if (list == "default") return default_grid();
    std::vector<double> taus;
    std::stringstream ss{std::string(list)};
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            taus.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorKind::InvalidArgument, "bad threshold value: '" + item + "'");
        }
    }
    return ThresholdGrid(std::move(taus));
}

Trace extract_trace(const DecomposedRun& run, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) fail(ErrorKind::InvalidArgument, "tau must lie in [0, 1]");
    const auto& layout = run.layout();
    EdgeSet kept(layout.edge_count());
    std::vector<std::uint8_t> visited(layout.node_count(), 0);
    std::deque<NodeId> queue{layout.output_node()};
    visited[layout.node_index(layout.output_node())] = 1;
    while (!queue.empty()) {
        const NodeId node = queue.front();
        queue.pop_front();
        const auto [begin, end] = layout.incoming(node);
        for (EdgeIndex e = begin; e < end; ++e) {
            if (run.importance_norm(e) < tau) continue;
            kept.insert(e);
            const NodeId src = layout.source(layout.edge_at(e));
            auto& flag = visited[layout.node_index(src)];
            if (!flag) {
                flag = 1;
                queue.push_back(src);
            }
        }
    }
    return make_trace(run, std::move(kept), TraceOrigin::Thresholded, tau);
}

Trace full_trace(const DecomposedRun& run) { return make_trace(run, run.ancestors(), TraceOrigin::Full, std::nullopt); }

Trace empty_trace(const DecomposedRun& run) {
    return make_trace(run, EdgeSet(run.layout().edge_count()), TraceOrigin::Empty, std::nullopt);
}

double min_random_size(const DecomposedRun& run) {
    return static_cast<double>(residual_ancestor_count(run)) / static_cast<double>(run.ancestors().size());
}

Trace random_trace_with_nonresidual(const DecomposedRun& run, std::size_t count, Rng& rng) {
    const auto& layout = run.layout();
    EdgeSet kept(layout.edge_count());
    for (EdgeIndex e : run.ancestors().indices())
        if (layout.edge_at(e).is_residual()) kept.insert(e);

    std::vector<std::uint8_t> reached(layout.node_count(), 0);
    std::vector<EdgeIndex> frontier;
    std::vector<NodeId> stack;
    // Marks a node (and everything behind it through residual edges) as
    // connected, exposing its non-residual in-edges to the sampler.
    auto reach = [&](NodeId start) {
        stack.push_back(start);
        while (!stack.empty()) {
            const NodeId node = stack.back();
            stack.pop_back();
            auto& flag = reached[layout.node_index(node)];
            if (flag) continue;
            flag = 1;
            const auto [begin, end] = layout.incoming(node);
            for (EdgeIndex e = begin; e < end; ++e) {
                const EdgeId id = layout.edge_at(e);
                if (id.is_residual())
                    stack.push_back(layout.source(id));
                else
                    frontier.push_back(e);
            }
        }
    };
    reach(layout.output_node());

    for (std::size_t added = 0; added < count && !frontier.empty(); ++added) {
        const auto pick = static_cast<std::size_t>(rng.below(frontier.size()));
        const EdgeIndex e = frontier[pick];
        frontier[pick] = frontier.back();
        frontier.pop_back();
        kept.insert(e);
        reach(layout.source(layout.edge_at(e)));
    }
    return make_trace(run, std::move(kept), TraceOrigin::Random, std::nullopt);
}

Trace random_trace(const DecomposedRun& run, double size_ratio, Rng& rng) {
    if (!(size_ratio <= 1.0)) fail(ErrorKind::InvalidArgument, "size ratio must be <= 1");
    const double s_min = min_random_size(run);
    if (!(size_ratio >= s_min - 1e-12))
        fail(ErrorKind::SizeInfeasible,
             "size " + std::to_string(size_ratio) + " is below the residual floor " + std::to_string(s_min));
    const auto total = static_cast<double>(run.ancestors().size());
    const auto target = static_cast<std::size_t>(std::ceil(size_ratio * total - 1e-9));
    const std::size_t residuals = residual_ancestor_count(run);
    return random_trace_with_nonresidual(run, target > residuals ? target - residuals : 0, rng);
}

EdgeSet complement_for_necessity(const DecomposedRun& run, const Trace& trace) {
    if (!(trace.layout == run.layout())) fail(ErrorKind::TraceMismatch, "trace was built for a different graph");
    EdgeSet out(run.layout().edge_count());
    for (EdgeIndex e : trace.kept.indices())
        if (!run.layout().edge_at(e).is_residual()) out.insert(e);
    return out;
}

std::string trace_to_json(const Trace& trace) {
    nlohmann::ordered_json j;
    j["origin"] = to_string(trace.origin);
    j["tau"] = trace.tau ? nlohmann::ordered_json(*trace.tau) : nlohmann::ordered_json(nullptr);
    j["size_ratio"] = trace.size_ratio;
    j["layout"] = {{"n_layers", trace.layout.n_layers()},
                   {"n_heads", trace.layout.n_heads()},
                   {"n_tokens", trace.layout.n_tokens()}};
    j["edges"] = trace.kept.indices();
    return j.dump();
}

Trace trace_from_json(std::string_view json) {
    try {
        const auto j = nlohmann::json::parse(json);
        Trace t;
        const auto& lay = j.at("layout");
        t.layout = GraphLayout(lay.at("n_layers").get<int>(), lay.at("n_heads").get<int>(), lay.at("n_tokens").get<int>());
        t.kept = EdgeSet(t.layout.edge_count());
        for (const auto& e : j.at("edges")) t.kept.insert(e.get<EdgeIndex>());
        t.origin = origin_from_string(j.at("origin").get<std::string>());
        if (!j.at("tau").is_null()) t.tau = j.at("tau").get<double>();
        t.size_ratio = j.at("size_ratio").get<double>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("trace JSON: ") + e.what());
    }
}

}  // namespace densitrace
