#include "densitrace/baselines.hpp"

#include "densitrace/density.hpp"
#include "densitrace/masked.hpp"
#include "densitrace/metrics.hpp"
#include "densitrace/random.hpp"
#include "densitrace/runtime.hpp"

#include <algorithm>
#include <cmath>

namespace densitrace {

std::vector<RandomBaselineRow> random_baseline(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid,
                                               std::uint64_t seed) {
    const Distribution reference = forward_dense(model, run.tokens());
    const double s_min = min_random_size(run);
    Rng rng(seed);
    std::vector<RandomBaselineRow> rows;
    for (double tau : grid.taus()) {
        const Trace trace = extract_trace(run, tau);
        const Trace random = random_trace(run, std::max(trace.size_ratio, s_min), rng);
        rows.push_back({tau, trace.size_ratio, random.size_ratio,
                        tv_distance(reference, run_masked(model, run.tokens(), trace)),
                        tv_distance(reference, run_masked(model, run.tokens(), random))});
    }
    return rows;
}

std::vector<NecessityRow> necessity_baseline(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid,
                                             std::uint64_t seed) {
    const Distribution reference = forward_dense(model, run.tokens());
    Rng rng(seed);
    std::vector<NecessityRow> rows;
    for (double tau : grid.taus()) {
        const Trace trace = extract_trace(run, tau);
        const EdgeSet ablate = complement_for_necessity(run, trace);
        const Trace random = random_trace_with_nonresidual(run, ablate.size(), rng);
        const EdgeSet random_ablate = complement_for_necessity(run, random);
        rows.push_back({tau, ablate.size(), tv_distance(reference, run_ablated(model, run.tokens(), ablate)),
                        tv_distance(reference, run_ablated(model, run.tokens(), random_ablate))});
    }
    return rows;
}

double sign_test_p(std::size_t wins, std::size_t losses) {
    const std::size_t n = wins + losses;
    if (n == 0) return 1.0;
    // Sum of C(n, k) / 2^n for k >= wins, in log space.
    double p = 0.0;
    for (std::size_t k = wins; k <= n; ++k)
        p += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    return std::min(p, 1.0);
}

std::string random_baseline_to_csv(const std::vector<std::vector<RandomBaselineRow>>& per_input) {
    std::string out = "input,tau,size,random_size,magnitude_tv,random_tv\n";
    for (std::size_t i = 0; i < per_input.size(); ++i)
        for (const auto& r : per_input[i])
            out += std::to_string(i) + "," + format_double(r.tau) + "," + format_double(r.size) + "," +
                   format_double(r.random_size) + "," + format_double(r.magnitude_tv) + "," +
                   format_double(r.random_tv) + "\n";
    return out;
}

std::string necessity_to_csv(const std::vector<std::vector<NecessityRow>>& per_input) {
    std::string out = "input,tau,n_ablated,trace_tv,random_tv\n";
    for (std::size_t i = 0; i < per_input.size(); ++i)
        for (const auto& r : per_input[i])
            out += std::to_string(i) + "," + format_double(r.tau) + "," + std::to_string(r.n_ablated) + "," +
                   format_double(r.trace_tv) + "," + format_double(r.random_tv) + "\n";
    return out;
}

}  // namespace densitrace
