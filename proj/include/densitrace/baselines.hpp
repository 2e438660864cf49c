#pragma once

#include "densitrace/graph.hpp"
#include "densitrace/model.hpp"
#include "densitrace/trace.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace densitrace {

/// Magnitude trace vs a random connected trace of matching size, one row per
/// threshold. When the magnitude trace is smaller than the smallest feasible
/// random trace, the random trace is built at that minimum (random_size >
/// size then).
struct RandomBaselineRow {
    double tau = 0.0;
    double size = 0.0;
    double random_size = 0.0;
    double magnitude_tv = 0.0;
    double random_tv = 0.0;
};

std::vector<RandomBaselineRow> random_baseline(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid,
                                               std::uint64_t seed);

/// Ablating the trace's non-residual edges vs ablating the same number of
/// non-residual edges of a random connected trace.
struct NecessityRow {
    double tau = 0.0;
    std::size_t n_ablated = 0;
    double trace_tv = 0.0;
    double random_tv = 0.0;
};

std::vector<NecessityRow> necessity_baseline(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid,
                                             std::uint64_t seed);

/// One-sided exact sign test: P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
/// Ties are dropped by the caller. Returns 1 when there are no untied pairs.
double sign_test_p(std::size_t wins, std::size_t losses);

/// Header "input,tau,size,random_size,magnitude_tv,random_tv".
std::string random_baseline_to_csv(const std::vector<std::vector<RandomBaselineRow>>& per_input);
/// Header "input,tau,n_ablated,trace_tv,random_tv".
std::string necessity_to_csv(const std::vector<std::vector<NecessityRow>>& per_input);

}  // namespace densitrace
