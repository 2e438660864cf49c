#include "densitrace/metrics.hpp"

#include "densitrace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace densitrace {

namespace {

void check_same_vocab(const Distribution& p, const Distribution& q) {
    if (p.size() != q.size())
        fail(ErrorKind::VocabMismatch, std::to_string(p.size()) + " vs " + std::to_string(q.size()) + " entries");
}

}  // namespace

double tv_distance(const Distribution& p, const Distribution& q) {
    check_same_vocab(p, q);
    double sum = 0.0;
    for (std::size_t v = 0; v < p.size(); ++v) sum += std::abs(static_cast<double>(p.probs[v]) - q.probs[v]);
    return std::min(1.0, 0.5 * sum);
}

double entropy(const Distribution& p) {
    double h = 0.0;
    for (float x : p.probs)
        if (x > 0.0f) h -= static_cast<double>(x) * std::log(static_cast<double>(x));
    return std::max(0.0, h);
}

int nucleus_reconstruction(const Distribution& full, const Distribution& trace, double mass_tolerance) {
    check_same_vocab(full, trace);
    if (!(mass_tolerance > 0.0)) fail(ErrorKind::InvalidArgument, "mass_tolerance must be > 0");

    std::vector<std::size_t> order(full.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return full.probs[a] > full.probs[b]; });

    double mass_full = 0.0;
    double mass_trace = 0.0;
    std::size_t members = 0;
    int score = 0;
    for (int q = 1; q <= 100; ++q) {
        const double need = q / 100.0;
        bool ok = true;
        while (members < order.size() && mass_full < need) {
            const std::size_t v = order[members++];
            mass_full += full.probs[v];
            mass_trace += trace.probs[v];
            if (std::abs(static_cast<double>(full.probs[v]) - trace.probs[v]) > mass_tolerance) ok = false;
        }
        if (!ok || std::abs(mass_full - mass_trace) > mass_tolerance) break;
        score = q;
    }
    return score;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
    check_same_vocab(p, q);
    double kl = 0.0;
    for (std::size_t v = 0; v < p.size(); ++v) {
        if (p.probs[v] <= 0.0f) continue;
        if (q.probs[v] <= 0.0f) return std::numeric_limits<double>::infinity();
        kl += static_cast<double>(p.probs[v]) * std::log(static_cast<double>(p.probs[v]) / q.probs[v]);
    }
    return kl;
}

}  // namespace densitrace
