#include "densitrace/stats.hpp"

#include "densitrace/density.hpp"
#include "densitrace/errors.hpp"
#include "densitrace/random.hpp"
#include "densitrace/tokenizer.hpp"
#include "densitrace/words.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace densitrace {

FrequencyTable FrequencyTable::parse(std::string_view tsv) {
    FrequencyTable table;
    std::istringstream in{std::string(tsv)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0)
            fail(ErrorKind::ParseError, "frequency table line " + std::to_string(line_no) + ": expected word<TAB>count");
        const std::string number = line.substr(tab + 1);
        std::uint64_t count = 0;
        try {
            std::size_t used = 0;
            count = std::stoull(number, &used);
            if (used != number.size() || number.front() == '-') throw std::invalid_argument(number);
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, "frequency table line " + std::to_string(line_no) + ": bad count '" + number + "'");
        }
        if (count == 0) fail(ErrorKind::ParseError, "frequency table line " + std::to_string(line_no) + ": count must be >= 1");
        table.add(line.substr(0, tab), count);
    }
    return table;
}

FrequencyTable FrequencyTable::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingFile, path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void FrequencyTable::add(std::string_view word, std::uint64_t count) {
    counts_[utf8::fold_case(word)] += count;
    total_ += count;
}

std::uint64_t FrequencyTable::count(std::string_view word) const {
    auto it = counts_.find(utf8::fold_case(word));
    return it == counts_.end() ? 0 : it->second;
}

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) fail(ErrorKind::InvalidArgument, "correlation inputs differ in length");
    if (xs.size() < 3) fail(ErrorKind::DegenerateVariance, "need at least 3 paired samples");
}

struct Centered {
    std::vector<double> values;
    double norm = 0.0;
};

Centered center(std::span<const double> xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    Centered c;
    c.values.reserve(xs.size());
    for (double x : xs) {
        c.values.push_back(x - mean);
        c.norm += (x - mean) * (x - mean);
    }
    c.norm = std::sqrt(c.norm);
    if (!(c.norm > 0.0) || c.norm <= 1e-12 * (std::abs(mean) + 1.0) * std::sqrt(static_cast<double>(xs.size())))
        fail(ErrorKind::DegenerateVariance, "input has zero variance");
    return c;
}

double centered_correlation(const Centered& a, const Centered& b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) dot += a.values[i] * b.values[i];
    return std::clamp(dot / (a.norm * b.norm), -1.0, 1.0);
}

}  // namespace

double pearson(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys);
    return centered_correlation(center(xs), center(ys));
}

std::vector<double> fractional_ranks(std::span<const double> xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(xs.size());
    for (std::size_t k = 0; k < order.size();) {
        std::size_t end = k + 1;
        while (end < order.size() && xs[order[end]] == xs[order[k]]) ++end;
        const double rank = 0.5 * static_cast<double>(k + 1 + end);  // mean of k+1 .. end
        for (std::size_t m = k; m < end; ++m) ranks[order[m]] = rank;
        k = end;
    }
    return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys);
    const auto rx = fractional_ranks(xs);
    const auto ry = fractional_ranks(ys);
    return pearson(rx, ry);
}

CorrelationResult correlation_test(CorrelationKind kind, std::span<const double> xs, std::span<const double> ys,
                                   std::string metric, std::size_t n_shuffles, std::uint64_t seed) {
    check_pair(xs, ys);
    std::vector<double> a(xs.begin(), xs.end());
    std::vector<double> b(ys.begin(), ys.end());
    if (kind == CorrelationKind::Spearman) {
        a = fractional_ranks(a);
        b = fractional_ranks(b);
    }
    const Centered ca = center(a);
    Centered cb = center(b);
    const double observed = centered_correlation(ca, cb);

    Rng rng(seed);
    std::size_t extreme = 0;
    const double cutoff = std::abs(observed) - 1e-12;
    for (std::size_t s = 0; s < n_shuffles; ++s) {
        for (std::size_t i = cb.values.size() - 1; i > 0; --i)
            std::swap(cb.values[i], cb.values[static_cast<std::size_t>(rng.below(i + 1))]);
        if (std::abs(centered_correlation(ca, cb)) >= cutoff) ++extreme;
    }
    CorrelationResult r;
    r.metric = std::move(metric);
    r.n = xs.size();
    r.estimate = observed;
    r.p_value = static_cast<double>(1 + extreme) / static_cast<double>(1 + n_shuffles);
    r.seed = seed;
    return r;
}

std::vector<CorrelationResult> density_feature_report(const std::vector<WordRecord>& words,
                                                      const std::vector<TokenDensityRecord>& tokens,
                                                      std::uint64_t seed, std::size_t n_shuffles) {
    if (words.empty() || tokens.empty()) fail(ErrorKind::InvalidArgument, "feature report needs words and tokens");
    std::vector<double> word_rho;
    std::vector<double> log_freq;
    for (const auto& w : words) {
        word_rho.push_back(w.max_rho);
        log_freq.push_back(std::log1p(static_cast<double>(w.frequency_count)));
    }
    std::vector<double> tok_rho;
    std::vector<double> position;
    std::vector<double> ent;
    for (const auto& t : tokens) {
        tok_rho.push_back(t.rho_hat);
        position.push_back(t.position);
        ent.push_back(t.entropy);
    }
    return {
        correlation_test(CorrelationKind::Spearman, word_rho, log_freq, "spearman_rho_vs_log_frequency", n_shuffles, seed),
        correlation_test(CorrelationKind::Spearman, tok_rho, position, "spearman_rho_vs_position", n_shuffles, seed),
        correlation_test(CorrelationKind::Pearson, tok_rho, ent, "pearson_rho_vs_entropy", n_shuffles, seed),
    };
}

std::string report_to_json(const std::vector<CorrelationResult>& results) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json j;
        j["metric"] = r.metric;
        j["n"] = r.n;
        j["estimate"] = r.estimate;
        j["p_value"] = r.p_value;
        j["seed"] = r.seed;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

double ks_uniform_statistic(std::vector<double> samples) {
    if (samples.empty()) fail(ErrorKind::InvalidArgument, "KS statistic of an empty sample");
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = std::clamp(samples[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
    }
    return d;
}

double ks_critical_value(std::size_t n, double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

}  // namespace densitrace
