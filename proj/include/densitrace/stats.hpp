#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace densitrace {

struct TokenDensityRecord;
struct WordRecord;

/// Unigram counts, looked up case-folded. Unknown words count 0.
class FrequencyTable {
public:
    /// TSV, one `word<TAB>count` per line; blank lines are skipped.
    /// Throws ParseError naming the offending line.
    static FrequencyTable load(const std::filesystem::path& path);
    static FrequencyTable parse(std::string_view tsv);

    void add(std::string_view word, std::uint64_t count);
    std::uint64_t count(std::string_view word) const;
    std::uint64_t total() const { return total_; }
    std::size_t size() const { return counts_.size(); }

private:
    std::unordered_map<std::string, std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

/// Sample Pearson correlation. Throws DegenerateVariance for n < 3 or a
/// constant input, InvalidArgument for unequal lengths.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// 1-based ranks; tied values share the mean of their positions.
std::vector<double> fractional_ranks(std::span<const double> xs);

enum class CorrelationKind { Pearson, Spearman };

struct CorrelationResult {
    std::string metric;
    std::size_t n = 0;
    double estimate = 0.0;
    double p_value = 1.0;
    std::uint64_t seed = 0;
};

/// Two-sided permutation test: ys is shuffled `n_shuffles` times and
/// p = (1 + #{|r_perm| >= |r_obs|}) / (1 + n_shuffles).
CorrelationResult correlation_test(CorrelationKind kind, std::span<const double> xs, std::span<const double> ys,
                                   std::string metric, std::size_t n_shuffles, std::uint64_t seed);

/// Spearman(word max density, log(1 + frequency)), Spearman(token density,
/// position) and Pearson(token density, entropy), each with a permutation p-value.
std::vector<CorrelationResult> density_feature_report(const std::vector<WordRecord>& words,
                                                      const std::vector<TokenDensityRecord>& tokens,
                                                      std::uint64_t seed, std::size_t n_shuffles = 10000);

/// JSON array of {metric, n, estimate, p_value, seed}.
std::string report_to_json(const std::vector<CorrelationResult>& results);

/// Kolmogorov-Smirnov distance between the sample's empirical CDF and U(0, 1).
double ks_uniform_statistic(std::vector<double> samples);
/// Asymptotic one-sample KS critical value sqrt(-ln(alpha / 2) / 2) / sqrt(n).
double ks_critical_value(std::size_t n, double alpha);

}  // namespace densitrace
