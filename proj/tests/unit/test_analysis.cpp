#include "densitrace/baselines.hpp"
#include "densitrace/density.hpp"
#include "densitrace/errors.hpp"
#include "densitrace/stats.hpp"
#include "densitrace/words.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <numeric>

using namespace densitrace;
using densitrace::testing::fixture_model;

namespace {

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& w : segment_words(text)) out.push_back(w.text);
    return out;
}

TokenDensityRecord rec(int pos, std::string text, double rho) {
    TokenDensityRecord r;
    r.position = pos;
    r.text = std::move(text);
    r.rho_hat = rho;
    return r;
}

}  // namespace

TEST(Words, Segmentation) {
    EXPECT_EQ(words_of("Hello, world! don't stop well-known."),
              (std::vector<std::string>{"Hello", ",", "world", "!", "don't", "stop", "well-known", "."}));
    EXPECT_EQ(words_of("  \"quoted\"  (x)--y 3.5 "),
              (std::vector<std::string>{"\"", "quoted", "\"", "(", "x", ")", "-", "-", "y", "3", ".", "5"}));
    EXPECT_EQ(words_of("l’homme café crème 'tis"),
              (std::vector<std::string>{"l’homme", "café", "crème", "'", "tis"}));
    EXPECT_TRUE(words_of(" \n\t ").empty());
}

TEST(Words, SpansIndexTheText) {
    const std::string text = "ab, c";
    for (const auto& w : segment_words(text)) EXPECT_EQ(text.substr(w.begin, w.end - w.begin), w.text);
}

TEST(Words, MaxOverConstituentTokens) {
    const std::vector<TokenDensityRecord> recs = {rec(3, " wel", 0.3), rec(4, "come", 0.7), rec(5, ",", 0.2),
                                                  rec(6, " home", 0.4)};
    const auto words = aggregate_words(recs);
    ASSERT_EQ(words.size(), 3u);
    EXPECT_EQ(words[0].text, "welcome");
    EXPECT_DOUBLE_EQ(words[0].max_rho, 0.7);
    EXPECT_EQ(words[0].first_position, 3);
    EXPECT_EQ(words[0].last_position, 4);
    EXPECT_EQ(words[1].text, ",");
    EXPECT_DOUBLE_EQ(words[1].max_rho, 0.2);
    EXPECT_EQ(words[2].text, "home");
    EXPECT_DOUBLE_EQ(words[2].max_rho, 0.4);
    EXPECT_EQ(words[2].index, 2);
}

TEST(Words, SingleTokenWordAndFrequency) {
    const auto table = FrequencyTable::parse("home\t12\n");
    const auto words = aggregate_words({rec(0, " Home", 0.55)}, &table);
    ASSERT_EQ(words.size(), 1u);
    EXPECT_DOUBLE_EQ(words[0].max_rho, 0.55);
    EXPECT_EQ(words[0].frequency_count, 12u);
}

TEST(Words, TokenSpanningTwoWords) {
    const auto words = aggregate_words({rec(0, "a", 0.1), rec(1, "b c", 0.9), rec(2, "d", 0.2)});
    ASSERT_EQ(words.size(), 2u);
    EXPECT_DOUBLE_EQ(words[0].max_rho, 0.9);
    EXPECT_DOUBLE_EQ(words[1].max_rho, 0.9);
    EXPECT_EQ(words[1].last_position, 2);
}

TEST(Words, CsvRoundTrip) {
    const auto words = aggregate_words({rec(0, "x,\"y", 0.25), rec(1, " z", 0.5)});
    const auto back = word_records_from_csv(word_records_to_csv(words));
    ASSERT_EQ(back.size(), words.size());
    for (std::size_t k = 0; k < words.size(); ++k) {
        EXPECT_EQ(back[k].text, words[k].text);
        EXPECT_EQ(back[k].max_rho, words[k].max_rho);
        EXPECT_EQ(back[k].first_position, words[k].first_position);
    }
}

TEST(FrequencyTable, Parse) {
    const auto t = FrequencyTable::parse("the\t100\nof\t50\n\nThe\t1\n");
    EXPECT_EQ(t.count("the"), 101u);
    EXPECT_EQ(t.count("THE"), 101u);
    EXPECT_EQ(t.count("of"), 50u);
    EXPECT_EQ(t.count("absent"), 0u);
    EXPECT_EQ(t.total(), 151u);
}

TEST(FrequencyTable, MalformedLinesNameTheLine) {
    for (const auto& [text, line] : std::vector<std::pair<std::string, std::string>>{
             {"abc", "line 1"}, {"a\t1\nb\t0\n", "line 2"}, {"a\t1\nb\t2\nc\tx\n", "line 3"}, {"a\t-3", "line 1"}}) {
        try {
            FrequencyTable::parse(text);
            FAIL() << text;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::ParseError);
            EXPECT_NE(std::string(e.what()).find(line), std::string::npos) << e.what();
        }
    }
}

TEST(Pearson, HandCases) {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    std::vector<double> y, z;
    for (double v : x) {
        y.push_back(2 * v + 1);
        z.push_back(-v);
    }
    EXPECT_NEAR(pearson(x, y), 1.0, 1e-12);
    EXPECT_NEAR(pearson(x, z), -1.0, 1e-12);
    EXPECT_NEAR(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2}), 0.5, 1e-12);
}

TEST(Pearson, AffineInvariance) {
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
        std::vector<double> x(20), y(20), y2(20);
        for (int i = 0; i < 20; ++i) {
            x[i] = rng.uniform();
            y[i] = x[i] + rng.uniform();
            y2[i] = 3.5 * y[i] - 7.0;
        }
        EXPECT_NEAR(pearson(x, y), pearson(x, y2), 1e-9);
    }
}

TEST(Pearson, Degenerate) {
    for (auto fn : {pearson, spearman}) {
        try {
            fn(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::DegenerateVariance);
        }
        try {
            fn(std::vector<double>{1, 2}, std::vector<double>{1, 2});
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::DegenerateVariance);
        }
        EXPECT_THROW(fn(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}), Error);
    }
}

TEST(Spearman, HandCases) {
    EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 0.8, 1e-12);
    const std::vector<double> x = {0.3, 1.5, -2.0, 7.0, 4.0};
    std::vector<double> cube, neg;
    for (double v : x) {
        cube.push_back(v * v * v + std::exp(v));
        neg.push_back(-v);
    }
    EXPECT_NEAR(spearman(x, cube), 1.0, 1e-12);
    EXPECT_NEAR(spearman(x, neg), -1.0, 1e-12);
}

TEST(Spearman, AverageRanksForTies) {
    EXPECT_EQ(fractional_ranks(std::vector<double>{10, 20, 20, 30}), (std::vector<double>{1, 2.5, 2.5, 4}));
    EXPECT_EQ(fractional_ranks(std::vector<double>{5, 5, 5}), (std::vector<double>{2, 2, 2}));
}

// Without ties Spearman equals 1 - 6 sum d^2 / (n (n^2 - 1)).
TEST(Spearman, RankDifferenceFormula) {
    Rng rng(91);
    for (int k = 0; k < 200; ++k) {
        const int n = 3 + static_cast<int>(rng.below(30));
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = rng.uniform();
            y[i] = rng.uniform();
        }
        const auto rx = fractional_ranks(x);
        const auto ry = fractional_ranks(y);
        double d2 = 0.0;
        for (int i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
        EXPECT_NEAR(spearman(x, y), 1.0 - 6.0 * d2 / (n * (double(n) * n - 1)), 1e-9);
    }
}

TEST(Permutation, PlantedSignalAndDeterminism) {
    std::vector<double> x(30), y(30);
    for (int i = 0; i < 30; ++i) {
        x[i] = i;
        y[i] = -std::log1p(i * i);
    }
    const auto r = correlation_test(CorrelationKind::Spearman, x, y, "m", 2000, 5);
    EXPECT_NEAR(r.estimate, -1.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 2001.0);
    const auto r2 = correlation_test(CorrelationKind::Spearman, x, y, "m", 2000, 5);
    EXPECT_EQ(r.p_value, r2.p_value);
    EXPECT_EQ(r.n, 30u);
    EXPECT_EQ(r.seed, 5u);
}

TEST(Permutation, NullDataUsuallyNotSignificant) {
    Rng rng(7);
    int significant = 0;
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> x(25), y(25);
        for (int i = 0; i < 25; ++i) {
            x[i] = rng.uniform();
            y[i] = rng.uniform();
        }
        const auto r = correlation_test(CorrelationKind::Pearson, x, y, "m", 500, trial);
        EXPECT_GE(r.p_value, 0.0);
        EXPECT_LE(r.p_value, 1.0);
        significant += r.p_value <= 0.05;
    }
    EXPECT_LE(significant, 8);  // expected 2 of 40
}

TEST(FeatureReport, PlantedFrequencySignal) {
    std::vector<WordRecord> words;
    std::vector<TokenDensityRecord> tokens;
    for (int i = 0; i < 12; ++i) {
        WordRecord w;
        w.text = "w" + std::to_string(i);
        w.frequency_count = static_cast<std::uint64_t>(1 + i * i);
        w.max_rho = -std::log1p(static_cast<double>(w.frequency_count));
        words.push_back(w);
        TokenDensityRecord t;
        t.position = i;
        t.rho_hat = 0.1 + 0.01 * ((i * 7) % 5);
        t.entropy = 1.0 + 0.3 * i;
        tokens.push_back(t);
    }
    const auto report = density_feature_report(words, tokens, 1, 1000);
    ASSERT_EQ(report.size(), 3u);
    EXPECT_EQ(report[0].metric, "spearman_rho_vs_log_frequency");
    EXPECT_NEAR(report[0].estimate, -1.0, 1e-12);
    EXPECT_EQ(report[1].metric, "spearman_rho_vs_position");
    EXPECT_EQ(report[2].metric, "pearson_rho_vs_entropy");

    const auto j = nlohmann::json::parse(report_to_json(report));
    ASSERT_TRUE(j.is_array());
    for (const auto& row : j) {
        EXPECT_TRUE(row["metric"].is_string());
        EXPECT_TRUE(row["n"].is_number_unsigned());
        EXPECT_TRUE(row["estimate"].is_number());
        EXPECT_TRUE(row["p_value"].is_number());
        EXPECT_TRUE(row["seed"].is_number_unsigned());
        EXPECT_EQ(row.size(), 5u);
    }
}

TEST(Ks, StatisticAndCriticalValue) {
    EXPECT_DOUBLE_EQ(ks_uniform_statistic({0.5}), 0.5);
    EXPECT_NEAR(ks_uniform_statistic({0.1, 0.6}), 0.4, 1e-12);
    EXPECT_NEAR(ks_critical_value(100, 0.05), 1.3581 / 10.0, 1e-4);
    EXPECT_NEAR(ks_critical_value(200, 0.01), 1.6276 / std::sqrt(200.0), 1e-4);
}

TEST(SignTest, ExactBinomialTail) {
    EXPECT_DOUBLE_EQ(sign_test_p(0, 0), 1.0);
    EXPECT_NEAR(sign_test_p(10, 0), 1.0 / 1024.0, 1e-12);
    EXPECT_NEAR(sign_test_p(5, 5), 638.0 / 1024.0, 1e-12);
    EXPECT_NEAR(sign_test_p(0, 4), 1.0, 1e-12);
}

TEST(Baselines, RandomRowsAreSizeMatched) {
    Rng rng(4);
    const DecomposedRun run = decompose_forward(fixture_model(), densitrace::testing::random_tokens(rng, 11, 8));
    const auto rows = random_baseline(fixture_model(), run, ThresholdGrid::default_grid(), 9);
    ASSERT_EQ(rows.size(), 15u);
    const double edge = 1.0 / run.ancestors().size();
    for (const auto& r : rows) {
        EXPECT_NEAR(r.random_size, std::max(r.size, min_random_size(run)), edge + 1e-12);
        EXPECT_GE(r.magnitude_tv, 0.0);
        EXPECT_LE(r.random_tv, 1.0);
    }
    EXPECT_EQ(rows.back().tau, 1.0);
    const auto again = random_baseline(fixture_model(), run, ThresholdGrid::default_grid(), 9);
    for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(rows[k].random_tv, again[k].random_tv);
}

TEST(Baselines, NecessityCountsMatchTrace) {
    Rng rng(6);
    const DecomposedRun run = decompose_forward(fixture_model(), densitrace::testing::random_tokens(rng, 11, 6));
    const auto grid = ThresholdGrid::default_grid();
    const auto rows = necessity_baseline(fixture_model(), run, grid, 3);
    ASSERT_EQ(rows.size(), 15u);
    for (std::size_t k = 0; k < rows.size(); ++k)
        EXPECT_EQ(rows[k].n_ablated, complement_for_necessity(run, extract_trace(run, grid.taus()[k])).size());
    EXPECT_GT(rows.front().trace_tv, 0.1);
}
