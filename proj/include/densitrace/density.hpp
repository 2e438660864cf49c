#pragma once

#include "densitrace/graph.hpp"
#include "densitrace/model.hpp"
#include "densitrace/tokenizer.hpp"
#include "densitrace/trace.hpp"

#include <optional>
#include <string>
#include <vector>

namespace densitrace {

struct SweepPoint {
    double tau = 0.0;
    double size = 0.0;      // s in [0, 1]
    double tv_error = 0.0;  // TV(P_G, P_T)
    int nucleus = 0;
};

/// One trace per threshold: extract, run masked, compare against the full model.
std::vector<SweepPoint> sweep(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid);
std::vector<SweepPoint> sweep(const Model& model, const TokenSequence& tokens, const ThresholdGrid& grid);

struct AucAnchors {
    double empty_error = 1.0;           // error assigned to s = 0 when no point is there
    std::optional<double> full_error;   // error assigned to s = 1 when no point is there
};

struct DensityEstimate {
    std::vector<SweepPoint> points;  // sorted by size, deduplicated, anchors included
    double rho_hat = 0.0;
    bool empty_anchor_added = false;
    bool full_anchor_added = false;
};

/// Trapezoidal area under error-vs-size. Points are sorted by size; equal
/// sizes keep the smallest error; (0, empty_error) and (1, full_error) are
/// added when missing. Throws InvalidArgument with no points, or with no
/// point at s = 1 and no full_error.
DensityEstimate auc_trapezoid(std::vector<SweepPoint> points, const AucAnchors& anchors = {});

/// sweep + a measured full-trace error + auc_trapezoid.
DensityEstimate estimate_density(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid);
DensityEstimate estimate_density(const Model& model, const TokenSequence& tokens, const ThresholdGrid& grid);

struct TokenDensityRecord {
    int position = 0;  // index in prompt + generation
    TokenId token = 0;
    std::string text;  // raw token bytes
    double rho_hat = 0.0;
    double entropy = 0.0;  // of P_G for the prefix that predicts this token
    bool is_generated = false;
};

struct ProfileOptions {
    int n_new = 30;
    double p = 0.6;
    std::uint64_t seed = 0;
    /// Also profile prompt tokens after the first (is_generated = false).
    bool include_prompt = false;
};

/// Generates a continuation, then estimates density for each predicted token
/// from the prefix that ends just before it.
std::vector<TokenDensityRecord> profile_generation(const Model& model, const BpeTokenizer& tokenizer,
                                                   const std::string& prompt_text, const ThresholdGrid& grid,
                                                   const ProfileOptions& options);
std::vector<TokenDensityRecord> profile_tokens(const Model& model, const BpeTokenizer* tokenizer,
                                               const TokenSequence& sequence, int first_position,
                                               int generated_from, const ThresholdGrid& grid);

/// CSV with header "tau,size,tv,nucleus".
std::string sweep_to_csv(const std::vector<SweepPoint>& points);
/// CSV with header "position,token_id,token_text,rho_hat,entropy,is_generated".
std::string token_records_to_csv(const std::vector<TokenDensityRecord>& records);
std::vector<TokenDensityRecord> token_records_from_csv(const std::string& csv);

/// RFC 4180 quoting when the field contains a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace densitrace
