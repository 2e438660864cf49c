#pragma once

#include "densitrace/model.hpp"
#include "densitrace/random.hpp"

#include <cstdint>

namespace densitrace {

/// Plain GPT-2 forward pass (heads concatenated, one output projection).
/// This is the reference P_G for every faithfulness comparison.
Distribution forward_dense(const Model& model, const TokenSequence& tokens);

/// Incremental forward pass with a key/value cache, used for generation.
class DenseSession {
public:
    explicit DenseSession(const Model& model);

    /// Feeds one token and returns the next-token distribution.
    Distribution append(TokenId token);
    int length() const { return length_; }

private:
    const Model& model_;
    std::vector<Matrix> keys_;    // per layer: [max_seq_len, d_model]
    std::vector<Matrix> values_;
    int length_ = 0;
};

/// Samples from the smallest highest-probability set whose mass reaches p
/// (ties ordered by token id), renormalized. Throws InvalidP unless 0 < p <= 1.
TokenId nucleus_sample(const Distribution& dist, double p, Rng& rng);

/// Appends n_new nucleus-sampled tokens. Pure function of its arguments.
TokenSequence generate(const Model& model, const TokenSequence& prompt, int n_new, double p, std::uint64_t seed);

}  // namespace densitrace
