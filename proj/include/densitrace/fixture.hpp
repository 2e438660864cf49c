#pragma once

#include "densitrace/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace densitrace {

/// Tiny deterministic GPT-2-shaped model for tests and demos. Weights come
/// from mt19937 words mapped to uniform floats, so a seed reproduces the same
/// tensors bit-for-bit on any platform.
struct FixtureOptions {
    int n_layers = 2;
    int n_heads = 2;
    int d_model = 8;
    int d_mlp = 32;
    int vocab_size = 11;
    int max_seq_len = 16;
    std::uint32_t seed = 42;
    bool tied_embeddings = true;
};

Model make_fixture_model(const FixtureOptions& options = {});

/// Byte-level BPE assets with the 256 byte symbols plus four merges
/// ("Ġt", "he", "Ġthe", "in"): 260 tokens.
struct FixtureTokenizerAssets {
    std::string vocab_json;
    std::string merges_txt;
};
FixtureTokenizerAssets make_fixture_tokenizer_assets();

/// Writes config.json + model.safetensors, plus vocab.json + merges.txt when
/// `with_tokenizer` (requires vocab_size >= 260).
void write_fixture_dir(const std::filesystem::path& dir, const FixtureOptions& options, bool with_tokenizer);

}  // namespace densitrace
