#include "densitrace/fixture.hpp"

#include "densitrace/errors.hpp"
#include "densitrace/tokenizer.hpp"

#include <json.hpp>

#include <fstream>
#include <random>

namespace densitrace {

namespace {

class UniformSource {
public:
    explicit UniformSource(std::uint32_t seed) : engine_(seed) {}
    // (-scale, scale), 24-bit resolution.
    float operator()(float scale) {
        const float u = static_cast<float>(engine_() >> 8) * 0x1.0p-24f;
        return (2.0f * u - 1.0f) * scale;
    }

private:
    std::mt19937 engine_;
};

Matrix random_matrix(UniformSource& src, int rows, int cols, float scale) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = src(scale);
    return m;
}

Vector random_vector(UniformSource& src, int len, float scale, float offset = 0.0f) {
    Vector v(len);
    for (Eigen::Index c = 0; c < len; ++c) v(c) = offset + src(scale);
    return v;
}

}  // namespace

Model make_fixture_model(const FixtureOptions& o) {
    Model m;
    m.config.n_layers = o.n_layers;
    m.config.n_heads = o.n_heads;
    m.config.d_model = o.d_model;
    m.config.d_head = o.d_model / o.n_heads;
    m.config.d_mlp = o.d_mlp;
    m.config.vocab_size = o.vocab_size;
    m.config.max_seq_len = o.max_seq_len;
    m.config.ln_epsilon = 1e-5f;
    m.config.validate();

    UniformSource src(o.seed);
    const int d = o.d_model;
    const float w_scale = 1.7f / std::sqrt(static_cast<float>(d));
    m.token_embedding = random_matrix(src, o.vocab_size, d, 1.0f);
    m.position_embedding = random_matrix(src, o.max_seq_len, d, 0.5f);
    m.layers.resize(static_cast<std::size_t>(o.n_layers));
    for (auto& w : m.layers) {
        w.ln1_weight = random_vector(src, d, 0.1f, 1.0f);
        w.ln1_bias = random_vector(src, d, 0.1f);
        w.wq = random_matrix(src, d, d, w_scale);
        w.wk = random_matrix(src, d, d, w_scale);
        w.wv = random_matrix(src, d, d, w_scale);
        w.wo = random_matrix(src, d, d, w_scale);
        w.bq = random_vector(src, d, 0.1f);
        w.bk = random_vector(src, d, 0.1f);
        w.bv = random_vector(src, d, 0.1f);
        w.bo = random_vector(src, d, 0.1f);
        w.ln2_weight = random_vector(src, d, 0.1f, 1.0f);
        w.ln2_bias = random_vector(src, d, 0.1f);
        w.mlp_in = random_matrix(src, d, o.d_mlp, w_scale);
        w.mlp_in_bias = random_vector(src, o.d_mlp, 0.1f);
        w.mlp_out = random_matrix(src, o.d_mlp, d, 1.7f / std::sqrt(static_cast<float>(o.d_mlp)));
        w.mlp_out_bias = random_vector(src, d, 0.1f);
    }
    m.ln_f_weight = random_vector(src, d, 0.1f, 1.0f);
    m.ln_f_bias = random_vector(src, d, 0.1f);
    if (!o.tied_embeddings) m.unembedding = random_matrix(src, o.vocab_size, d, 1.0f);
    return m;
}

FixtureTokenizerAssets make_fixture_tokenizer_assets() {
    // Same byte -> symbol table as the tokenizer itself.
    nlohmann::ordered_json vocab;
    int shifted = 0;
    for (int b = 0; b < 256; ++b) {
        const bool printable = (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
        const char32_t cp = printable ? static_cast<char32_t>(b) : static_cast<char32_t>(256 + shifted++);
        vocab[utf8::encode(cp)] = b;
    }
    vocab["\xC4\xA0t"] = 256;        // "Ġt"
    vocab["he"] = 257;
    vocab["\xC4\xA0the"] = 258;      // "Ġthe"
    vocab["in"] = 259;
    std::string merges = "#version: 0.2\n\xC4\xA0 t\nh e\n\xC4\xA0t he\ni n\n";
    return {vocab.dump(), merges};
}

void write_fixture_dir(const std::filesystem::path& dir, const FixtureOptions& options, bool with_tokenizer) {
    if (with_tokenizer && options.vocab_size < 260)
        fail(ErrorKind::InvalidConfig, "fixture tokenizer needs vocab_size >= 260");
    save_model_dir(make_fixture_model(options), dir);
    if (with_tokenizer) {
        const auto assets = make_fixture_tokenizer_assets();
        std::ofstream(dir / "vocab.json", std::ios::binary) << assets.vocab_json;
        std::ofstream(dir / "merges.txt", std::ios::binary) << assets.merges_txt;
    }
}

}  // namespace densitrace
