#pragma once

#include "densitrace/tensor_file.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace densitrace {

using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXf;
using TokenId = std::int32_t;

enum class Activation { Gelu };

/// Shape hyper-parameters of a GPT-2-style pre-LN decoder.
struct ModelConfig {
    int n_layers = 0;
    int n_heads = 0;
    int d_model = 0;
    int d_head = 0;
    int d_mlp = 0;
    int vocab_size = 0;
    int max_seq_len = 0;
    float ln_epsilon = 1e-5f;
    Activation activation = Activation::Gelu;

    /// Throws InvalidConfig when counts are non-positive, d_head * n_heads != d_model
    /// or ln_epsilon <= 0.
    void validate() const;

    static ModelConfig from_json_file(const std::filesystem::path& path);
    static ModelConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct LayerWeights {
    Vector ln1_weight, ln1_bias;
    Matrix wq, wk, wv, wo;  // [d_model, d_model], applied as x * W
    Vector bq, bk, bv, bo;
    Vector ln2_weight, ln2_bias;
    Matrix mlp_in;   // [d_model, d_mlp]
    Vector mlp_in_bias;
    Matrix mlp_out;  // [d_mlp, d_model]
    Vector mlp_out_bias;
};

/// Immutable parameter set. Safe to share across threads once loaded.
struct Model {
    ModelConfig config;
    Matrix token_embedding;     // [vocab, d_model]
    Matrix position_embedding;  // [max_seq_len, d_model]
    std::vector<LayerWeights> layers;
    Vector ln_f_weight, ln_f_bias;
    Matrix unembedding;  // [vocab, d_model]; empty when tied to token_embedding

    const Matrix& output_embedding() const { return unembedding.size() == 0 ? token_embedding : unembedding; }
    bool tied_embeddings() const { return unembedding.size() == 0; }

    /// Export in the named-tensor layout read by load_model.
    TensorFile to_tensor_file() const;
    static Model from_tensor_file(const ModelConfig& config, const TensorFile& file);
};

Model load_model(const std::filesystem::path& weights_path, const std::filesystem::path& config_path);

/// Loads `dir/model.safetensors` with `dir/config.json`.
Model load_model_dir(const std::filesystem::path& dir);

void save_model_dir(const Model& model, const std::filesystem::path& dir);

struct TokenSequence {
    std::vector<TokenId> ids;

    std::size_t size() const { return ids.size(); }
    bool empty() const { return ids.empty(); }
    TokenId operator[](std::size_t i) const { return ids[i]; }
};

/// Throws InputTooShort, InputTooLong or InvalidToken.
void validate_tokens(const ModelConfig& config, const TokenSequence& tokens);

/// Next-token probabilities; normalized within 1e-4.
struct Distribution {
    std::vector<float> probs;

    std::size_t size() const { return probs.size(); }
    float operator[](std::size_t v) const { return probs[v]; }
};

}  // namespace densitrace
