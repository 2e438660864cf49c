#include "densitrace/model.hpp"

#include "densitrace/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace densitrace {

namespace {

std::string shape_str(const std::vector<std::int64_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "," : "") + std::to_string(shape[i]);
    return s + "]";
}

const NamedTensor& require(const TensorFile& file, const std::string& name, std::vector<std::int64_t> shape) {
    const NamedTensor* t = file.find(name);
    if (!t) fail(ErrorKind::MissingTensor, name);
    if (t->shape != shape)
        fail(ErrorKind::ShapeMismatch, name + ": expected " + shape_str(shape) + ", found " + shape_str(t->shape));
    for (float v : t->data)
        if (!std::isfinite(v)) fail(ErrorKind::NonFiniteWeight, name);
    return *t;
}

Matrix load_matrix(const TensorFile& file, const std::string& name, int rows, int cols) {
    const auto& t = require(file, name, {rows, cols});
    return Eigen::Map<const Matrix>(t.data.data(), rows, cols);
}

Vector load_vector(const TensorFile& file, const std::string& name, int len) {
    const auto& t = require(file, name, {len});
    return Eigen::Map<const Vector>(t.data.data(), len);
}

void put(TensorFile& file, const std::string& name, const Matrix& m) {
    file.add(name, {m.rows(), m.cols()}, std::vector<float>(m.data(), m.data() + m.size()));
}

void put(TensorFile& file, const std::string& name, const Vector& v) {
    file.add(name, {v.size()}, std::vector<float>(v.data(), v.data() + v.size()));
}

std::string layer_prefix(int l) { return "layers." + std::to_string(l) + "."; }

}  // namespace

void ModelConfig::validate() const {
    auto positive = [](int v, const char* name) {
        if (v < 1) fail(ErrorKind::InvalidConfig, std::string(name) + " must be >= 1");
    };
    positive(n_layers, "n_layers");
    positive(n_heads, "n_heads");
    positive(d_model, "d_model");
    positive(d_head, "d_head");
    positive(d_mlp, "d_mlp");
    positive(vocab_size, "vocab_size");
    positive(max_seq_len, "max_seq_len");
    if (d_head * n_heads != d_model) fail(ErrorKind::InvalidConfig, "d_head * n_heads must equal d_model");
    if (!(ln_epsilon > 0.0f)) fail(ErrorKind::InvalidConfig, "ln_epsilon must be > 0");
}

ModelConfig ModelConfig::from_json_text(const std::string& text) {
    ModelConfig c;
    try {
        const auto j = nlohmann::json::parse(text);
        c.n_layers = j.at("n_layers").get<int>();
        c.n_heads = j.at("n_heads").get<int>();
        c.d_model = j.at("d_model").get<int>();
        c.d_head = j.value("d_head", c.n_heads > 0 ? c.d_model / c.n_heads : 0);
        c.d_mlp = j.at("d_mlp").get<int>();
        c.vocab_size = j.at("vocab_size").get<int>();
        c.max_seq_len = j.at("max_seq_len").get<int>();
        c.ln_epsilon = j.value("ln_epsilon", 1e-5f);
        const auto act = j.value("activation", std::string("gelu"));
        if (act != "gelu") fail(ErrorKind::InvalidConfig, "unsupported activation: " + act);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidConfig, e.what());
    }
    c.validate();
    return c;
}

ModelConfig ModelConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::MissingFile, path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string ModelConfig::to_json_text() const {
    nlohmann::ordered_json j;
    j["n_layers"] = n_layers;
    j["n_heads"] = n_heads;
    j["d_model"] = d_model;
    j["d_head"] = d_head;
    j["d_mlp"] = d_mlp;
    j["vocab_size"] = vocab_size;
    j["max_seq_len"] = max_seq_len;
    j["ln_epsilon"] = ln_epsilon;
    j["activation"] = "gelu";
    return j.dump(2) + "\n";
}

Model Model::from_tensor_file(const ModelConfig& config, const TensorFile& file) {
    config.validate();
    const int d = config.d_model;
    Model m;
    m.config = config;
    m.token_embedding = load_matrix(file, "wte", config.vocab_size, d);
    m.position_embedding = load_matrix(file, "wpe", config.max_seq_len, d);
    m.layers.resize(static_cast<std::size_t>(config.n_layers));
    for (int l = 0; l < config.n_layers; ++l) {
        const auto p = layer_prefix(l);
        auto& w = m.layers[static_cast<std::size_t>(l)];
        w.ln1_weight = load_vector(file, p + "ln1.weight", d);
        w.ln1_bias = load_vector(file, p + "ln1.bias", d);
        w.wq = load_matrix(file, p + "attn.wq", d, d);
        w.wk = load_matrix(file, p + "attn.wk", d, d);
        w.wv = load_matrix(file, p + "attn.wv", d, d);
        w.wo = load_matrix(file, p + "attn.wo", d, d);
        w.bq = load_vector(file, p + "attn.bq", d);
        w.bk = load_vector(file, p + "attn.bk", d);
        w.bv = load_vector(file, p + "attn.bv", d);
        w.bo = load_vector(file, p + "attn.bo", d);
        w.ln2_weight = load_vector(file, p + "ln2.weight", d);
        w.ln2_bias = load_vector(file, p + "ln2.bias", d);
        w.mlp_in = load_matrix(file, p + "mlp.w_in", d, config.d_mlp);
        w.mlp_in_bias = load_vector(file, p + "mlp.b_in", config.d_mlp);
        w.mlp_out = load_matrix(file, p + "mlp.w_out", config.d_mlp, d);
        w.mlp_out_bias = load_vector(file, p + "mlp.b_out", d);
    }
    m.ln_f_weight = load_vector(file, "ln_f.weight", d);
    m.ln_f_bias = load_vector(file, "ln_f.bias", d);
    if (file.contains("unembed")) m.unembedding = load_matrix(file, "unembed", config.vocab_size, d);
    return m;
}

TensorFile Model::to_tensor_file() const {
    TensorFile f;
    put(f, "wte", token_embedding);
    put(f, "wpe", position_embedding);
    for (int l = 0; l < config.n_layers; ++l) {
        const auto p = layer_prefix(l);
        const auto& w = layers[static_cast<std::size_t>(l)];
        put(f, p + "ln1.weight", w.ln1_weight);
        put(f, p + "ln1.bias", w.ln1_bias);
        put(f, p + "attn.wq", w.wq);
        put(f, p + "attn.wk", w.wk);
        put(f, p + "attn.wv", w.wv);
        put(f, p + "attn.wo", w.wo);
        put(f, p + "attn.bq", w.bq);
        put(f, p + "attn.bk", w.bk);
        put(f, p + "attn.bv", w.bv);
        put(f, p + "attn.bo", w.bo);
        put(f, p + "ln2.weight", w.ln2_weight);
        put(f, p + "ln2.bias", w.ln2_bias);
        put(f, p + "mlp.w_in", w.mlp_in);
        put(f, p + "mlp.b_in", w.mlp_in_bias);
        put(f, p + "mlp.w_out", w.mlp_out);
        put(f, p + "mlp.b_out", w.mlp_out_bias);
    }
    put(f, "ln_f.weight", ln_f_weight);
    put(f, "ln_f.bias", ln_f_bias);
    if (!tied_embeddings()) put(f, "unembed", unembedding);
    f.metadata()["format"] = "densitrace-gpt2";
    return f;
}

Model load_model(const std::filesystem::path& weights_path, const std::filesystem::path& config_path) {
    const auto config = ModelConfig::from_json_file(config_path);
    return Model::from_tensor_file(config, TensorFile::read(weights_path));
}

Model load_model_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) fail(ErrorKind::MissingFile, "model directory not found: " + dir.string());
    return load_model(dir / "model.safetensors", dir / "config.json");
}

void save_model_dir(const Model& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    model.to_tensor_file().write(dir / "model.safetensors");
    std::ofstream(dir / "config.json") << model.config.to_json_text();
}

void validate_tokens(const ModelConfig& config, const TokenSequence& tokens) {
    if (tokens.empty()) fail(ErrorKind::InputTooShort, "token sequence is empty");
    if (tokens.size() > static_cast<std::size_t>(config.max_seq_len))
        fail(ErrorKind::InputTooLong,
             std::to_string(tokens.size()) + " tokens exceed max_seq_len " + std::to_string(config.max_seq_len));
    for (auto id : tokens.ids)
        if (id < 0 || id >= config.vocab_size) fail(ErrorKind::InvalidToken, "token id " + std::to_string(id) + " out of range");
}

}  // namespace densitrace
