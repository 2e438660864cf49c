#include "test_util.hpp"

#include "densitrace/cli.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace densitrace::testing {

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("densitrace_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

const Model& fixture_model() {
    static const Model model = make_fixture_model();
    return model;
}

TokenSequence random_tokens(Rng& rng, int vocab, int length) {
    TokenSequence seq;
    for (int i = 0; i < length; ++i) seq.ids.push_back(static_cast<TokenId>(rng.below(static_cast<std::uint64_t>(vocab))));
    return seq;
}

Distribution random_distribution(Rng& rng, int vocab) {
    std::vector<double> w(static_cast<std::size_t>(vocab));
    double sum = 0.0;
    for (auto& x : w) sum += (x = -std::log(1.0 - rng.uniform()) + 1e-12);
    Distribution d;
    for (double x : w) d.probs.push_back(static_cast<float>(x / sum));
    return d;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

CliResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliResult r;
    r.code = cli_main(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

}  // namespace densitrace::testing
