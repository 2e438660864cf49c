#include "densitrace/cli.hpp"

#include "densitrace/baselines.hpp"
#include "densitrace/density.hpp"
#include "densitrace/errors.hpp"
#include "densitrace/fixture.hpp"
#include "densitrace/masked.hpp"
#include "densitrace/metrics.hpp"
#include "densitrace/model.hpp"
#include "densitrace/random.hpp"
#include "densitrace/report.hpp"
#include "densitrace/runtime.hpp"
#include "densitrace/stats.hpp"
#include "densitrace/tokenizer.hpp"
#include "densitrace/trace.hpp"
#include "densitrace/words.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

namespace densitrace {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingFile, path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Empty path means `out`.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty()) {
        out << content;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) fail(ErrorKind::InvalidArgument, "cannot write " + path);
    file << content;
    if (!file) fail(ErrorKind::InvalidArgument, "cannot write " + path);
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::istringstream in(read_file(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

TokenSequence parse_ids(const std::string& list) {
    TokenSequence seq;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const long v = std::stol(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            seq.ids.push_back(static_cast<TokenId>(v));
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, "bad token id '" + item + "'");
        }
    }
    return seq;
}

struct ModelArgs {
    std::string model_dir;
    std::string tokenizer_dir;  // defaults to model_dir
    std::string grid = "default";
};

void add_model_args(CLI::App* cmd, ModelArgs& args) {
    cmd->add_option("--model", args.model_dir, "Model directory (config.json, model.safetensors)")->required();
    cmd->add_option("--tokenizer", args.tokenizer_dir, "Directory with vocab.json and merges.txt (default: --model)");
    cmd->add_option("--grid", args.grid, "Threshold grid: 'default' or a comma-separated list");
}

struct Loaded {
    Model model;
    std::optional<BpeTokenizer> tokenizer;
    ThresholdGrid grid;
};

Loaded load(const ModelArgs& args, bool need_tokenizer) {
    ThresholdGrid grid = ThresholdGrid::parse(args.grid);
    Model model = load_model_dir(args.model_dir);
    std::optional<BpeTokenizer> tokenizer;
    if (need_tokenizer) {
        tokenizer = BpeTokenizer::load_dir(args.tokenizer_dir.empty() ? args.model_dir : args.tokenizer_dir);
        if (tokenizer->vocab_size() != static_cast<std::size_t>(model.config.vocab_size))
            fail(ErrorKind::VocabMismatch, "tokenizer has " + std::to_string(tokenizer->vocab_size()) +
                                               " tokens, model " + std::to_string(model.config.vocab_size));
    }
    return {std::move(model), std::move(tokenizer), std::move(grid)};
}

TokenSequence to_tokens(const Loaded& loaded, const std::string& text) {
    return loaded.tokenizer->tokenize(text, loaded.model.config.max_seq_len);
}

// Runs fn(i) for i in [0, n) on `threads` workers. Results keep index order;
// the lowest-index failure is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, unsigned threads, Fn fn) {
    std::vector<T> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct CorpusItem {
    int line = 0;  // 1-based line in the corpus file
    std::string text;
};

std::vector<CorpusItem> load_corpus(const std::string& path, const std::string& text) {
    std::vector<CorpusItem> items;
    if (!path.empty()) {
        const auto lines = read_lines(path);
        for (std::size_t k = 0; k < lines.size(); ++k)
            if (!lines[k].empty()) items.push_back({static_cast<int>(k + 1), lines[k]});
    } else {
        items.push_back({1, text});
    }
    if (items.empty()) fail(ErrorKind::InputTooShort, "corpus has no non-empty lines");
    return items;
}

// ---- sweep ---------------------------------------------------------------

struct SweepArgs {
    ModelArgs model;
    std::string text, ids, out, format = "csv";
};

int run_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    const Loaded loaded = load(a.model, a.ids.empty());
    const TokenSequence tokens = a.ids.empty() ? to_tokens(loaded, a.text) : parse_ids(a.ids);
    validate_tokens(loaded.model.config, tokens);
    const DecomposedRun run = decompose_forward(loaded.model, tokens);
    const auto points = sweep(loaded.model, run, loaded.grid);
    AucAnchors anchors;
    if (std::none_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.size >= 1.0; }))
        anchors.full_error =
            tv_distance(forward_dense(loaded.model, tokens), run_masked(loaded.model, tokens, full_trace(run)));
    const DensityEstimate est = auc_trapezoid(points, anchors);

    std::string body;
    if (a.format == "json") {
        nlohmann::ordered_json j;
        j["n_tokens"] = tokens.size();
        j["rho_hat"] = est.rho_hat;
        j["points"] = nlohmann::ordered_json::array();
        for (const auto& p : points)
            j["points"].push_back({{"tau", p.tau}, {"size", p.size}, {"tv", p.tv_error}, {"nucleus", p.nucleus}});
        body = j.dump(2) + "\n";
    } else {
        body = sweep_to_csv(points);
    }
    emit(a.out, body, out);
    (a.out.empty() ? err : out) << "rho_hat=" << format_double(est.rho_hat) << "\n";
    return 0;
}

// ---- density ---------------------------------------------------------------

struct DensityArgs {
    ModelArgs model;
    std::string corpus, out;
    unsigned threads = 0;
};

int run_density(const DensityArgs& a, std::ostream& out, std::ostream&) {
    const Loaded loaded = load(a.model, true);
    const auto items = load_corpus(a.corpus, {});
    struct Row {
        std::size_t n_tokens = 0;
        double rho = 0.0;
    };
    const auto rows = parallel_map<Row>(items.size(), a.threads ? a.threads : default_threads(), [&](std::size_t i) {
        const TokenSequence tokens = to_tokens(loaded, items[i].text);
        return Row{tokens.size(), estimate_density(loaded.model, tokens, loaded.grid).rho_hat};
    });
    std::string csv = "line,n_tokens,rho_hat\n";
    for (std::size_t i = 0; i < items.size(); ++i)
        csv += std::to_string(items[i].line) + "," + std::to_string(rows[i].n_tokens) + "," +
               format_double(rows[i].rho) + "\n";
    emit(a.out, csv, out);
    return 0;
}

// ---- profile ---------------------------------------------------------------

struct ProfileArgs {
    ModelArgs model;
    std::string text, out, format = "csv", html, words, freq_table;
    int n_new = 30;
    double p = 0.6;
    std::uint64_t seed = 0;
    bool include_prompt = false;
};

int run_profile(const ProfileArgs& a, std::ostream& out, std::ostream&) {
    const Loaded loaded = load(a.model, true);
    std::optional<FrequencyTable> freq;
    if (!a.freq_table.empty()) freq = FrequencyTable::load(a.freq_table);
    ProfileOptions opts;
    opts.n_new = a.n_new;
    opts.p = a.p;
    opts.seed = a.seed;
    opts.include_prompt = a.include_prompt;
    const auto records = profile_generation(loaded.model, *loaded.tokenizer, a.text, loaded.grid, opts);

    auto html = [&] {
        if (records.empty()) fail(ErrorKind::InputTooShort, "nothing was profiled (--n-new 0 without --include-prompt)");
        ReportOptions ro;
        // Tokens that were not profiled are shown as uncolored context.
        auto prompt = loaded.tokenizer->encode(a.text);
        prompt.resize(std::min<std::size_t>(prompt.size(), records.front().position));
        ro.prefix_text = loaded.tokenizer->decode(prompt);
        return render_html_report(records, ro);
    };
    std::string body;
    if (a.format == "html") body = html();
    else if (a.format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& r : records)
            arr.push_back({{"position", r.position}, {"token_id", r.token}, {"token_text", r.text},
                           {"rho_hat", r.rho_hat}, {"entropy", r.entropy}, {"is_generated", r.is_generated}});
        body = arr.dump(2, ' ', false, nlohmann::ordered_json::error_handler_t::replace) + "\n";
    } else body = token_records_to_csv(records);
    emit(a.out, body, out);

    if (!a.html.empty()) emit(a.html, html(), out);
    if (!a.words.empty()) emit(a.words, word_records_to_csv(aggregate_words(records, freq ? &*freq : nullptr)), out);
    return 0;
}

// ---- baselines ---------------------------------------------------------------

struct BaselineArgs {
    ModelArgs model;
    std::string corpus, text, out;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

std::uint64_t input_seed(std::uint64_t seed, std::size_t i) { return Rng(seed).split(i).next(); }

struct TauSummary {
    double mean_a = 0.0, mean_b = 0.0;
    std::size_t wins = 0, losses = 0;
};

void print_summary(std::ostream& out, const ThresholdGrid& grid, const std::vector<TauSummary>& s, const char* a_name,
                   const char* b_name) {
    out << "tau," << a_name << "," << b_name << ",wins,losses,sign_p\n";
    for (std::size_t k = 0; k < grid.size(); ++k)
        out << format_double(grid.taus()[k]) << "," << format_double(s[k].mean_a) << "," << format_double(s[k].mean_b)
            << "," << s[k].wins << "," << s[k].losses << "," << format_double(sign_test_p(s[k].wins, s[k].losses))
            << "\n";
}

int run_baseline_random(const BaselineArgs& a, std::ostream& out, std::ostream&) {
    const Loaded loaded = load(a.model, true);
    const auto items = load_corpus(a.corpus, a.text);
    const auto rows = parallel_map<std::vector<RandomBaselineRow>>(
        items.size(), a.threads ? a.threads : default_threads(), [&](std::size_t i) {
            const DecomposedRun run = decompose_forward(loaded.model, to_tokens(loaded, items[i].text));
            return random_baseline(loaded.model, run, loaded.grid, input_seed(a.seed, i));
        });
    std::vector<TauSummary> summary(loaded.grid.size());
    for (const auto& per_input : rows)
        for (std::size_t k = 0; k < per_input.size(); ++k) {
            const auto& r = per_input[k];
            summary[k].mean_a += r.magnitude_tv / static_cast<double>(rows.size());
            summary[k].mean_b += r.random_tv / static_cast<double>(rows.size());
            if (r.magnitude_tv < r.random_tv) ++summary[k].wins;
            else if (r.magnitude_tv > r.random_tv) ++summary[k].losses;
        }
    if (!a.out.empty()) emit(a.out, random_baseline_to_csv(rows), out);
    print_summary(out, loaded.grid, summary, "mean_magnitude_tv", "mean_random_tv");
    return 0;
}

int run_baseline_necessity(const BaselineArgs& a, std::ostream& out, std::ostream&) {
    const Loaded loaded = load(a.model, true);
    const auto items = load_corpus(a.corpus, a.text);
    const auto rows = parallel_map<std::vector<NecessityRow>>(
        items.size(), a.threads ? a.threads : default_threads(), [&](std::size_t i) {
            const DecomposedRun run = decompose_forward(loaded.model, to_tokens(loaded, items[i].text));
            return necessity_baseline(loaded.model, run, loaded.grid, input_seed(a.seed, i));
        });
    std::vector<TauSummary> summary(loaded.grid.size());
    for (const auto& per_input : rows)
        for (std::size_t k = 0; k < per_input.size(); ++k) {
            const auto& r = per_input[k];
            summary[k].mean_a += r.trace_tv / static_cast<double>(rows.size());
            summary[k].mean_b += r.random_tv / static_cast<double>(rows.size());
            if (r.trace_tv > r.random_tv) ++summary[k].wins;
            else if (r.trace_tv < r.random_tv) ++summary[k].losses;
        }
    if (!a.out.empty()) emit(a.out, necessity_to_csv(rows), out);
    print_summary(out, loaded.grid, summary, "mean_trace_ablation_tv", "mean_random_ablation_tv");
    return 0;
}

// ---- correlate ---------------------------------------------------------------

std::map<int, double> read_density_csv(const std::string& path) {
    const auto rows = parse_csv(read_file(path));
    if (rows.empty() || rows[0] != std::vector<std::string>{"line", "n_tokens", "rho_hat"})
        fail(ErrorKind::ParseError, path + ": expected header line,n_tokens,rho_hat");
    std::map<int, double> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() == 1 && rows[r][0].empty()) continue;
        if (rows[r].size() != 3) fail(ErrorKind::ParseError, path + " line " + std::to_string(r + 1));
        try {
            out[std::stoi(rows[r][0])] = std::stod(rows[r][2]);
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, path + " line " + std::to_string(r + 1));
        }
    }
    return out;
}

struct CorrelateArgs {
    std::string a, b, out;
    std::uint64_t seed = 0;
    std::size_t shuffles = 10000;
};

int run_correlate(const CorrelateArgs& a, std::ostream& out, std::ostream&) {
    const auto xa = read_density_csv(a.a);
    const auto xb = read_density_csv(a.b);
    std::vector<double> xs, ys;
    for (const auto& [line, rho] : xa) {
        auto it = xb.find(line);
        if (it == xb.end()) fail(ErrorKind::InvalidArgument, "line " + std::to_string(line) + " missing from " + a.b);
        xs.push_back(rho);
        ys.push_back(it->second);
    }
    if (xb.size() != xa.size()) fail(ErrorKind::InvalidArgument, a.b + " has lines missing from " + a.a);
    emit(a.out, report_to_json({correlation_test(CorrelationKind::Spearman, xs, ys, "spearman_density_across_models",
                                                 a.shuffles, a.seed)}),
         out);
    return 0;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
    std::string records, out, format = "html", freq_table, title = "Computation density";
    std::uint64_t seed = 0;
    std::size_t shuffles = 10000;
};

int run_report(const ReportArgs& a, std::ostream& out, std::ostream&) {
    const auto records = token_records_from_csv(read_file(a.records));
    if (a.format == "json") {
        std::optional<FrequencyTable> freq;
        if (!a.freq_table.empty()) freq = FrequencyTable::load(a.freq_table);
        const auto words = aggregate_words(records, freq ? &*freq : nullptr);
        emit(a.out, report_to_json(density_feature_report(words, records, a.seed, a.shuffles)), out);
    } else {
        ReportOptions ro;
        ro.title = a.title;
        emit(a.out, render_html_report(records, ro), out);
    }
    return 0;
}

// ---- make-fixture ---------------------------------------------------------------

struct FixtureArgs {
    std::string out;
    FixtureOptions options;
    bool with_tokenizer = true;
};

int run_make_fixture(FixtureArgs a, std::ostream& out, std::ostream&) {
    if (a.with_tokenizer) a.options.vocab_size = std::max(a.options.vocab_size, 260);
    write_fixture_dir(a.out, a.options, a.with_tokenizer);
    out << "wrote " << a.out << "\n";
    return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Computation-density analysis of decoder-only transformers", "densitrace"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    SweepArgs sweep_a;
    auto* sweep_cmd = app.add_subcommand("sweep", "Threshold sweep for one input: CSV of (tau, size, tv, nucleus) and rho_hat");
    add_model_args(sweep_cmd, sweep_a.model);
    auto* text_opt = sweep_cmd->add_option("--text", sweep_a.text, "Input text");
    auto* ids_opt = sweep_cmd->add_option("--ids", sweep_a.ids, "Comma-separated token ids instead of --text");
    text_opt->excludes(ids_opt);
    sweep_cmd->add_option("--out", sweep_a.out, "Output file (default: stdout)");
    sweep_cmd->add_option("--format", sweep_a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    DensityArgs density_a;
    auto* density_cmd = app.add_subcommand("density", "rho_hat for every non-empty line of a corpus file");
    add_model_args(density_cmd, density_a.model);
    density_cmd->add_option("--corpus", density_a.corpus, "UTF-8 text, one fragment per line")->required();
    density_cmd->add_option("--out", density_a.out, "Output CSV (default: stdout)");
    density_cmd->add_option("--threads", density_a.threads, "Worker threads (default: all cores)");

    ProfileArgs profile_a;
    auto* profile_cmd = app.add_subcommand("profile", "Generate a continuation and record per-token density");
    add_model_args(profile_cmd, profile_a.model);
    profile_cmd->add_option("--text", profile_a.text, "Prompt")->required();
    profile_cmd->add_option("--n-new", profile_a.n_new, "Tokens to generate")->check(CLI::NonNegativeNumber);
    profile_cmd->add_option("--p", profile_a.p, "Nucleus sampling mass");
    profile_cmd->add_option("--seed", profile_a.seed, "Sampling seed");
    profile_cmd->add_option("--out", profile_a.out, "Token records (default: stdout)");
    profile_cmd->add_option("--format", profile_a.format, "csv, json or html")
        ->check(CLI::IsMember({"csv", "json", "html"}));
    profile_cmd->add_option("--html", profile_a.html, "Also write the colored-token HTML report here");
    profile_cmd->add_option("--words", profile_a.words, "Also write word-level records (CSV) here");
    profile_cmd->add_option("--freq-table", profile_a.freq_table, "word<TAB>count table for the word records");
    profile_cmd->add_flag("--include-prompt", profile_a.include_prompt, "Profile prompt tokens too");

    BaselineArgs random_a, necessity_a;
    auto* baseline_cmd = app.add_subcommand("baseline", "Compare magnitude traces against random baselines");
    baseline_cmd->require_subcommand(1);
    auto setup_baseline = [](CLI::App* cmd, BaselineArgs& b) {
        add_model_args(cmd, b.model);
        auto* c = cmd->add_option("--corpus", b.corpus, "UTF-8 text, one fragment per line");
        auto* t = cmd->add_option("--text", b.text, "Single input text");
        c->excludes(t);
        cmd->add_option("--seed", b.seed, "Seed for the random traces");
        cmd->add_option("--out", b.out, "Per-input rows as CSV");
        cmd->add_option("--threads", b.threads, "Worker threads (default: all cores)");
    };
    auto* random_cmd = baseline_cmd->add_subcommand("random", "Magnitude trace vs size-matched random trace");
    setup_baseline(random_cmd, random_a);
    auto* necessity_cmd = baseline_cmd->add_subcommand(
        "necessity", "Ablating the trace's non-residual edges vs a random set of the same size");
    setup_baseline(necessity_cmd, necessity_a);

    CorrelateArgs correlate_a;
    auto* correlate_cmd = app.add_subcommand("correlate", "Spearman correlation of two density CSVs (JSON)");
    correlate_cmd->add_option("a", correlate_a.a, "Density CSV")->required();
    correlate_cmd->add_option("b", correlate_a.b, "Density CSV over the same corpus")->required();
    correlate_cmd->add_option("--seed", correlate_a.seed, "Permutation seed");
    correlate_cmd->add_option("--shuffles", correlate_a.shuffles, "Permutations");
    correlate_cmd->add_option("--out", correlate_a.out, "Output file (default: stdout)");

    ReportArgs report_a;
    auto* report_cmd = app.add_subcommand("report", "Token records to HTML, or to a JSON feature report");
    report_cmd->add_option("records", report_a.records, "Token records CSV from `profile`")->required();
    report_cmd->add_option("--out", report_a.out, "Output file (default: stdout)");
    report_cmd->add_option("--format", report_a.format, "html or json")->check(CLI::IsMember({"html", "json"}));
    report_cmd->add_option("--freq-table", report_a.freq_table, "word<TAB>count table (json format)");
    report_cmd->add_option("--seed", report_a.seed, "Permutation seed (json format)");
    report_cmd->add_option("--shuffles", report_a.shuffles, "Permutations (json format)");
    report_cmd->add_option("--title", report_a.title, "HTML title");

    FixtureArgs fixture_a;
    auto* fixture_cmd = app.add_subcommand("make-fixture", "Write a small random model (and tokenizer) directory");
    fixture_cmd->add_option("--out", fixture_a.out, "Directory")->required();
    fixture_cmd->add_option("--seed", fixture_a.options.seed, "Weight seed");
    fixture_cmd->add_option("--layers", fixture_a.options.n_layers);
    fixture_cmd->add_option("--heads", fixture_a.options.n_heads);
    fixture_cmd->add_option("--d-model", fixture_a.options.d_model);
    fixture_cmd->add_option("--d-mlp", fixture_a.options.d_mlp);
    fixture_cmd->add_option("--max-seq", fixture_a.options.max_seq_len);
    fixture_cmd->add_flag("!--no-tokenizer", fixture_a.with_tokenizer, "Skip vocab.json/merges.txt");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (sweep_cmd->parsed()) {
            if (sweep_cmd->count("--text") == 0 && sweep_a.ids.empty()) {
                err << "error: sweep needs --text or --ids\n\n" << sweep_cmd->help();
                return 1;
            }
            return run_sweep(sweep_a, out, err);
        }
        if (density_cmd->parsed()) return run_density(density_a, out, err);
        if (profile_cmd->parsed()) return run_profile(profile_a, out, err);
        if (random_cmd->parsed() || necessity_cmd->parsed()) {
            const bool is_random = random_cmd->parsed();
            const BaselineArgs& b = is_random ? random_a : necessity_a;
            if (b.corpus.empty() && b.text.empty()) {
                err << "error: baseline needs --corpus or --text\n\n" << (is_random ? random_cmd : necessity_cmd)->help();
                return 1;
            }
            return is_random ? run_baseline_random(b, out, err) : run_baseline_necessity(b, out, err);
        }
        if (correlate_cmd->parsed()) return run_correlate(correlate_a, out, err);
        if (report_cmd->parsed()) return run_report(report_a, out, err);
        if (fixture_cmd->parsed()) return run_make_fixture(fixture_a, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << app.help();
    return 1;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
    return cli_main(args, out, err);
}

}  // namespace densitrace
