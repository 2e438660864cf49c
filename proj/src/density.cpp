#include "densitrace/density.hpp"

#include "densitrace/errors.hpp"
#include "densitrace/masked.hpp"
#include "densitrace/metrics.hpp"
#include "densitrace/runtime.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace densitrace {

std::vector<SweepPoint> sweep(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid) {
    const Distribution reference = forward_dense(model, run.tokens());
    std::vector<SweepPoint> points;
    points.reserve(grid.size());
    for (double tau : grid.taus()) {
        const Trace trace = extract_trace(run, tau);
        const Distribution masked = run_masked(model, run.tokens(), trace);
        points.push_back({tau, trace.size_ratio, tv_distance(reference, masked), nucleus_reconstruction(reference, masked)});
    }
    return points;
}

std::vector<SweepPoint> sweep(const Model& model, const TokenSequence& tokens, const ThresholdGrid& grid) {
    return sweep(model, decompose_forward(model, tokens), grid);
}

DensityEstimate auc_trapezoid(std::vector<SweepPoint> points, const AucAnchors& anchors) {
    if (points.empty()) fail(ErrorKind::InvalidArgument, "auc needs at least one point");
    std::sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
        return a.size != b.size ? a.size < b.size : a.tv_error < b.tv_error;
    });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const SweepPoint& a, const SweepPoint& b) { return a.size == b.size; }),
                 points.end());

    DensityEstimate est;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (points.front().size > 0.0) {
        points.insert(points.begin(), SweepPoint{nan, 0.0, anchors.empty_error, 0});
        est.empty_anchor_added = true;
    }
    if (points.back().size < 1.0) {
        if (!anchors.full_error) fail(ErrorKind::InvalidArgument, "no point at size 1 and no full-trace error given");
        points.push_back(SweepPoint{nan, 1.0, *anchors.full_error, 0});
        est.full_anchor_added = true;
    }

    double area = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k)
        area += 0.5 * (points[k].size - points[k - 1].size) * (points[k].tv_error + points[k - 1].tv_error);
    est.rho_hat = area;
    est.points = std::move(points);
    return est;
}

DensityEstimate estimate_density(const Model& model, const DecomposedRun& run, const ThresholdGrid& grid) {
    auto points = sweep(model, run, grid);
    AucAnchors anchors;
    const bool has_full = std::any_of(points.begin(), points.end(), [](const SweepPoint& p) { return p.size >= 1.0; });
    if (!has_full) {
        const Distribution reference = forward_dense(model, run.tokens());
        anchors.full_error = tv_distance(reference, run_masked(model, run.tokens(), full_trace(run)));
    }
    return auc_trapezoid(std::move(points), anchors);
}

DensityEstimate estimate_density(const Model& model, const TokenSequence& tokens, const ThresholdGrid& grid) {
    return estimate_density(model, decompose_forward(model, tokens), grid);
}

std::vector<TokenDensityRecord> profile_tokens(const Model& model, const BpeTokenizer* tokenizer,
                                               const TokenSequence& sequence, int first_position, int generated_from,
                                               const ThresholdGrid& grid) {
    if (first_position < 1) fail(ErrorKind::InvalidArgument, "the first profiled position needs a non-empty prefix");
    std::vector<TokenDensityRecord> records;
    for (int t = first_position; t < static_cast<int>(sequence.size()); ++t) {
        TokenSequence prefix{std::vector<TokenId>(sequence.ids.begin(), sequence.ids.begin() + t)};
        TokenDensityRecord rec;
        rec.position = t;
        rec.token = sequence[static_cast<std::size_t>(t)];
        rec.text = tokenizer ? tokenizer->token_bytes(rec.token) : std::to_string(rec.token);
        rec.rho_hat = estimate_density(model, prefix, grid).rho_hat;
        rec.entropy = entropy(forward_dense(model, prefix));
        rec.is_generated = t >= generated_from;
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<TokenDensityRecord> profile_generation(const Model& model, const BpeTokenizer& tokenizer,
                                                   const std::string& prompt_text, const ThresholdGrid& grid,
                                                   const ProfileOptions& options) {
    const TokenSequence prompt = tokenizer.tokenize(prompt_text, model.config.max_seq_len);
    const TokenSequence full = generate(model, prompt, options.n_new, options.p, options.seed);
    const int generated_from = static_cast<int>(prompt.size());
    return profile_tokens(model, &tokenizer, full, options.include_prompt ? 1 : generated_from, generated_from, grid);
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (quoted) fail(ErrorKind::ParseError, "unterminated quoted CSV field");
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
    std::string out = "tau,size,tv,nucleus\n";
    for (const auto& p : points)
        out += format_double(p.tau) + "," + format_double(p.size) + "," + format_double(p.tv_error) + "," +
               std::to_string(p.nucleus) + "\n";
    return out;
}

std::string token_records_to_csv(const std::vector<TokenDensityRecord>& records) {
    std::string out = "position,token_id,token_text,rho_hat,entropy,is_generated\n";
    for (const auto& r : records)
        out += std::to_string(r.position) + "," + std::to_string(r.token) + "," + csv_escape(r.text) + "," +
               format_double(r.rho_hat) + "," + format_double(r.entropy) + "," + (r.is_generated ? "1" : "0") + "\n";
    return out;
}

std::vector<TokenDensityRecord> token_records_from_csv(const std::string& csv) {
    const auto rows = parse_csv(csv);
    if (rows.empty() || rows[0] != std::vector<std::string>{"position", "token_id", "token_text", "rho_hat", "entropy",
                                                              "is_generated"})
        fail(ErrorKind::ParseError, "token record CSV: unexpected header");
    std::vector<TokenDensityRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 6) fail(ErrorKind::ParseError, "token record CSV line " + std::to_string(r + 1));
        try {
            TokenDensityRecord rec;
            rec.position = std::stoi(f[0]);
            rec.token = std::stoi(f[1]);
            rec.text = f[2];
            rec.rho_hat = std::stod(f[3]);
            rec.entropy = std::stod(f[4]);
            rec.is_generated = f[5] == "1";
            out.push_back(std::move(rec));
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, "token record CSV line " + std::to_string(r + 1));
        }
    }
    return out;
}

}  // namespace densitrace
