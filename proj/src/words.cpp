#include "densitrace/words.hpp"

#include "densitrace/errors.hpp"
#include "densitrace/tokenizer.hpp"

#include <algorithm>

namespace densitrace {

namespace {

bool is_joiner(std::int32_t cp) {
    return cp == '\'' || cp == '-' || cp == 0x2019 /* ’ */ || cp == 0x2010 /* ‐ */;
}

bool is_word_char(std::int32_t cp) { return utf8::is_letter(cp) || utf8::is_number(cp); }

}  // namespace

std::vector<WordSpan> segment_words(std::string_view text) {
    struct Cp {
        std::int32_t cp;
        std::size_t begin;
        std::size_t end;
    };
    std::vector<Cp> cps;
    for (std::size_t pos = 0; pos < text.size();) {
        const auto begin = pos;
        const auto cp = utf8::next(text, pos);
        cps.push_back({cp, begin, pos});
    }

    std::vector<WordSpan> words;
    std::size_t word_begin = std::string_view::npos;
    auto close = [&](std::size_t end) {
        if (word_begin != std::string_view::npos) {
            words.push_back({word_begin, end, std::string(text.substr(word_begin, end - word_begin))});
            word_begin = std::string_view::npos;
        }
    };
    for (std::size_t k = 0; k < cps.size(); ++k) {
        const auto& c = cps[k];
        if (utf8::is_space(c.cp)) {
            close(c.begin);
        } else if (utf8::is_punct_or_symbol(c.cp)) {
            const bool joins = is_joiner(c.cp) && word_begin != std::string_view::npos && k > 0 &&
                               is_word_char(cps[k - 1].cp) && k + 1 < cps.size() && is_word_char(cps[k + 1].cp);
            if (joins) continue;
            close(c.begin);
            words.push_back({c.begin, c.end, std::string(text.substr(c.begin, c.end - c.begin))});
        } else if (word_begin == std::string_view::npos) {
            word_begin = c.begin;
        }
    }
    close(text.size());
    return words;
}

std::vector<WordRecord> aggregate_words(const std::vector<TokenDensityRecord>& records, const FrequencyTable* frequencies) {
    std::string text;
    std::vector<std::size_t> token_begin;
    for (const auto& r : records) {
        token_begin.push_back(text.size());
        text += r.text;
    }
    token_begin.push_back(text.size());

    std::vector<WordRecord> out;
    std::size_t tok = 0;
    for (const auto& span : segment_words(text)) {
        // Tokens whose byte range [token_begin[t], token_begin[t+1]) intersects the word.
        while (tok < records.size() && token_begin[tok + 1] <= span.begin) ++tok;
        WordRecord w;
        w.text = span.text;
        w.index = static_cast<int>(out.size());
        bool first = true;
        for (std::size_t t = tok; t < records.size() && token_begin[t] < span.end; ++t) {
            if (token_begin[t + 1] <= span.begin) continue;
            const auto& r = records[t];
            if (first) {
                w.max_rho = r.rho_hat;
                w.first_position = r.position;
                first = false;
            } else {
                w.max_rho = std::max(w.max_rho, r.rho_hat);
            }
            w.last_position = r.position;
        }
        if (first) continue;
        if (frequencies) w.frequency_count = frequencies->count(w.text);
        out.push_back(std::move(w));
    }
    return out;
}

std::string word_records_to_csv(const std::vector<WordRecord>& words) {
    std::string out = "index,word,max_rho,frequency,first_position,last_position\n";
    for (const auto& w : words)
        out += std::to_string(w.index) + "," + csv_escape(w.text) + "," + format_double(w.max_rho) + "," +
               std::to_string(w.frequency_count) + "," + std::to_string(w.first_position) + "," +
               std::to_string(w.last_position) + "\n";
    return out;
}

std::vector<WordRecord> word_records_from_csv(const std::string& csv) {
    const auto rows = parse_csv(csv);
    if (rows.empty() ||
        rows[0] != std::vector<std::string>{"index", "word", "max_rho", "frequency", "first_position", "last_position"})
        fail(ErrorKind::ParseError, "word record CSV: unexpected header");
    std::vector<WordRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r];
        if (f.size() == 1 && f[0].empty()) continue;
        if (f.size() != 6) fail(ErrorKind::ParseError, "word record CSV line " + std::to_string(r + 1));
        try {
            out.push_back({f[1], std::stoi(f[0]), std::stod(f[2]), std::stoull(f[3]), std::stoi(f[4]), std::stoi(f[5])});
        } catch (const std::exception&) {
            fail(ErrorKind::ParseError, "word record CSV line " + std::to_string(r + 1));
        }
    }
    return out;
}

}  // namespace densitrace
