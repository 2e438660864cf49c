#include "densitrace/tokenizer.hpp"

#include "densitrace/errors.hpp"

#include <json.hpp>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <fstream>
#include <limits>
#include <sstream>

namespace densitrace {

namespace utf8 {

std::int32_t next(std::string_view s, std::size_t& pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto invalid = [&] {
        ++pos;
        return -static_cast<std::int32_t>(b0) - 1;
    };
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    std::int32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return invalid();
    }
    if (pos + static_cast<std::size_t>(len) > s.size()) return invalid();
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[pos + static_cast<std::size_t>(k)]);
        if ((b & 0xC0) != 0x80) return invalid();
        cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr std::int32_t min_for_len[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < min_for_len[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return invalid();
    pos += static_cast<std::size_t>(len);
    return cp;
}

std::string encode(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    return out;
}

bool is_letter(std::int32_t cp) { return cp >= 0 && (U_GET_GC_MASK(cp) & U_GC_L_MASK) != 0; }
bool is_number(std::int32_t cp) { return cp >= 0 && (U_GET_GC_MASK(cp) & U_GC_N_MASK) != 0; }
bool is_space(std::int32_t cp) { return cp >= 0 && u_isUWhiteSpace(cp); }
bool is_punct_or_symbol(std::int32_t cp) {
    return cp < 0 || (U_GET_GC_MASK(cp) & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

std::string fold_case(std::string_view s) {
    std::string out;
    icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<std::int32_t>(s.size())))
        .foldCase()
        .toUTF8String(out);
    return out;
}

}  // namespace utf8

namespace {

enum class CharClass { Letter, Number, Space, Other };

struct CodePoint {
    std::int32_t cp;
    std::size_t begin;
    std::size_t end;
    CharClass cls;
};

std::vector<CodePoint> split_code_points(std::string_view text) {
    std::vector<CodePoint> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto begin = pos;
        const auto cp = utf8::next(text, pos);
        CharClass cls = CharClass::Other;
        if (utf8::is_letter(cp))
            cls = CharClass::Letter;
        else if (utf8::is_number(cp))
            cls = CharClass::Number;
        else if (utf8::is_space(cp))
            cls = CharClass::Space;
        out.push_back({cp, begin, pos, cls});
    }
    return out;
}

std::string merge_key(const std::string& a, const std::string& b) { return a + '\x01' + b; }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::MissingFile, path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<std::string> BpeTokenizer::pretokenize(std::string_view text) {
    // 's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
    const auto cps = split_code_points(text);
    std::vector<std::string> pieces;
    const std::size_t n = cps.size();
    std::size_t i = 0;
    auto emit = [&](std::size_t from, std::size_t to) {
        pieces.emplace_back(text.substr(cps[from].begin, cps[to - 1].end - cps[from].begin));
        i = to;
    };
    auto run_end = [&](std::size_t from, CharClass cls) {
        while (from < n && cps[from].cls == cls) ++from;
        return from;
    };
    while (i < n) {
        if (cps[i].cp == '\'' && i + 1 < n) {
            const auto c1 = cps[i + 1].cp;
            const auto c2 = i + 2 < n ? cps[i + 2].cp : 0;
            if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') {
                emit(i, i + 2);
                continue;
            }
            if ((c1 == 'r' && c2 == 'e') || (c1 == 'v' && c2 == 'e') || (c1 == 'l' && c2 == 'l')) {
                emit(i, i + 3);
                continue;
            }
        }
        const bool lead_space = cps[i].cp == ' ' && i + 1 < n && cps[i + 1].cls != CharClass::Space;
        const std::size_t body = lead_space ? i + 1 : i;
        const CharClass cls = cps[body].cls;
        if (cls != CharClass::Space) {
            emit(i, run_end(body, cls));
            continue;
        }
        const std::size_t end = run_end(i, CharClass::Space);
        if (end == n || end - i == 1)
            emit(i, end);
        else
            emit(i, end - 1);
    }
    return pieces;
}

BpeTokenizer BpeTokenizer::from_strings(const std::string& vocab_json, const std::string& merges_txt) {
    BpeTokenizer tok;

    int n = 0;
    for (int b = 0; b < 256; ++b) {
        const bool printable = (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
        const char32_t cp = printable ? static_cast<char32_t>(b) : static_cast<char32_t>(256 + n++);
        tok.byte_to_symbol_[static_cast<std::size_t>(b)] = utf8::encode(cp);
        tok.symbol_to_byte_[cp] = static_cast<unsigned char>(b);
    }

    nlohmann::json vocab;
    try {
        vocab = nlohmann::json::parse(vocab_json);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("vocab.json: ") + e.what());
    }
    if (!vocab.is_object()) fail(ErrorKind::ParseError, "vocab.json: expected an object");
    for (auto it = vocab.begin(); it != vocab.end(); ++it) {
        if (!it->is_number_integer() || it->get<long long>() < 0 || it->get<long long>() > std::numeric_limits<TokenId>::max())
            fail(ErrorKind::ParseError, "vocab.json: bad id for token " + it.key());
        const auto id = it->get<TokenId>();
        tok.token_to_id_[it.key()] = id;
        if (static_cast<std::size_t>(id) >= tok.id_to_token_.size()) tok.id_to_token_.resize(static_cast<std::size_t>(id) + 1);
        tok.id_to_token_[static_cast<std::size_t>(id)] = it.key();
    }

    std::istringstream merges(merges_txt);
    std::string line;
    int rank = 0;
    int line_no = 0;
    while (std::getline(merges, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.rfind("#version", 0) == 0) continue;
        const auto sp = line.find(' ');
        if (sp == std::string::npos || sp == 0 || sp + 1 == line.size())
            fail(ErrorKind::ParseError, "merges.txt line " + std::to_string(line_no));
        tok.merge_rank_.emplace(merge_key(line.substr(0, sp), line.substr(sp + 1)), rank++);
    }
    return tok;
}

BpeTokenizer BpeTokenizer::load(const std::filesystem::path& vocab_json, const std::filesystem::path& merges_txt) {
    return from_strings(read_file(vocab_json), read_file(merges_txt));
}

BpeTokenizer BpeTokenizer::load_dir(const std::filesystem::path& dir) {
    return load(dir / "vocab.json", dir / "merges.txt");
}

std::vector<std::string> BpeTokenizer::bpe(const std::string& word) const {
    std::vector<std::string> symbols;
    for (unsigned char b : word) symbols.push_back(byte_to_symbol_[b]);

    while (symbols.size() > 1) {
        int best_rank = std::numeric_limits<int>::max();
        std::size_t best = 0;
        for (std::size_t k = 0; k + 1 < symbols.size(); ++k) {
            auto it = merge_rank_.find(merge_key(symbols[k], symbols[k + 1]));
            if (it != merge_rank_.end() && it->second < best_rank) {
                best_rank = it->second;
                best = k;
            }
        }
        if (best_rank == std::numeric_limits<int>::max()) break;
        const std::string left = symbols[best];
        const std::string right = symbols[best + 1];
        std::vector<std::string> merged;
        merged.reserve(symbols.size());
        for (std::size_t k = 0; k < symbols.size();) {
            if (k + 1 < symbols.size() && symbols[k] == left && symbols[k + 1] == right) {
                merged.push_back(left + right);
                k += 2;
            } else {
                merged.push_back(symbols[k]);
                ++k;
            }
        }
        symbols = std::move(merged);
    }
    return symbols;
}

std::vector<TokenId> BpeTokenizer::encode(std::string_view text) const {
    std::vector<TokenId> ids;
    for (const auto& piece : pretokenize(text)) {
        for (const auto& sym : bpe(piece)) {
            auto it = token_to_id_.find(sym);
            if (it == token_to_id_.end()) fail(ErrorKind::InvalidToken, "symbol missing from vocabulary: " + sym);
            ids.push_back(it->second);
        }
    }
    return ids;
}

TokenSequence BpeTokenizer::tokenize(std::string_view text, int max_seq_len) const {
    TokenSequence seq{encode(text)};
    if (seq.empty()) fail(ErrorKind::InputTooShort, "text encodes to zero tokens");
    if (seq.size() > static_cast<std::size_t>(max_seq_len))
        fail(ErrorKind::InputTooLong,
             std::to_string(seq.size()) + " tokens exceed max_seq_len " + std::to_string(max_seq_len));
    return seq;
}

std::string BpeTokenizer::token_bytes(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        fail(ErrorKind::InvalidToken, "token id " + std::to_string(id) + " out of range");
    const auto& sym = id_to_token_[static_cast<std::size_t>(id)];
    std::string out;
    std::size_t pos = 0;
    while (pos < sym.size()) {
        const auto cp = utf8::next(sym, pos);
        auto it = symbol_to_byte_.find(static_cast<char32_t>(cp));
        if (cp < 0 || it == symbol_to_byte_.end())
            fail(ErrorKind::InvalidToken, "token " + std::to_string(id) + " has a symbol outside the byte alphabet");
        out.push_back(static_cast<char>(it->second));
    }
    return out;
}

std::string BpeTokenizer::decode(const std::vector<TokenId>& ids) const {
    std::string out;
    for (auto id : ids) out += token_bytes(id);
    return out;
}

}  // namespace densitrace
