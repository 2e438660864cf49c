#pragma once

#include "densitrace/model.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace densitrace {

/// GPT-2 byte-level BPE. Text is split with the GPT-2 pre-tokenization rule,
/// each piece is mapped byte-wise onto printable code points and merged greedily
/// by merge rank. Lossless for arbitrary byte strings.
class BpeTokenizer {
public:
    static BpeTokenizer load(const std::filesystem::path& vocab_json, const std::filesystem::path& merges_txt);
    /// Loads `dir/vocab.json` and `dir/merges.txt`.
    static BpeTokenizer load_dir(const std::filesystem::path& dir);
    static BpeTokenizer from_strings(const std::string& vocab_json, const std::string& merges_txt);

    std::vector<TokenId> encode(std::string_view text) const;

    /// encode() plus the TokenSequence length contract (InputTooShort / InputTooLong).
    TokenSequence tokenize(std::string_view text, int max_seq_len) const;

    std::string decode(const std::vector<TokenId>& ids) const;
    /// Raw bytes of one token; may be an incomplete UTF-8 fragment.
    std::string token_bytes(TokenId id) const;

    std::size_t vocab_size() const { return id_to_token_.size(); }

    /// GPT-2 pre-tokenization (split before BPE), exposed for tests.
    static std::vector<std::string> pretokenize(std::string_view text);

private:
    std::vector<std::string> bpe(const std::string& word) const;

    std::unordered_map<std::string, TokenId> token_to_id_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, int> merge_rank_;  // key: left + '\x01' + right
    std::array<std::string, 256> byte_to_symbol_{};
    std::unordered_map<char32_t, unsigned char> symbol_to_byte_;
};

namespace utf8 {

/// Decodes one code point starting at `pos`; invalid sequences yield the single
/// byte as a negative value and advance by one.
std::int32_t next(std::string_view s, std::size_t& pos);
std::string encode(char32_t cp);

bool is_letter(std::int32_t cp);
bool is_number(std::int32_t cp);
bool is_space(std::int32_t cp);
bool is_punct_or_symbol(std::int32_t cp);
std::string fold_case(std::string_view s);

}  // namespace utf8

}  // namespace densitrace
