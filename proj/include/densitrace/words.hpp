#pragma once

#include "densitrace/density.hpp"
#include "densitrace/stats.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace densitrace {

struct WordRecord {
    std::string text;
    int index = 0;
    double max_rho = 0.0;
    std::uint64_t frequency_count = 0;
    int first_position = 0;
    int last_position = 0;
};

struct WordSpan {
    std::size_t begin = 0;  // byte offsets into the segmented text
    std::size_t end = 0;
    std::string text;
};

/// Splits on Unicode whitespace; every punctuation or symbol code point is a
/// unit of its own, except an apostrophe or hyphen between two letters/digits
/// ("don't", "well-known" stay whole).
std::vector<WordSpan> segment_words(std::string_view text);

/// Groups contiguous token records into words by segment_words over their
/// concatenated text. A word's density is the maximum over the tokens that
/// overlap it; frequency comes from `frequencies` when given.
std::vector<WordRecord> aggregate_words(const std::vector<TokenDensityRecord>& records,
                                        const FrequencyTable* frequencies = nullptr);

/// CSV with header "index,word,max_rho,frequency,first_position,last_position".
std::string word_records_to_csv(const std::vector<WordRecord>& words);
std::vector<WordRecord> word_records_from_csv(const std::string& csv);

}  // namespace densitrace
