#include "densitrace/errors.hpp"
#include "densitrace/fixture.hpp"
#include "densitrace/tokenizer.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

using namespace densitrace;

namespace {

const BpeTokenizer& gpt2() {
    static const BpeTokenizer tok = BpeTokenizer::load_dir(std::string(DENSITRACE_SOURCE_DIR) + "/assets/gpt2");
    return tok;
}

const BpeTokenizer& small() {
    static const BpeTokenizer tok = [] {
        const auto assets = make_fixture_tokenizer_assets();
        return BpeTokenizer::from_strings(assets.vocab_json, assets.merges_txt);
    }();
    return tok;
}

}  // namespace

TEST(Gpt2Tokenizer, VocabularySize) { EXPECT_EQ(gpt2().vocab_size(), 50257u); }

TEST(Gpt2Tokenizer, HelloWorld) { EXPECT_EQ(gpt2().encode("hello world"), (std::vector<TokenId>{31373, 995})); }

// Reference ids produced once by an established GPT-2 BPE implementation over
// the same vocab.json / merges.txt.
TEST(Gpt2Tokenizer, ReferenceIds) {
    const auto cases = nlohmann::json::parse(
        densitrace::testing::read_text(std::string(DENSITRACE_SOURCE_DIR) + "/tests/data/gpt2_tokenizer_goldens.json"));
    ASSERT_GT(cases.size(), 20u);
    for (const auto& c : cases) {
        const std::string text = c["text"];
        const auto expected = c["ids"].get<std::vector<TokenId>>();
        EXPECT_EQ(gpt2().encode(text), expected) << text;
        EXPECT_EQ(gpt2().decode(expected), text);
    }
}

TEST(Gpt2Tokenizer, RoundTripRandomUtf8) {
    Rng rng(17);
    const std::vector<char32_t> pool = {U'a', U'Z', U' ', U'\n', U'\t', U'\'', U's', U'9', U'.', U'é', U'ß', U'日',
                                        U'本', U' ', U'—', U'\U0001F642', U'-', U'_', U'Ω', U'ы'};
    for (int trial = 0; trial < 300; ++trial) {
        std::string s;
        const int len = static_cast<int>(rng.below(40));
        for (int k = 0; k < len; ++k) s += utf8::encode(pool[rng.below(pool.size())]);
        EXPECT_EQ(gpt2().decode(gpt2().encode(s)), s);
    }
}

TEST(Gpt2Tokenizer, RoundTripArbitraryBytes) {
    Rng rng(23);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        const int len = 1 + static_cast<int>(rng.below(30));
        for (int k = 0; k < len; ++k) s += static_cast<char>(rng.below(256));
        EXPECT_EQ(gpt2().decode(gpt2().encode(s)), s);
    }
}

TEST(Gpt2Tokenizer, TokenBytesConcatenateToText) {
    const std::string text = "naïve café — ok";
    std::string joined;
    for (TokenId id : gpt2().encode(text)) joined += gpt2().token_bytes(id);
    EXPECT_EQ(joined, text);
}

TEST(Tokenize, LengthContract) {
    try {
        gpt2().tokenize("", 1024);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InputTooShort);
    }
    try {
        gpt2().tokenize("one two three four", 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InputTooLong);
    }
    EXPECT_EQ(gpt2().tokenize("one two three", 3).size(), 3u);
}

TEST(Pretokenize, Gpt2Rule) {
    EXPECT_EQ(BpeTokenizer::pretokenize("Hello world's 12 cats!!  "),
              (std::vector<std::string>{"Hello", " world", "'s", " 12", " cats", "!!", "  "}));
    EXPECT_EQ(BpeTokenizer::pretokenize("a  b"), (std::vector<std::string>{"a", " ", " b"}));
    EXPECT_EQ(BpeTokenizer::pretokenize("x\n\ny"), (std::vector<std::string>{"x", "\n", "\n", "y"}));
}

TEST(FixtureTokenizer, MergesApplyByRank) {
    ASSERT_EQ(small().vocab_size(), 260u);
    // " the": Ġt (rank 0), then he (rank 1), then Ġthe (rank 2). Byte symbols keep their byte value as id.
    EXPECT_EQ(small().encode(" the"), (std::vector<TokenId>{258}));
    EXPECT_EQ(small().encode("in"), (std::vector<TokenId>{259}));
    EXPECT_EQ(small().encode("the"), (std::vector<TokenId>{'t', 257}));
    EXPECT_EQ(small().decode(small().encode("the thin tin")), "the thin tin");
}

TEST(FixtureTokenizer, MalformedAssets) {
    try {
        BpeTokenizer::from_strings("{\"a\": 0", "#version\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    }
    EXPECT_THROW(BpeTokenizer::load_dir("/nonexistent"), Error);
}

TEST(Utf8, InvalidBytesDecodeNegative) {
    std::size_t pos = 0;
    const std::string bad = "\xff" "a";
    EXPECT_LT(utf8::next(bad, pos), 0);
    EXPECT_EQ(pos, 1u);
    EXPECT_EQ(utf8::next(bad, pos), 'a');
    EXPECT_EQ(utf8::fold_case("ÅBC"), "åbc");
}
