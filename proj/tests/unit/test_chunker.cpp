#include <gtest/gtest.h>

#include <random>

#include "phenomine/chunker.hpp"
#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

using namespace phenomine;

TEST(Chunker, Sentences) {
    auto s = segment_sentences("Pt. seen by Dr. Smith today. BP 150/90! Stable? Yes.");
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s[0], "Pt. seen by Dr. Smith today.");
    EXPECT_EQ(s[1], "BP 150/90!");
    EXPECT_EQ(s[3], "Yes.");
}

TEST(Chunker, DecimalsAndLowercaseDoNotSplit) {
    auto s = segment_sentences("Dose 2.5 mg daily. then reassess e.g. tomorrow. Next item.");
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[1], "Next item.");
}

TEST(Chunker, EstimateTokens) {
    EXPECT_EQ(estimate_tokens(""), 0u);
    EXPECT_EQ(estimate_tokens("abcd"), 1u);
    EXPECT_EQ(estimate_tokens("abcde"), 2u);
    EXPECT_EQ(estimate_tokens("\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9"), 1u);  // four code points
}

TEST(Chunker, ShortNoteSingleChunk) {
    auto chunks = chunk_note("n", "One sentence. Two sentence.", {});
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_EQ(chunks[0].text, "One sentence. Two sentence.");
    EXPECT_EQ(chunks[0].chunk_index, 0u);
}

TEST(Chunker, ZeroBudgetRejected) {
    ChunkOptions o;
    o.budget = 0;
    EXPECT_THROW(chunk_note("n", "Text.", o), ParameterError);
}

TEST(Chunker, OversizedSentenceKeptWhole) {
    ChunkOptions o;
    o.budget = 3;
    auto chunks = chunk_note("n", "This single sentence is clearly longer than three tokens.", o);
    ASSERT_EQ(chunks.size(), 1u);
    EXPECT_TRUE(chunks[0].oversized);
}

TEST(Chunker, BeyondContextLimitSplitAtWhitespace) {
    ChunkOptions o;
    o.budget = 4;
    o.context_limit = 4;
    auto chunks = chunk_note("n", "aaaa bbbb cccc dddd eeee ffff gggg hhhh.", o);
    ASSERT_GT(chunks.size(), 1u);
    for (const auto& c : chunks) EXPECT_LE(c.estimated_tokens, 4u);
}

// Packing never splits a sentence, respects the budget unless a sentence is
// oversized, and concatenation restores the sentence sequence.
TEST(Chunker, PackingProperties) {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> words(1, 30);
    std::uniform_int_distribution<int> budget(5, 80);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::string> sentences;
        int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            std::string s = "S" + std::to_string(i);
            for (int w = words(rng); w > 0; --w) s += " word";
            sentences.push_back(s + ".");
        }
        ChunkOptions o;
        o.budget = static_cast<std::size_t>(budget(rng));
        auto chunks = pack_chunks(sentences, o, "n");
        std::string joined;
        std::size_t idx = 0;
        for (const auto& c : chunks) {
            EXPECT_EQ(c.chunk_index, idx++);
            if (!c.oversized) EXPECT_LE(c.estimated_tokens, o.budget);
            EXPECT_EQ(c.estimated_tokens, estimate_tokens(c.text));
            if (!joined.empty()) joined += ' ';
            joined += c.text;
        }
        std::string expected;
        for (const auto& s : sentences) expected += (expected.empty() ? "" : " ") + s;
        EXPECT_EQ(joined, expected);
        // Greedy: the next chunk's first sentence would not have fit.
        for (std::size_t i = 0; i + 1 < chunks.size(); ++i) {
            auto first_next = segment_sentences(chunks[i + 1].text).front();
            EXPECT_GT(estimate_tokens(chunks[i].text + " " + first_next), o.budget);
        }
    }
}
