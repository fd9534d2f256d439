#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "../support/oracles.hpp"
#include "phenomine/baseline.hpp"
#include "phenomine/error.hpp"

using namespace phenomine;

namespace {

NoteRecord note(std::string id, std::string text) {
    NoteRecord n;
    n.note_id = id;
    n.patient_id = id;
    n.text = std::move(text);
    n.cohort = Cohort::CN;
    return n;
}

std::filesystem::path write_tmp(const std::string& name, const std::string& body) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST(Dictionary, LengthFilter) {
    auto d = build_dictionary({{"pain", "C1"}, {"gait", "C2"}, {"memory loss", "C3"}, {"Falls", "C4"}}, 4);
    EXPECT_EQ(d.terms.size(), 2u);
    EXPECT_TRUE(d.terms.count("memory loss"));
    EXPECT_TRUE(d.terms.count("falls"));
}

TEST(Dictionary, DuplicateKeepsFirst) {
    auto d = build_dictionary({{"Memory Loss", "C1"}, {"memory  loss", "C2"}});
    EXPECT_EQ(d.terms.at("memory loss"), "C1");
    EXPECT_FALSE(d.warnings.empty());
}

TEST(Dictionary, DocFreqFilter) {
    auto d = build_dictionary({{"hypertension", "H"}, {"memory loss", "M"}});
    std::vector<NoteRecord> notes;
    for (int i = 0; i < 60; ++i)
        notes.push_back(note("n" + std::to_string(i), i < 50 ? "History of hypertension." : "Nothing."));
    for (int i = 0; i < 49; ++i) notes[i].text += " Memory loss noted.";
    std::map<std::string, std::size_t> df;
    auto m = extract_dictionary_features(notes, d, {}, &df);
    EXPECT_EQ(m.columns, std::vector<std::string>{"H"});
    EXPECT_EQ(df["M"], 49u);
    EXPECT_EQ(df["H"], 50u);
}

TEST(Dictionary, ExactMatchAgreesWithSubstringOracle) {
    std::vector<std::pair<std::string, std::string>> entries = {
        {"memory loss", "A"}, {"hypertension", "B"}, {"hippocampal atrophy", "C"}, {"weight loss", "D"}};
    auto d = build_dictionary(entries);
    const std::vector<std::string> words = {"memory", "loss", "hypertension", "hippocampal", "atrophy",
                                            "weight", "the", "patient", "mild"};
    std::mt19937 rng(9);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::vector<NoteRecord> notes;
    for (int i = 0; i < 200; ++i) {
        std::string t;
        for (int w = 0; w < 8; ++w) t += words[pick(rng)] + (w % 3 == 2 ? ". " : " ");
        notes.push_back(note("n" + std::to_string(i), t));
    }
    DictionaryOptions o;
    o.min_doc_freq = 1;
    auto m = extract_dictionary_features(notes, d, o);
    for (const auto& [term, cid] : entries) {
        auto col = std::find(m.columns.begin(), m.columns.end(), cid);
        for (std::size_t r = 0; r < notes.size(); ++r) {
            const bool expected = oracle::contains_term(notes[r].text, term);
            const bool got = col != m.columns.end() && m.at(r, col - m.columns.begin());
            ASSERT_EQ(got, expected) << term << " in: " << notes[r].text;
        }
    }
}

TEST(Dictionary, JaccardThreshold) {
    auto d = build_dictionary(std::vector<std::pair<std::string, std::string>>{{"memory loss severe", "A"}});
    std::vector<NoteRecord> notes = {note("n1", "memory loss noted")};
    DictionaryOptions o;
    o.min_doc_freq = 1;
    o.similarity_threshold = 0.8;  // best overlap is 2 of 4 tokens
    EXPECT_TRUE(extract_dictionary_features(notes, d, o).columns.empty());
    o.similarity_threshold = 0.5;
    EXPECT_EQ(extract_dictionary_features(notes, d, o).columns, std::vector<std::string>{"A"});
    o.similarity_threshold = 0.0;
    EXPECT_THROW(extract_dictionary_features(notes, d, o), ParameterError);
}

TEST(Ner, ScoreThresholdInclusive) {
    auto p = write_tmp("phenomine_ner_test.jsonl",
                       "{\"note_id\":\"a\",\"concept\":\"x\",\"score\":0.79}\n"
                       "{\"note_id\":\"a\",\"concept\":\"y\",\"score\":0.8}\n"
                       "{\"note_id\":\"b\",\"concept\":\"x\",\"score\":0.95}\n"
                       "not json\n");
    auto r = ingest_ner_annotations(p, 0.8);
    EXPECT_EQ(r.kept, 2u);
    EXPECT_EQ(r.below_threshold, 1u);
    EXPECT_EQ(r.matrix.columns, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(r.matrix.at(0, 0), 0);
    EXPECT_EQ(r.matrix.at(0, 1), 1);
    EXPECT_EQ(r.matrix.at(1, 0), 1);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("4"), std::string::npos);
    auto again = ingest_ner_annotations(p, 0.8);
    EXPECT_EQ(again.matrix.cells, r.matrix.cells);
    std::filesystem::remove(p);
}

TEST(Ner, AllMalformedIsSchemaError) {
    auto p = write_tmp("phenomine_ner_bad.jsonl", "nope\n{}\n");
    EXPECT_THROW(ingest_ner_annotations(p), SchemaError);
    std::filesystem::remove(p);
}
