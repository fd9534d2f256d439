#include "phenomine/baseline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "phenomine/csv.hpp"
#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

namespace {

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i != begin) out += ' ';
        out += tokens[i];
    }
    return out;
}

void warn(std::vector<std::string>& sink, std::string msg) {
    spdlog::warn("{}", msg);
    sink.push_back(std::move(msg));
}

}  // namespace

ConceptDictionary build_dictionary(const std::vector<std::pair<std::string, std::string>>& entries,
                                   std::size_t min_term_length) {
    ConceptDictionary dict;
    dict.min_term_length = min_term_length;
    for (const auto& [raw, concept_id] : entries) {
        const auto tokens = text::word_tokens(raw);
        const auto term = join(tokens, 0, tokens.size());
        if (term.empty() || text::trim(concept_id).empty()) continue;
        if (text::utf8_length(term) <= min_term_length) continue;
        auto [it, inserted] = dict.terms.emplace(term, text::trim(concept_id));
        if (!inserted && it->second != text::trim(concept_id)) {
            warn(dict.warnings, "term '" + term + "' repeated; keeping concept " + it->second);
        }
    }
    return dict;
}

ConceptDictionary build_dictionary(const std::filesystem::path& term_file, std::size_t min_term_length) {
    auto table = csv::read_file(term_file);
    const auto src = term_file.string();
    std::vector<std::pair<std::string, std::string>> entries;
    if (!table.header.empty()) {
        const auto c_term = table.require_column("term", src);
        const auto c_id = table.require_column("concept_id", src);
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            if (row.size() != table.header.size()) {
                throw SchemaError(src + ":" + std::to_string(table.row_lines[r]), "wrong field count");
            }
            entries.emplace_back(row[c_term], row[c_id]);
        }
    }
    auto dict = build_dictionary(entries, min_term_length);
    if (dict.terms.empty()) warn(dict.warnings, "dictionary " + src + " has no usable terms");
    return dict;
}

FeatureMatrix extract_dictionary_features(const std::vector<NoteRecord>& notes, const ConceptDictionary& dict,
                                          const DictionaryOptions& options,
                                          std::map<std::string, std::size_t>* doc_freq) {
    if (notes.empty()) throw ParameterError("no notes to match");
    const double threshold = options.similarity_threshold;
    if (!(threshold > 0.0 && threshold <= 1.0)) throw ParameterError("similarity threshold must be in (0, 1]");
    if (options.max_ngram < 1) throw ParameterError("max_ngram must be >= 1");
    const bool exact = threshold >= 1.0;

    // Fuzzy mode: token sets per term plus an inverted index token -> terms.
    std::vector<std::pair<std::set<std::string>, const std::string*>> term_sets;
    std::unordered_map<std::string, std::vector<std::size_t>> inverted;
    if (!exact) {
        std::vector<const std::pair<const std::string, std::string>*> ordered;
        for (const auto& e : dict.terms) ordered.push_back(&e);
        std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->first < b->first; });
        for (const auto* e : ordered) {
            auto tokens = text::word_tokens(e->first);
            std::set<std::string> set(tokens.begin(), tokens.end());
            for (const auto& t : set) inverted[t].push_back(term_sets.size());
            term_sets.emplace_back(std::move(set), &e->second);
        }
    }

    std::vector<std::set<std::string>> found(notes.size());
    for (std::size_t ni = 0; ni < notes.size(); ++ni) {
        const auto tokens = text::word_tokens(notes[ni].text);
        for (std::size_t b = 0; b < tokens.size(); ++b) {
            for (std::size_t n = 1; n <= options.max_ngram && b + n <= tokens.size(); ++n) {
                if (exact) {
                    auto it = dict.terms.find(join(tokens, b, b + n));
                    if (it != dict.terms.end()) found[ni].insert(it->second);
                    continue;
                }
                std::set<std::string> window(tokens.begin() + b, tokens.begin() + b + n);
                std::set<std::size_t> candidates;
                for (const auto& t : window) {
                    auto it = inverted.find(t);
                    if (it != inverted.end()) candidates.insert(it->second.begin(), it->second.end());
                }
                for (auto ti : candidates) {
                    const auto& set = term_sets[ti].first;
                    std::size_t inter = 0;
                    for (const auto& t : window) inter += set.count(t);
                    const double uni = static_cast<double>(window.size() + set.size() - inter);
                    if (static_cast<double>(inter) / uni >= threshold) found[ni].insert(*term_sets[ti].second);
                }
            }
        }
    }

    std::map<std::string, std::size_t> df;
    for (const auto& f : found) {
        for (const auto& c : f) ++df[c];
    }
    FeatureMatrix m;
    for (const auto& [concept_id, count] : df) {
        if (count >= options.min_doc_freq) {
            m.columns.push_back(concept_id);
            m.groups.emplace_back();
        }
    }
    std::unordered_map<std::string, std::size_t> col_of;
    for (std::size_t c = 0; c < m.columns.size(); ++c) col_of.emplace(m.columns[c], c);
    m.cells.assign(notes.size() * m.columns.size(), 0);
    for (std::size_t ni = 0; ni < notes.size(); ++ni) {
        m.rows.push_back({notes[ni].note_id, notes[ni].patient_id, notes[ni].cohort});
        for (const auto& c : found[ni]) {
            auto it = col_of.find(c);
            if (it != col_of.end()) m.at(ni, it->second) = 1;
        }
    }
    if (doc_freq) *doc_freq = std::move(df);
    return m;
}

NerIngestResult ingest_ner_annotations(const std::filesystem::path& path, double min_score,
                                       const CohortManifest* manifest) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    NerIngestResult result;
    const auto src = path.string();

    std::vector<MatrixRow> rows;
    std::unordered_map<std::string, std::size_t> row_of;
    if (manifest) {
        for (const auto& e : manifest->entries) {
            row_of.emplace(e.note_id, rows.size());
            rows.push_back({e.note_id, e.patient_id, e.cohort});
        }
    }
    std::vector<std::set<std::string>> present(rows.size());
    std::size_t lines = 0;
    std::size_t malformed = 0;
    std::set<std::string> unknown_notes;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (text::trim(line).empty()) continue;
        ++lines;
        NerAnnotation a;
        try {
            auto j = nlohmann::json::parse(line);
            a.note_id = j.at("note_id").get<std::string>();
            a.concept_id = text::trim(j.at("concept").get<std::string>());
            a.score = j.at("score").get<double>();
            if (a.note_id.empty() || a.concept_id.empty()) throw std::runtime_error("empty note_id or concept");
            if (!(a.score >= 0.0 && a.score <= 1.0)) throw std::runtime_error("score outside [0, 1]");
        } catch (const std::exception& e) {
            ++malformed;
            warn(result.warnings, src + ":" + std::to_string(lineno) + ": skipped malformed annotation: " + e.what());
            continue;
        }
        if (a.score < min_score) {
            ++result.below_threshold;
            continue;
        }
        auto it = row_of.find(a.note_id);
        if (it == row_of.end()) {
            if (manifest) {
                unknown_notes.insert(a.note_id);
                continue;
            }
            it = row_of.emplace(a.note_id, rows.size()).first;
            rows.push_back({a.note_id, a.note_id, Cohort::Unlabeled});
            present.emplace_back();
        }
        present[it->second].insert(a.concept_id);
        ++result.kept;
    }
    if (lines > 0 && malformed == lines) throw SchemaError(src, "no well-formed annotation lines");
    if (!unknown_notes.empty()) {
        warn(result.warnings, std::to_string(unknown_notes.size()) + " annotated notes are not in the manifest");
    }

    std::set<std::string> concepts;
    for (const auto& p : present) concepts.insert(p.begin(), p.end());
    auto& m = result.matrix;
    m.columns.assign(concepts.begin(), concepts.end());
    m.groups.assign(m.columns.size(), std::string());
    m.rows = std::move(rows);
    m.cells.assign(m.rows.size() * m.columns.size(), 0);
    for (std::size_t r = 0; r < present.size(); ++r) {
        for (const auto& c : present[r]) {
            const auto col = static_cast<std::size_t>(std::lower_bound(m.columns.begin(), m.columns.end(), c) -
                                                      m.columns.begin());
            m.at(r, col) = 1;
        }
    }
    return result;
}

}  // namespace phenomine
