#include "phenomine/chunker.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <cctype>
#include <utility>

#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

namespace {

constexpr std::array<std::string_view, 9> kGuarded = {"Dr.", "Mr.", "Mrs.", "Ms.", "vs.",
                                                      "e.g.", "i.e.", "Pt.", "approx."};

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Word that ends at `end` (exclusive), minus leading opening punctuation.
std::string_view word_before(std::string_view text, std::size_t end) {
    std::size_t b = end;
    while (b > 0 && !is_space(text[b - 1])) --b;
    while (b < end && (text[b] == '(' || text[b] == '"' || text[b] == '\'' || text[b] == '[')) ++b;
    return text.substr(b, end - b);
}

bool guarded(std::string_view word) {
    for (auto g : kGuarded) {
        if (word == g) return true;
    }
    return false;
}

void push_trimmed(std::vector<std::string>& out, std::string_view piece) {
    auto t = text::trim(piece);
    if (!t.empty()) out.push_back(std::move(t));
}

}  // namespace

std::vector<std::string> segment_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t last_term = i;
        std::size_t j = i + 1;
        while (j < n && is_terminator(text[j])) last_term = j++;
        while (j < n && is_closer(text[j])) ++j;
        if (j >= n || !is_space(text[j])) {
            i = j;
            continue;
        }
        std::size_t k = j;
        while (k < n && is_space(text[k])) ++k;
        if (k >= n) break;
        const unsigned char next = static_cast<unsigned char>(text[k]);
        const bool opens_sentence = std::isupper(next) || std::isdigit(next);
        if (opens_sentence && !(text[last_term] == '.' && guarded(word_before(text, last_term + 1)))) {
            push_trimmed(sentences, text.substr(start, j - start));
            start = k;
        }
        i = k;
    }
    if (start < n) push_trimmed(sentences, text.substr(start));
    return sentences;
}

std::size_t estimate_tokens(std::string_view text) { return (text::utf8_length(text) + 3) / 4; }

namespace {

// Splits at whitespace into pieces of at most `limit` estimated tokens. A
// single whitespace-free run longer than that is emitted whole.
std::vector<std::string> hard_split(std::string_view sentence, std::size_t limit) {
    std::vector<std::string> pieces;
    std::string cur;
    std::size_t i = 0;
    while (i < sentence.size()) {
        std::size_t ws = i;
        while (ws < sentence.size() && !is_space(sentence[ws])) ++ws;
        std::string_view word = sentence.substr(i, ws - i);
        std::string candidate = cur.empty() ? std::string(word) : cur + " " + std::string(word);
        if (!cur.empty() && estimate_tokens(candidate) > limit) {
            pieces.push_back(std::move(cur));
            cur = std::string(word);
        } else {
            cur = std::move(candidate);
        }
        i = ws;
        while (i < sentence.size() && is_space(sentence[i])) ++i;
    }
    if (!cur.empty()) pieces.push_back(std::move(cur));
    return pieces;
}

}  // namespace

std::vector<Chunk> pack_chunks(const std::vector<std::string>& sentences, const ChunkOptions& options,
                               std::string_view note_id) {
    if (options.budget < 1) throw ParameterError("chunk budget must be >= 1");
    std::vector<Chunk> chunks;
    std::string cur;

    auto emit = [&](std::string body, bool oversized) {
        Chunk c;
        c.note_id = std::string(note_id);
        c.chunk_index = chunks.size();
        c.estimated_tokens = estimate_tokens(body);
        c.text = std::move(body);
        c.oversized = oversized;
        chunks.push_back(std::move(c));
    };

    for (const auto& s : sentences) {
        const std::size_t tokens = estimate_tokens(s);
        if (tokens > options.budget) {
            if (!cur.empty()) emit(std::exchange(cur, {}), false);
            if (tokens > options.context_limit) {
                spdlog::warn("note {}: sentence of ~{} tokens exceeds the context limit {}, split at whitespace",
                             note_id, tokens, options.context_limit);
                for (auto& piece : hard_split(s, options.context_limit)) emit(std::move(piece), true);
            } else {
                emit(s, true);
            }
            continue;
        }
        std::string candidate = cur.empty() ? s : cur + " " + s;
        if (!cur.empty() && estimate_tokens(candidate) > options.budget) {
            emit(std::exchange(cur, s), false);
        } else {
            cur = std::move(candidate);
        }
    }
    if (!cur.empty()) emit(std::move(cur), false);
    return chunks;
}

std::vector<Chunk> chunk_note(std::string_view note_id, std::string_view text, const ChunkOptions& options) {
    return pack_chunks(segment_sentences(text), options, note_id);
}

}  // namespace phenomine
