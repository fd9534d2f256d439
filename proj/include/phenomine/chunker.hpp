#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace phenomine {

struct Chunk {
    std::string note_id;
    std::size_t chunk_index = 0;
    std::string text;
    std::size_t estimated_tokens = 0;
    /// A single sentence larger than the budget.
    bool oversized = false;
};

struct ChunkOptions {
    std::size_t budget = 2048;
    /// Absolute model context; only sentences beyond this are split at whitespace.
    std::size_t context_limit = 131072;
};

/// Sentence boundaries are `.`, `!` or `?` (plus closing quotes/brackets)
/// followed by whitespace and an uppercase letter or digit. Abbreviations such
/// as "Dr." or "e.g." never end a sentence. Sentences are trimmed.
std::vector<std::string> segment_sentences(std::string_view text);

/// ceil(code points / 4).
std::size_t estimate_tokens(std::string_view text);

/// Greedy in-order packing; sentences within a chunk are joined by one space.
std::vector<Chunk> pack_chunks(const std::vector<std::string>& sentences, const ChunkOptions& options,
                               std::string_view note_id = {});

std::vector<Chunk> chunk_note(std::string_view note_id, std::string_view text, const ChunkOptions& options);

}  // namespace phenomine
