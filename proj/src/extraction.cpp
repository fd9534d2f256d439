#include "phenomine/extraction.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "phenomine/csv.hpp"
#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

namespace {

bool is_strip_char(char c) {
    return c == '\'' || c == '"' || c == '`' || c == '.' || c == '*' || c == '[' || c == ']';
}

std::string normalize_token(std::string_view raw) {
    std::string t = text::trim(raw);
    // Curly quotes are multi-byte; map them to ASCII before stripping.
    for (std::string_view q : {"\xE2\x80\x98", "\xE2\x80\x99", "\xE2\x80\x9C", "\xE2\x80\x9D"}) {
        for (auto pos = t.find(q); pos != std::string::npos; pos = t.find(q)) t.replace(pos, q.size(), "'");
    }
    std::size_t b = 0;
    std::size_t e = t.size();
    while (b < e && (is_strip_char(t[b]) || std::isspace(static_cast<unsigned char>(t[b])))) ++b;
    while (e > b && (is_strip_char(t[e - 1]) || std::isspace(static_cast<unsigned char>(t[e - 1])))) --e;
    return text::collapse_spaces(text::to_lower(t.substr(b, e - b)));
}

}  // namespace

ParsedResponse parse_response(std::string_view raw, const PhenotypeCategory& category) {
    ParsedResponse out;
    if (text::trim(raw).empty()) return out;
    for (const auto& piece : text::split(raw, ',')) {
        auto token = normalize_token(piece);
        if (token.empty()) continue;
        if (token == "none") {
            out.saw_none = true;
            continue;
        }
        bool matched = false;
        for (const auto& p : category.candidates) {
            if (std::find(p.aliases.begin(), p.aliases.end(), token) != p.aliases.end() ||
                token == text::to_lower(p.display_name)) {
                out.ids.insert(p.id);
                matched = true;
                break;
            }
        }
        if (!matched) out.unknown.push_back(token);
    }
    return out;
}

void ExtractionProfile::merge(std::size_t category, const std::set<std::string>& ids) {
    for (const auto& id : ids) {
        present.at(category).insert(id);
        ++provenance.at(category)[id];
    }
}

bool ExtractionProfile::empty() const {
    return std::all_of(present.begin(), present.end(), [](const auto& s) { return s.empty(); });
}

ExtractionRun extract_notes(const std::vector<NoteRecord>& notes, const PhenotypeList& list, Gateway& gateway,
                            const ExtractionOptions& options) {
    struct Slot {
        std::size_t note;
        std::size_t chunk;
        std::size_t category;
    };
    ExtractionRun run;
    std::vector<CompletionRequest> requests;
    std::vector<Slot> slots;

    for (std::size_t ni = 0; ni < notes.size(); ++ni) {
        const auto& note = notes[ni];
        if (text::trim(note.text).empty()) throw ValidationError("note " + note.note_id + " has empty text");
        auto chunks = chunk_note(note.note_id, note.text, options.chunking);
        ExtractionProfile profile(note.note_id, list.categories.size());
        profile.chunk_count = chunks.size();
        run.chunks += chunks.size();
        for (const auto& chunk : chunks) {
            for (std::size_t ci = 0; ci < list.categories.size(); ++ci) {
                CompletionRequest req;
                req.model = options.model;
                req.temperature = options.temperature;
                req.max_output_tokens = options.max_output_tokens;
                req.prompt = render_prompt(list.categories[ci], chunk.text, options.mode);
                run.estimated_prompt_tokens += estimate_tokens(req.prompt);
                requests.push_back(std::move(req));
                slots.push_back({ni, chunk.chunk_index, ci});
            }
        }
        run.profiles.push_back(std::move(profile));
    }

    auto batch = gateway.complete_batch(requests, options.max_in_flight);
    run.requests = requests.size();
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const auto& slot = slots[i];
        auto& profile = run.profiles[slot.note];
        const auto& item = batch.items[i];
        const auto& category = list.categories[slot.category];
        if (!item.ok()) {
            ++run.failed_requests;
            profile.incomplete.emplace_back(slot.chunk, slot.category);
            spdlog::warn("note {} chunk {} category '{}': {}", profile.note_id, slot.chunk, category.name, item.error);
            continue;
        }
        auto parsed = parse_response(item.response->text, category);
        profile.merge(slot.category, parsed.ids);
        for (auto& token : parsed.unknown) {
            profile.reject_log.push_back({profile.note_id, slot.chunk, category.name, std::move(token)});
        }
        if (parsed.saw_none && !parsed.ids.empty()) {
            spdlog::debug("note {} chunk {} '{}': 'none' alongside phenotypes, kept phenotypes", profile.note_id,
                          slot.chunk, category.name);
        }
    }
    return run;
}

ExtractionProfile extract_note(const NoteRecord& note, const PhenotypeList& list, Gateway& gateway,
                               const ExtractionOptions& options) {
    auto run = extract_notes({note}, list, gateway, options);
    return std::move(run.profiles.front());
}

// ---- feature matrix ----------------------------------------------------------

std::vector<std::size_t> FeatureMatrix::group_columns(std::string_view name) const {
    std::vector<std::size_t> exact;
    std::vector<std::size_t> bare;
    std::set<std::string> bare_groups;
    for (std::size_t c = 0; c < groups.size(); ++c) {
        const auto& g = groups[c];
        if (g.empty()) continue;
        if (g == name) exact.push_back(c);
        auto sep = g.rfind("::");
        if (sep != std::string::npos && std::string_view(g).substr(sep + 2) == name) {
            bare.push_back(c);
            bare_groups.insert(g);
        }
    }
    if (!exact.empty()) return exact;
    if (bare_groups.size() == 1) return bare;
    return {};
}

std::vector<std::string> FeatureMatrix::group_names() const {
    std::vector<std::string> names;
    for (const auto& g : groups) {
        if (!g.empty() && (names.empty() || names.back() != g) &&
            std::find(names.begin(), names.end(), g) == names.end()) {
            names.push_back(g);
        }
    }
    return names;
}

std::vector<double> FeatureMatrix::row_as_reals(std::size_t r) const {
    std::vector<double> v(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) v[c] = at(r, c);
    return v;
}

FeatureMatrix build_feature_matrix(const std::vector<ExtractionProfile>& profiles, const PhenotypeList& list,
                                   const CohortManifest& manifest) {
    FeatureMatrix m;
    const auto index = feature_index(list);
    for (const auto& col : index) {
        m.columns.push_back(col.key());
        m.groups.push_back(col.list_id + "::" + col.category);
    }
    std::unordered_map<std::string, std::size_t> row_of;
    for (const auto& e : manifest.entries) {
        row_of.emplace(e.note_id, m.rows.size());
        m.rows.push_back({e.note_id, e.patient_id, e.cohort});
    }
    m.cells.assign(m.rows.size() * m.columns.size(), 0);

    // Column of (category index, phenotype id).
    std::vector<std::unordered_map<std::string, std::size_t>> column_of(list.categories.size());
    {
        std::size_t c = 0;
        for (std::size_t ci = 0; ci < list.categories.size(); ++ci) {
            for (const auto& p : list.categories[ci].candidates) column_of[ci].emplace(p.id, c++);
        }
    }

    std::vector<bool> seen(m.rows.size(), false);
    for (const auto& profile : profiles) {
        auto it = row_of.find(profile.note_id);
        if (it == row_of.end()) throw ValidationError("profile for note '" + profile.note_id + "' not in manifest");
        if (profile.present.size() != list.categories.size()) {
            throw ValidationError("profile for note '" + profile.note_id + "' was built for a different list");
        }
        seen[it->second] = true;
        for (std::size_t ci = 0; ci < profile.present.size(); ++ci) {
            for (const auto& id : profile.present[ci]) {
                auto col = column_of[ci].find(id);
                if (col == column_of[ci].end()) {
                    throw ValidationError("phenotype '" + id + "' not in category '" + list.categories[ci].name + "'");
                }
                m.at(it->second, col->second) = 1;
            }
        }
    }
    for (std::size_t r = 0; r < seen.size(); ++r) {
        if (!seen[r]) spdlog::warn("note {} in manifest has no extraction profile, row left empty", m.rows[r].note_id);
    }
    return m;
}

FeatureMatrix aggregate_by_patient(const FeatureMatrix& matrix) {
    FeatureMatrix out;
    out.columns = matrix.columns;
    out.groups = matrix.groups;
    std::unordered_map<std::string, std::size_t> row_of;
    std::vector<std::uint8_t> cells;
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        const auto& pid = matrix.rows[r].patient_id;
        auto [it, inserted] = row_of.emplace(pid, out.rows.size());
        if (inserted) {
            out.rows.push_back({pid, pid, matrix.rows[r].cohort});
            out.cells.resize(out.cells.size() + out.columns.size(), 0);
        } else if (out.rows[it->second].cohort != matrix.rows[r].cohort) {
            throw ValidationError("patient '" + pid + "' has notes in different cohorts");
        }
        for (std::size_t c = 0; c < out.columns.size(); ++c) out.at(it->second, c) |= matrix.at(r, c);
    }
    return out;
}

std::string feature_matrix_csv(const FeatureMatrix& matrix, const std::string& provenance) {
    std::ostringstream out;
    if (!provenance.empty()) out << "# " << provenance << '\n';
    std::vector<std::string> header = {"note_id", "cohort"};
    header.insert(header.end(), matrix.columns.begin(), matrix.columns.end());
    csv::write_row(out, header);
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        out << csv::escape(matrix.rows[r].note_id) << ',' << to_string(matrix.rows[r].cohort);
        for (std::size_t c = 0; c < matrix.column_count(); ++c) out << (matrix.at(r, c) ? ",1" : ",0");
        out << '\n';
    }
    return out.str();
}

void write_feature_matrix(const FeatureMatrix& matrix, const std::filesystem::path& path,
                          const std::string& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << feature_matrix_csv(matrix, provenance);
}

FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
    auto table = csv::read_file(path);
    const auto src = path.string();
    if (table.header.size() < 2 || table.header[0] != "note_id" || table.header[1] != "cohort") {
        throw SchemaError(src + ":1", "feature matrix header must start with note_id,cohort");
    }
    FeatureMatrix m;
    m.columns.assign(table.header.begin() + 2, table.header.end());
    for (const auto& col : m.columns) {
        auto sep = col.rfind("::");
        m.groups.push_back(sep == std::string::npos ? std::string() : col.substr(0, sep));
    }
    m.cells.reserve(table.rows.size() * m.columns.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = src + ":" + std::to_string(table.row_lines[r]);
        if (row.size() != table.header.size()) throw SchemaError(where, "wrong field count");
        m.rows.push_back({row[0], row[0], parse_cohort(row[1])});
        for (std::size_t c = 2; c < row.size(); ++c) {
            if (row[c] == "1") m.cells.push_back(1);
            else if (row[c] == "0") m.cells.push_back(0);
            else throw SchemaError(where, "cell must be 0 or 1, got '" + row[c] + "'");
        }
    }
    return m;
}

void write_reject_log(const std::vector<ExtractionProfile>& profiles, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& p : profiles) {
        for (const auto& r : p.reject_log) {
            nlohmann::json j = {{"note_id", r.note_id}, {"chunk_index", r.chunk_index}, {"category", r.category},
                                {"token", r.token}};
            out << j.dump() << '\n';
        }
    }
}

}  // namespace phenomine
