#include "phenomine/cohort.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "phenomine/csv.hpp"
#include "phenomine/error.hpp"
#include "phenomine/random.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

std::string_view to_string(Cohort c) {
    switch (c) {
        case Cohort::CN: return "CN";
        case Cohort::MCI: return "MCI";
        case Cohort::ADRD: return "ADRD";
        case Cohort::Unlabeled: return "UNLABELED";
    }
    return "UNLABELED";
}

Cohort parse_cohort(std::string_view s) {
    auto u = text::to_lower(text::trim(s));
    if (u == "cn") return Cohort::CN;
    if (u == "mci") return Cohort::MCI;
    if (u == "adrd") return Cohort::ADRD;
    if (u == "unlabeled") return Cohort::Unlabeled;
    throw ValidationError("unknown cohort label '" + std::string(s) + "'");
}

std::map<Cohort, std::size_t> CohortManifest::counts() const {
    std::map<Cohort, std::size_t> out{{Cohort::CN, 0}, {Cohort::MCI, 0}, {Cohort::ADRD, 0}};
    for (const auto& e : entries) ++out[e.cohort];
    return out;
}

std::size_t CohortManifest::count(Cohort c) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [c](const ManifestEntry& e) { return e.cohort == c; }));
}

std::optional<std::string> normalize_icd(std::string_view raw, int icd_version) {
    std::string code;
    for (unsigned char ch : raw) {
        if (ch == '.' || std::isspace(ch)) continue;
        if (!std::isalnum(ch)) return std::nullopt;
        code += static_cast<char>(std::toupper(ch));
    }
    if (code.size() < 3) return std::nullopt;
    if (icd_version == 9) {
        // Numeric, or V/E supplementary codes.
        std::size_t start = (code[0] == 'V' || code[0] == 'E') ? 1 : 0;
        for (std::size_t i = start; i < code.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(code[i]))) return std::nullopt;
        }
        return code;
    }
    if (icd_version == 10) {
        if (!std::isalpha(static_cast<unsigned char>(code[0])) || !std::isdigit(static_cast<unsigned char>(code[1]))) {
            return std::nullopt;
        }
        return code;
    }
    return std::nullopt;
}

namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// ICD-10 codes are exact; ICD-9 families (331.1x, 290.x, 294.x) match by prefix.
const std::unordered_set<std::string> kAdrdIcd10 = {"G300", "G301", "G308", "G309", "G3183", "G3109",
                                                    "F0150", "F0151", "F0280", "F0281", "F0390", "F0391"};
const std::unordered_set<std::string> kAdrdIcd9Exact = {"3310", "33182", "797"};
const std::vector<std::string> kAdrdIcd9Prefix = {"3311", "2904", "290", "294"};

}  // namespace

bool is_adrd_code(const DiagnosisRecord& d) {
    if (d.icd_version == 10) return kAdrdIcd10.count(d.icd_code) > 0;
    if (d.icd_version == 9) {
        if (kAdrdIcd9Exact.count(d.icd_code)) return true;
        return std::any_of(kAdrdIcd9Prefix.begin(), kAdrdIcd9Prefix.end(),
                           [&](const std::string& p) { return starts_with(d.icd_code, p); });
    }
    return false;
}

bool is_mci_code(const DiagnosisRecord& d) {
    return (d.icd_version == 9 && d.icd_code == "33183") || (d.icd_version == 10 && d.icd_code == "G3184");
}

Cohort assign_cohort(const std::vector<DiagnosisRecord>& diagnoses, std::optional<double> age,
                     std::optional<double> history_years, bool on_dementia_meds, const CnCriteria& cn) {
    bool mci = false;
    for (const auto& d : diagnoses) {
        if (is_adrd_code(d)) return Cohort::ADRD;
        mci = mci || is_mci_code(d);
    }
    if (mci) return Cohort::MCI;
    if (age && history_years && *age > cn.min_age_exclusive && *history_years >= cn.min_history_years &&
        !on_dementia_meds) {
        return Cohort::CN;
    }
    return Cohort::Unlabeled;
}

CohortManifest sample_cohort(const CohortManifest& manifest, Cohort cohort, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (manifest.entries[i].cohort == cohort) pool.push_back(i);
    }
    if (n > pool.size()) {
        throw ParameterError("cannot sample " + std::to_string(n) + " " + std::string(to_string(cohort)) +
                             " notes: only " + std::to_string(pool.size()) + " available");
    }
    // Partial Fisher-Yates: the first n slots become the sample.
    SeededRng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<bool> keep(manifest.entries.size(), false);
    for (std::size_t i = 0; i < n; ++i) keep[pool[i]] = true;

    CohortManifest out;
    out.seed = seed;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        if (manifest.entries[i].cohort != cohort || keep[i]) out.entries.push_back(manifest.entries[i]);
    }
    return out;
}

CohortManifest downsample_cohort(const CohortManifest& manifest, Cohort cohort, std::size_t n, int draws,
                                 std::uint64_t seed) {
    if (draws < 1) throw ParameterError("draws must be >= 1");
    if (draws == 1) return sample_cohort(manifest, cohort, n, seed);
    std::unordered_set<std::string> chosen;
    for (int d = 0; d < draws; ++d) {
        auto s = sample_cohort(manifest, cohort, n, derive_seed(seed, static_cast<std::uint64_t>(d)));
        for (const auto& e : s.entries) {
            if (e.cohort == cohort) chosen.insert(e.note_id);
        }
    }
    CohortManifest out;
    out.seed = seed;
    for (const auto& e : manifest.entries) {
        if (e.cohort != cohort || chosen.count(e.note_id)) out.entries.push_back(e);
    }
    return out;
}

std::vector<DiagnosisRecord> read_diagnoses(const std::filesystem::path& path, LoadWarnings* warnings) {
    auto table = csv::read_file(path);
    const auto src = path.string();
    auto c_pid = table.require_column("patient_id", src);
    auto c_ver = table.require_column("icd_version", src);
    auto c_code = table.require_column("icd_code", src);

    auto warn = [&](const std::string& msg) {
        spdlog::warn("{}", msg);
        if (warnings) warnings->messages.push_back(msg);
    };

    std::vector<DiagnosisRecord> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = src + ":" + std::to_string(table.row_lines[r]);
        if (row.size() != table.header.size()) {
            warn(where + ": expected " + std::to_string(table.header.size()) + " fields, skipped");
            continue;
        }
        int version = 0;
        auto v = text::trim(row[c_ver]);
        if (v == "9") version = 9;
        else if (v == "10") version = 10;
        else {
            warn(where + ": icd_version '" + v + "' is not 9 or 10, code ignored");
            continue;
        }
        auto code = normalize_icd(row[c_code], version);
        if (!code) {
            warn(where + ": unparseable ICD-" + v + " code '" + row[c_code] + "', ignored");
            continue;
        }
        out.push_back({text::trim(row[c_pid]), version, *code});
    }
    return out;
}

namespace {

std::optional<double> parse_optional_number(const std::string& s, const std::string& where) {
    auto t = text::trim(s);
    if (t.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw SchemaError(where, "expected a number, got '" + t + "'");
    }
}

std::optional<bool> parse_optional_bool(const std::string& s, const std::string& where) {
    auto t = text::to_lower(text::trim(s));
    if (t.empty()) return std::nullopt;
    if (t == "1" || t == "true" || t == "yes" || t == "y") return true;
    if (t == "0" || t == "false" || t == "no" || t == "n") return false;
    throw SchemaError(where, "expected a boolean, got '" + t + "'");
}

void check_notes(std::vector<NoteRecord>& notes, const std::string& src) {
    std::unordered_set<std::string> ids;
    std::vector<NoteRecord> kept;
    kept.reserve(notes.size());
    for (auto& n : notes) {
        if (n.note_id.empty()) throw ValidationError(src + ": note with empty note_id");
        if (!ids.insert(n.note_id).second) throw ValidationError(src + ": duplicate note_id '" + n.note_id + "'");
        if (text::trim(n.text).empty()) {
            spdlog::warn("{}: note {} has empty text, skipped", src, n.note_id);
            continue;
        }
        kept.push_back(std::move(n));
    }
    notes = std::move(kept);
}

}  // namespace

std::vector<NoteRecord> read_notes(const std::filesystem::path& path) {
    const auto src = path.string();
    std::vector<NoteRecord> notes;
    auto ext = text::to_lower(path.extension().string());
    if (ext == ".jsonl" || ext == ".json") {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + src);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (text::trim(line).empty()) continue;
            const auto where = src + ":" + std::to_string(lineno);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::parse_error&) {
                throw SchemaError(where, "malformed JSON line");
            }
            auto str = [&](const char* k) -> std::string {
                if (!j.contains(k) || !j[k].is_string()) throw SchemaError(where, std::string("missing string '") + k + "'");
                return j[k].get<std::string>();
            };
            NoteRecord n;
            n.note_id = str("note_id");
            n.patient_id = str("patient_id");
            n.text = str("text");
            if (j.contains("age") && j["age"].is_number()) n.age = j["age"].get<double>();
            if (j.contains("history_years") && j["history_years"].is_number()) {
                n.history_years = j["history_years"].get<double>();
            }
            if (j.contains("on_dementia_meds") && j["on_dementia_meds"].is_boolean()) {
                n.on_dementia_meds = j["on_dementia_meds"].get<bool>();
            }
            notes.push_back(std::move(n));
        }
    } else {
        auto table = csv::read_file(path);
        auto c_id = table.require_column("note_id", src);
        auto c_pid = table.require_column("patient_id", src);
        auto c_text = table.require_column("text", src);
        auto c_age = table.column("age");
        auto c_hist = table.column("history_years");
        auto c_meds = table.column("on_dementia_meds");
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const auto where = src + ":" + std::to_string(table.row_lines[r]);
            if (row.size() != table.header.size()) {
                throw SchemaError(where, "expected " + std::to_string(table.header.size()) + " fields, got " +
                                             std::to_string(row.size()));
            }
            NoteRecord n;
            n.note_id = text::trim(row[c_id]);
            n.patient_id = text::trim(row[c_pid]);
            n.text = row[c_text];
            if (c_age) n.age = parse_optional_number(row[*c_age], where);
            if (c_hist) n.history_years = parse_optional_number(row[*c_hist], where);
            if (c_meds) n.on_dementia_meds = parse_optional_bool(row[*c_meds], where);
            notes.push_back(std::move(n));
        }
    }
    check_notes(notes, src);
    return notes;
}

std::vector<std::string> read_medication_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> meds;
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::to_lower(text::trim(line));
        if (t.empty() || t[0] == '#') continue;
        meds.push_back(t);
    }
    return meds;
}

std::vector<std::string> default_dementia_medications() {
    return {"donepezil", "rivastigmine", "galantamine", "memantine"};
}

std::vector<std::string> patients_on_medications(const std::filesystem::path& prescriptions,
                                                 const std::vector<std::string>& medications) {
    auto table = csv::read_file(prescriptions);
    const auto src = prescriptions.string();
    auto c_pid = table.require_column("patient_id", src);
    auto c_drug = table.require_column("drug", src);
    std::set<std::string> hits;
    for (const auto& row : table.rows) {
        if (row.size() <= std::max(c_pid, c_drug)) continue;
        for (const auto& med : medications) {
            if (text::contains_ci(row[c_drug], med)) {
                hits.insert(text::trim(row[c_pid]));
                break;
            }
        }
    }
    return {hits.begin(), hits.end()};
}

CohortManifest build_manifest(std::vector<NoteRecord>& notes, const std::vector<DiagnosisRecord>& diagnoses,
                              const std::vector<std::string>& medicated_patients, const CnCriteria& cn) {
    std::unordered_map<std::string, std::vector<DiagnosisRecord>> by_patient;
    for (const auto& d : diagnoses) by_patient[d.patient_id].push_back(d);
    const std::unordered_set<std::string> medicated(medicated_patients.begin(), medicated_patients.end());
    static const std::vector<DiagnosisRecord> kNone;

    CohortManifest manifest;
    for (auto& note : notes) {
        auto it = by_patient.find(note.patient_id);
        const auto& dx = it == by_patient.end() ? kNone : it->second;
        bool meds = note.on_dementia_meds.value_or(false) || medicated.count(note.patient_id) > 0;
        note.cohort = assign_cohort(dx, note.age, note.history_years, meds, cn);
        if (note.cohort != Cohort::Unlabeled) manifest.entries.push_back({note.note_id, note.patient_id, note.cohort});
    }
    return manifest;
}

void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path,
                    const std::string& provenance) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    if (!provenance.empty()) out << "# " << provenance << '\n';
    csv::write_row(out, {"note_id", "patient_id", "cohort"});
    for (const auto& e : manifest.entries) csv::write_row(out, {e.note_id, e.patient_id, std::string(to_string(e.cohort))});
}

CohortManifest read_manifest(const std::filesystem::path& path) {
    auto table = csv::read_file(path);
    const auto src = path.string();
    auto c_id = table.require_column("note_id", src);
    auto c_pid = table.require_column("patient_id", src);
    auto c_co = table.require_column("cohort", src);
    CohortManifest m;
    std::unordered_set<std::string> seen;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const auto where = src + ":" + std::to_string(table.row_lines[r]);
        if (row.size() != table.header.size()) throw SchemaError(where, "wrong field count");
        Cohort c = parse_cohort(row[c_co]);
        if (c == Cohort::Unlabeled) throw ValidationError(where + ": manifest entries must be CN, MCI or ADRD");
        if (!seen.insert(row[c_id]).second) throw ValidationError(where + ": duplicate note_id '" + row[c_id] + "'");
        m.entries.push_back({row[c_id], row[c_pid], c});
    }
    return m;
}

}  // namespace phenomine
