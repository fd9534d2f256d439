#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phenomine {

enum class Cohort { CN, MCI, ADRD, Unlabeled };

std::string_view to_string(Cohort c);
/// Accepts "CN", "MCI", "ADRD" and "UNLABELED" (case-insensitive).
Cohort parse_cohort(std::string_view s);

struct DiagnosisRecord {
    std::string patient_id;
    int icd_version = 10;
    std::string icd_code;  // normalized: dots removed, uppercase
};

struct NoteRecord {
    std::string note_id;
    std::string patient_id;
    std::optional<double> age;
    std::optional<double> history_years;
    std::optional<bool> on_dementia_meds;
    std::string text;
    Cohort cohort = Cohort::Unlabeled;
};

struct ManifestEntry {
    std::string note_id;
    std::string patient_id;
    Cohort cohort = Cohort::CN;
};

struct CohortManifest {
    std::vector<ManifestEntry> entries;
    std::uint64_t seed = 0;

    std::map<Cohort, std::size_t> counts() const;
    std::size_t count(Cohort c) const;
};

/// Strips dots and whitespace and uppercases. Returns nullopt when the result
/// does not look like an ICD code of the given version.
std::optional<std::string> normalize_icd(std::string_view raw, int icd_version);

bool is_adrd_code(const DiagnosisRecord& d);
bool is_mci_code(const DiagnosisRecord& d);

struct CnCriteria {
    double min_age_exclusive = 40.0;
    double min_history_years = 1.0;
};

/// ADRD over MCI over CN over Unlabeled. Missing age or history means the
/// patient cannot be confirmed CN.
Cohort assign_cohort(const std::vector<DiagnosisRecord>& diagnoses, std::optional<double> age,
                     std::optional<double> history_years, bool on_dementia_meds,
                     const CnCriteria& cn = {});

/// Uniform sample without replacement of `n` entries of `cohort`; other
/// cohorts pass through. Selected entries keep their manifest order.
CohortManifest sample_cohort(const CohortManifest& manifest, Cohort cohort, std::size_t n, std::uint64_t seed);

/// Union of `draws` independent samples of size `n` each (seeds derived from
/// `seed`). `draws == 1` is sample_cohort.
CohortManifest downsample_cohort(const CohortManifest& manifest, Cohort cohort, std::size_t n, int draws,
                                 std::uint64_t seed);

struct LoadWarnings {
    std::vector<std::string> messages;
};

std::vector<DiagnosisRecord> read_diagnoses(const std::filesystem::path& path, LoadWarnings* warnings = nullptr);
/// CSV or JSONL by extension (`.jsonl` / `.json`).
std::vector<NoteRecord> read_notes(const std::filesystem::path& path);
/// One drug name per line; '#' comments.
std::vector<std::string> read_medication_list(const std::filesystem::path& path);
std::vector<std::string> default_dementia_medications();
/// `patient_id,drug` rows; returns patients whose drug matches any list entry
/// as a case-insensitive substring.
std::vector<std::string> patients_on_medications(const std::filesystem::path& prescriptions,
                                                 const std::vector<std::string>& medications);

/// Labels every note from its patient's diagnoses and the note's age/history
/// fields. Unlabeled notes are left out of the manifest.
CohortManifest build_manifest(std::vector<NoteRecord>& notes, const std::vector<DiagnosisRecord>& diagnoses,
                              const std::vector<std::string>& medicated_patients = {}, const CnCriteria& cn = {});

void write_manifest(const CohortManifest& manifest, const std::filesystem::path& path,
                    const std::string& provenance = {});
CohortManifest read_manifest(const std::filesystem::path& path);

}  // namespace phenomine
