#include <algorithm>
#include <set>

#include "phenomine/csv.hpp"
#include "phenomine/error.hpp"
#include "phenomine/llm_gateway.hpp"
#include "phenomine/prompt.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

MockRuleTable MockRuleTable::load(const std::filesystem::path& path) {
    auto table = csv::read_file(path);
    const auto src = path.string();
    auto c_cat = table.require_column("category", src);
    auto c_trig = table.require_column("trigger", src);
    auto c_phen = table.require_column("phenotype", src);
    MockRuleTable out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.header.size()) {
            throw SchemaError(src + ":" + std::to_string(table.row_lines[r]), "wrong field count");
        }
        auto trigger = text::to_lower(text::trim(row[c_trig]));
        if (trigger.empty()) throw SchemaError(src + ":" + std::to_string(table.row_lines[r]), "empty trigger");
        out.rules.push_back({text::trim(row[c_cat]), std::move(trigger), text::trim(row[c_phen])});
    }
    return out;
}

void MockRuleTable::validate_against(const PhenotypeList& list) const {
    for (const auto& rule : rules) {
        bool found_category = false;
        bool found = false;
        for (const auto& cat : list.categories) {
            if (cat.name != rule.category) continue;
            found_category = true;
            found = found || std::any_of(cat.candidates.begin(), cat.candidates.end(), [&](const Phenotype& p) {
                        return text::to_lower(p.display_name) == text::to_lower(rule.phenotype);
                    });
        }
        if (!found_category) {
            throw ValidationError("mock rule names unknown category '" + rule.category + "'");
        }
        if (!found) {
            throw ValidationError("mock rule phenotype '" + rule.phenotype + "' is not a candidate of '" +
                                  rule.category + "'");
        }
    }
}

std::optional<std::string> prompt_category_phrase(std::string_view prompt) {
    static constexpr std::string_view kBefore = "Extract the patient's ";
    static constexpr std::string_view kAfter = " from the given discharge note.";
    auto b = prompt.find(kBefore);
    if (b == std::string_view::npos) return std::nullopt;
    b += kBefore.size();
    auto e = prompt.find(kAfter, b);
    if (e == std::string_view::npos) return std::nullopt;
    return std::string(prompt.substr(b, e - b));
}

std::string prompt_note_section(std::string_view prompt) {
    auto pos = prompt.rfind(kNoteMarker);
    if (pos == std::string_view::npos) return {};
    auto rest = prompt.substr(pos + kNoteMarker.size());
    auto start = rest.find_first_not_of(" \t\r\n");
    return start == std::string_view::npos ? std::string() : std::string(rest.substr(start));
}

namespace {

bool category_matches(const std::string& category, const std::string& phrase_lower,
                      const std::map<std::string, std::string>& phrases) {
    auto it = phrases.find(category);
    if (it != phrases.end()) return text::to_lower(it->second) == phrase_lower;
    auto name = text::to_lower(category);
    return phrase_lower == name || phrase_lower == name + " of adrd";
}

}  // namespace

CompletionResponse mock_complete(const CompletionRequest& request, const MockRuleTable& rules,
                                 const std::map<std::string, std::string>& phrases) {
    CompletionResponse response;
    response.backend_id = "mock";
    response.attempts = 1;

    auto phrase = prompt_category_phrase(request.prompt);
    const std::string note = text::to_lower(prompt_note_section(request.prompt));
    std::vector<std::string> emitted;
    if (phrase) {
        const auto phrase_lower = text::to_lower(*phrase);
        std::set<std::string> seen;
        for (const auto& rule : rules.rules) {
            if (!category_matches(rule.category, phrase_lower, phrases)) continue;
            if (note.find(rule.trigger) == std::string::npos) continue;
            auto name = text::to_lower(rule.phenotype);
            if (seen.insert(name).second) emitted.push_back(std::move(name));
        }
    }
    if (emitted.empty()) {
        response.text = "none";
    } else {
        for (std::size_t i = 0; i < emitted.size(); ++i) {
            if (i) response.text += ", ";
            response.text += emitted[i];
        }
    }
    return response;
}

MockBackend::MockBackend(MockRuleTable rules, std::map<std::string, std::string> phrases)
    : rules_(std::move(rules)), phrases_(std::move(phrases)) {}

MockBackend::MockBackend(MockRuleTable rules, const PhenotypeList& list) : rules_(std::move(rules)) {
    // One rules file may cover several lists; keep the rules for this one.
    std::erase_if(rules_.rules, [&](const MockRule& r) { return list.find_category(r.category) == nullptr; });
    if (rules_.rules.empty()) throw ValidationError("no mock rule names a category of list " + list.list_id);
    rules_.validate_against(list);
    for (const auto& cat : list.categories) phrases_.emplace(cat.name, cat.prompt_phrase());
}

std::string MockBackend::complete_once(const CompletionRequest& request) {
    return mock_complete(request, rules_, phrases_).text;
}

}  // namespace phenomine
