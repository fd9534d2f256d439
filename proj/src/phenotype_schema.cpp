#include "phenomine/phenotype_schema.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

namespace detail {
extern const std::string_view kList1Json;
extern const std::string_view kList2Json;
}  // namespace detail

using nlohmann::json;

std::string PhenotypeCategory::prompt_phrase() const {
    return phrase.empty() ? text::to_lower(name) : phrase;
}

const Phenotype* PhenotypeCategory::find(std::string_view phenotype_id) const {
    for (const auto& p : candidates) {
        if (p.id == phenotype_id) return &p;
    }
    return nullptr;
}

std::size_t PhenotypeList::phenotype_count() const {
    std::size_t n = 0;
    for (const auto& c : categories) n += c.candidates.size();
    return n;
}

const PhenotypeCategory* PhenotypeList::find_category(std::string_view name) const {
    for (const auto& c : categories) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

std::string FeatureColumn::key() const { return list_id + "::" + category + "::" + phenotype_id; }

namespace {

std::string line_of(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw SchemaError(where, std::string("missing field '") + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_string()) throw SchemaError(where + "." + key, "expected a string");
    return v.get<std::string>();
}

const json& require_array(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw SchemaError(where, std::string("missing field '") + key + "'");
    }
    const auto& v = obj.at(key);
    if (!v.is_array()) throw SchemaError(where + "." + key, "expected an array");
    return v;
}

bool valid_list_id(std::string_view id) {
    if (id == "list1" || id == "list2" || id == "combined") return true;
    return id.size() > 7 && id.substr(0, 7) == "custom:";
}

}  // namespace

PhenotypeList phenotype_list_from_json(const json& doc, std::string_view source) {
    const std::string root(source);
    if (!doc.is_object()) throw SchemaError(root, "top level must be an object");

    PhenotypeList list;
    list.list_id = require_string(doc, "list_id", root);
    if (!valid_list_id(list.list_id)) {
        throw SchemaError(root + ".list_id",
                          "expected list1, list2, combined or custom:<name>, got '" + list.list_id + "'");
    }

    const auto& cats = require_array(doc, "categories", root);
    for (std::size_t ci = 0; ci < cats.size(); ++ci) {
        const std::string cw = root + ".categories[" + std::to_string(ci) + "]";
        const auto& cj = cats[ci];
        PhenotypeCategory cat;
        cat.name = require_string(cj, "name", cw);
        if (cj.contains("phrase")) cat.phrase = require_string(cj, "phrase", cw);
        cat.source_list = cj.contains("source_list") ? require_string(cj, "source_list", cw) : list.list_id;

        const auto& cands = require_array(cj, "candidates", cw);
        for (std::size_t pi = 0; pi < cands.size(); ++pi) {
            const std::string pw = cw + ".candidates[" + std::to_string(pi) + "]";
            Phenotype p;
            p.id = require_string(cands[pi], "id", pw);
            p.display_name = require_string(cands[pi], "display_name", pw);
            std::set<std::string> seen;
            auto add_alias = [&](const std::string& a) {
                auto norm = text::collapse_spaces(text::to_lower(a));
                if (!norm.empty() && seen.insert(norm).second) p.aliases.push_back(norm);
            };
            add_alias(p.display_name);
            if (cands[pi].contains("aliases")) {
                const auto& al = require_array(cands[pi], "aliases", pw);
                for (std::size_t ai = 0; ai < al.size(); ++ai) {
                    if (!al[ai].is_string()) {
                        throw SchemaError(pw + ".aliases[" + std::to_string(ai) + "]", "expected a string");
                    }
                    add_alias(al[ai].get<std::string>());
                }
            }
            cat.candidates.push_back(std::move(p));
        }

        if (cj.contains("few_shot_examples")) {
            const auto& ex = require_array(cj, "few_shot_examples", cw);
            for (std::size_t ei = 0; ei < ex.size(); ++ei) {
                const std::string ew = cw + ".few_shot_examples[" + std::to_string(ei) + "]";
                cat.few_shot_examples.push_back(
                    {require_string(ex[ei], "note_excerpt", ew), require_string(ex[ei], "expected_output", ew)});
            }
        }
        list.categories.push_back(std::move(cat));
    }
    validate(list);
    return list;
}

PhenotypeList parse_phenotype_list(std::string_view json_text, std::string_view source) {
    json doc;
    try {
        doc = json::parse(json_text.begin(), json_text.end());
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string(source) + " " + line_of(json_text, e.byte), "malformed JSON");
    }
    return phenotype_list_from_json(doc, source);
}

PhenotypeList load_phenotype_list(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open phenotype list " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_phenotype_list(buf.str(), path.string());
}

void validate(const PhenotypeList& list) {
    std::set<std::pair<std::string, std::string>> ids;  // (namespace, id)
    std::set<std::pair<std::string, std::string>> names;
    for (const auto& cat : list.categories) {
        if (cat.name.empty()) throw ValidationError(list.list_id + ": category with empty name");
        if (!names.insert({cat.source_list, cat.name}).second) {
            throw ValidationError(list.list_id + ": duplicate category '" + cat.name + "'");
        }
        if (cat.candidates.empty()) {
            throw ValidationError(list.list_id + ": category '" + cat.name + "' has no candidates");
        }
        for (const auto& p : cat.candidates) {
            if (p.id.empty()) {
                throw ValidationError(list.list_id + ": empty phenotype id in '" + cat.name + "'");
            }
            if (p.display_name.empty()) {
                throw ValidationError(list.list_id + ": phenotype '" + p.id + "' has empty display_name");
            }
            if (!ids.insert({cat.source_list, p.id}).second) {
                throw ValidationError(list.list_id + ": duplicate phenotype id '" + p.id + "' in '" + cat.name +
                                      "'");
            }
            for (const auto& a : p.aliases) {
                if (a != text::to_lower(a)) {
                    throw ValidationError(list.list_id + ": alias '" + a + "' is not lowercase");
                }
            }
        }
        if (cat.few_shot_examples.size() > 3) {
            throw ValidationError(list.list_id + ": category '" + cat.name + "' has more than 3 few-shot examples");
        }
        if (!cat.few_shot_examples.empty()) {
            bool has_none = std::any_of(cat.few_shot_examples.begin(), cat.few_shot_examples.end(),
                                        [](const FewShotExample& e) {
                                            return text::to_lower(text::trim(e.expected_output)) == "none";
                                        });
            if (!has_none) {
                throw ValidationError(list.list_id + ": few-shot examples of '" + cat.name +
                                      "' need at least one 'none' case");
            }
        }
    }
}

json to_json(const PhenotypeList& list) {
    json doc;
    doc["list_id"] = list.list_id;
    doc["categories"] = json::array();
    for (const auto& cat : list.categories) {
        json cj;
        cj["name"] = cat.name;
        if (!cat.phrase.empty()) cj["phrase"] = cat.phrase;
        if (cat.source_list != list.list_id) cj["source_list"] = cat.source_list;
        cj["candidates"] = json::array();
        for (const auto& p : cat.candidates) {
            cj["candidates"].push_back({{"id", p.id}, {"display_name", p.display_name}, {"aliases", p.aliases}});
        }
        cj["few_shot_examples"] = json::array();
        for (const auto& e : cat.few_shot_examples) {
            cj["few_shot_examples"].push_back(
                {{"note_excerpt", e.note_excerpt}, {"expected_output", e.expected_output}});
        }
        doc["categories"].push_back(std::move(cj));
    }
    return doc;
}

std::string_view builtin_list_json(std::string_view name) {
    if (name == "list1") return detail::kList1Json;
    if (name == "list2") return detail::kList2Json;
    throw ConfigError("no built-in phenotype list named '" + std::string(name) + "'");
}

PhenotypeList builtin_list(std::string_view name) {
    if (name == "combined") {
        return combine_lists(builtin_list("list1"), builtin_list("list2"));
    }
    return parse_phenotype_list(builtin_list_json(name), "builtin:" + std::string(name));
}

PhenotypeList resolve_list(std::string_view name_or_path) {
    if (name_or_path == "list1" || name_or_path == "list2" || name_or_path == "combined") {
        return builtin_list(name_or_path);
    }
    return load_phenotype_list(std::filesystem::path(name_or_path));
}

PhenotypeList combine_lists(const PhenotypeList& a, const PhenotypeList& b) {
    if (b.categories.empty()) return a;
    if (a.categories.empty()) return b;

    PhenotypeList out;
    if (a.list_id == "list1" && b.list_id == "list2") {
        out.list_id = "combined";
    } else {
        auto bare = [](const std::string& id) { return id.rfind("custom:", 0) == 0 ? id.substr(7) : id; };
        out.list_id = "custom:" + bare(a.list_id) + "+" + bare(b.list_id);
    }
    out.categories = a.categories;

    std::set<std::string> taken;
    for (const auto& c : a.categories) taken.insert(c.source_list);
    std::map<std::string, std::string> renamed;
    for (auto cat : b.categories) {
        auto it = renamed.find(cat.source_list);
        if (it == renamed.end()) {
            std::string ns = cat.source_list;
            for (int suffix = 2; taken.count(ns); ++suffix) ns = cat.source_list + "#" + std::to_string(suffix);
            taken.insert(ns);
            it = renamed.emplace(cat.source_list, ns).first;
        }
        cat.source_list = it->second;
        out.categories.push_back(std::move(cat));
    }
    validate(out);
    return out;
}

std::vector<FeatureColumn> feature_index(const PhenotypeList& list) {
    std::vector<FeatureColumn> index;
    index.reserve(list.phenotype_count());
    for (const auto& cat : list.categories) {
        for (const auto& p : cat.candidates) {
            index.push_back({index.size(), cat.source_list, cat.name, p.id});
        }
    }
    return index;
}

}  // namespace phenomine
