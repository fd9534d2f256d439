#include <gtest/gtest.h>

#include "phenomine/error.hpp"
#include "phenomine/phenotype_schema.hpp"
#include "phenomine/prompt.hpp"

using namespace phenomine;

namespace {
const PhenotypeCategory& category(const PhenotypeList& l, std::string_view name) { return *l.find_category(name); }
}  // namespace

TEST(Prompt, JoinCandidates) {
    std::vector<Phenotype> c = {{"a", "Alpha", {}}};
    EXPECT_EQ(join_candidates(c), "'alpha'");
    c.push_back({"b", "Beta", {}});
    EXPECT_EQ(join_candidates(c), "'alpha' and 'beta'");
    c.push_back({"c", "Gamma", {}});
    EXPECT_EQ(join_candidates(c), "'alpha', 'beta', and 'gamma'");
}

TEST(Prompt, ZeroShotStructure) {
    auto l = builtin_list("list1");
    auto p = render_zero_shot(category(l, "Comorbidities"), "Hx of HTN.");
    EXPECT_EQ(p.rfind("You are analyzing a segment of a clinical nursing note.", 0), 0u);
    EXPECT_NE(p.find("comorbidities of ADRD"), std::string::npos);
    EXPECT_TRUE(p.ends_with(" ##Note##: Hx of HTN."));
}

TEST(Prompt, FewShotHasThreeExamplesBeforeNote) {
    auto l = builtin_list("list2");
    const auto& cat = category(l, "Memory");
    auto p = render_few_shot(cat, "NOTE-TEXT");
    std::size_t count = 0;
    for (auto pos = p.find("Output: "); pos != std::string::npos; pos = p.find("Output: ", pos + 1)) ++count;
    EXPECT_EQ(count, 3u);
    EXPECT_NE(p.find("Output: none"), std::string::npos);
    EXPECT_LT(p.rfind("Output: "), p.find("##Note##: NOTE-TEXT"));
    EXPECT_TRUE(p.ends_with("##Note##: NOTE-TEXT"));
}

TEST(Prompt, FewShotWithoutExamplesIsConfigError) {
    PhenotypeCategory c;
    c.name = "X";
    c.candidates = {{"a", "A", {"a"}}};
    EXPECT_THROW(render_few_shot(c, "t"), ConfigError);
}

TEST(Prompt, ModeParsing) {
    EXPECT_EQ(parse_prompt_mode("few-shot"), PromptMode::FewShot);
    EXPECT_EQ(parse_prompt_mode("zero_shot"), PromptMode::ZeroShot);
    EXPECT_THROW(parse_prompt_mode("one_shot"), ConfigError);
}

TEST(Prompt, EveryBuiltinCategoryRendersInBothModes) {
    for (const auto& cat : builtin_list("combined").categories) {
        auto z = render_prompt(cat, "x", PromptMode::ZeroShot);
        auto f = render_prompt(cat, "x", PromptMode::FewShot);
        EXPECT_NE(z.find(join_candidates(cat.candidates)), std::string::npos) << cat.name;
        EXPECT_GT(f.size(), z.size());
    }
}
