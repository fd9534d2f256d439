// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>
#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "phenomine/baseline.hpp"
#include "phenomine/clustering.hpp"
#include "phenomine/csv.hpp"
#include "phenomine/pca.hpp"
#include "phenomine/phenotype_schema.hpp"
#include "phenomine/prompt.hpp"
#include "phenomine/stats.hpp"

namespace fs = std::filesystem;
using namespace phenomine;

namespace {

const fs::path kData = PHENOMINE_DATA_DIR;
const std::string kCli = PHENOMINE_CLI;

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("phenomine_acceptance_" + std::to_string(::getpid())) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = quote(kCli) + " " + args + " >" + quote(log.string()) + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string demo_args() {
    const auto d = kData / "demo";
    return "--notes " + quote((d / "notes.csv").string()) + " --diagnoses " + quote((d / "diagnoses.csv").string());
}

// ---- AC1 / AC2: cohort comparison grid from the count fixtures -----------------

struct StatsRun {
    int exit_code = -1;
    double seconds = 0;
    std::map<std::string, std::pair<double, std::string>> cells;  // "list|cat|cmp" -> (p, stars)
};

const StatsRun& stats_run() {
    static StatsRun r = [] {
        StatsRun s;
        const auto out = scratch("stats");
        const auto t0 = std::chrono::steady_clock::now();
        s.exit_code = run_cli("stats --fixture " + quote((kData / "fixtures/list1_category_counts.csv").string()) +
                                  " --fixture " + quote((kData / "fixtures/list2_category_counts.csv").string()) +
                                  " --out-dir " + quote(out.string()),
                              out / "log.txt");
        s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s.exit_code != 0) return s;
        auto t = csv::read_file(out / "stats_report.csv");
        const auto li = *t.column("list"), ci = *t.column("category"), mi = *t.column("comparison"),
                   pi = *t.column("p_value"), si = *t.column("stars");
        for (const auto& row : t.rows) {
            const double p = row[pi].empty() ? std::nan("") : std::stod(row[pi]);
            s.cells[row[li] + "|" + row[ci] + "|" + row[mi]] = {p, row[si]};
        }
        return s;
    }();
    return r;
}

Outcome ac1() {
    Outcome o;
    const auto& s = stats_run();
    if (s.exit_code != 0) {
        o.fail("stats exited " + std::to_string(s.exit_code));
        return o;
    }
    // Overall, CN vs. MCI, CN vs. ADRD, MCI vs. ADRD. Star strings compare the
    // significance class; numbers compare p within 0.01.
    const std::vector<std::pair<std::string, std::array<std::string, 4>>> grid = {
        {"list1|Memory Indicators", {"***", "***", "***", "**"}},
        {"list1|Comorbidities", {"**", "0.179", "**", "0.117"}},
        {"list1|Family History", {"***", "0.755", "***", "***"}},
        {"list1|Neurobehavioral Tests/Ratings", {"***", "***", "***", "0.863"}},
        {"list1|Neuroimaging Findings", {"***", "***", "***", "***"}},
        {"list1|Biomarker Test Results", {"***", "*", "***", "0.125"}},
        {"list2|Memory", {"***", "***", "***", "*"}},
        {"list2|Executive Functions", {"***", "***", "***", "0.181"}},
        {"list2|Language", {"***", "***", "***", "0.084"}},
        {"list2|Visuospatial Skills", {"***", "***", "***", "0.056"}},
        {"list2|Behavior", {"***", "***", "***", "0.494"}},
    };
    const std::array<std::string, 4> cmps = {"Overall", "CN vs. MCI", "CN vs. ADRD", "MCI vs. ADRD"};
    int checked = 0;
    for (const auto& [row, expect] : grid) {
        for (int c = 0; c < 4; ++c) {
            const auto key = row + "|" + cmps[c];
            auto it = s.cells.find(key);
            if (it == s.cells.end()) {
                o.fail("missing cell " + key);
                continue;
            }
            const auto& [p, stars] = it->second;
            const bool ok = expect[c].front() == '*' ? stars == expect[c]
                                                     : std::abs(p - std::stod(expect[c])) <= 0.01;
            if (!ok) o.fail(key + " got p=" + std::to_string(p) + " " + stars + ", expected " + expect[c]);
            ++checked;
        }
    }
    if (s.seconds >= 1.0) o.fail("took " + std::to_string(s.seconds) + " s");
    if (o.pass) o.detail = std::to_string(checked) + " cells match, " + std::to_string(s.seconds).substr(0, 5) + " s";
    return o;
}

Outcome ac2() {
    Outcome o;
    const auto& s = stats_run();
    auto it = s.cells.find("list1|Comorbidities|Overall");
    if (it == s.cells.end()) {
        o.fail("comorbidities overall cell missing");
        return o;
    }
    const double p = it->second.first;
    o.detail = "p=" + std::to_string(p);
    if (std::abs(p - 0.007) > 0.001) o.fail("p=" + std::to_string(p) + " outside 0.007 +/- 0.001");
    return o;
}

// ---- AC3: clustering metrics against pair enumeration ---------------------------

Outcome ac3() {
    Outcome o;
    double worst = 0;
    std::size_t pairs = 0;
    auto check = [&](const std::vector<int>& a, const std::vector<int>& b) {
        worst = std::max({worst, std::abs(adjusted_rand_index(a, b) - oracle::ari(a, b)),
                          std::abs(normalized_mutual_information(a, b) - oracle::nmi(a, b)),
                          std::abs(fowlkes_mallows_index(a, b) - oracle::fmi(a, b))});
        ++pairs;
    };
    for (int n = 2; n <= 7; ++n) {
        const auto parts = oracle::set_partitions(n);
        for (const auto& a : parts)
            for (const auto& b : parts) check(a, b);
    }
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        std::uniform_int_distribution<int> ka(1, 6), kb(1, 6);
        const int ca = ka(rng), cb = kb(rng);
        std::vector<int> a(50), b(50);
        for (auto& v : a) v = std::uniform_int_distribution<int>(0, ca - 1)(rng);
        for (auto& v : b) v = std::uniform_int_distribution<int>(0, cb - 1)(rng);
        check(a, b);
    }
    std::ostringstream d;
    d << pairs << " pairs, max deviation " << worst;
    o.detail = d.str();
    if (worst > 1e-12) o.fail(o.detail);
    return o;
}

// ---- AC4: chi-square survival ---------------------------------------------------

Outcome ac4() {
    Outcome o;
    for (double x = 0; x <= 50; x += 0.25) {
        if (chi2_survival(x, 2) != std::exp(-x / 2)) o.fail("df=2 not exact at x=" + std::to_string(x));
    }
    double worst = 0;
    for (int df = 1; df <= 10; ++df) {
        for (double x = 0; x <= 50; x += 0.5) worst = std::max(worst, std::abs(chi2_survival(x, df) - oracle::chi2_sf(x, df)));
    }
    if (worst > 1e-8) o.fail("quadrature deviation " + std::to_string(worst));
    const double crit = chi2_survival(3.8415, 1);
    if (std::abs(crit - 0.05) > 1e-4) o.fail("sf(3.8415, 1) = " + std::to_string(crit));
    if (o.pass) {
        std::ostringstream d;
        d << "max quadrature deviation " << worst << ", sf(3.8415,1)=" << crit;
        o.detail = d.str();
    }
    return o;
}

// ---- AC5: k-means on separable data ---------------------------------------------

Outcome ac5() {
    Outcome o;
    std::mt19937_64 rng(77);
    std::normal_distribution<double> noise(0.0, 0.1);
    std::vector<std::vector<double>> rows;
    std::vector<int> truth;
    for (int i = 0; i < 40; ++i) {
        const bool second = i >= 20;
        std::vector<double> r(5);
        for (auto& v : r) v = (second ? 5.0 : 0.0) + noise(rng);
        rows.push_back(r);
        truth.push_back(second);
    }
    const auto pts = Points::from_rows(rows);
    int perfect = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        KMeansOptions opt;
        opt.k = 2;
        opt.seed = seed;
        const auto m = kmeans_fit(pts, opt);
        if (adjusted_rand_index(truth, m.assignments) == 1.0) ++perfect;
        for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
            if (m.inertia_history[i] > m.inertia_history[i - 1] * (1 + 1e-12) + 1e-12)
                o.fail("inertia increased at seed " + std::to_string(seed));
        }
    }
    if (perfect != 100) o.fail(std::to_string(perfect) + "/100 seeds reached ARI 1");
    if (o.pass) o.detail = "100/100 seeds ARI=1, inertia non-increasing";
    return o;
}

// ---- AC6: PCA against Jacobi ----------------------------------------------------

Outcome ac6() {
    Outcome o;
    std::mt19937_64 rng(606);
    double worst_ratio = 0, worst_orth = 0;
    for (int t = 0; t < 50; ++t) {
        const std::size_t rows = 200, dims = 37;
        std::bernoulli_distribution bit(std::uniform_real_distribution<double>(0.1, 0.6)(rng));
        std::vector<double> flat(rows * dims);
        for (auto& v : flat) v = bit(rng);
        Points pts{rows, dims, flat};
        const auto p = pca_project(pts);
        const auto [r1, r2] = oracle::top2_ratios(flat, rows, dims);
        worst_ratio = std::max({worst_ratio, std::abs(p.explained_variance_ratio[0] - r1),
                                std::abs(p.explained_variance_ratio[1] - r2)});
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                double dot = 0;
                for (std::size_t d = 0; d < dims; ++d) dot += p.components[a][d] * p.components[b][d];
                worst_orth = std::max(worst_orth, std::abs(dot - (a == b ? 1.0 : 0.0)));
            }
        }
    }
    std::ostringstream d;
    d << "ratio deviation " << worst_ratio << ", orthonormality deviation " << worst_orth;
    o.detail = d.str();
    if (worst_ratio > 1e-8 || worst_orth > 1e-10) o.fail(o.detail);
    return o;
}

// ---- AC7: deterministic demo pipeline -------------------------------------------

Outcome ac7() {
    Outcome o;
    const auto root = scratch("report");
    const auto cache = root / "cache";
    const auto args = "report " + demo_args() + " --mock-rules " + quote((kData / "demo/mock_rules.csv").string()) +
                      " --list combined --chunk-budget 48 --cache-dir " + quote(cache.string()) + " --out-dir ";
    const int cold = run_cli(args + quote((root / "cold").string()), root / "cold.log");
    const int warm = run_cli(args + quote((root / "warm").string()), root / "warm.log");
    if (cold != 0 || warm != 0) {
        o.fail("report exit codes " + std::to_string(cold) + "/" + std::to_string(warm));
        return o;
    }
    for (const char* f : {"manifest.csv", "feature_matrix.csv", "stats_report.csv", "clustering.json",
                          "pca_scatter.csv", "pca_scatter.svg"}) {
        const auto a = slurp(root / "cold" / f), b = slurp(root / "warm" / f);
        if (a.empty() || a != b) o.fail(std::string(f) + " differs between cold and warm runs");
    }
    const auto report = nlohmann::json::parse(slurp(root / "warm/run_report.json"));
    if (report.value("cache_hits", 0) == 0) o.fail("warm run reported no cache hits");

    std::set<std::pair<std::string, std::string>> truth;
    const auto pt = csv::read_file(kData / "demo/planted_truth.csv");
    for (const auto& r : pt.rows) truth.insert({r[0], r[1] + "::" + r[2] + "::" + r[3]});
    std::set<std::pair<std::string, std::string>> got;
    const auto fm = csv::read_file(root / "cold/feature_matrix.csv");
    for (const auto& r : fm.rows) {
        for (std::size_t c = 2; c < fm.header.size(); ++c) {
            if (r[c] == "1") got.insert({r[0], fm.header[c]});
        }
    }
    if (got != truth) {
        std::size_t missed = 0, extra = 0;
        for (const auto& t : truth) missed += !got.count(t);
        for (const auto& g : got) extra += !truth.count(g);
        o.fail("matrix vs planted truth: " + std::to_string(missed) + " missed, " + std::to_string(extra) + " extra");
    }
    if (o.pass) o.detail = "artifacts byte-identical; " + std::to_string(truth.size()) + " planted cells recovered";
    return o;
}

// ---- AC8: golden instruction ----------------------------------------------------

std::string straighten_quotes(std::string s) {
    for (const char* q : {"\xE2\x80\x98", "\xE2\x80\x99"}) {
        for (auto pos = s.find(q); pos != std::string::npos; pos = s.find(q)) s.replace(pos, 3, "'");
    }
    for (const char* q : {"\xE2\x80\x9C", "\xE2\x80\x9D"}) {
        for (auto pos = s.find(q); pos != std::string::npos; pos = s.find(q)) s.replace(pos, 3, "\"");
    }
    return s;
}

Outcome ac8() {
    Outcome o;
    const std::string golden =
        "You are analyzing a segment of a clinical nursing note. Extract the patient's comorbidities of ADRD from "
        "the given discharge note. Please choose from 'hypertension' and 'depression'. Return only the combination "
        "of the above outputs or 'none' if none are mentioned in the note.";
    const auto list = builtin_list("list1");
    const auto* cat = list.find_category("Comorbidities");
    if (!cat) {
        o.fail("Comorbidities category missing");
        return o;
    }
    const auto got = straighten_quotes(render_instruction(*cat));
    if (got != golden) o.fail("instruction differs: " + got);
    const auto prompt = render_prompt(*cat, "CHUNK", PromptMode::ZeroShot);
    if (prompt.find(render_instruction(*cat)) == std::string::npos) o.fail("zero-shot prompt lacks the instruction");
    if (o.pass) o.detail = "instruction matches golden string";
    return o;
}

// ---- AC9: baseline filters ------------------------------------------------------

Outcome ac9() {
    Outcome o;
    const auto dict = build_dictionary(kData / "demo/dictionary.csv", 4);
    for (const char* short_term : {"pain", "gait", "fall"}) {
        if (dict.terms.count(short_term)) o.fail(std::string("term '") + short_term + "' survived the length filter");
    }
    if (!dict.terms.count("memory loss")) o.fail("'memory loss' dropped");

    std::vector<NoteRecord> notes;
    for (int i = 0; i < 100; ++i) {
        NoteRecord n;
        n.note_id = "n" + std::to_string(i);
        n.patient_id = n.note_id;
        n.text = std::string(i < 50 ? "History of hypertension. " : "") + (i < 49 ? "Reports memory loss." : "");
        notes.push_back(n);
    }
    const auto m = extract_dictionary_features(notes, dict, DictionaryOptions{});
    if (m.columns != std::vector<std::string>{"C0020538"}) o.fail("document-frequency filter kept the wrong columns");

    const auto dir = scratch("ner");
    std::ofstream(dir / "a.jsonl") << R"({"note_id":"a","concept":"low","score":0.79})" << "\n"
                                   << R"({"note_id":"a","concept":"edge","score":0.8})" << "\n";
    const auto ner = ingest_ner_annotations(dir / "a.jsonl", 0.8);
    if (ner.matrix.columns != std::vector<std::string>{"edge"}) o.fail("NER threshold not inclusive at 0.8");
    if (ner.below_threshold != 1) o.fail("0.79 annotation not dropped");
    if (o.pass) o.detail = "length, document-frequency and score filters hold";
    return o;
}

// ---- AC10: real HTTP backend ----------------------------------------------------

class StubServer {
public:
    StubServer() {
        svr_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            if (req.get_header_value("Authorization") != "Bearer stub-key") ++unauthorized_;
            const auto body = nlohmann::json::parse(req.body);
            const std::string prompt = body.at("messages").at(0).at("content");
            std::string answer = "none";
            if (prompt.find("comorbidities") != std::string::npos &&
                prompt.find("hypertension managed") != std::string::npos)
                answer = "hypertension";
            nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", answer}}}}}}};
            res.set_content(j.dump(), "application/json");
        });
        port_ = svr_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { svr_.listen_after_bind(); });
        svr_.wait_until_ready();
    }
    ~StubServer() {
        svr_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    int requests() const { return requests_; }
    int unauthorized() const { return unauthorized_; }

private:
    httplib::Server svr_;
    int port_ = 0;
    std::thread thread_;
    std::atomic<int> requests_{0};
    std::atomic<int> unauthorized_{0};
};

/// Three demo notes, one per cohort, with their diagnoses.
void write_three_note_corpus(const fs::path& dir) {
    const auto notes = csv::read_file(kData / "demo/notes.csv");
    const auto dx = csv::read_file(kData / "demo/diagnoses.csv");
    const std::set<std::string> keep = {"p01", "p11", "p21"};
    std::ofstream n(dir / "notes.csv"), d(dir / "diagnoses.csv");
    csv::write_row(n, notes.header);
    for (const auto& r : notes.rows)
        if (keep.count(r[1])) csv::write_row(n, r);
    csv::write_row(d, dx.header);
    for (const auto& r : dx.rows)
        if (keep.count(r[0])) csv::write_row(d, r);
}

Outcome ac10() {
    Outcome o;
    const auto root = scratch("live");
    write_three_note_corpus(root);
    const auto corpus = "--notes " + quote((root / "notes.csv").string()) + " --diagnoses " +
                        quote((root / "diagnoses.csv").string()) + " --list list1 --backend http ";

    const char* live = std::getenv("PHENO_MINE_LIVE_BASE_URL");
    std::string mode;
    int code = 0;
    std::unique_ptr<StubServer> stub;
    if (live && *live) {
        mode = "live endpoint";
        const char* model = std::getenv("PHENO_MINE_LIVE_MODEL");
        code = run_cli("extract " + corpus + "--base-url " + quote(live) +
                           (model ? " --model " + quote(model) : std::string()) + " --out-dir " +
                           quote((root / "out").string()),
                       root / "live.log");
    } else {
        mode = "local stub endpoint (PHENO_MINE_LIVE_BASE_URL unset)";
        stub = std::make_unique<StubServer>();
        ::setenv("PHENO_MINE_API_KEY", "stub-key", 1);
        code = run_cli("extract " + corpus + "--base-url " + quote(stub->url()) + " --out-dir " +
                           quote((root / "out").string()),
                       root / "live.log");
        ::unsetenv("PHENO_MINE_API_KEY");
    }
    if (code != 0) {
        o.fail(mode + ": extract exited " + std::to_string(code));
        return o;
    }
    const auto fm = csv::read_file(root / "out/feature_matrix.csv");
    if (fm.rows.size() != 3 || fm.header.size() != 12) o.fail(mode + ": unexpected matrix shape");
    for (const auto& r : fm.rows) {
        for (std::size_t c = 2; c < r.size(); ++c)
            if (r[c] != "0" && r[c] != "1") o.fail(mode + ": non-binary cell");
    }
    if (stub) {
        if (stub->requests() == 0) o.fail("stub received no requests");
        if (stub->unauthorized() != 0) o.fail("requests lacked the bearer key");
    }

    // An unreachable endpoint must stop the run before any matrix is written.
    const auto dead = root / "dead";
    const int dead_code = run_cli("extract " + corpus + "--base-url http://127.0.0.1:9 --retries 1 --retry-base-ms 1 " +
                                      "--out-dir " + quote(dead.string()),
                                  root / "dead.log");
    if (dead_code == 0) o.fail("unreachable endpoint exited 0");
    if (fs::exists(dead / "feature_matrix.csv")) o.fail("unreachable endpoint still wrote a feature matrix");

    if (o.pass) {
        o.detail = mode + ": 3 notes extracted, binary 3x10 matrix";
        if (stub) o.detail += " (" + std::to_string(stub->requests()) + " requests)";
        o.detail += "; unreachable endpoint fails fast";
    }
    return o;
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failures += !o.pass;
        std::cout << name << " " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << std::endl;
    }
    fs::remove_all(fs::temp_directory_path() / ("phenomine_acceptance_" + std::to_string(::getpid())));
    return failures == 0 ? 0 : 1;
}
