#include <gtest/gtest.h>

#include <httplib.h>

#include <atomic>
#include <fstream>
#include <json.hpp>
#include <thread>

#include "phenomine/error.hpp"
#include "phenomine/llm_gateway.hpp"
#include "phenomine/prompt.hpp"

using namespace phenomine;
namespace fs = std::filesystem;

namespace {

MockRuleTable memory_rules() {
    MockRuleTable t;
    t.rules = {{"Memory Indicators", "misplaces", "Misplacing"},
               {"Memory Indicators", "repeats", "Repeating"},
               {"Comorbidities", "hypertension", "Hypertension"}};
    return t;
}

CompletionRequest prompt_for(const char* category, const char* note) {
    auto list = builtin_list("list1");
    CompletionRequest r;
    r.prompt = render_zero_shot(*list.find_category(category), note);
    return r;
}

fs::path fresh_dir(const std::string& name) {
    auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    return d;
}

RetryPolicy instant_retry(std::vector<long long>* delays = nullptr) {
    RetryPolicy p;
    p.sleep = [delays](std::chrono::milliseconds d) {
        if (delays) delays->push_back(d.count());
    };
    return p;
}

class Server {
public:
    explicit Server(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        svr_.Post("/v1/chat/completions", handler);
        port_ = svr_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { svr_.listen_after_bind(); });
        svr_.wait_until_ready();
    }
    ~Server() {
        svr_.stop();
        thread_.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server svr_;
    int port_ = 0;
    std::thread thread_;
};

std::string ok_body(const std::string& text) {
    nlohmann::json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
    return j.dump();
}

}  // namespace

TEST(Mock, FiresOnTrigger) {
    auto r = mock_complete(prompt_for("Memory Indicators", "Daughter says she misplaces her keys."), memory_rules());
    EXPECT_EQ(r.text, "misplacing");
}

TEST(Mock, NoTriggerGivesNone) {
    auto r = mock_complete(prompt_for("Memory Indicators", "Denies forgetting appointments."), memory_rules());
    EXPECT_EQ(r.text, "none");
}

TEST(Mock, RuleOrderAndDedup) {
    auto r = mock_complete(prompt_for("Memory Indicators", "Repeats stories and misplaces things; misplaces keys."),
                           memory_rules());
    EXPECT_EQ(r.text, "misplacing, repeating");
}

TEST(Mock, CategoryScoping) {
    auto r = mock_complete(prompt_for("Comorbidities", "She misplaces her keys."), memory_rules());
    EXPECT_EQ(r.text, "none");
}

TEST(Mock, OnlyNoteSectionIsSearched) {
    auto list = builtin_list("list1");
    CompletionRequest req;
    req.prompt = render_few_shot(*list.find_category("Memory Indicators"), "Nothing relevant.");
    MockRuleTable t;
    t.rules = {{"Memory Indicators", "misplac", "Misplacing"}};
    EXPECT_EQ(mock_complete(req, t).text, "none");
}

TEST(Mock, RulesValidatedAgainstList) {
    MockRuleTable t;
    t.rules = {{"Comorbidities", "x", "Diabetes"}};
    EXPECT_THROW(t.validate_against(builtin_list("list1")), ValidationError);
}

TEST(Cache, KeyDependsOnEveryField) {
    auto k = ResponseCache::key("mock", "m", 0.0, "p");
    EXPECT_NE(k, ResponseCache::key("http", "m", 0.0, "p"));
    EXPECT_NE(k, ResponseCache::key("mock", "m2", 0.0, "p"));
    EXPECT_NE(k, ResponseCache::key("mock", "m", 0.1, "p"));
    EXPECT_NE(k, ResponseCache::key("mock", "m", 0.0, "p "));
    EXPECT_NE(ResponseCache::key("ab", "c", 0, ""), ResponseCache::key("a", "bc", 0, ""));
}

TEST(Cache, SecondRequestReplays) {
    auto dir = fresh_dir("phenomine_cache_test");
    Gateway g(std::make_shared<MockBackend>(memory_rules()), dir, instant_retry());
    auto req = prompt_for("Memory Indicators", "She misplaces her keys.");
    auto a = g.complete(req);
    auto b = g.complete(req);
    EXPECT_FALSE(a.cached);
    EXPECT_TRUE(b.cached);
    EXPECT_EQ(a.text, b.text);
    Gateway g2(std::make_shared<MockBackend>(memory_rules()), dir, instant_retry());
    EXPECT_TRUE(g2.complete(req).cached);
    fs::remove_all(dir);
}

TEST(Request, Validation) {
    CompletionRequest r;
    r.prompt = "x";
    r.temperature = -1;
    EXPECT_THROW(r.validate(), ParameterError);
    r.temperature = 0;
    r.max_output_tokens = 0;
    EXPECT_THROW(r.validate(), ParameterError);
}

TEST(Http, RequestBodyShape) {
    CompletionRequest r;
    r.model = "m";
    r.prompt = "hello";
    r.max_output_tokens = 7;
    auto j = nlohmann::json::parse(HttpBackend::request_body(r));
    EXPECT_EQ(j["model"], "m");
    EXPECT_EQ(j["messages"][0]["role"], "user");
    EXPECT_EQ(j["messages"][0]["content"], "hello");
    EXPECT_EQ(j["max_tokens"], 7);
    EXPECT_EQ(j["temperature"], 0.0);
}

TEST(Http, ParseResponse) {
    EXPECT_EQ(HttpBackend::parse_response_body(ok_body("none")), "none");
    EXPECT_THROW(HttpBackend::parse_response_body("not json"), ProtocolError);
    EXPECT_THROW(HttpBackend::parse_response_body(R"({"choices":[]})"), ProtocolError);
}

TEST(Http, RetriesOn429ThenSucceeds) {
    std::atomic<int> calls{0};
    std::string auth;
    Server server([&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        if (++calls <= 2) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
            return;
        }
        res.set_content(ok_body("hypertension"), "application/json");
    });
    std::vector<long long> delays;
    Gateway g(std::make_shared<HttpBackend>(HttpBackendConfig{server.url(), "secret"}), std::nullopt,
              instant_retry(&delays));
    auto r = g.complete(prompt_for("Comorbidities", "HTN"));
    EXPECT_EQ(r.text, "hypertension");
    EXPECT_EQ(r.attempts, 3);
    EXPECT_EQ(calls.load(), 3);
    EXPECT_EQ(delays, (std::vector<long long>{1000, 2000}));
    EXPECT_EQ(auth, "Bearer secret");
    EXPECT_EQ(g.stats().retries, 2u);
}

TEST(Http, ClientErrorIsPermanent) {
    std::atomic<int> calls{0};
    Server server([&](const httplib::Request&, httplib::Response& res) {
        ++calls;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    Gateway g(std::make_shared<HttpBackend>(HttpBackendConfig{server.url(), ""}), std::nullopt, instant_retry());
    EXPECT_THROW(g.complete(prompt_for("Comorbidities", "x")), HttpStatusError);
    EXPECT_EQ(calls.load(), 1);
}

TEST(Http, MalformedBodyIsProtocolError) {
    Server server([&](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"unexpected\": true}", "application/json");
    });
    Gateway g(std::make_shared<HttpBackend>(HttpBackendConfig{server.url(), ""}), std::nullopt, instant_retry());
    EXPECT_THROW(g.complete(prompt_for("Comorbidities", "x")), ProtocolError);
}

TEST(Http, UnreachableIsTransportErrorAfterRetries) {
    std::vector<long long> delays;
    HttpBackendConfig cfg{"http://127.0.0.1:9", ""};
    cfg.connect_timeout = std::chrono::seconds(1);
    Gateway g(std::make_shared<HttpBackend>(cfg), std::nullopt, instant_retry(&delays));
    EXPECT_THROW(g.complete(prompt_for("Comorbidities", "x")), TransportError);
    EXPECT_EQ(delays.size(), 2u);
}

namespace {

class CountingBackend : public CompletionBackend {
public:
    std::string backend_id() const override { return "counting"; }
    std::string complete_once(const CompletionRequest& request) override {
        const int now = ++in_flight_;
        int prev = peak_.load();
        while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
        }
        // Later requests finish first to scramble completion order.
        std::this_thread::sleep_for(std::chrono::microseconds(200 * (1 + (1000 - std::stoi(request.prompt)) % 7)));
        --in_flight_;
        if (request.prompt == "13") throw HttpStatusError(400, "nope");
        return "r" + request.prompt;
    }
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
};

}  // namespace

TEST(Batch, OrderBoundAndPositionalFailure) {
    auto backend = std::make_shared<CountingBackend>();
    Gateway g(backend, std::nullopt, instant_retry());
    std::vector<CompletionRequest> reqs(100);
    for (int i = 0; i < 100; ++i) reqs[i].prompt = std::to_string(i);
    auto result = g.complete_batch(reqs, 8);
    ASSERT_EQ(result.items.size(), 100u);
    for (int i = 0; i < 100; ++i) {
        if (i == 13) continue;
        ASSERT_TRUE(result.items[i].ok()) << i;
        EXPECT_EQ(result.items[i].response->text, "r" + std::to_string(i));
    }
    EXPECT_FALSE(result.items[13].ok());
    EXPECT_EQ(result.failed_indices(), std::vector<std::size_t>{13});
    EXPECT_LE(backend->peak_.load(), 8);
    EXPECT_GE(backend->peak_.load(), 2);
}

TEST(Batch, Empty) {
    Gateway g(std::make_shared<CountingBackend>(), std::nullopt, instant_retry());
    EXPECT_TRUE(g.complete_batch({}, 4).items.empty());
}

TEST(Batch, ZeroInFlightRejected) {
    Gateway g(std::make_shared<CountingBackend>(), std::nullopt, instant_retry());
    std::vector<CompletionRequest> reqs(1);
    reqs[0].prompt = "1";
    EXPECT_THROW(g.complete_batch(reqs, 0), ParameterError);
}
