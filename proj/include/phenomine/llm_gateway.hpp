#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phenomine/phenotype_schema.hpp"

namespace phenomine {

inline constexpr std::string_view kDefaultModel = "gemma-3-12b-it";

struct CompletionRequest {
    std::string model = std::string(kDefaultModel);
    std::string prompt;
    double temperature = 0.0;
    int max_output_tokens = 64;

    void validate() const;
};

struct CompletionResponse {
    std::string text;
    std::string backend_id;
    bool cached = false;
    std::chrono::milliseconds latency{0};
    int attempts = 0;
};

/// A single completion call with no retry or caching. Implementations throw
/// TransportError, HttpStatusError or ProtocolError.
class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    virtual std::string backend_id() const = 0;
    virtual std::string complete_once(const CompletionRequest& request) = 0;
};

struct HttpBackendConfig {
    std::string base_url;
    std::string api_key;
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{120};
};

/// Chat-completions over HTTP: POST <base_url>/v1/chat/completions.
class HttpBackend : public CompletionBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);
    std::string backend_id() const override;
    std::string complete_once(const CompletionRequest& request) override;

    static std::string request_body(const CompletionRequest& request);
    /// Text of the first choice; ProtocolError otherwise.
    static std::string parse_response_body(std::string_view body);

private:
    HttpBackendConfig config_;
    std::string scheme_host_port_;
    std::string path_;
};

struct MockRule {
    std::string category;
    std::string trigger;    // lowercase
    std::string phenotype;  // display name as emitted
};

struct MockRuleTable {
    std::vector<MockRule> rules;

    /// CSV `category,trigger,phenotype`.
    static MockRuleTable load(const std::filesystem::path& path);
    /// Every rule must name an existing category and phenotype display name.
    void validate_against(const PhenotypeList& list) const;
};

/// Category phrase between "Extract the patient's " and " from the given discharge note."
std::optional<std::string> prompt_category_phrase(std::string_view prompt);
/// Text after the last note marker, leading whitespace removed.
std::string prompt_note_section(std::string_view prompt);

/// Emits the comma-separated lowercase names of rules whose category matches
/// the prompt's category phrase and whose trigger occurs in the note section;
/// "none" when nothing fires. `phrases` maps category name to prompt phrase;
/// without an entry a category matches its lowercase name, with or without
/// " of ADRD".
CompletionResponse mock_complete(const CompletionRequest& request, const MockRuleTable& rules,
                                 const std::map<std::string, std::string>& phrases = {});

class MockBackend : public CompletionBackend {
public:
    explicit MockBackend(MockRuleTable rules, std::map<std::string, std::string> phrases = {});
    /// Phrases taken from the active list; rules validated against it.
    MockBackend(MockRuleTable rules, const PhenotypeList& list);
    std::string backend_id() const override { return "mock"; }
    std::string complete_once(const CompletionRequest& request) override;

private:
    MockRuleTable rules_;
    std::map<std::string, std::string> phrases_;
};

/// Content-addressed response store: one JSON file per key under `dir`.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key(std::string_view backend_id, std::string_view model, double temperature,
                           std::string_view prompt);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, std::string_view backend_id, std::string_view model, double temperature,
             std::string_view text);
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path path_for(const std::string& key) const;
    std::mutex& lock_for(const std::string& key);

    std::filesystem::path dir_;
    std::array<std::mutex, 64> stripes_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{1000};
    double multiplier = 2.0;
    /// Defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct BatchItem {
    std::optional<CompletionResponse> response;
    std::string error;
    bool ok() const { return response.has_value(); }
};

struct BatchResult {
    std::vector<BatchItem> items;
    std::vector<std::size_t> failed_indices() const;
};

struct GatewayStats {
    std::size_t requests = 0;
    std::size_t cache_hits = 0;
    std::size_t retries = 0;
    std::size_t failures = 0;
};

/// Thread-safe front end over one backend with caching and retries.
class Gateway {
public:
    Gateway(std::shared_ptr<CompletionBackend> backend, std::optional<std::filesystem::path> cache_dir = {},
            RetryPolicy retry = {});

    /// Throws the backend's error after retries are exhausted.
    CompletionResponse complete(const CompletionRequest& request);
    /// Results in input order; at most `max_in_flight` calls outstanding.
    BatchResult complete_batch(const std::vector<CompletionRequest>& requests, std::size_t max_in_flight);

    GatewayStats stats() const;
    const CompletionBackend& backend() const { return *backend_; }

private:
    std::shared_ptr<CompletionBackend> backend_;
    std::unique_ptr<ResponseCache> cache_;
    RetryPolicy retry_;
    std::atomic<std::size_t> requests_{0};
    std::atomic<std::size_t> cache_hits_{0};
    std::atomic<std::size_t> retries_{0};
    std::atomic<std::size_t> failures_{0};
};

}  // namespace phenomine
