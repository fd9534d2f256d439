#include "phenomine/llm_gateway.hpp"

#include <spdlog/spdlog.h>

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <json.hpp>

#include "phenomine/error.hpp"
#include "phenomine/text.hpp"

namespace phenomine {

using nlohmann::json;

void CompletionRequest::validate() const {
    if (!(temperature >= 0.0)) throw ParameterError("temperature must be >= 0");
    if (max_output_tokens < 1) throw ParameterError("max_output_tokens must be >= 1");
}

// ---- cache -----------------------------------------------------------------

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
}

std::string ResponseCache::key(std::string_view backend_id, std::string_view model, double temperature,
                               std::string_view prompt) {
    // Length-prefixed fields keep the encoding unambiguous.
    char temp[32];
    std::snprintf(temp, sizeof temp, "%.17g", temperature);
    std::string material;
    for (std::string_view field : {backend_id, model, std::string_view(temp), prompt}) {
        material += std::to_string(field.size());
        material += ':';
        material += field;
    }
    return text::sha256_hex(material);
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::mutex& ResponseCache::lock_for(const std::string& key) {
    return stripes_[std::hash<std::string>{}(key) % stripes_.size()];
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buf;
    buf << in.rdbuf();
    json doc = json::parse(buf.str(), nullptr, false);
    if (doc.is_discarded() || !doc.contains("text") || !doc["text"].is_string()) {
        spdlog::warn("ignoring corrupt cache entry {}", path_for(key).string());
        return std::nullopt;
    }
    return doc["text"].get<std::string>();
}

void ResponseCache::put(const std::string& key, std::string_view backend_id, std::string_view model,
                        double temperature, std::string_view text) {
    std::lock_guard lock(lock_for(key));
    const auto target = path_for(key);
    std::filesystem::create_directories(target.parent_path());
    json doc = {{"backend_id", backend_id}, {"model", model}, {"temperature", temperature}, {"text", text}};
    auto tmp = target;
    tmp += ".tmp" + std::to_string(::getpid()) + "_" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write cache entry " + tmp.string());
        out << doc.dump();
    }
    std::filesystem::rename(tmp, target);
}

// ---- gateway ---------------------------------------------------------------

std::vector<std::size_t> BatchResult::failed_indices() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!items[i].ok()) out.push_back(i);
    }
    return out;
}

Gateway::Gateway(std::shared_ptr<CompletionBackend> backend, std::optional<std::filesystem::path> cache_dir,
                 RetryPolicy retry)
    : backend_(std::move(backend)), retry_(std::move(retry)) {
    if (!backend_) throw ConfigError("no completion backend configured");
    if (cache_dir) cache_ = std::make_unique<ResponseCache>(*cache_dir);
    if (retry_.max_attempts < 1) throw ConfigError("retry attempts must be >= 1");
    if (!retry_.sleep) {
        retry_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }
}

CompletionResponse Gateway::complete(const CompletionRequest& request) {
    request.validate();
    ++requests_;
    const auto start = std::chrono::steady_clock::now();
    const auto id = backend_->backend_id();
    std::string key;
    if (cache_) {
        key = ResponseCache::key(id, request.model, request.temperature, request.prompt);
        if (auto hit = cache_->get(key)) {
            ++cache_hits_;
            CompletionResponse r;
            r.text = std::move(*hit);
            r.backend_id = id;
            r.cached = true;
            r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
            return r;
        }
    }

    auto delay = retry_.base_delay;
    for (int attempt = 1;; ++attempt) {
        try {
            CompletionResponse r;
            r.text = backend_->complete_once(request);
            r.backend_id = id;
            r.attempts = attempt;
            r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
            if (cache_) cache_->put(key, id, request.model, request.temperature, r.text);
            return r;
        } catch (const TransportError& e) {
            if (attempt >= retry_.max_attempts) {
                ++failures_;
                throw;
            }
            spdlog::warn("attempt {} failed ({}), retrying in {} ms", attempt, e.what(), delay.count());
        } catch (const HttpStatusError& e) {
            if (!e.retryable() || attempt >= retry_.max_attempts) {
                ++failures_;
                throw;
            }
            spdlog::warn("attempt {} got HTTP {}, retrying in {} ms", attempt, e.status(), delay.count());
        } catch (...) {
            ++failures_;
            throw;
        }
        ++retries_;
        retry_.sleep(delay);
        delay = std::chrono::milliseconds(static_cast<long long>(static_cast<double>(delay.count()) * retry_.multiplier));
    }
}

BatchResult Gateway::complete_batch(const std::vector<CompletionRequest>& requests, std::size_t max_in_flight) {
    if (max_in_flight < 1) throw ParameterError("max_in_flight must be >= 1");
    BatchResult result;
    result.items.resize(requests.size());
    if (requests.empty()) return result;

    // Each worker handles one request at a time, so the worker count bounds
    // the number of outstanding calls.
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) {
            try {
                result.items[i].response = complete(requests[i]);
            } catch (const std::exception& e) {
                result.items[i].error = e.what();
            }
        }
    };
    const std::size_t workers = std::min(max_in_flight, requests.size());
    if (workers == 1) {
        work();
        return result;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    pool.clear();
    return result;
}

GatewayStats Gateway::stats() const {
    return {requests_.load(), cache_hits_.load(), retries_.load(), failures_.load()};
}

}  // namespace phenomine
