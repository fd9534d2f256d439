#include <httplib.h>
#include <spdlog/spdlog.h>

#include <regex>

#include <json.hpp>

#include "phenomine/error.hpp"
#include "phenomine/llm_gateway.hpp"

namespace phenomine {

using nlohmann::json;

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(config_.base_url, m, kUrl)) {
        throw ConfigError("base URL must look like http(s)://host[:port][/prefix], got '" + config_.base_url + "'");
    }
    scheme_host_port_ = m[1].str();
    std::string prefix = m[2].matched ? m[2].str() : "";
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/v1/chat/completions";
}

std::string HttpBackend::backend_id() const { return "http:" + config_.base_url; }

std::string HttpBackend::request_body(const CompletionRequest& request) {
    json body = {{"model", request.model},
                 {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_output_tokens}};
    return body.dump();
}

std::string HttpBackend::parse_response_body(std::string_view body) {
    json doc = json::parse(body.begin(), body.end(), nullptr, false);
    if (doc.is_discarded()) {
        spdlog::error("malformed completion response body: {}", body);
        throw ProtocolError("completion response is not valid JSON");
    }
    try {
        const auto& content = doc.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw ProtocolError("message content is not a string");
        return content.get<std::string>();
    } catch (const json::exception&) {
        spdlog::error("unexpected completion response body: {}", body);
        throw ProtocolError("completion response lacks choices[0].message.content");
    }
}

std::string HttpBackend::complete_once(const CompletionRequest& request) {
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(config_.connect_timeout);
    client.set_read_timeout(config_.read_timeout);
    client.set_write_timeout(config_.read_timeout);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(path_, headers, request_body(request), "application/json");
    if (!res) {
        throw TransportError("request to " + scheme_host_port_ + path_ + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) throw HttpStatusError(res->status, res->body.substr(0, 512));
    return parse_response_body(res->body);
}

}  // namespace phenomine
