#pragma once

// LVLM access layer: a chat-completion HTTP backend and the offline
// simulated backend behind one interface, with disk caching, retry
// with exponential backoff, and token/cost accounting.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "srel/dataset.hpp"
#include "srel/parse.hpp"
#include "srel/prompting.hpp"
#include "srel/rng.hpp"
#include "srel/scene.hpp"
#include "srel/simlvlm.hpp"

namespace srel {

enum class BackendKind : std::uint8_t { HttpChat, Simulated };

struct PriceTable {
    double input_per_1k = 0.0;   // $ per 1000 input tokens
    double output_per_1k = 0.0;  // $ per 1000 output tokens
};

struct BackendConfig {
    BackendKind kind = BackendKind::Simulated;
    std::string endpoint;  // e.g. http://host:port/v1/chat/completions
    std::string model = "simulated";
    double temperature = 1e-15;
    double top_p = 1e-15;
    std::uint64_t seed = 0;
    int max_retries = 3;
    std::chrono::milliseconds timeout{30000};
    std::chrono::milliseconds backoff_base{250};
    PriceTable prices;
    std::string api_key_env = "LVLM_API_KEY";
    bool inline_images = false;  // base64 payload instead of URL reference
    std::string cache_root;      // empty: caching disabled

    // Simulated backend only.
    ErrorModel error_model;
    std::string scene_store_path;

    void validate() const {
        if (temperature < 0 || temperature > 1 || top_p < 0 || top_p > 1)
            throw std::invalid_argument(
                "backend config: temperature/top_p must be in [0,1]");
        if (max_retries < 0)
            throw std::invalid_argument("backend config: max_retries < 0");
        if (kind == BackendKind::HttpChat && endpoint.empty())
            throw std::invalid_argument("backend config: endpoint required");
        error_model.validate();
    }
};

struct Exchange {
    std::string request_hash;
    std::string response_text;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    double latency_ms = 0;
    int attempt_count = 0;
    bool tokens_estimated = false;  // ceil(chars/4) fallback was used
    bool from_cache = false;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProviderError : std::runtime_error {
    int status;
    std::string body;
    ProviderError(int status_, std::string body_)
        : std::runtime_error("provider returned status " +
                             std::to_string(status_)),
          status(status_),
          body(std::move(body_)) {}
};

struct ImageLoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ceil(chars / 4): a coarse but documented stand-in when the provider
// omits usage numbers.
inline std::uint64_t estimate_tokens(const std::string& text) {
    return (text.size() + 3) / 4;
}

// Stable content hash of everything that can change the response.
// Retry counts, timeouts and prices deliberately do not participate.
inline std::string request_hash(const BackendConfig& config,
                                const std::string& prompt_text,
                                const std::string& image_digest,
                                std::uint64_t trial_salt) {
    auto field = [](const std::string& s) { return s + "\x1f"; };
    std::string material = field(prompt_text) + field(image_digest) +
                           field(config.model) +
                           field(std::to_string(config.temperature)) +
                           field(std::to_string(config.top_p)) +
                           field(std::to_string(config.seed)) +
                           field(std::to_string(trial_salt));
    const std::uint64_t h1 = fnv1a64(material);
    const std::uint64_t h2 = fnv1a64(material, 0x9ae16a3b2f90404fULL);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx",
                  static_cast<unsigned long long>(h1),
                  static_cast<unsigned long long>(h2));
    return buf;
}

namespace detail {

inline nlohmann::json exchange_to_json(const Exchange& e) {
    return {{"request_hash", e.request_hash},
            {"response_text", e.response_text},
            {"input_tokens", e.input_tokens},
            {"output_tokens", e.output_tokens},
            {"latency_ms", e.latency_ms},
            {"attempt_count", e.attempt_count},
            {"tokens_estimated", e.tokens_estimated}};
}

inline Exchange exchange_from_json(const nlohmann::json& j) {
    Exchange e;
    e.request_hash = j.at("request_hash").get<std::string>();
    e.response_text = j.at("response_text").get<std::string>();
    e.input_tokens = j.at("input_tokens").get<std::uint64_t>();
    e.output_tokens = j.at("output_tokens").get<std::uint64_t>();
    e.latency_ms = j.value("latency_ms", 0.0);
    e.attempt_count = j.value("attempt_count", 1);
    e.tokens_estimated = j.value("tokens_estimated", false);
    return e;
}

}  // namespace detail

// One JSON file per exchange under {root}/{hash[0..2]}/{hash}.json.
class ExchangeCache {
public:
    explicit ExchangeCache(std::string root) : root_(std::move(root)) {}

    std::optional<Exchange> get(const std::string& hash) const {
        std::ifstream in(path_for(hash));
        if (!in) return std::nullopt;
        Exchange e = detail::exchange_from_json(nlohmann::json::parse(in));
        e.from_cache = true;
        return e;
    }

    void put(const Exchange& e) const {
        const auto p = path_for(e.request_hash);
        std::filesystem::create_directories(p.parent_path());
        // write-then-rename so concurrent readers never see a torn file
        const auto tmp = p.string() + ".tmp";
        {
            std::ofstream out(tmp);
            out << detail::exchange_to_json(e).dump() << "\n";
        }
        std::filesystem::rename(tmp, p);
    }

private:
    std::filesystem::path path_for(const std::string& hash) const {
        return std::filesystem::path(root_) / hash.substr(0, 2) /
               (hash + ".json");
    }
    std::string root_;
};

struct CostReport {
    double total_usd = 0;
    double per_100_questions_usd = 0;
    bool tokens_estimated = false;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
};

inline CostReport cost_of(const std::vector<Exchange>& exchanges,
                          const PriceTable& prices,
                          std::size_t question_count = 0) {
    CostReport r;
    for (const auto& e : exchanges) {
        r.input_tokens += e.input_tokens;
        r.output_tokens += e.output_tokens;
        r.tokens_estimated |= e.tokens_estimated;
    }
    r.total_usd = (static_cast<double>(r.input_tokens) * prices.input_per_1k +
                   static_cast<double>(r.output_tokens) * prices.output_per_1k) /
                  1000.0;
    const std::size_t n = question_count ? question_count : exchanges.size();
    if (n > 0) r.per_100_questions_usd = r.total_usd * 100.0 / static_cast<double>(n);
    return r;
}

class LvlmClient {
public:
    explicit LvlmClient(BackendConfig config) : config_(std::move(config)) {
        config_.validate();
        if (!config_.cache_root.empty())
            cache_.emplace(config_.cache_root);
        if (config_.kind == BackendKind::Simulated &&
            !config_.scene_store_path.empty())
            scenes_ = SceneStore::load(config_.scene_store_path);
    }

    const BackendConfig& config() const { return config_; }
    SceneStore& scenes() { return scenes_; }

    // `image_ref` doubles as the image digest for hashing: callers that
    // inline real image bytes should pass a digest of those bytes.
    Exchange complete(const PromptText& prompt, const std::string& image_ref,
                      std::uint64_t trial_salt = 0) {
        const std::string hash =
            request_hash(config_, prompt.text, image_ref, trial_salt);
        if (cache_) {
            if (auto hit = cache_->get(hash)) return *hit;
        }
        Exchange e = config_.kind == BackendKind::Simulated
                         ? complete_simulated(prompt, image_ref, trial_salt)
                         : complete_http(prompt, image_ref);
        e.request_hash = hash;
        if (cache_) cache_->put(e);
        return e;
    }

private:
    Exchange complete_simulated(const PromptText& prompt,
                                const std::string& image_ref,
                                std::uint64_t trial_salt);
    Exchange complete_http(const PromptText& prompt,
                           const std::string& image_ref);

    BackendConfig config_;
    std::optional<ExchangeCache> cache_;
    SceneStore scenes_;
    RelationLexicon lexicon_ = RelationLexicon::standard();
};

// ---------------------------------------------------------------------------
// Simulated backend: the "image" is the scene record keyed by image_ref;
// the question text is parsed back into a VQA item.

inline Exchange LvlmClient::complete_simulated(const PromptText& prompt,
                                               const std::string& image_ref,
                                               std::uint64_t trial_salt) {
    if (!scenes_.contains(image_ref))
        throw ImageLoadError("no scene record for image_ref: " + image_ref);
    const Scene& scene = scenes_.get(image_ref);

    auto split = detail::split_question(prompt.question, lexicon_);
    if (!split)
        throw std::invalid_argument(
            "simulated backend cannot parse question: " + prompt.question);
    const LexiconEntry entry = lexicon_.require(split->phrase);
    if (!entry.axis)
        throw std::invalid_argument(
            "simulated backend: axis-ambiguous question phrase: " +
            split->phrase);

    VqaItem item;
    item.id = image_ref + "#" + prompt.question;
    item.image_ref = image_ref;
    item.object_a = split->first;
    item.object_b = split->second;
    item.queried_axis = *entry.axis;
    item.queried_relation = entry.relation;
    item.relation_phrase = split->phrase;

    ErrorModel err = config_.error_model;
    err.seed = mix(mix(config_.seed, err.seed), trial_salt);

    const auto t0 = std::chrono::steady_clock::now();
    const SimResponse resp = respond(prompt.spec, item, scene, err);
    const auto t1 = std::chrono::steady_clock::now();

    Exchange e;
    e.response_text = resp.text;
    e.input_tokens = estimate_tokens(prompt.text);
    e.output_tokens = estimate_tokens(resp.text);
    e.tokens_estimated = true;
    e.latency_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    e.attempt_count = 1;
    return e;
}

}  // namespace srel

// The HTTP path pulls in cpp-httplib; keep it at the bottom so the
// simulated-only compile cost stays visible in one place.
#ifndef SREL_NO_HTTP
#include <httplib.h>

namespace srel {

namespace detail {

struct UrlParts {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/chat/completions
};

inline UrlParts split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("endpoint must include scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

inline Exchange LvlmClient::complete_http(const PromptText& prompt,
                                          const std::string& image_ref) {
    const auto url = detail::split_url(config_.endpoint);
    httplib::Client cli(url.base);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);

    nlohmann::json image_part;
    if (config_.inline_images)
        image_part = {{"type", "image_url"},
                      {"image_url", {{"url", "data:image/png;base64," + image_ref}}}};
    else
        image_part = {{"type", "image_url"}, {"image_url", {{"url", image_ref}}}};

    const nlohmann::json body = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"top_p", config_.top_p},
        {"seed", config_.seed},
        {"messages",
         {{{"role", "user"},
           {"content",
            {{{"type", "text"}, {"text", prompt.text}}, image_part}}}}}};

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()))
        headers.emplace("Authorization", std::string("Bearer ") + key);

    std::string last_error;
    const auto t0 = std::chrono::steady_clock::now();
    for (int attempt = 1; attempt <= config_.max_retries + 1; ++attempt) {
        auto res = cli.Post(url.path, headers, body.dump(), "application/json");
        const bool transient_status =
            res && (res->status == 429 || res->status >= 500);
        if (!res || transient_status) {
            last_error = res ? "status " + std::to_string(res->status)
                             : "transport: " + httplib::to_string(res.error());
            if (attempt <= config_.max_retries) {
                std::this_thread::sleep_for(config_.backoff_base *
                                            (1 << (attempt - 1)));
                continue;
            }
            if (res) throw ProviderError(res->status, res->body);
            throw TransportError("request failed after " +
                                 std::to_string(attempt) +
                                 " attempts: " + last_error);
        }
        if (res->status != 200) throw ProviderError(res->status, res->body);

        const auto t1 = std::chrono::steady_clock::now();
        const auto j = nlohmann::json::parse(res->body);
        Exchange e;
        e.response_text =
            j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage") && j["usage"].contains("prompt_tokens")) {
            e.input_tokens = j["usage"]["prompt_tokens"].get<std::uint64_t>();
            e.output_tokens =
                j["usage"].value("completion_tokens", std::uint64_t{0});
        } else {
            e.input_tokens = estimate_tokens(prompt.text);
            e.output_tokens = estimate_tokens(e.response_text);
            e.tokens_estimated = true;
        }
        e.latency_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        e.attempt_count = attempt;
        return e;
    }
    throw TransportError("unreachable: " + last_error);
}

}  // namespace srel

#endif  // SREL_NO_HTTP
