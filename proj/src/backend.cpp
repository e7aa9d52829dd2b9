#include "promptforge/backend.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "promptforge/errors.hpp"

namespace promptforge {

using nlohmann::json;

const char* backend_error_kind_name(BackendErrorKind kind) {
    switch (kind) {
        case BackendErrorKind::ContentFiltered: return "content_filtered";
        case BackendErrorKind::Transport: return "transport";
        case BackendErrorKind::Provider: return "provider";
    }
    return "transport";
}

void GenParams::validate() const {
    if (model.empty()) fail(Errc::InvalidArgument, "model must be non-empty");
    if (!std::isfinite(temperature) || temperature < 0.0)
        fail(Errc::InvalidArgument, "temperature must be finite and >= 0");
    if (max_tokens <= 0) fail(Errc::InvalidArgument, "max_tokens must be positive");
    if (n < 1) fail(Errc::InvalidArgument, "n must be >= 1");
}

CompletionResult CompletionResult::success(std::vector<std::string> texts, Usage usage) {
    return CompletionResult{std::move(texts), usage};
}

CompletionResult CompletionResult::failure(BackendErrorKind kind, std::string detail, Usage usage) {
    return CompletionResult{BackendError{kind, std::move(detail)}, usage};
}

std::string request_fingerprint(const ChatMessages& messages, const GenParams& params) {
    json canonical;
    canonical["model"] = params.model;
    canonical["temperature"] = params.temperature;
    canonical["max_tokens"] = params.max_tokens;
    canonical["n"] = params.n;
    if (params.seed)
        canonical["seed"] = *params.seed;
    else
        canonical["seed"] = nullptr;
    json rendered = json::array();
    for (const auto& message : messages)
        rendered.push_back(json::array({message.role, message.content}));
    canonical["messages"] = std::move(rendered);

    const std::string bytes = canonical.dump();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);

    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

// --- scripted ---------------------------------------------------------------

ScriptedBackend::ScriptedBackend(std::vector<ScriptedRule> rules, std::string fallback_response,
                                 bool batch_n)
    : rules_(std::move(rules)), fallback_(std::move(fallback_response)), batch_n_(batch_n) {
    for (const auto& rule : rules_) {
        if (!rule.error && rule.responses.empty())
            fail(Errc::InvalidArgument, "scripted rule needs responses or an error");
        cursors_.push_back(std::make_unique<std::atomic<uint64_t>>(0));
    }
}

CompletionResult ScriptedBackend::complete(const ChatMessages& messages,
                                           const GenParams& params) {
    params.validate();
    std::string prompt;
    for (const auto& message : messages) {
        prompt += message.content;
        prompt.push_back('\n');
    }
    for (size_t i = 0; i < rules_.size(); ++i) {
        const auto& rule = rules_[i];
        if (prompt.find(rule.contains) == std::string::npos) continue;
        if (rule.error) return CompletionResult{*rule.error, {}};
        const uint64_t start = rule.responses.size() > 1
                                   ? cursors_[i]->fetch_add(static_cast<uint64_t>(params.n))
                                   : 0;
        std::vector<std::string> texts;
        texts.reserve(static_cast<size_t>(params.n));
        for (int g = 0; g < params.n; ++g)
            texts.push_back(rule.responses[(start + static_cast<uint64_t>(g)) % rule.responses.size()]);
        return CompletionResult::success(std::move(texts));
    }
    return CompletionResult::success(
        std::vector<std::string>(static_cast<size_t>(params.n), fallback_));
}

// --- http --------------------------------------------------------------------

namespace {

json request_body(const ChatMessages& messages, const GenParams& params) {
    json body;
    body["model"] = params.model;
    json rendered = json::array();
    for (const auto& message : messages)
        rendered.push_back({{"role", message.role}, {"content", message.content}});
    body["messages"] = std::move(rendered);
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;
    body["n"] = params.n;
    if (params.seed) body["seed"] = *params.seed;
    return body;
}

Usage usage_from(const json& payload) {
    Usage usage;
    if (payload.contains("usage") && payload["usage"].is_object()) {
        const auto& u = payload["usage"];
        usage.prompt_tokens = u.value("prompt_tokens", 0L);
        usage.completion_tokens = u.value("completion_tokens", 0L);
    }
    return usage;
}

bool retryable_status(int status) {
    return status == 408 || status == 429 || status >= 500;
}

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : fallback;
}

}  // namespace

HttpBackend::HttpBackend(HttpOptions options, std::unique_ptr<Transport> transport)
    : options_(std::move(options)), transport_(std::move(transport)) {
    if (options_.base_url.empty()) options_.base_url = env_or("PROMPTFORGE_BASE_URL", "");
    if (options_.api_key.empty()) options_.api_key = env_or("PROMPTFORGE_API_KEY", "");
    if (!transport_) transport_ = make_http_transport(options_.timeout_seconds);
}

CompletionResult HttpBackend::complete(const ChatMessages& messages, const GenParams& params) {
    params.validate();
    if (options_.base_url.empty())
        fail(Errc::InvalidArgument, "no base URL configured (set PROMPTFORGE_BASE_URL)");
    const std::string url = options_.base_url + "/chat/completions";
    const std::string body = request_body(messages, params).dump();

    BackendError last{BackendErrorKind::Transport, "no attempt made"};
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = options_.backoff_base_ms * (1L << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        auto response = transport_->post(url, options_.api_key, body);
        if (!response.connected) {
            last = {BackendErrorKind::Transport, "connection failed"};
            continue;
        }
        if (response.status == 200) {
            json payload = json::parse(response.body, nullptr, false);
            if (payload.is_discarded() || !payload.contains("choices"))
                return CompletionResult::failure(BackendErrorKind::Provider,
                                                 "malformed completion response");
            std::vector<std::string> texts;
            for (const auto& choice : payload["choices"]) {
                if (choice.value("finish_reason", "") == "content_filter")
                    return CompletionResult::failure(BackendErrorKind::ContentFiltered,
                                                     "completion truncated by content filter",
                                                     usage_from(payload));
                texts.push_back(choice.contains("message")
                                    ? choice["message"].value("content", "")
                                    : choice.value("text", ""));
            }
            if (texts.size() != static_cast<size_t>(params.n))
                return CompletionResult::failure(
                    BackendErrorKind::Provider,
                    "expected " + std::to_string(params.n) + " choices, got " +
                        std::to_string(texts.size()),
                    usage_from(payload));
            return CompletionResult::success(std::move(texts), usage_from(payload));
        }
        // Azure-style request blocking surfaces as a 400 naming the filter.
        // Content filtering is a deterministic policy outcome: never retried.
        if (response.status == 400 && response.body.find("content_filter") != std::string::npos)
            return CompletionResult::failure(BackendErrorKind::ContentFiltered,
                                             "request blocked by content filter");
        if (retryable_status(response.status)) {
            last = {BackendErrorKind::Transport, "HTTP " + std::to_string(response.status)};
            continue;
        }
        return CompletionResult::failure(BackendErrorKind::Provider,
                                         "HTTP " + std::to_string(response.status) + ": " +
                                             response.body.substr(0, 200));
    }
    return CompletionResult{last, {}};
}

// --- replay ------------------------------------------------------------------

namespace {

json result_to_json(const std::string& fingerprint, const CompletionResult& result) {
    json entry;
    entry["fingerprint"] = fingerprint;
    if (result.ok()) {
        entry["texts"] = result.texts();
    } else {
        entry["error"] = {{"kind", backend_error_kind_name(result.error().kind)},
                          {"detail", result.error().detail}};
    }
    entry["usage"] = {{"prompt_tokens", result.usage.prompt_tokens},
                      {"completion_tokens", result.usage.completion_tokens}};
    return entry;
}

CompletionResult result_from_json(const json& entry) {
    Usage usage;
    if (entry.contains("usage")) {
        usage.prompt_tokens = entry["usage"].value("prompt_tokens", 0L);
        usage.completion_tokens = entry["usage"].value("completion_tokens", 0L);
    }
    if (entry.contains("texts"))
        return CompletionResult::success(entry["texts"].get<std::vector<std::string>>(), usage);
    const auto& err = entry.at("error");
    const std::string kind = err.value("kind", "provider");
    BackendErrorKind parsed = BackendErrorKind::Provider;
    if (kind == "content_filtered") parsed = BackendErrorKind::ContentFiltered;
    if (kind == "transport") parsed = BackendErrorKind::Transport;
    return CompletionResult::failure(parsed, err.value("detail", ""), usage);
}

}  // namespace

ReplayBackend::ReplayBackend(std::shared_ptr<Backend> inner, std::string cache_path,
                             ReplayMode mode)
    : inner_(std::move(inner)), cache_path_(std::move(cache_path)), mode_(mode) {
    if (mode_ != ReplayMode::Replay && !inner_)
        fail(Errc::InvalidArgument, "record/off replay modes need an inner backend");
    if (cache_path_.empty()) return;
    std::ifstream in(cache_path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json entry = json::parse(line, nullptr, false);
        if (entry.is_discarded() || !entry.contains("fingerprint")) continue;
        const std::string fingerprint = entry["fingerprint"].get<std::string>();
        if (!lookup_locked(fingerprint))  // first entry wins
            entries_.emplace_back(fingerprint, result_from_json(entry));
    }
}

const CompletionResult* ReplayBackend::lookup_locked(const std::string& fingerprint) const {
    for (const auto& [key, result] : entries_)
        if (key == fingerprint) return &result;
    return nullptr;
}

size_t ReplayBackend::entry_count() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

bool ReplayBackend::supports_batch_n() const {
    return inner_ ? inner_->supports_batch_n() : true;
}

CompletionResult ReplayBackend::complete(const ChatMessages& messages, const GenParams& params) {
    if (mode_ == ReplayMode::Off) return inner_->complete(messages, params);

    const std::string fingerprint = request_fingerprint(messages, params);
    {
        std::lock_guard lock(mutex_);
        if (const auto* hit = lookup_locked(fingerprint)) return *hit;
    }
    if (mode_ == ReplayMode::Replay)
        fail(Errc::ReplayMiss, "no cached completion for fingerprint " + fingerprint);

    CompletionResult result = inner_->complete(messages, params);
    const bool cacheable =
        result.ok() || result.error().kind == BackendErrorKind::ContentFiltered;
    if (cacheable) {
        std::lock_guard lock(mutex_);
        if (const auto* hit = lookup_locked(fingerprint)) return *hit;
        entries_.emplace_back(fingerprint, result);
        if (!cache_path_.empty()) {
            std::ofstream out(cache_path_, std::ios::app);
            if (!out) fail(Errc::IoError, "cannot append to replay cache " + cache_path_);
            out << result_to_json(fingerprint, result).dump() << "\n";
        }
    }
    return result;
}

}  // namespace promptforge
