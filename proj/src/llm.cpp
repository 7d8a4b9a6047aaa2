#include "mpc/llm.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace mpc {

using json = nlohmann::json;

ChatResult chat_with_retry(ChatClient& client, const ChatRequest& request,
                           const RetryPolicy& policy, int* retries_out) {
    int retries = 0;
    for (;;) {
        ChatResult result = client.chat(request);
        if (result.ok() || result.error().kind != "transport" ||
            retries >= policy.max_retries) {
            if (retries_out) *retries_out = retries;
            return result;
        }
        if (policy.sleep) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(policy.base_delay_ms << retries));
        }
        ++retries;
    }
}

TraceLog::TraceLog(std::string path) : path_(std::move(path)) {}

void TraceLog::record(const ChatRequest& request, const ChatResult& result) {
    json entry;
    entry["model_id"] = request.model_id;
    entry["messages"] = json::array();
    for (const auto& m : request.messages)
        entry["messages"].push_back({{"role", m.role}, {"content", m.content}});
    if (result.ok()) {
        entry["response"] = result.value();
    } else {
        entry["error"] = {{"kind", result.error().kind},
                          {"message", result.error().message}};
    }
    std::lock_guard<std::mutex> lock(mu_);
    std::ofstream out(path_, std::ios::app);
    out << entry.dump() << '\n';
}

// --- Mock -------------------------------------------------------------------

MockChatClient::MockChatClient(std::function<std::string(const ChatRequest&)> script)
    : script_(std::move(script)) {}

void MockChatClient::push_response(std::string text) {
    queue_.push_back({false, std::move(text)});
}

void MockChatClient::push_transport_failure(std::string message) {
    queue_.push_back({true, std::move(message)});
}

ChatResult MockChatClient::chat(const ChatRequest& request) {
    std::lock_guard<std::mutex> lock(mu_);
    calls_.push_back(request);
    if (!queue_.empty()) {
        Step step = queue_.front();
        queue_.pop_front();
        if (step.fail) return ChatResult::err({"transport", step.text});
        if (step.text.empty())
            return ChatResult::err({"empty", "scripted empty completion"});
        return step.text;
    }
    if (script_) {
        std::string text = script_(request);
        if (text.empty()) return ChatResult::err({"empty", "script produced no text"});
        return text;
    }
    return ChatResult::err({"empty", "mock response queue exhausted"});
}

// --- Rate limiting ----------------------------------------------------------

RateLimiter::RateLimiter(int requests_per_minute)
    : capacity_(static_cast<double>(requests_per_minute)),
      tokens_(static_cast<double>(requests_per_minute)),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    for (;;) {
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto now = std::chrono::steady_clock::now();
            double elapsed_s =
                std::chrono::duration<double>(now - last_).count();
            last_ = now;
            tokens_ = std::min(capacity_, tokens_ + elapsed_s * capacity_ / 60.0);
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

// --- HTTP -------------------------------------------------------------------

namespace {

httplib::Headers auth_headers(const HttpClientConfig& config) {
    httplib::Headers headers;
    if (!config.api_key_env.empty()) {
        if (const char* key = std::getenv(config.api_key_env.c_str()))
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    return headers;
}

}  // namespace

HttpChatClient::HttpChatClient(HttpClientConfig config)
    : config_(std::move(config)),
      limiter_(std::make_shared<RateLimiter>(config_.requests_per_minute)) {}

ChatResult HttpChatClient::chat(const ChatRequest& request) {
    limiter_->acquire();
    json body;
    body["model"] = request.model_id;
    body["messages"] = json::array();
    for (const auto& m : request.messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = request.decoding.temperature;
    body["top_p"] = request.decoding.top_p;
    body["top_k"] = request.decoding.top_k;
    body["max_tokens"] = request.decoding.max_tokens;

    httplib::Client cli(config_.base_url);
    cli.set_read_timeout(config_.timeout_s, 0);
    auto res = cli.Post(config_.chat_path, auth_headers(config_), body.dump(),
                        "application/json");
    if (!res)
        return ChatResult::err(
            {"transport", "no response from " + config_.base_url});
    if (res->status != 200) {
        std::string kind = (res->status >= 500 || res->status == 429)
                               ? "transport"
                               : "protocol";
        return ChatResult::err(
            {kind, "status " + std::to_string(res->status) + ": " + res->body});
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded())
        return ChatResult::err({"protocol", "unparseable response body"});
    try {
        std::string content =
            reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (content.empty())
            return ChatResult::err({"empty", "empty completion"});
        return content;
    } catch (const json::exception& e) {
        return ChatResult::err({"protocol", std::string("bad response shape: ") + e.what()});
    }
}

// --- Embeddings -------------------------------------------------------------

HttpEmbeddingProvider::HttpEmbeddingProvider(HttpClientConfig config,
                                             std::string model_id)
    : config_(std::move(config)),
      model_id_(std::move(model_id)),
      limiter_(std::make_shared<RateLimiter>(config_.requests_per_minute)) {}

EmbedResult HttpEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    limiter_->acquire();
    json body;
    body["model"] = model_id_;
    body["input"] = texts;

    httplib::Client cli(config_.base_url);
    cli.set_read_timeout(config_.timeout_s, 0);
    auto res = cli.Post(config_.embeddings_path, auth_headers(config_), body.dump(),
                        "application/json");
    if (!res) return EmbedResult::err("no response from " + config_.base_url);
    if (res->status != 200)
        return EmbedResult::err("status " + std::to_string(res->status));
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) return EmbedResult::err("unparseable response body");

    std::vector<EmbeddingVector> out(texts.size());
    try {
        for (const auto& item : reply.at("data")) {
            std::size_t index = item.at("index").get<std::size_t>();
            if (index >= out.size()) return EmbedResult::err("index out of range");
            out[index].values = item.at("embedding").get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        return EmbedResult::err(std::string("bad response shape: ") + e.what());
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].dimension() != out[0].dimension())
            return EmbedResult::err("dimension mismatch within batch");
    }
    return out;
}

Result<std::unique_ptr<FileEmbeddingProvider>, std::string> FileEmbeddingProvider::open(
    const std::string& path) {
    using R = Result<std::unique_ptr<FileEmbeddingProvider>, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open embedding file: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return R::err("embedding file is not a JSON object: " + path);
    auto provider = std::unique_ptr<FileEmbeddingProvider>(new FileEmbeddingProvider());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_array()) return R::err("non-array vector for key " + it.key());
        provider->table_[it.key()] =
            EmbeddingVector{it.value().get<std::vector<double>>()};
    }
    return R(std::move(provider));
}

EmbedResult FileEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto it = table_.find(fnv1a64_hex(t));
        if (it == table_.end())
            return EmbedResult::err("missing embedding for text: " +
                                    t.substr(0, 60));
        out.push_back(it->second);
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].dimension() != out[0].dimension())
            return EmbedResult::err("dimension mismatch within batch");
    }
    return out;
}

HashEmbeddingProvider::HashEmbeddingProvider(int dimension) : dimension_(dimension) {}

EmbedResult HashEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        EmbeddingVector v;
        v.values.resize(dimension_);
        std::uint64_t state = fnv1a64(t) | 1ull;
        double norm2 = 0.0;
        for (int i = 0; i < dimension_; ++i) {
            // splitmix64 step
            state += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = state;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            z ^= z >> 31;
            double u = static_cast<double>(z >> 11) / 9007199254740992.0;  // [0,1)
            v.values[i] = 2.0 * u - 1.0;
            norm2 += v.values[i] * v.values[i];
        }
        double norm = std::sqrt(norm2);
        for (auto& x : v.values) x /= norm;
        out.push_back(std::move(v));
    }
    return out;
}

CachingEmbedder::CachingEmbedder(std::unique_ptr<EmbeddingProvider> provider)
    : provider_(std::move(provider)) {}

EmbedResult CachingEmbedder::embed(const std::vector<std::string>& texts) {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> missing;
    for (const auto& t : texts) {
        if (!cache_.count(t)) missing.push_back(t);
    }
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    if (!missing.empty()) {
        auto fetched = provider_->embed(missing);
        ++provider_calls_;
        if (!fetched.ok()) return fetched;
        for (std::size_t i = 0; i < missing.size(); ++i)
            cache_[missing[i]] = fetched.value()[i];
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(cache_.at(t));
    return out;
}

}  // namespace mpc
