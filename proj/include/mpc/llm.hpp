#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpc/common.hpp"
#include "mpc/core.hpp"

namespace mpc {

struct ChatMessage {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;  // first message must be the system prompt
    DecodingParams decoding;
    std::string model_id;
};

struct ChatError {
    std::string kind;  // "transport" | "protocol" | "empty"
    std::string message;
};

using ChatResult = Result<std::string, ChatError>;

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual ChatResult chat(const ChatRequest& request) = 0;
};

struct RetryPolicy {
    int max_retries = 3;
    int base_delay_ms = 200;  // doubles per attempt
    bool sleep = true;        // disabled in tests
};

// Retries transport-level failures only; protocol and empty-completion
// errors surface immediately. retries_out reports the retry count used.
ChatResult chat_with_retry(ChatClient& client, const ChatRequest& request,
                           const RetryPolicy& policy, int* retries_out = nullptr);

// Appends request/response pairs as JSON lines. Thread-safe.
class TraceLog {
public:
    explicit TraceLog(std::string path);
    void record(const ChatRequest& request, const ChatResult& result);

private:
    std::string path_;
    std::mutex mu_;
};

// --- Mock -------------------------------------------------------------------

// Scripted client. Two modes:
//  - queue mode: responses (or injected failures) consumed in FIFO order;
//  - script mode: a deterministic function of the request.
// Every request is recorded in call_log().
class MockChatClient : public ChatClient {
public:
    MockChatClient() = default;
    explicit MockChatClient(std::function<std::string(const ChatRequest&)> script);

    void push_response(std::string text);
    void push_transport_failure(std::string message = "injected failure");

    ChatResult chat(const ChatRequest& request) override;

    const std::vector<ChatRequest>& call_log() const { return calls_; }

private:
    struct Step {
        bool fail = false;
        std::string text;
    };
    std::deque<Step> queue_;
    std::function<std::string(const ChatRequest&)> script_;
    std::vector<ChatRequest> calls_;
    std::mutex mu_;
};

// --- HTTP -------------------------------------------------------------------

// Simple token bucket; capacity = requests_per_minute, refilled continuously.
class RateLimiter {
public:
    explicit RateLimiter(int requests_per_minute);
    void acquire();

private:
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

struct HttpClientConfig {
    std::string base_url;          // e.g. http://localhost:8000
    std::string api_key_env;       // env var holding the credential
    std::string chat_path = "/v1/chat/completions";
    std::string embeddings_path = "/v1/embeddings";
    int requests_per_minute = 600;
    int timeout_s = 120;
};

// OpenAI-compatible chat completions over HTTP.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpClientConfig config);
    ChatResult chat(const ChatRequest& request) override;

private:
    HttpClientConfig config_;
    std::shared_ptr<RateLimiter> limiter_;
};

// --- Embeddings -------------------------------------------------------------

struct EmbeddingVector {
    std::vector<double> values;
    int dimension() const { return static_cast<int>(values.size()); }
};

using EmbedResult = Result<std::vector<EmbeddingVector>, std::string>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual EmbedResult embed(const std::vector<std::string>& texts) = 0;
};

// OpenAI-compatible /v1/embeddings.
class HttpEmbeddingProvider : public EmbeddingProvider {
public:
    HttpEmbeddingProvider(HttpClientConfig config, std::string model_id);
    EmbedResult embed(const std::vector<std::string>& texts) override;

private:
    HttpClientConfig config_;
    std::string model_id_;
    std::shared_ptr<RateLimiter> limiter_;
};

// Precomputed vectors keyed by fnv1a64_hex(text) in a JSON object file.
class FileEmbeddingProvider : public EmbeddingProvider {
public:
    static Result<std::unique_ptr<FileEmbeddingProvider>, std::string> open(
        const std::string& path);
    EmbedResult embed(const std::vector<std::string>& texts) override;

private:
    std::unordered_map<std::string, EmbeddingVector> table_;
};

// Deterministic pseudo-embeddings derived from the text hash. Offline runs
// and tests only; not semantically meaningful.
class HashEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(int dimension = 16);
    EmbedResult embed(const std::vector<std::string>& texts) override;

private:
    int dimension_;
};

// Content-addressed cache in front of a provider: at most one provider call
// per distinct text per process lifetime. Thread-safe.
class CachingEmbedder {
public:
    explicit CachingEmbedder(std::unique_ptr<EmbeddingProvider> provider);
    EmbedResult embed(const std::vector<std::string>& texts);
    std::size_t provider_calls() const { return provider_calls_; }

private:
    std::unique_ptr<EmbeddingProvider> provider_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
    std::size_t provider_calls_ = 0;
    std::mutex mu_;
};

}  // namespace mpc
