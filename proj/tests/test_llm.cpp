#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mpc/llm.hpp"

using namespace mpc;

namespace {

ChatRequest simple_request(const std::string& user = "hi") {
    ChatRequest r;
    r.model_id = "m";
    r.messages = {{"system", "sys"}, {"user", user}};
    return r;
}

}  // namespace

TEST_CASE("mock queue passthrough") {
    MockChatClient client;
    client.push_response("hello");
    auto result = client.chat(simple_request());
    REQUIRE(result.ok());
    CHECK(result.value() == "hello");
    CHECK(client.call_log().size() == 1);
}

TEST_CASE("retry: fail twice then succeed, counter = 2") {
    MockChatClient client;
    client.push_transport_failure();
    client.push_transport_failure();
    client.push_response("ok");
    int retries = -1;
    auto result = chat_with_retry(client, simple_request(), {3, 1, false}, &retries);
    REQUIRE(result.ok());
    CHECK(result.value() == "ok");
    CHECK(retries == 2);
}

TEST_CASE("retry gives up after budget") {
    MockChatClient client;
    for (int i = 0; i < 5; ++i) client.push_transport_failure();
    auto result = chat_with_retry(client, simple_request(), {3, 1, false});
    REQUIRE_FALSE(result.ok());
    CHECK(result.error().kind == "transport");
}

TEST_CASE("empty queue yields empty-completion error, not retried") {
    MockChatClient client;
    auto result = chat_with_retry(client, simple_request(), {3, 1, false});
    REQUIRE_FALSE(result.ok());
    CHECK(result.error().kind == "empty");
    CHECK(client.call_log().size() == 1);
}

TEST_CASE("script mode is a pure function of the request") {
    MockChatClient client([](const ChatRequest& r) {
        return "echo:" + r.messages.back().content;
    });
    CHECK(client.chat(simple_request("a")).value() == "echo:a");
    CHECK(client.chat(simple_request("a")).value() == "echo:a");
    CHECK(client.chat(simple_request("b")).value() == "echo:b");
}

TEST_CASE("chat does not mutate the request") {
    MockChatClient client;
    client.push_response("x");
    ChatRequest request = simple_request("original");
    ChatRequest copy = request;
    client.chat(request);
    CHECK(request.messages.size() == copy.messages.size());
    CHECK(request.messages.back().content == copy.messages.back().content);
}

TEST_CASE("hash embeddings: deterministic, fixed dimension, unit norm") {
    HashEmbeddingProvider provider(16);
    auto a = provider.embed({"alpha", "beta", "alpha"});
    REQUIRE(a.ok());
    REQUIRE(a.value().size() == 3);
    CHECK(a.value()[0].dimension() == 16);
    CHECK(a.value()[0].values == a.value()[2].values);
    CHECK(a.value()[0].values != a.value()[1].values);
    double norm = 0;
    for (double v : a.value()[0].values) norm += v * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("batch order preserved") {
    HashEmbeddingProvider provider;
    auto batch = provider.embed({"one", "two", "three"});
    REQUIRE(batch.ok());
    auto single = provider.embed({"two"});
    REQUIRE(single.ok());
    CHECK(batch.value()[1].values == single.value()[0].values);
}

namespace {

class CountingProvider : public EmbeddingProvider {
public:
    EmbedResult embed(const std::vector<std::string>& texts) override {
        calls += texts.size();
        std::vector<EmbeddingVector> out;
        for (const auto& t : texts)
            out.push_back({{static_cast<double>(t.size()), 1.0}});
        return out;
    }
    std::size_t calls = 0;
};

}  // namespace

TEST_CASE("embedding cache: at most one provider call per distinct text") {
    auto owned = std::make_unique<CountingProvider>();
    auto* provider = owned.get();
    CachingEmbedder embedder(std::move(owned));
    auto first = embedder.embed({"x", "y", "x"});
    REQUIRE(first.ok());
    CHECK(provider->calls == 2);
    auto second = embedder.embed({"y", "x", "z"});
    REQUIRE(second.ok());
    CHECK(provider->calls == 3);
    CHECK(first.value()[0].values == second.value()[1].values);
}

TEST_CASE("file provider: hit and missing key") {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / "mpc_test_embeddings.json").string();
    {
        nlohmann::json j;
        j[fnv1a64_hex("known text")] = {0.6, 0.8};
        std::ofstream out(path);
        out << j.dump();
    }
    auto provider = FileEmbeddingProvider::open(path);
    REQUIRE(provider.ok());
    auto hit = provider.value()->embed({"known text"});
    REQUIRE(hit.ok());
    CHECK(hit.value()[0].values == std::vector<double>{0.6, 0.8});
    auto miss = provider.value()->embed({"unknown text"});
    CHECK_FALSE(miss.ok());
    fs::remove(path);
}

TEST_CASE("trace log records request/response pairs") {
    namespace fs = std::filesystem;
    const std::string path =
        (fs::temp_directory_path() / "mpc_test_trace.jsonl").string();
    fs::remove(path);
    {
        TraceLog trace(path);
        trace.record(simple_request("q"), ChatResult(std::string("a")));
        trace.record(simple_request("q2"),
                     ChatResult::err({"transport", "boom"}));
    }
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        auto j = nlohmann::json::parse(line, nullptr, false);
        CHECK_FALSE(j.is_discarded());
    }
    CHECK(lines == 2);
    fs::remove(path);
}
