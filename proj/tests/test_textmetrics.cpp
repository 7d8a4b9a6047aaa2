#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "mpc/textmetrics.hpp"

using namespace mpc;

// --- independent oracles ----------------------------------------------------

namespace {

// brute-force n-gram type counter over tokenized text
double oracle_repetition_rate(const std::vector<std::string>& texts, int n_max) {
    std::vector<std::string> tokens;
    for (const auto& text : texts) {
        auto t = tokenize(text);
        tokens.insert(tokens.end(), t.begin(), t.end());
    }
    double product = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        std::map<std::vector<std::string>, int> counts;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i)
            ++counts[std::vector<std::string>(tokens.begin() + static_cast<long>(i),
                                              tokens.begin() + static_cast<long>(i) + n)];
        std::size_t repeated = 0;
        for (const auto& [gram, count] : counts)
            if (count >= 2) ++repeated;
        if (counts.empty() || repeated == 0) return 0.0;
        product *= static_cast<double>(repeated) / static_cast<double>(counts.size());
    }
    return 100.0 * std::pow(product, 1.0 / n_max);
}

// quadratic LCS table
int oracle_lcs(const std::string& a, const std::string& b) {
    std::vector<std::vector<int>> dp(a.size() + 1, std::vector<int>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1]
                           ? dp[i - 1][j - 1] + 1
                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    return dp[a.size()][b.size()];
}

int oracle_similarity(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 100;
    return static_cast<int>(std::lround(
        200.0 * oracle_lcs(a, b) / static_cast<double>(a.size() + b.size())));
}

std::string random_string(std::mt19937_64& rng, int max_len) {
    std::uniform_int_distribution<int> len_dist(0, max_len);
    std::uniform_int_distribution<int> char_dist('a', 'f');
    const int len = len_dist(rng);
    std::string out;
    for (int i = 0; i < len; ++i)
        out.push_back(static_cast<char>(char_dist(rng)));
    return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on punctuation") {
    auto tokens = tokenize("Hello, World! it's 42.");
    CHECK(tokens == std::vector<std::string>{"hello", "world", "it", "s", "42"});
    CHECK(tokenize("").empty());
}

TEST_CASE("repetition rate: fixed points") {
    // all-unique text -> 0
    auto unique_text = repetition_rate({"alpha beta gamma delta epsilon zeta"});
    REQUIRE(unique_text.ok());
    CHECK(unique_text.value() == 0.0);

    // "a a a a a": one type per order, all repeated -> 100
    auto constant = repetition_rate({"a a a a a"});
    REQUIRE(constant.ok());
    CHECK(constant.value() == doctest::Approx(100.0).epsilon(1e-12));

    // three copies in one stream: every n-gram type up to order 4 repeats
    auto repeated = repetition_rate(
        {"red green blue white", "red green blue white red green blue white"});
    REQUIRE(repeated.ok());
    CHECK(repeated.value() == doctest::Approx(100.0).epsilon(1e-12));

    // fewer than n_max tokens is an error
    CHECK_FALSE(repetition_rate({"one two three"}).ok());
}

TEST_CASE("repetition rate matches brute-force oracle on random clusters") {
    std::mt19937_64 rng(5);
    static const std::vector<std::string> vocabulary = {"ab", "cd", "ef", "gh",
                                                        "ij", "kl"};
    for (int trial = 0; trial < 100; ++trial) {
        std::uniform_int_distribution<int> texts_dist(1, 4);
        std::uniform_int_distribution<int> len_dist(4, 30);
        std::uniform_int_distribution<std::size_t> word_dist(0, vocabulary.size() - 1);
        std::vector<std::string> texts;
        const int n_texts = texts_dist(rng);
        for (int i = 0; i < n_texts; ++i) {
            std::string text;
            const int len = len_dist(rng);
            for (int w = 0; w < len; ++w) {
                if (w) text += ' ';
                text += vocabulary[word_dist(rng)];
            }
            texts.push_back(std::move(text));
        }
        auto measured = repetition_rate(texts);
        REQUIRE(measured.ok());
        CHECK(measured.value() ==
              doctest::Approx(oracle_repetition_rate(texts, 4)).epsilon(1e-9));
    }
}

TEST_CASE("repetition rate is invariant to text order within the cluster") {
    std::vector<std::string> texts = {"one two three four", "two three four five",
                                      "five four three two"};
    auto forward = repetition_rate(texts);
    std::reverse(texts.begin(), texts.end());
    auto backward = repetition_rate(texts);
    REQUIRE(forward.ok());
    REQUIRE(backward.ok());
    CHECK(forward.value() == doctest::Approx(backward.value()).epsilon(1e-12));
}

TEST_CASE("string similarity: fixed points") {
    CHECK(string_similarity("same text", "same text") == 100);
    CHECK(string_similarity("", "") == 100);
    CHECK(string_similarity("aaa", "bbb") == 0);
    CHECK(string_similarity("kitten", "sitting") == 62);  // LCS=4, 800/13
}

TEST_CASE("string similarity matches DP-LCS oracle on 500 random pairs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        std::string a = random_string(rng, 40);
        std::string b = random_string(rng, 40);
        CHECK(string_similarity(a, b) == oracle_similarity(a, b));
        CHECK(string_similarity(a, b) == string_similarity(b, a));
        CHECK(string_similarity(a, b) >= 0);
        CHECK(string_similarity(a, b) <= 100);
        if (a != b) CHECK(string_similarity(a, b) < 100);
    }
}

TEST_CASE("levenshtein variant differs from indel form") {
    CHECK(string_similarity_levenshtein("same", "same") == 100);
    // kitten/sitting: levenshtein distance 3, max length 7 -> 57
    CHECK(string_similarity_levenshtein("kitten", "sitting") == 57);
}

TEST_CASE("semantic coherence") {
    EmbeddingVector v{{1.0, 2.0, 3.0}};
    EmbeddingVector w{{4.0, 5.0, 6.0}};
    auto same = semantic_coherence(v, v);
    REQUIRE(same.ok());
    CHECK(same.value() == doctest::Approx(1.0).epsilon(1e-12));

    EmbeddingVector e1{{1.0, 0.0}};
    EmbeddingVector e2{{0.0, 1.0}};
    CHECK(semantic_coherence(e1, e2).value() == doctest::Approx(0.0));

    auto known = semantic_coherence(v, w);
    REQUIRE(known.ok());
    CHECK(known.value() == doctest::Approx(0.9746).epsilon(1e-4));

    // scale invariance
    EmbeddingVector scaled{{2.5, 5.0, 7.5}};
    CHECK(semantic_coherence(v, scaled).value() ==
          doctest::Approx(1.0).epsilon(1e-12));

    CHECK_FALSE(semantic_coherence(v, e1).ok());             // dimension mismatch
    CHECK_FALSE(semantic_coherence(e1, {{0.0, 0.0}}).ok());  // zero vector
}

namespace {

TopicCluster cluster_of(std::vector<Mpc> conversations) {
    TopicCluster cluster;
    cluster.topic_key = "k";
    cluster.conversations = std::move(conversations);
    return cluster;
}

Mpc with_messages(const std::vector<std::string>& messages, int replicate) {
    Mpc m = testutil::make_mpc(4, static_cast<int>(messages.size()),
                               "civil-topic", Polarity::progressive, replicate);
    for (std::size_t i = 0; i < messages.size(); ++i)
        m.turns[i].message = messages[i];
    return m;
}

}  // namespace

TEST_CASE("topic pairwise score: pooling semantics") {
    auto scorer = [](const std::string& a, const std::string& b) {
        return static_cast<double>(string_similarity(a, b));
    };

    // 2 single-turn conversations: pool of one score
    auto tiny = cluster_of({with_messages({"hello there"}, 0),
                            with_messages({"hello there"}, 1)});
    auto tiny_score = topic_pairwise_score(tiny, scorer);
    REQUIRE(tiny_score.ok());
    CHECK(tiny_score.value() == doctest::Approx(100.0));

    // one 100-score pair among many 0 pairs -> (100+0+0+0+0)/5 = 20
    auto mixed = cluster_of(
        {with_messages({"xxxx", "yyyy", "zzzz"}, 0),
         with_messages({"xxxx", "qqqq", "wwww"}, 1)});
    auto mixed_scorer = [](const std::string& a, const std::string& b) {
        return a == "xxxx" && b == "xxxx" ? 100.0 : 0.0;
    };
    auto mixed_score = topic_pairwise_score(mixed, mixed_scorer);
    REQUIRE(mixed_score.ok());
    CHECK(mixed_score.value() == doctest::Approx(20.0));

    // fewer than 2 conversations is an error
    CHECK_FALSE(topic_pairwise_score(cluster_of({with_messages({"x"}, 0)}),
                                     scorer)
                    .ok());
}

TEST_CASE("topic pairwise score: no intra-conversation pairs scored") {
    auto a = with_messages({"first a", "second a"}, 0);
    auto b = with_messages({"first b", "second b"}, 1);
    std::set<std::pair<std::string, std::string>> seen;
    auto instrumented = [&](const std::string& x, const std::string& y) {
        seen.insert({x, y});
        return 0.0;
    };
    auto score = topic_pairwise_score_serial(cluster_of({a, b}), instrumented);
    REQUIRE(score.ok());
    for (const auto& [x, y] : seen) {
        const bool x_in_a = x.find(" a") != std::string::npos;
        const bool y_in_a = y.find(" a") != std::string::npos;
        CHECK(x_in_a != y_in_a);
    }
}

TEST_CASE("topic pairwise score: parallel equals serial") {
    std::mt19937_64 rng(31);
    std::vector<Mpc> conversations;
    for (int i = 0; i < 8; ++i) conversations.push_back(testutil::random_mpc(rng, i));
    for (auto& m : conversations) {
        m.statement = testutil::statement();  // same cluster key
    }
    auto scorer = [](const std::string& a, const std::string& b) {
        return static_cast<double>(string_similarity(a, b));
    };
    auto cluster = cluster_of(conversations);
    auto parallel = topic_pairwise_score(cluster, scorer);
    auto serial = topic_pairwise_score_serial(cluster, scorer);
    REQUIRE(parallel.ok());
    REQUIRE(serial.ok());
    CHECK(parallel.value() == doctest::Approx(serial.value()).epsilon(1e-12));
}

TEST_CASE("duplicating a conversation never decreases the topic score") {
    auto scorer = [](const std::string& a, const std::string& b) {
        return static_cast<double>(string_similarity(a, b));
    };
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = testutil::random_mpc(rng, trial * 2);
        auto b = testutil::random_mpc(rng, trial * 2 + 1);
        auto base = topic_pairwise_score_serial(cluster_of({a, b}), scorer);
        auto c = b;
        c.id += "-copy";
        auto extended = topic_pairwise_score_serial(cluster_of({a, b, c}), scorer);
        REQUIRE(base.ok());
        REQUIRE(extended.ok());
        CHECK(extended.value() >= base.value() - 1e-12);
    }
}

TEST_CASE("cluster_by_statement keys on statement, members sorted by id") {
    std::vector<Mpc> corpus = {
        testutil::make_mpc(4, 5, "t1", Polarity::progressive, 1),
        testutil::make_mpc(4, 5, "t1", Polarity::progressive, 0),
        testutil::make_mpc(4, 5, "t1", Polarity::conservative, 0),
        testutil::make_mpc(4, 5, "t2", Polarity::progressive, 0),
    };
    auto clusters = cluster_by_statement(corpus);
    CHECK(clusters.size() == 3);
    for (const auto& cluster : clusters)
        for (std::size_t i = 1; i < cluster.conversations.size(); ++i)
            CHECK(cluster.conversations[i - 1].id < cluster.conversations[i].id);
}

TEST_CASE("variability report: degenerate duplicates and single topic") {
    CachingEmbedder embedder(std::make_unique<HashEmbeddingProvider>());
    // identical conversations in one topic: similarity 100, coherence 1.0
    std::vector<Mpc> group = {
        testutil::make_mpc(4, 5, "only-topic", Polarity::progressive, 0),
        testutil::make_mpc(4, 5, "only-topic", Polarity::progressive, 1)};
    for (auto& m : group)
        for (auto& t : m.turns) t.message = "the same message every time";
    auto report = variability_report(group, embedder);
    REQUIRE(report.ok());
    CHECK(report.value().string_similarity == doctest::Approx(100.0));
    CHECK(report.value().semantic_coherence == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.value().avg_words_per_turn == doctest::Approx(5.0));
    REQUIRE(report.value().topics.size() == 1);
    // single topic: corpus value equals topic value
    CHECK(report.value().repetition_rate ==
          doctest::Approx(report.value().topics[0].repetition_rate));
}

TEST_CASE("variability corpus values are unweighted means over topics") {
    CachingEmbedder embedder(std::make_unique<HashEmbeddingProvider>());
    std::mt19937_64 rng(13);
    std::vector<Mpc> group;
    for (int topic = 0; topic < 3; ++topic)
        for (int replicate = 0; replicate < 3; ++replicate) {
            auto m = testutil::random_mpc(rng, topic * 3 + replicate);
            m.statement = testutil::statement("topic-" + std::to_string(topic));
            m.provenance.replicate_index = replicate;
            m.id = Mpc::make_id(m.statement, m.provenance);
            group.push_back(std::move(m));
        }
    auto report = variability_report(group, embedder);
    REQUIRE(report.ok());
    REQUIRE(report.value().topics.size() == 3);
    double sum_similarity = 0.0, sum_repetition = 0.0;
    for (const auto& row : report.value().topics) {
        sum_similarity += row.string_similarity;
        sum_repetition += row.repetition_rate;
    }
    CHECK(report.value().string_similarity ==
          doctest::Approx(sum_similarity / 3.0).epsilon(1e-9));
    CHECK(report.value().repetition_rate ==
          doctest::Approx(sum_repetition / 3.0).epsilon(1e-9));

    auto rendered = render_variability_report({{"group", report.value()}});
    CHECK(rendered.find("group") != std::string::npos);
    CHECK_FALSE(variability_report_jsonl({{"group", report.value()}}).empty());
}
