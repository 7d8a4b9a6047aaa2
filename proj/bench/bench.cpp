// Benchmark of the OpenMP kernels against their serial reference
// implementations: pairwise text scoring and per-conversation structure
// metrics over a synthetic corpus.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mpc/structure.hpp"
#include "mpc/textmetrics.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

mpc::Mpc random_mpc(std::mt19937_64& rng, int index) {
    static const std::vector<std::string> names = {"Ava", "Ben", "Cleo",
                                                   "Dev", "Ena", "Finn"};
    static const std::vector<std::string> words = {
        "policy", "debate",  "evidence", "cost",  "benefit", "society",
        "rights", "history", "risk",     "value", "future",  "impact"};
    std::uniform_int_distribution<int> n_dist(4, 6);
    std::uniform_int_distribution<int> turn_dist(10, 15);
    const int n = n_dist(rng);
    const int turns = turn_dist(rng);

    mpc::Mpc conversation;
    conversation.id = "bench-" + std::to_string(index);
    conversation.statement.topic_id = "bench-topic-" + std::to_string(index % 8);
    conversation.statement.polarity = mpc::Polarity::progressive;
    conversation.statement.text = "benchmark statement";
    for (int i = 0; i < n; ++i)
        conversation.speakers.push_back(
            {names[static_cast<std::size_t>(i)],
             i % 2 ? mpc::StanceValue::against : mpc::StanceValue::pro});
    for (int t = 0; t < turns; ++t) {
        mpc::Turn turn;
        turn.index = t;
        turn.speaker = names[static_cast<std::size_t>(t % n)];
        turn.addressees = {names[static_cast<std::size_t>((t + 1) % n)]};
        if (t % 3 == 0 && n > 2) {
            const auto& extra = names[static_cast<std::size_t>((t + 2) % n)];
            if (extra != turn.speaker && extra != turn.addressees[0])
                turn.addressees.push_back(extra);
        }
        std::sort(turn.addressees.begin(), turn.addressees.end());
        std::uniform_int_distribution<int> len_dist(8, 30);
        std::uniform_int_distribution<std::size_t> word_dist(0, words.size() - 1);
        std::string message;
        const int len = len_dist(rng);
        for (int w = 0; w < len; ++w) {
            if (w) message += ' ';
            message += words[word_dist(rng)];
        }
        turn.message = message;
        conversation.turns.push_back(std::move(turn));
    }
    return conversation;
}

}  // namespace

int main() {
    std::mt19937_64 rng(42);
    std::vector<mpc::Mpc> corpus;
    for (int i = 0; i < 400; ++i) corpus.push_back(random_mpc(rng, i));

    // pairwise text scoring
    auto clusters = mpc::cluster_by_statement(corpus);
    auto scorer = [](const std::string& a, const std::string& b) {
        return static_cast<double>(mpc::string_similarity(a, b));
    };
    double parallel_total = 0.0, serial_total = 0.0;
    auto start = Clock::now();
    for (const auto& cluster : clusters) {
        auto score = mpc::topic_pairwise_score(cluster, scorer);
        if (score.ok()) parallel_total += score.value();
    }
    const double pairwise_parallel = seconds_since(start);
    start = Clock::now();
    for (const auto& cluster : clusters) {
        auto score = mpc::topic_pairwise_score_serial(cluster, scorer);
        if (score.ok()) serial_total += score.value();
    }
    const double pairwise_serial = seconds_since(start);
    std::printf("pairwise scoring: parallel %.3fs, serial %.3fs, speedup %.2fx "
                "(checksums %.3f / %.3f)\n",
                pairwise_parallel, pairwise_serial,
                pairwise_serial / pairwise_parallel, parallel_total, serial_total);

    // structure metrics
    start = Clock::now();
    auto samples_parallel = mpc::structure_samples(corpus);
    const double structure_parallel = seconds_since(start);
    start = Clock::now();
    auto samples_serial = mpc::structure_samples_serial(corpus);
    const double structure_serial = seconds_since(start);
    double check_parallel = 0.0, check_serial = 0.0;
    for (const auto& s : samples_parallel) check_parallel += s.transitivity;
    for (const auto& s : samples_serial) check_serial += s.transitivity;
    std::printf("structure metrics: parallel %.3fs, serial %.3fs, speedup %.2fx "
                "(checksums %.3f / %.3f)\n",
                structure_parallel, structure_serial,
                structure_serial / structure_parallel, check_parallel, check_serial);
    return 0;
}
