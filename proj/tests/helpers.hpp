#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "mpc/core.hpp"

namespace testutil {

inline mpc::TopicStatement statement(const std::string& topic = "civil-topic",
                                     mpc::Polarity polarity =
                                         mpc::Polarity::progressive) {
    return {topic, polarity, "A statement about " + topic + "."};
}

inline mpc::Provenance provenance(mpc::Strategy strategy = mpc::Strategy::one_long,
                                  int variant = 1, int pro = 2, int against = 2,
                                  int replicate = 0) {
    mpc::Provenance p;
    p.model_id = "test-model";
    p.strategy = strategy;
    p.prompt_variant = variant;
    p.stance_distribution = {pro, against};
    p.replicate_index = replicate;
    p.created_at = "1970-01-01T00:00:00Z";
    return p;
}

// Valid MPC: round-robin speakers, single next-neighbour addressee except an
// all-addressing first turn.
inline mpc::Mpc make_mpc(int n_speakers, int n_turns,
                         const std::string& topic = "civil-topic",
                         mpc::Polarity polarity = mpc::Polarity::progressive,
                         int replicate = 0) {
    static const std::vector<std::string> names = {"Ada",  "Bo",  "Cy",
                                                   "Dot",  "Eli", "Fay"};
    mpc::Mpc out;
    out.statement = statement(topic, polarity);
    out.provenance = provenance(mpc::Strategy::one_long, 1,
                                (n_speakers + 1) / 2, n_speakers / 2, replicate);
    out.id = mpc::Mpc::make_id(out.statement, out.provenance);
    for (int i = 0; i < n_speakers; ++i)
        out.speakers.push_back({names[static_cast<std::size_t>(i)],
                                i < (n_speakers + 1) / 2
                                    ? mpc::StanceValue::pro
                                    : mpc::StanceValue::against});
    for (int t = 0; t < n_turns; ++t) {
        mpc::Turn turn;
        turn.index = t;
        turn.speaker = names[static_cast<std::size_t>(t % n_speakers)];
        if (t == 0) {
            for (int i = 1; i < n_speakers; ++i)
                turn.addressees.push_back(names[static_cast<std::size_t>(i)]);
        } else {
            turn.addressees.push_back(
                names[static_cast<std::size_t>((t + 1) % n_speakers)]);
        }
        std::sort(turn.addressees.begin(), turn.addressees.end());
        turn.message = "turn " + std::to_string(t) + " about " + topic;
        out.turns.push_back(std::move(turn));
    }
    return out;
}

// Randomized valid MPC for property tests.
inline mpc::Mpc random_mpc(std::mt19937_64& rng, int index) {
    static const std::vector<std::string> names = {"Ada",  "Bo",  "Cy",
                                                   "Dot",  "Eli", "Fay"};
    static const std::vector<std::string> words = {
        "river", "policy", "doubt", "merit", "proof", "voice",
        "crowd", "future", "claim", "sense", "北",   "émile"};
    std::uniform_int_distribution<int> n_dist(4, 6);
    std::uniform_int_distribution<int> turn_dist(5, 20);
    const int n = n_dist(rng);
    const int turns = turn_dist(rng);
    mpc::Mpc out = make_mpc(n, 0, "topic-" + std::to_string(index % 9),
                            index % 2 ? mpc::Polarity::conservative
                                      : mpc::Polarity::progressive,
                            index);
    for (int t = 0; t < turns; ++t) {
        mpc::Turn turn;
        turn.index = t;
        std::uniform_int_distribution<int> speaker_dist(0, n - 1);
        const int s = speaker_dist(rng);
        turn.speaker = names[static_cast<std::size_t>(s)];
        std::uniform_int_distribution<int> count_dist(1, n - 1);
        int want = count_dist(rng);
        std::vector<int> others;
        for (int i = 0; i < n; ++i)
            if (i != s) others.push_back(i);
        std::shuffle(others.begin(), others.end(), rng);
        for (int i = 0; i < want; ++i)
            turn.addressees.push_back(names[static_cast<std::size_t>(others[i])]);
        std::sort(turn.addressees.begin(), turn.addressees.end());
        std::uniform_int_distribution<int> len_dist(3, 25);
        std::uniform_int_distribution<std::size_t> word_dist(0, words.size() - 1);
        const int len = len_dist(rng);
        std::string message;
        for (int w = 0; w < len; ++w) {
            if (w) message += ' ';
            message += words[word_dist(rng)];
        }
        turn.message = message;
        out.turns.push_back(std::move(turn));
    }
    return out;
}

}  // namespace testutil
