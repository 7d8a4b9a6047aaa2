#include "mpc/textmetrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mpc {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Result<double, std::string> repetition_rate(const std::vector<std::string>& cluster_texts,
                                            int n_max) {
    using R = Result<double, std::string>;
    if (cluster_texts.empty()) return R::err("empty cluster");
    std::vector<std::string> tokens;
    for (const auto& text : cluster_texts) {
        auto t = tokenize(text);
        tokens.insert(tokens.end(), t.begin(), t.end());
    }
    if (static_cast<int>(tokens.size()) < n_max)
        return R::err("cluster has fewer than " + std::to_string(n_max) + " tokens");

    double log_sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        std::unordered_map<std::string, int> counts;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (int k = 1; k < n; ++k) gram += ' ' + tokens[i + k];
            ++counts[gram];
        }
        std::size_t repeated = 0;
        for (const auto& [gram, count] : counts)
            if (count >= 2) ++repeated;
        if (repeated == 0) return 0.0;
        log_sum += std::log(static_cast<double>(repeated) /
                            static_cast<double>(counts.size()));
    }
    return 100.0 * std::exp(log_sum / n_max);
}

namespace {

// Longest common subsequence length, O(min(|a|,|b|)) memory.
std::size_t lcs_length(const std::string& a, const std::string& b) {
    const std::string& s = a.size() < b.size() ? a : b;
    const std::string& l = a.size() < b.size() ? b : a;
    std::vector<std::size_t> row(s.size() + 1, 0);
    for (char cl : l) {
        std::size_t diag = 0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            std::size_t tmp = row[j + 1];
            row[j + 1] = cl == s[j] ? diag + 1 : std::max(row[j + 1], row[j]);
            diag = tmp;
        }
    }
    return row[s.size()];
}

}  // namespace

int string_similarity(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 100;
    const double lcs = static_cast<double>(lcs_length(a, b));
    return static_cast<int>(
        std::lround(100.0 * 2.0 * lcs / static_cast<double>(a.size() + b.size())));
}

int string_similarity_levenshtein(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 100;
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i + 1;
        for (std::size_t j = 0; j < b.size(); ++j) {
            std::size_t tmp = row[j + 1];
            row[j + 1] = std::min({row[j + 1] + 1, row[j] + 1,
                                   diag + (a[i] == b[j] ? 0 : 1)});
            diag = tmp;
        }
    }
    const double d = static_cast<double>(row[b.size()]);
    const double m = static_cast<double>(std::max(a.size(), b.size()));
    return static_cast<int>(std::lround(100.0 * (1.0 - d / m)));
}

Result<double, std::string> semantic_coherence(const EmbeddingVector& a,
                                               const EmbeddingVector& b) {
    using R = Result<double, std::string>;
    if (a.dimension() != b.dimension()) return R::err("dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < a.dimension(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) return R::err("zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

// Keeps the k largest scores seen so far (ascending order).
void keep_top_k(std::vector<double>& top, double score, int k) {
    if (static_cast<int>(top.size()) < k) {
        top.insert(std::upper_bound(top.begin(), top.end(), score), score);
    } else if (score > top.front()) {
        top.erase(top.begin());
        top.insert(std::upper_bound(top.begin(), top.end(), score), score);
    }
}

double mean(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

}  // namespace

Result<double, std::string> topic_pairwise_score(const TopicCluster& cluster,
                                                 const TurnPairScorer& scorer,
                                                 int top_k) {
    using R = Result<double, std::string>;
    const auto& convs = cluster.conversations;
    if (convs.size() < 2) return R::err("undefined topic: fewer than 2 conversations");

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < convs.size(); ++i)
        for (std::size_t j = i + 1; j < convs.size(); ++j) pairs.emplace_back(i, j);

    std::vector<double> pool;
#ifdef _OPENMP
#pragma omp parallel
    {
        std::vector<double> local;
#pragma omp for schedule(dynamic) nowait
        for (long p = 0; p < static_cast<long>(pairs.size()); ++p) {
            const auto& [i, j] = pairs[static_cast<std::size_t>(p)];
            for (const auto& ta : convs[i].turns)
                for (const auto& tb : convs[j].turns)
                    keep_top_k(local, scorer(ta.message, tb.message), top_k);
        }
#pragma omp critical
        for (double s : local) keep_top_k(pool, s, top_k);
    }
#else
    for (const auto& [i, j] : pairs)
        for (const auto& ta : convs[i].turns)
            for (const auto& tb : convs[j].turns)
                keep_top_k(pool, scorer(ta.message, tb.message), top_k);
#endif
    if (pool.empty()) return R::err("no cross-conversation turn pairs");
    return mean(pool);
}

Result<double, std::string> topic_pairwise_score_serial(const TopicCluster& cluster,
                                                        const TurnPairScorer& scorer,
                                                        int top_k) {
    using R = Result<double, std::string>;
    const auto& convs = cluster.conversations;
    if (convs.size() < 2) return R::err("undefined topic: fewer than 2 conversations");
    std::vector<double> pool;
    for (std::size_t i = 0; i < convs.size(); ++i)
        for (std::size_t j = i + 1; j < convs.size(); ++j)
            for (const auto& ta : convs[i].turns)
                for (const auto& tb : convs[j].turns)
                    pool.push_back(scorer(ta.message, tb.message));
    if (pool.empty()) return R::err("no cross-conversation turn pairs");
    std::sort(pool.begin(), pool.end(), std::greater<double>());
    if (static_cast<int>(pool.size()) > top_k) pool.resize(top_k);
    return mean(pool);
}

std::vector<TopicCluster> cluster_by_statement(const std::vector<Mpc>& corpus) {
    std::map<std::string, TopicCluster> clusters;
    for (const auto& m : corpus) {
        std::string key = m.statement.topic_id + ":" + to_string(m.statement.polarity);
        auto& cluster = clusters[key];
        cluster.topic_key = key;
        cluster.conversations.push_back(m);
    }
    std::vector<TopicCluster> out;
    for (auto& [key, cluster] : clusters) {
        std::sort(cluster.conversations.begin(), cluster.conversations.end(),
                  [](const Mpc& a, const Mpc& b) { return a.id < b.id; });
        out.push_back(std::move(cluster));
    }
    return out;
}

Result<VariabilityReport, std::string> variability_report(const std::vector<Mpc>& group,
                                                          CachingEmbedder& embedder,
                                                          int top_k) {
    using R = Result<VariabilityReport, std::string>;
    if (group.empty()) return R::err("empty corpus group");

    VariabilityReport report;
    std::size_t turn_count = 0;
    double word_sum = 0.0;
    for (const auto& m : group) {
        for (const auto& t : m.turns) {
            std::istringstream in(t.message);
            std::string token;
            while (in >> token) ++word_sum;
            ++turn_count;
        }
    }
    report.avg_words_per_turn =
        turn_count ? word_sum / static_cast<double>(turn_count) : 0.0;

    auto clusters = cluster_by_statement(group);

    // Fetch every distinct turn embedding up front; scoring reads the cache.
    std::vector<std::string> all_texts;
    for (const auto& m : group)
        for (const auto& t : m.turns) all_texts.push_back(t.message);
    auto vectors = embedder.embed(all_texts);
    if (!vectors.ok()) return R::err("embedding fetch failed: " + vectors.error());
    std::unordered_map<std::string, EmbeddingVector> by_text;
    for (std::size_t i = 0; i < all_texts.size(); ++i)
        by_text[all_texts[i]] = vectors.value()[i];

    TurnPairScorer string_scorer = [](const std::string& a, const std::string& b) {
        return static_cast<double>(string_similarity(a, b));
    };
    TurnPairScorer semantic_scorer = [&by_text](const std::string& a,
                                                const std::string& b) {
        auto cos = semantic_coherence(by_text.at(a), by_text.at(b));
        return cos.ok() ? cos.value() : 0.0;
    };

    double rep_sum = 0.0;
    std::size_t rep_n = 0;
    double str_sum = 0.0, sem_sum = 0.0;
    std::size_t pair_n = 0;

    for (const auto& cluster : clusters) {
        VariabilityTopicRow row;
        row.topic_key = cluster.topic_key;
        row.conversations = cluster.conversations.size();

        std::vector<std::string> texts;
        for (const auto& m : cluster.conversations)
            for (const auto& t : m.turns) texts.push_back(t.message);
        auto rep = repetition_rate(texts);
        if (rep.ok()) {
            row.repetition_rate = rep.value();
            rep_sum += rep.value();
            ++rep_n;
        } else {
            ++report.skipped_clusters;
        }

        auto str = topic_pairwise_score(cluster, string_scorer, top_k);
        auto sem = topic_pairwise_score(cluster, semantic_scorer, top_k);
        if (str.ok() && sem.ok()) {
            row.string_similarity = str.value();
            row.semantic_coherence = sem.value();
            row.pairwise_defined = true;
            str_sum += str.value();
            sem_sum += sem.value();
            ++pair_n;
        }
        report.topics.push_back(std::move(row));
    }

    if (rep_n) report.repetition_rate = rep_sum / static_cast<double>(rep_n);
    if (pair_n) {
        report.string_similarity = str_sum / static_cast<double>(pair_n);
        report.semantic_coherence = sem_sum / static_cast<double>(pair_n);
    }
    return report;
}

std::string render_variability_report(
    const std::vector<std::pair<std::string, VariabilityReport>>& groups) {
    std::ostringstream out;
    out << "Metric                ";
    for (const auto& [name, r] : groups) out << "  " << name;
    out << '\n';
    auto row = [&](const char* label, auto getter) {
        out << label;
        for (const auto& [name, r] : groups) {
            std::ostringstream cell;
            cell.setf(std::ios::fixed);
            cell.precision(3);
            cell << getter(r);
            std::string s = cell.str();
            std::size_t width = std::max<std::size_t>(name.size(), s.size());
            out << "  " << std::string(width - s.size(), ' ') << s;
        }
        out << '\n';
    };
    row("Avg. # words          ",
        [](const VariabilityReport& r) { return r.avg_words_per_turn; });
    row("RepetitionRate        ",
        [](const VariabilityReport& r) { return r.repetition_rate; });
    row("StringSimilarity      ",
        [](const VariabilityReport& r) { return r.string_similarity; });
    row("SemanticCoherence     ",
        [](const VariabilityReport& r) { return r.semantic_coherence; });
    return out.str();
}

std::string variability_report_jsonl(
    const std::vector<std::pair<std::string, VariabilityReport>>& groups) {
    std::ostringstream out;
    for (const auto& [name, r] : groups) {
        nlohmann::json j;
        j["group"] = name;
        j["avg_words_per_turn"] = r.avg_words_per_turn;
        j["repetition_rate"] = r.repetition_rate;
        j["string_similarity"] = r.string_similarity;
        j["semantic_coherence"] = r.semantic_coherence;
        j["topics"] = nlohmann::json::array();
        for (const auto& t : r.topics) {
            j["topics"].push_back({{"topic_key", t.topic_key},
                                   {"conversations", t.conversations},
                                   {"repetition_rate", t.repetition_rate},
                                   {"string_similarity", t.string_similarity},
                                   {"semantic_coherence", t.semantic_coherence},
                                   {"pairwise_defined", t.pairwise_defined}});
        }
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace mpc
