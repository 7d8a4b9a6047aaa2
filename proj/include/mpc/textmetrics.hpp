#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mpc/common.hpp"
#include "mpc/core.hpp"
#include "mpc/llm.hpp"

namespace mpc {

// Lowercase tokens, split on whitespace and punctuation.
std::vector<std::string> tokenize(const std::string& text);

// Percent rate of non-singleton n-gram types: geometric mean over n = 1..n_max
// of the fraction of distinct n-gram types occurring at least twice in the
// concatenation of cluster_texts, times 100. Any zero fraction yields 0.
// Errors when the concatenation holds fewer than n_max tokens.
Result<double, std::string> repetition_rate(const std::vector<std::string>& cluster_texts,
                                            int n_max = 4);

// Indel similarity: round(100 * 2 * LCS(a,b) / (|a| + |b|)); 100 for two
// empty strings. Matches edit distance with substitutions costed 2.
int string_similarity(const std::string& a, const std::string& b);

// Plain Levenshtein variant: round(100 * (1 - d / max(|a|, |b|))).
int string_similarity_levenshtein(const std::string& a, const std::string& b);

// Cosine similarity. Errors on dimension mismatch or a zero vector.
Result<double, std::string> semantic_coherence(const EmbeddingVector& a,
                                               const EmbeddingVector& b);

using TurnPairScorer = std::function<double(const std::string&, const std::string&)>;

struct TopicCluster {
    std::string topic_key;  // statement id: topic_id + ":" + polarity
    std::vector<Mpc> conversations;
};

// Scores every (turn of A, turn of B) pair over every unordered pair of
// distinct conversations, pools all scores for the topic and returns the
// mean of the top_k largest (or of everything when fewer exist).
// Errors when the cluster holds fewer than 2 conversations.
// OpenMP-parallel over conversation pairs.
Result<double, std::string> topic_pairwise_score(const TopicCluster& cluster,
                                                 const TurnPairScorer& scorer,
                                                 int top_k = 5);

// Single-threaded reference implementation: full pool, sort, mean of top_k.
Result<double, std::string> topic_pairwise_score_serial(const TopicCluster& cluster,
                                                        const TurnPairScorer& scorer,
                                                        int top_k = 5);

struct VariabilityTopicRow {
    std::string topic_key;
    std::size_t conversations = 0;
    double repetition_rate = 0.0;
    double string_similarity = 0.0;
    double semantic_coherence = 0.0;
    bool pairwise_defined = false;  // clusters of 1 have no cross-pairs
};

struct VariabilityReport {
    double avg_words_per_turn = 0.0;
    double repetition_rate = 0.0;    // mean over topic clusters
    double string_similarity = 0.0;  // mean over topic clusters with >= 2 convs
    double semantic_coherence = 0.0;
    std::vector<VariabilityTopicRow> topics;
    std::size_t skipped_clusters = 0;  // too small for repetition rate
};

// Clusters key on the statement; cluster members sorted by MPC id before
// concatenation so the rate is order-invariant.
std::vector<TopicCluster> cluster_by_statement(const std::vector<Mpc>& corpus);

Result<VariabilityReport, std::string> variability_report(const std::vector<Mpc>& group,
                                                          CachingEmbedder& embedder,
                                                          int top_k = 5);

std::string render_variability_report(
    const std::vector<std::pair<std::string, VariabilityReport>>& groups);
std::string variability_report_jsonl(
    const std::vector<std::pair<std::string, VariabilityReport>>& groups);

}  // namespace mpc
