#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mpc/agreement.hpp"
#include "mpc/common.hpp"
#include "mpc/core.hpp"
#include "mpc/generator.hpp"
#include "mpc/llm.hpp"
#include "mpc/structure.hpp"

namespace mpc {

// The pipeline stages in dependency order.
extern const std::vector<std::string> kStageOrder;

struct PipelineConfig {
    std::string out_dir = "out";
    std::string statements_path = "data/topic_statements.json";
    std::string model_id = "mock-model";
    std::string judge_model_id = "mock-judge";
    std::string provider = "mock";  // "mock" | "http"
    HttpClientConfig http;

    std::vector<Strategy> strategies = {Strategy::one_long, Strategy::turn_by_turn};
    std::vector<int> variant_numbers = {1, 2, 3};
    std::vector<std::string> distribution_labels = {"2v2", "3v2", "2v3",
                                                    "2v4", "3v3", "4v2"};
    int replicates = 75;
    int statement_limit = 0;  // 0 = all statements
    DecodingParams decoding;
    int turn_budget = 15;

    std::uint64_t seed = 1234;
    int sample_per_cell = 10;
    std::string human_ratings_path;     // empty = synthesize (mock) or skip
    std::string reference_stream_path;  // empty = no reference curves
    std::vector<std::string> stages;    // empty = all
};

// Parses the JSON config file; reports every validation error at once.
Result<PipelineConfig, std::vector<std::string>> load_pipeline_config(
    const std::string& path);
std::vector<std::string> validate_pipeline_config(const PipelineConfig& config);

struct StageStatus {
    std::string status = "pending";  // "pending" | "done" | "failed"
    std::string inputs_digest;
    std::map<std::string, std::string> outputs;  // file -> content digest
    std::map<std::string, std::int64_t> counts;
};

struct RunManifest {
    std::string run_id;
    std::string config_digest;
    std::map<std::string, StageStatus> stages;
};

std::string manifest_path(const PipelineConfig& config);
Result<RunManifest, std::string> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const RunManifest& manifest);

// Every artifact referenced by the manifest exists and matches its digest.
Result<bool, std::string> verify_manifest(const PipelineConfig& config,
                                          const RunManifest& manifest);

struct PipelineError {
    std::string stage;
    std::string message;
};

// Runs the configured stages in dependency order. A completed stage is
// skipped when its input digests are unchanged, unless force is set. The
// generate stage resumes at job granularity from a partial outcome file.
Result<RunManifest, PipelineError> run_pipeline(const PipelineConfig& config,
                                                bool force = false);

// Renders the text report bundle from stored stage outputs only; sections
// whose stage is missing are replaced by a notice.
Result<std::string, std::string> render_reports(const PipelineConfig& config,
                                                const RunManifest& manifest);

// --- Deterministic offline mock ----------------------------------------------

// Pure function of the request: roster, interaction, message, one-long and
// judge replies, all derived from content hashes. Used by provider "mock".
std::string mock_chat_script(const ChatRequest& request);

// Deterministic pseudo-human ratings derived from a conversation hash; used
// when provider is "mock" and no human rating file is configured.
RatingRecord mock_human_rating(const Mpc& mpc, std::uint64_t seed);

// Provider factories honouring config.provider.
std::unique_ptr<ChatClient> make_chat_client(const PipelineConfig& config);
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const PipelineConfig& config);

}  // namespace mpc
