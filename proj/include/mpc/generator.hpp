#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpc/core.hpp"
#include "mpc/llm.hpp"

namespace mpc {

struct PromptVariant {
    int task_description_id = 1;  // 1..2
    int output_format_id = 1;     // 1..2

    // The three admissible combinations, in order: (1,1), (2,1), (1,2).
    static const std::vector<PromptVariant>& admissible_values();
    int number() const;  // 1..3
    static std::optional<PromptVariant> from_number(int n);

    bool operator==(const PromptVariant&) const = default;
};

struct GenerationJob {
    TopicStatement statement;
    PromptVariant variant;
    StanceDistribution distribution;
    int replicate_index = 0;
    Strategy strategy = Strategy::one_long;
    DecodingParams decoding;
};

struct GenerationFailure {
    std::string stage;  // "transport" | "format" | "context" | "roster" | "step:<name>:<k>"
    std::string message;
};

struct GenerationOutcome {
    GenerationJob job;
    std::vector<std::string> raw;          // every raw completion, in call order
    std::string document;                  // extracted payload (canonical dump), if any
    std::optional<Mpc> parsed;
    std::optional<GenerationFailure> failure;
};

struct GridConfig {
    std::vector<TopicStatement> statements;
    std::vector<PromptVariant> variants = PromptVariant::admissible_values();
    std::vector<StanceDistribution> distributions = StanceDistribution::admissible_values();
    int replicates = 75;
    Strategy strategy = Strategy::one_long;
    DecodingParams decoding;
};

// Cartesian product in canonical order: statement, variant, distribution,
// replicate. Stable across runs.
Result<std::vector<GenerationJob>, std::string> enumerate_jobs(const GridConfig& config);

// Deterministic system prompt: task description block + output format block
// with the statement, speaker range, turn count, word cap, stance counts and
// first-turn rule interpolated.
std::string build_system_prompt(Strategy strategy, const PromptVariant& variant,
                                const TopicStatement& statement,
                                const StanceDistribution& distribution);

// First syntactically complete JSON object inside raw, ignoring markdown
// fences and surrounding prose. Error kinds: "no payload", "truncated payload".
Result<nlohmann::json, std::string> extract_structured_payload(const std::string& raw);

// Maps {pro, in favor, support, ...} / {against, con, opposed, ...} surface
// forms from model output onto the binary stance.
std::optional<StanceValue> match_stance_surface(const std::string& raw);

// Lenient conversion of a model-produced conversation document into an Mpc.
// Compliance constraints are NOT enforced here; speakers whose stance string
// has no synonym match are listed in unmatched_stance_speakers.
struct DocumentMpc {
    Mpc mpc;
    std::vector<std::string> unmatched_stance_speakers;
};
Result<DocumentMpc, ParseError> mpc_from_document(const nlohmann::json& doc,
                                                  const TopicStatement& statement,
                                                  const Provenance& provenance);

struct GeneratorOptions {
    std::string model_id;
    int turn_budget = 15;
    int step_retries = 2;  // TT re-prompts per unparseable step
    RetryPolicy retry{3, 200, false};
    std::string created_at = "1970-01-01T00:00:00Z";
    TraceLog* trace = nullptr;
};

class Generator {
public:
    Generator(ChatClient& client, GeneratorOptions options);

    GenerationOutcome run(const GenerationJob& job);
    GenerationOutcome generate_one_long(const GenerationJob& job);
    GenerationOutcome generate_turn_by_turn(const GenerationJob& job);

private:
    ChatResult call(const ChatRequest& request);

    ChatClient& client_;
    GeneratorOptions options_;
};

// Outcome (de)serialization, one JSON line per outcome.
std::string serialize_outcome(const GenerationOutcome& outcome);
Result<GenerationOutcome, std::string> parse_outcome(const std::string& record);
Result<std::vector<GenerationOutcome>, std::string> read_outcomes(const std::string& path);

// TT user messages start with the running history block and end with a task
// block after this marker; tests use it to check monotone context growth.
inline constexpr const char* kTaskMarker = "### task\n";

}  // namespace mpc
