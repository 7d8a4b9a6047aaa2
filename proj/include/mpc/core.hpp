#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpc/common.hpp"

namespace mpc {

enum class Polarity { progressive, conservative };
enum class StanceValue { pro, against };
enum class Strategy { one_long, turn_by_turn };

std::string to_string(Polarity p);
std::string to_string(StanceValue s);
std::string to_string(Strategy s);
std::optional<Polarity> polarity_from_string(const std::string& s);
std::optional<StanceValue> stance_from_string(const std::string& s);
std::optional<Strategy> strategy_from_string(const std::string& s);

struct TopicStatement {
    std::string topic_id;
    Polarity polarity = Polarity::progressive;
    std::string text;

    bool operator==(const TopicStatement&) const = default;
};

struct Stance {
    StanceValue value = StanceValue::pro;
    bool operator==(const Stance&) const = default;
};

struct StanceDistribution {
    int pro_count = 0;
    int against_count = 0;

    int total() const { return pro_count + against_count; }
    bool admissible() const;
    // (2,2), (3,2), (2,3), (2,4), (3,3), (4,2)
    static const std::vector<StanceDistribution>& admissible_values();
    std::string label() const;  // "3v2"

    bool operator==(const StanceDistribution&) const = default;
};

struct Speaker {
    std::string name;
    StanceValue stance = StanceValue::pro;
    bool operator==(const Speaker&) const = default;
};

struct Turn {
    int index = 0;
    std::string speaker;
    std::string message;
    std::vector<std::string> addressees;  // canonical form: sorted, unique

    bool operator==(const Turn&) const = default;
};

struct DecodingParams {
    double temperature = 0.7;
    double top_p = 0.9;
    int top_k = 40;
    int max_tokens = 2048;

    bool operator==(const DecodingParams&) const = default;
};

struct Provenance {
    std::string model_id;
    Strategy strategy = Strategy::one_long;
    int prompt_variant = 1;  // 1..3
    StanceDistribution stance_distribution;
    int replicate_index = 0;
    DecodingParams decoding;
    std::string created_at;  // ISO-8601

    bool operator==(const Provenance&) const = default;
};

struct Mpc {
    std::string id;
    TopicStatement statement;
    std::vector<Speaker> speakers;
    std::vector<Turn> turns;
    Provenance provenance;

    bool operator==(const Mpc&) const = default;

    // Deterministic id from the provenance key.
    static std::string make_id(const TopicStatement& st, const Provenance& prov);
};

struct ParseError {
    std::string kind;   // "syntax" | "missing_field" | "type" | "invariant"
    std::string field;  // offending field, when known
    std::string message;

    std::string to_string() const;
};

// Structural invariants of a well-formed MPC record. Returns the first
// violation found, or nullopt. Compliance constraints (speaker counts,
// stance distribution, ...) are NOT checked here.
std::optional<ParseError> validate_mpc(const Mpc& mpc);

// Canonical one-line record. Field order fixed, addressees sorted.
// serialize(parse(serialize(x))) is byte-identical to serialize(x).
std::string serialize_mpc(const Mpc& mpc);

// strict = enforce validate_mpc invariants. The lenient path is used for
// model-produced conversations that compliance checking inspects later.
Result<Mpc, ParseError> parse_mpc(const std::string& record, bool strict = true);

// --- Topic statements -------------------------------------------------------

// Loads the bundled statement list; verifies it holds exactly 38 topics,
// each with one progressive and one conservative statement (76 total).
Result<std::vector<TopicStatement>, std::string> load_topic_statements(const std::string& path);

// --- Corpus files -----------------------------------------------------------

// Line-delimited MPC corpus. Blank lines ignored.
Result<std::vector<Mpc>, std::string> read_corpus(const std::string& path, bool strict = true);
void append_corpus(const std::string& path, const std::vector<Mpc>& mpcs);

}  // namespace mpc
