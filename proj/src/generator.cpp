#include "mpc/generator.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mpc {

using json = nlohmann::json;

const std::vector<PromptVariant>& PromptVariant::admissible_values() {
    static const std::vector<PromptVariant> values = {{1, 1}, {2, 1}, {1, 2}};
    return values;
}

int PromptVariant::number() const {
    const auto& all = admissible_values();
    for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i] == *this) return static_cast<int>(i) + 1;
    return 0;
}

std::optional<PromptVariant> PromptVariant::from_number(int n) {
    if (n < 1 || n > 3) return std::nullopt;
    return admissible_values()[static_cast<std::size_t>(n - 1)];
}

Result<std::vector<GenerationJob>, std::string> enumerate_jobs(const GridConfig& config) {
    using R = Result<std::vector<GenerationJob>, std::string>;
    if (config.statements.empty()) return R::err("empty statement list");
    if (config.variants.empty()) return R::err("empty variant list");
    if (config.distributions.empty()) return R::err("empty distribution list");
    if (config.replicates <= 0) return R::err("replicate count must be positive");
    for (const auto& d : config.distributions) {
        if (!d.admissible())
            return R::err("inadmissible stance distribution " + d.label());
    }

    std::vector<GenerationJob> jobs;
    jobs.reserve(config.statements.size() * config.variants.size() *
                 config.distributions.size() * static_cast<std::size_t>(config.replicates));
    for (const auto& st : config.statements) {
        for (const auto& variant : config.variants) {
            for (const auto& dist : config.distributions) {
                for (int r = 0; r < config.replicates; ++r) {
                    jobs.push_back(GenerationJob{st, variant, dist, r,
                                                 config.strategy, config.decoding});
                }
            }
        }
    }
    return jobs;
}

// --- Prompt construction ----------------------------------------------------

namespace {

std::string constraints_block(const TopicStatement& statement,
                              const StanceDistribution& distribution) {
    std::ostringstream out;
    out << "- The conversation discusses the statement: \"" << statement.text
        << "\".\n"
        << "- The conversation has exactly " << distribution.total()
        << " speakers (between 4 and 6 are allowed overall): "
        << distribution.pro_count << " of them argue pro the statement and "
        << distribution.against_count << " argue against it.\n"
        << "- The conversation contains 15 messages in total, written by the "
           "speakers in turns.\n"
        << "- Each message has a maximum of 50 words.\n"
        << "- Every speaker is the author of at least one message.\n"
        << "- Each message is addressed to one or more of the other speakers; a "
           "speaker never addresses themselves, and only listed speakers may "
           "appear.\n"
        << "- The first message addresses all participants.\n";
    return out.str();
}

std::string task_description(Strategy strategy, int id, const TopicStatement& statement,
                             const StanceDistribution& distribution) {
    std::ostringstream out;
    if (strategy == Strategy::one_long) {
        if (id == 1) {
            out << "You generate one synthetic multi-party conversation in a "
                   "single pass.\n\nRules:\n"
                << constraints_block(statement, distribution);
        } else {
            out << "Imagine a group chat between strangers debating a "
                   "controversial statement. Write the whole conversation at "
                   "once, inventing the participants yourself. The statement "
                   "under discussion is: \""
                << statement.text << "\". Exactly " << distribution.total()
                << " people take part; " << distribution.pro_count
                << " are pro the statement and " << distribution.against_count
                << " are against it. The chat holds 15 messages of at most 50 "
                   "words each, every participant writes at least once, every "
                   "message names the other participants it is directed to "
                   "(never its own author), and the opening message is directed "
                   "to everybody.\n";
        }
    } else {
        if (id == 1) {
            out << "You build one synthetic multi-party conversation step by "
                   "step. At each step you perform exactly one of three tasks: "
                   "(1) introduce a speaker with a stance, (2) choose the next "
                   "interaction (who speaks, and to whom), (3) write the "
                   "message for the chosen interaction. The conversation built "
                   "so far is always given to you.\n\nRules for the finished "
                   "conversation:\n"
                << constraints_block(statement, distribution);
        } else {
            out << "You act as every participant of a group chat about a "
                   "controversial statement, producing it one small step at a "
                   "time: first introduce the participants one by one, then "
                   "repeatedly pick who speaks next and to whom, and write that "
                   "message. The statement is: \"" << statement.text
                << "\". In the end the chat must have exactly "
                << distribution.total() << " participants ("
                << distribution.pro_count << " pro, "
                << distribution.against_count
                << " against), 15 messages of at most 50 words, every "
                   "participant writing at least once, no one addressing "
                   "themselves, and an opening message directed to everybody.\n";
        }
    }
    return out.str();
}

std::string output_format(Strategy strategy, int id) {
    std::ostringstream out;
    if (strategy == Strategy::one_long) {
        out << "\nOutput format: respond with a single JSON dictionary with two "
               "primary keys, \"conversation\" and \"speakers\". The "
               "\"conversation\" key holds the ordered list of turns, each a "
               "dictionary with the keys \"speaker\" (the author's name), "
               "\"message\" (the text) and \"addressees\" (the list of names the "
               "message is directed to). The \"speakers\" key holds one "
               "dictionary per participant with the keys \"name\" and "
               "\"stance\" (\"pro\" or \"against\").\n\nExample:\n";
        if (id == 1) {
            out << R"({"conversation": [{"speaker": "Dana", "message": "What does everyone think about this?", "addressees": ["Aldo", "Mira", "Tom"]}, {"speaker": "Mira", "message": "I think the arguments for it are strong.", "addressees": ["Dana"]}], "speakers": [{"name": "Dana", "stance": "pro"}, {"name": "Aldo", "stance": "against"}, {"name": "Mira", "stance": "pro"}, {"name": "Tom", "stance": "against"}]})";
        } else {
            out << R"({"conversation": [{"speaker": "Iris", "message": "Friends, I want to hear all your views on this.", "addressees": ["Bruno", "Kai", "Lena", "Omar"]}, {"speaker": "Omar", "message": "Honestly, I am not convinced at all.", "addressees": ["Iris", "Kai"]}], "speakers": [{"name": "Iris", "stance": "pro"}, {"name": "Bruno", "stance": "against"}, {"name": "Kai", "stance": "pro"}, {"name": "Lena", "stance": "pro"}, {"name": "Omar", "stance": "against"}]})";
        }
        out << "\n";
    } else {
        out << "\nOutput format: every reply must be a single small JSON "
               "dictionary and nothing else. For task (1): {\"name\": ..., "
               "\"stance\": \"pro\" or \"against\"}. For task (2): {\"speaker\": "
               "..., \"addressees\": [...]}; reply {\"end\": true} instead if the "
               "conversation should stop early. For task (3): {\"message\": "
               "...}.\n\nExamples:\n";
        if (id == 1) {
            out << R"({"name": "Dana", "stance": "pro"})" << "\n"
                << R"({"speaker": "Dana", "addressees": ["Aldo", "Mira"]})" << "\n"
                << R"({"message": "What does everyone think about this?"})";
        } else {
            out << R"({"name": "Omar", "stance": "against"})" << "\n"
                << R"({"speaker": "Omar", "addressees": ["Iris"]})" << "\n"
                << R"({"message": "Honestly, I am not convinced at all."})";
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace

std::string build_system_prompt(Strategy strategy, const PromptVariant& variant,
                                const TopicStatement& statement,
                                const StanceDistribution& distribution) {
    return task_description(strategy, variant.task_description_id, statement,
                            distribution) +
           output_format(strategy, variant.output_format_id);
}

// --- Payload extraction -----------------------------------------------------

Result<json, std::string> extract_structured_payload(const std::string& raw) {
    using R = Result<json, std::string>;
    bool saw_open = false;
    for (std::size_t start = 0; start < raw.size(); ++start) {
        if (raw[start] != '{') continue;
        saw_open = true;
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    json parsed = json::parse(raw.substr(start, i - start + 1),
                                              nullptr, false);
                    if (!parsed.is_discarded()) return parsed;
                    break;  // balanced but invalid, try next opening brace
                }
            }
        }
    }
    return saw_open ? R::err("truncated payload") : R::err("no payload");
}

// --- Stance surface forms ---------------------------------------------------

std::optional<StanceValue> match_stance_surface(const std::string& raw) {
    std::string s;
    for (unsigned char c : raw)
        if (!std::isspace(c)) s.push_back(static_cast<char>(std::tolower(c)));
    static const std::set<std::string> pro = {
        "pro", "infavor", "infavour", "favor", "favour", "support",
        "supports", "supportive", "for", "protopic", "pro-topic"};
    static const std::set<std::string> against = {
        "against", "con", "opposed", "oppose", "opposes", "opposition",
        "anti", "countertopic", "counter-topic", "counter"};
    if (pro.count(s)) return StanceValue::pro;
    if (against.count(s)) return StanceValue::against;
    return std::nullopt;
}

// --- Document conversion ----------------------------------------------------

Result<DocumentMpc, ParseError> mpc_from_document(const json& doc,
                                                  const TopicStatement& statement,
                                                  const Provenance& provenance) {
    using R = Result<DocumentMpc, ParseError>;
    if (!doc.is_object()) return R::err({"type", "", "document is not an object"});
    if (!doc.contains("speakers"))
        return R::err({"missing_field", "speakers", "required field missing"});
    if (!doc.contains("conversation"))
        return R::err({"missing_field", "conversation", "required field missing"});
    if (!doc["speakers"].is_array())
        return R::err({"type", "speakers", "expected array"});
    if (!doc["conversation"].is_array())
        return R::err({"type", "conversation", "expected array"});

    DocumentMpc out;
    out.mpc.statement = statement;
    out.mpc.provenance = provenance;
    out.mpc.id = Mpc::make_id(statement, provenance);

    for (const auto& s : doc["speakers"]) {
        if (!s.is_object() || !s.contains("name") || !s["name"].is_string())
            return R::err({"type", "speakers", "speaker entry lacks a name"});
        Speaker sp;
        sp.name = s["name"].get<std::string>();
        std::string stance_raw =
            s.contains("stance") && s["stance"].is_string()
                ? s["stance"].get<std::string>()
                : "";
        if (auto matched = match_stance_surface(stance_raw)) {
            sp.stance = *matched;
        } else {
            sp.stance = StanceValue::pro;
            out.unmatched_stance_speakers.push_back(sp.name);
        }
        out.mpc.speakers.push_back(std::move(sp));
    }

    int index = 0;
    for (const auto& t : doc["conversation"]) {
        if (!t.is_object() || !t.contains("speaker") || !t["speaker"].is_string() ||
            !t.contains("message") || !t["message"].is_string())
            return R::err({"type", "conversation", "turn entry malformed"});
        Turn turn;
        turn.index = index++;
        turn.speaker = t["speaker"].get<std::string>();
        turn.message = t["message"].get<std::string>();
        if (t.contains("addressees") && t["addressees"].is_array()) {
            for (const auto& a : t["addressees"])
                if (a.is_string()) turn.addressees.push_back(a.get<std::string>());
        }
        std::sort(turn.addressees.begin(), turn.addressees.end());
        turn.addressees.erase(
            std::unique(turn.addressees.begin(), turn.addressees.end()),
            turn.addressees.end());
        out.mpc.turns.push_back(std::move(turn));
    }
    return out;
}

// --- Generator --------------------------------------------------------------

Generator::Generator(ChatClient& client, GeneratorOptions options)
    : client_(client), options_(std::move(options)) {}

ChatResult Generator::call(const ChatRequest& request) {
    ChatResult result = chat_with_retry(client_, request, options_.retry);
    if (options_.trace) options_.trace->record(request, result);
    return result;
}

GenerationOutcome Generator::run(const GenerationJob& job) {
    return job.strategy == Strategy::one_long ? generate_one_long(job)
                                              : generate_turn_by_turn(job);
}

namespace {

Provenance provenance_for(const GenerationJob& job, const GeneratorOptions& options) {
    Provenance p;
    p.model_id = options.model_id;
    p.strategy = job.strategy;
    p.prompt_variant = job.variant.number();
    p.stance_distribution = job.distribution;
    p.replicate_index = job.replicate_index;
    p.decoding = job.decoding;
    p.created_at = options.created_at;
    return p;
}

GenerationOutcome fail(const GenerationJob& job, std::vector<std::string> raw,
                       std::string stage, std::string message) {
    GenerationOutcome out;
    out.job = job;
    out.raw = std::move(raw);
    out.failure = GenerationFailure{std::move(stage), std::move(message)};
    return out;
}

std::string failure_stage_for_chat_error(const ChatError& error) {
    if (error.kind == "protocol" &&
        error.message.find("context") != std::string::npos)
        return "context";
    return "transport";
}

}  // namespace

GenerationOutcome Generator::generate_one_long(const GenerationJob& job) {
    ChatRequest request;
    request.model_id = options_.model_id;
    request.decoding = job.decoding;
    request.messages.push_back(
        {"system", build_system_prompt(Strategy::one_long, job.variant,
                                       job.statement, job.distribution)});
    request.messages.push_back({"user", "Generate the full conversation now."});

    ChatResult reply = call(request);
    if (!reply.ok())
        return fail(job, {}, failure_stage_for_chat_error(reply.error()),
                    reply.error().message);

    GenerationOutcome out;
    out.job = job;
    out.raw.push_back(reply.value());

    auto payload = extract_structured_payload(reply.value());
    if (!payload.ok()) {
        out.failure = GenerationFailure{"format", payload.error()};
        return out;
    }
    out.document = payload.value().dump();

    auto converted =
        mpc_from_document(payload.value(), job.statement, provenance_for(job, options_));
    if (!converted.ok()) {
        out.failure = GenerationFailure{"format", converted.error().to_string()};
        return out;
    }
    out.parsed = converted.value().mpc;
    return out;
}

GenerationOutcome Generator::generate_turn_by_turn(const GenerationJob& job) {
    const std::string system_prompt = build_system_prompt(
        Strategy::turn_by_turn, job.variant, job.statement, job.distribution);
    std::vector<std::string> raw;

    auto step = [&](const std::string& user_content) -> ChatResult {
        ChatRequest request;
        request.model_id = options_.model_id;
        request.decoding = job.decoding;
        request.messages.push_back({"system", system_prompt});
        request.messages.push_back({"user", user_content});
        ChatResult reply = call(request);
        if (reply.ok()) raw.push_back(reply.value());
        return reply;
    };

    // (a) roster construction
    struct RosterEntry {
        std::string name;
        std::string stance_raw;
    };
    std::vector<RosterEntry> roster;
    const int roster_size = job.distribution.total();
    while (static_cast<int>(roster.size()) < roster_size) {
        std::ostringstream user;
        user << kTaskMarker << "Task (1): introduce speaker "
             << roster.size() + 1 << " of " << roster_size
             << ". Already introduced:";
        if (roster.empty()) user << " none";
        for (const auto& r : roster) user << ' ' << r.name;
        user << ". Reply with one JSON dictionary {\"name\": ..., \"stance\": ...}.";

        bool added = false;
        for (int attempt = 0; attempt <= options_.step_retries && !added; ++attempt) {
            ChatResult reply = step(user.str());
            if (!reply.ok())
                return fail(job, std::move(raw),
                            failure_stage_for_chat_error(reply.error()),
                            reply.error().message);
            auto payload = extract_structured_payload(reply.value());
            if (!payload.ok()) continue;
            const json& p = payload.value();
            if (!p.is_object() || !p.contains("name") || !p["name"].is_string())
                continue;
            std::string name = p["name"].get<std::string>();
            bool duplicate = std::any_of(roster.begin(), roster.end(),
                                         [&](const RosterEntry& r) {
                                             return r.name == name;
                                         });
            // one re-prompt on a duplicate name, then the roster step fails
            if (duplicate) {
                if (attempt >= 1)
                    return fail(job, std::move(raw), "roster",
                                "duplicate speaker name: " + name);
                continue;
            }
            std::string stance_raw =
                p.contains("stance") && p["stance"].is_string()
                    ? p["stance"].get<std::string>()
                    : "";
            roster.push_back({std::move(name), std::move(stance_raw)});
            added = true;
        }
        if (!added)
            return fail(job, std::move(raw), "roster",
                        "unparseable speaker step after retries");
    }

    // (b) alternating interaction / message steps
    json conversation = json::array();
    std::string history;  // grows append-only; context monotonicity hinges on it
    std::map<std::string, int> turns_by_speaker;
    auto everyone_spoke_twice = [&] {
        for (const auto& r : roster)
            if (turns_by_speaker[r.name] < 2) return false;
        return true;
    };

    for (int t = 0; t < options_.turn_budget; ++t) {
        // interaction step
        std::string interaction_speaker;
        std::vector<std::string> addressees;
        bool ended = false;
        bool got_interaction = false;
        {
            std::ostringstream user;
            user << "Conversation so far:\n" << history << kTaskMarker
                 << "Task (2): choose the next interaction (turn " << t + 1
                 << " of at most " << options_.turn_budget << ").";
            if (t == 0) user << " The first turn must address all participants.";
            user << " Reply with {\"speaker\": ..., \"addressees\": [...]}, or "
                    "{\"end\": true} to stop.";
            for (int attempt = 0;
                 attempt <= options_.step_retries && !got_interaction && !ended;
                 ++attempt) {
                ChatResult reply = step(user.str());
                if (!reply.ok())
                    return fail(job, std::move(raw),
                                failure_stage_for_chat_error(reply.error()),
                                reply.error().message);
                auto payload = extract_structured_payload(reply.value());
                if (!payload.ok()) continue;
                const json& p = payload.value();
                if (p.is_object() && p.value("end", false)) {
                    // an end marker counts only once everyone has spoken twice
                    if (everyone_spoke_twice()) {
                        ended = true;
                    }
                    continue;
                }
                if (!p.is_object() || !p.contains("speaker") ||
                    !p["speaker"].is_string() || !p.contains("addressees") ||
                    !p["addressees"].is_array())
                    continue;
                interaction_speaker = p["speaker"].get<std::string>();
                addressees.clear();
                for (const auto& a : p["addressees"])
                    if (a.is_string()) addressees.push_back(a.get<std::string>());
                got_interaction = true;
            }
        }
        if (ended) break;
        if (!got_interaction)
            return fail(job, std::move(raw),
                        "step:interaction:" + std::to_string(t),
                        "unparseable interaction step after retries");

        // message step
        std::string message;
        bool got_message = false;
        {
            std::ostringstream user;
            user << "Conversation so far:\n" << history << kTaskMarker
                 << "Task (3): " << interaction_speaker
                 << " now writes a message (max 50 words) to";
            for (const auto& a : addressees) user << ' ' << a;
            user << ". Reply with {\"message\": ...}.";
            for (int attempt = 0; attempt <= options_.step_retries && !got_message;
                 ++attempt) {
                ChatResult reply = step(user.str());
                if (!reply.ok())
                    return fail(job, std::move(raw),
                                failure_stage_for_chat_error(reply.error()),
                                reply.error().message);
                auto payload = extract_structured_payload(reply.value());
                if (!payload.ok()) continue;
                const json& p = payload.value();
                if (!p.is_object() || !p.contains("message") ||
                    !p["message"].is_string())
                    continue;
                message = p["message"].get<std::string>();
                got_message = true;
            }
        }
        if (!got_message)
            return fail(job, std::move(raw), "step:message:" + std::to_string(t),
                        "unparseable message step after retries");

        json turn;
        turn["speaker"] = interaction_speaker;
        turn["message"] = message;
        turn["addressees"] = addressees;
        conversation.push_back(turn);
        ++turns_by_speaker[interaction_speaker];

        std::ostringstream line;
        line << '[' << t << "] " << interaction_speaker << " (to";
        for (const auto& a : addressees) line << ' ' << a;
        line << "): " << message << '\n';
        history += line.str();
    }

    json doc;
    json speakers = json::array();
    for (const auto& r : roster)
        speakers.push_back({{"name", r.name}, {"stance", r.stance_raw}});
    doc["conversation"] = conversation;
    doc["speakers"] = speakers;

    GenerationOutcome out;
    out.job = job;
    out.raw = std::move(raw);
    out.document = doc.dump();
    auto converted =
        mpc_from_document(doc, job.statement, provenance_for(job, options_));
    if (!converted.ok()) {
        out.failure = GenerationFailure{"format", converted.error().to_string()};
        return out;
    }
    out.parsed = converted.value().mpc;
    return out;
}

// --- Outcome records --------------------------------------------------------

namespace {

json job_to_json(const GenerationJob& job) {
    json j;
    j["statement"] = {{"topic_id", job.statement.topic_id},
                      {"polarity", to_string(job.statement.polarity)},
                      {"text", job.statement.text}};
    j["variant"] = {{"task_description_id", job.variant.task_description_id},
                    {"output_format_id", job.variant.output_format_id}};
    j["distribution"] = {{"pro", job.distribution.pro_count},
                         {"against", job.distribution.against_count}};
    j["replicate_index"] = job.replicate_index;
    j["strategy"] = to_string(job.strategy);
    j["decoding"] = {{"temperature", job.decoding.temperature},
                     {"top_p", job.decoding.top_p},
                     {"top_k", job.decoding.top_k},
                     {"max_tokens", job.decoding.max_tokens}};
    return j;
}

Result<GenerationJob, std::string> job_from_json(const json& j) {
    using R = Result<GenerationJob, std::string>;
    try {
        GenerationJob job;
        job.statement.topic_id = j.at("statement").at("topic_id").get<std::string>();
        auto pol = polarity_from_string(
            j.at("statement").at("polarity").get<std::string>());
        if (!pol) return R::err("unknown polarity");
        job.statement.polarity = *pol;
        job.statement.text = j.at("statement").at("text").get<std::string>();
        job.variant.task_description_id =
            j.at("variant").at("task_description_id").get<int>();
        job.variant.output_format_id =
            j.at("variant").at("output_format_id").get<int>();
        job.distribution.pro_count = j.at("distribution").at("pro").get<int>();
        job.distribution.against_count = j.at("distribution").at("against").get<int>();
        job.replicate_index = j.at("replicate_index").get<int>();
        auto strat = strategy_from_string(j.at("strategy").get<std::string>());
        if (!strat) return R::err("unknown strategy");
        job.strategy = *strat;
        job.decoding.temperature = j.at("decoding").at("temperature").get<double>();
        job.decoding.top_p = j.at("decoding").at("top_p").get<double>();
        job.decoding.top_k = j.at("decoding").at("top_k").get<int>();
        job.decoding.max_tokens = j.at("decoding").at("max_tokens").get<int>();
        return job;
    } catch (const json::exception& e) {
        return R::err(std::string("malformed job: ") + e.what());
    }
}

}  // namespace

std::string serialize_outcome(const GenerationOutcome& outcome) {
    json j;
    j["job"] = job_to_json(outcome.job);
    j["raw"] = outcome.raw;
    j["document"] = outcome.document;
    j["parsed"] = outcome.parsed ? json(serialize_mpc(*outcome.parsed)) : json();
    j["failure"] = outcome.failure
                       ? json{{"stage", outcome.failure->stage},
                              {"message", outcome.failure->message}}
                       : json();
    return j.dump();
}

Result<GenerationOutcome, std::string> parse_outcome(const std::string& record) {
    using R = Result<GenerationOutcome, std::string>;
    json j = json::parse(record, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return R::err("malformed outcome record");
    GenerationOutcome out;
    auto job = job_from_json(j.value("job", json::object()));
    if (!job.ok()) return R::err(job.error());
    out.job = job.take();
    try {
        out.raw = j.value("raw", std::vector<std::string>{});
        out.document = j.value("document", std::string());
        if (j.contains("parsed") && j["parsed"].is_string()) {
            auto mpc = parse_mpc(j["parsed"].get<std::string>(), /*strict=*/false);
            if (!mpc.ok()) return R::err("embedded mpc: " + mpc.error().to_string());
            out.parsed = mpc.take();
        }
        if (j.contains("failure") && j["failure"].is_object()) {
            out.failure = GenerationFailure{
                j["failure"].value("stage", std::string()),
                j["failure"].value("message", std::string())};
        }
    } catch (const json::exception& e) {
        return R::err(std::string("malformed outcome record: ") + e.what());
    }
    return out;
}

Result<std::vector<GenerationOutcome>, std::string> read_outcomes(
    const std::string& path) {
    using R = Result<std::vector<GenerationOutcome>, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open outcome file: " + path);
    std::vector<GenerationOutcome> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parsed = parse_outcome(line);
        if (!parsed)
            return R::err(path + ":" + std::to_string(lineno) + ": " + parsed.error());
        out.push_back(parsed.take());
    }
    return out;
}

}  // namespace mpc
