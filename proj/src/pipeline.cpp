#include "mpc/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mpc/compliance.hpp"
#include "mpc/textmetrics.hpp"

namespace mpc {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<std::string> kStageOrder = {
    "generate", "validate", "variability", "structure",
    "sample",   "judge",    "agree",       "report"};

// --- Config -----------------------------------------------------------------

namespace {

std::optional<StanceDistribution> distribution_from_label(const std::string& label) {
    int pro = 0, against = 0;
    char sep = 0;
    std::istringstream in(label);
    if (!(in >> pro >> sep >> against) || sep != 'v' || !in.eof()) return std::nullopt;
    return StanceDistribution{pro, against};
}

}  // namespace

std::vector<std::string> validate_pipeline_config(const PipelineConfig& config) {
    std::vector<std::string> errors;
    if (config.out_dir.empty()) errors.push_back("out_dir must not be empty");
    if (!fs::exists(config.statements_path))
        errors.push_back("statements file not found: " + config.statements_path);
    if (config.provider != "mock" && config.provider != "http")
        errors.push_back("unknown provider: " + config.provider);
    if (config.provider == "http" && config.http.base_url.empty())
        errors.push_back("provider http requires http.base_url");
    if (config.strategies.empty()) errors.push_back("no strategies configured");
    if (config.variant_numbers.empty()) errors.push_back("no prompt variants configured");
    for (int v : config.variant_numbers)
        if (!PromptVariant::from_number(v))
            errors.push_back("unknown prompt variant " + std::to_string(v));
    if (config.distribution_labels.empty())
        errors.push_back("no stance distributions configured");
    for (const auto& label : config.distribution_labels) {
        auto d = distribution_from_label(label);
        if (!d || !d->admissible())
            errors.push_back("inadmissible stance distribution " + label);
    }
    if (config.replicates <= 0) errors.push_back("replicates must be positive");
    if (config.statement_limit < 0) errors.push_back("statement_limit must be >= 0");
    if (config.turn_budget <= 0) errors.push_back("turn_budget must be positive");
    if (config.sample_per_cell <= 0) errors.push_back("sample_per_cell must be positive");
    if (!config.human_ratings_path.empty() && !fs::exists(config.human_ratings_path))
        errors.push_back("human rating file not found: " + config.human_ratings_path);
    if (!config.reference_stream_path.empty() &&
        !fs::exists(config.reference_stream_path))
        errors.push_back("reference stream not found: " + config.reference_stream_path);
    for (const auto& stage : config.stages)
        if (std::find(kStageOrder.begin(), kStageOrder.end(), stage) ==
            kStageOrder.end())
            errors.push_back("unknown stage: " + stage);
    return errors;
}

Result<PipelineConfig, std::vector<std::string>> load_pipeline_config(
    const std::string& path) {
    using R = Result<PipelineConfig, std::vector<std::string>>;
    std::ifstream in(path);
    if (!in) return R::err({"cannot open config file: " + path});
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return R::err({"config file is not a JSON object: " + path});

    PipelineConfig config;
    std::vector<std::string> errors;
    try {
        config.out_dir = j.value("out_dir", config.out_dir);
        config.statements_path = j.value("statements_path", config.statements_path);
        config.model_id = j.value("model_id", config.model_id);
        config.judge_model_id = j.value("judge_model_id", config.judge_model_id);
        config.provider = j.value("provider", config.provider);
        if (j.contains("http")) {
            const json& h = j["http"];
            config.http.base_url = h.value("base_url", config.http.base_url);
            config.http.api_key_env = h.value("api_key_env", config.http.api_key_env);
            config.http.chat_path = h.value("chat_path", config.http.chat_path);
            config.http.embeddings_path =
                h.value("embeddings_path", config.http.embeddings_path);
            config.http.requests_per_minute =
                h.value("requests_per_minute", config.http.requests_per_minute);
            config.http.timeout_s = h.value("timeout_s", config.http.timeout_s);
        }
        if (j.contains("strategies")) {
            config.strategies.clear();
            for (const auto& s : j["strategies"]) {
                auto strat = strategy_from_string(s.get<std::string>());
                if (!strat)
                    errors.push_back("unknown strategy: " + s.get<std::string>());
                else
                    config.strategies.push_back(*strat);
            }
        }
        if (j.contains("variants"))
            config.variant_numbers = j["variants"].get<std::vector<int>>();
        if (j.contains("distributions"))
            config.distribution_labels =
                j["distributions"].get<std::vector<std::string>>();
        config.replicates = j.value("replicates", config.replicates);
        config.statement_limit = j.value("statement_limit", config.statement_limit);
        if (j.contains("decoding")) {
            const json& d = j["decoding"];
            config.decoding.temperature =
                d.value("temperature", config.decoding.temperature);
            config.decoding.top_p = d.value("top_p", config.decoding.top_p);
            config.decoding.top_k = d.value("top_k", config.decoding.top_k);
            config.decoding.max_tokens =
                d.value("max_tokens", config.decoding.max_tokens);
        }
        config.turn_budget = j.value("turn_budget", config.turn_budget);
        config.seed = j.value("seed", config.seed);
        config.sample_per_cell = j.value("sample_per_cell", config.sample_per_cell);
        config.human_ratings_path =
            j.value("human_ratings_path", config.human_ratings_path);
        config.reference_stream_path =
            j.value("reference_stream_path", config.reference_stream_path);
        if (j.contains("stages"))
            config.stages = j["stages"].get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        errors.push_back(std::string("malformed config: ") + e.what());
        return R::err(errors);
    }

    auto more = validate_pipeline_config(config);
    errors.insert(errors.end(), more.begin(), more.end());
    if (!errors.empty()) return R::err(errors);
    return config;
}

// --- Manifest ---------------------------------------------------------------

std::string manifest_path(const PipelineConfig& config) {
    return config.out_dir + "/manifest.json";
}

Result<RunManifest, std::string> read_manifest(const std::string& path) {
    using R = Result<RunManifest, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open manifest: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        return R::err("malformed manifest: " + path);
    RunManifest manifest;
    manifest.run_id = j.value("run_id", std::string());
    manifest.config_digest = j.value("config_digest", std::string());
    if (j.contains("stages") && j["stages"].is_object()) {
        for (auto it = j["stages"].begin(); it != j["stages"].end(); ++it) {
            StageStatus status;
            status.status = it.value().value("status", std::string("pending"));
            status.inputs_digest = it.value().value("inputs_digest", std::string());
            if (it.value().contains("outputs"))
                for (auto o = it.value()["outputs"].begin();
                     o != it.value()["outputs"].end(); ++o)
                    status.outputs[o.key()] = o.value().get<std::string>();
            if (it.value().contains("counts"))
                for (auto c = it.value()["counts"].begin();
                     c != it.value()["counts"].end(); ++c)
                    status.counts[c.key()] = c.value().get<std::int64_t>();
            manifest.stages[it.key()] = std::move(status);
        }
    }
    return manifest;
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
    json j;
    j["run_id"] = manifest.run_id;
    j["config_digest"] = manifest.config_digest;
    j["stages"] = json::object();
    for (const auto& [name, status] : manifest.stages) {
        json s;
        s["status"] = status.status;
        s["inputs_digest"] = status.inputs_digest;
        s["outputs"] = json::object();
        for (const auto& [file, digest] : status.outputs) s["outputs"][file] = digest;
        s["counts"] = json::object();
        for (const auto& [key, count] : status.counts) s["counts"][key] = count;
        j["stages"][name] = std::move(s);
    }
    fs::create_directories(fs::path(path).parent_path());
    std::ofstream out(path);
    out << j.dump(2) << '\n';
}

namespace {

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "";
    std::ostringstream content;
    content << in.rdbuf();
    return fnv1a64_hex(content.str());
}

}  // namespace

Result<bool, std::string> verify_manifest(const PipelineConfig& config,
                                          const RunManifest& manifest) {
    using R = Result<bool, std::string>;
    for (const auto& [stage, status] : manifest.stages) {
        if (status.status != "done") continue;
        for (const auto& [file, digest] : status.outputs) {
            const std::string path = config.out_dir + "/" + file;
            if (!fs::exists(path))
                return R::err("stage " + stage + ": missing artifact " + file);
            if (file_digest(path) != digest)
                return R::err("stage " + stage + ": digest mismatch for " + file);
        }
    }
    return true;
}

// --- Mock provider ----------------------------------------------------------

namespace {

std::uint64_t mix(std::uint64_t h) {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ull;
    h ^= h >> 33;
    return h;
}

const std::vector<std::string>& mock_names() {
    static const std::vector<std::string> names = {"Ava",  "Ben", "Cleo",
                                                   "Dev",  "Ena", "Finn"};
    return names;
}

std::optional<StanceDistribution> distribution_from_prompt(const std::string& prompt) {
    static const std::regex patterns[] = {
        std::regex(R"((\d+) of them argue pro the statement and (\d+) argue against)"),
        std::regex(R"((\d+) are pro the statement and (\d+) are against)"),
        std::regex(R"(\((\d+) pro, (\d+) against\))"),
    };
    std::smatch m;
    for (const auto& pattern : patterns)
        if (std::regex_search(prompt, m, pattern))
            return StanceDistribution{std::stoi(m[1]), std::stoi(m[2])};
    return std::nullopt;
}

std::string mock_message(std::uint64_t seed) {
    static const std::vector<std::string> words = {
        "honestly",  "the",      "argument", "seems",   "quite",   "strong",
        "because",   "evidence", "points",   "that",    "way",     "however",
        "costs",     "matter",   "too",      "people",  "deserve", "fairness",
        "consider",  "also",     "history",  "shows",   "risks",   "benefits"};
    std::uint64_t h = mix(seed);
    const int count = 8 + static_cast<int>(h % 7);
    std::ostringstream out;
    for (int i = 0; i < count; ++i) {
        h = mix(h + i + 1);
        if (i) out << ' ';
        out << words[h % words.size()];
    }
    out << '.';
    return out.str();
}

json mock_turn_interaction(int t, int n) {
    const auto& names = mock_names();
    json turn;
    turn["speaker"] = names[static_cast<std::size_t>(t % n)];
    json addressees = json::array();
    if (t == 0) {
        for (int i = 1; i < n; ++i) addressees.push_back(names[static_cast<std::size_t>(i)]);
    } else {
        addressees.push_back(names[static_cast<std::size_t>((t + 1) % n)]);
    }
    turn["addressees"] = addressees;
    return turn;
}

}  // namespace

std::string mock_chat_script(const ChatRequest& request) {
    const std::string& system = request.messages.front().content;
    const std::string& user = request.messages.back().content;
    const std::uint64_t seed = fnv1a64(system) ^ mix(fnv1a64(user));

    // judge rubric
    if (system.rfind("You rate the quality", 0) == 0) {
        json scores;
        for (auto d : all_dimensions())
            scores[to_string(d)] =
                1 + static_cast<int>(mix(seed ^ fnv1a64(to_string(d))) % 5);
        return scores.dump();
    }

    auto distribution = distribution_from_prompt(system);
    const int n = distribution ? distribution->total() : 4;
    const int pro = distribution ? distribution->pro_count : 2;
    const auto& names = mock_names();

    // turn-by-turn steps
    if (user.find("Task (1)") != std::string::npos) {
        std::smatch m;
        int k = 1;
        if (std::regex_search(user, m, std::regex(R"(speaker (\d+) of (\d+))")))
            k = std::stoi(m[1]);
        json reply;
        reply["name"] = names[static_cast<std::size_t>(k - 1)];
        reply["stance"] = k <= pro ? "pro" : "against";
        return reply.dump();
    }
    if (user.find("Task (2)") != std::string::npos) {
        std::smatch m;
        int t = 0;
        if (std::regex_search(user, m, std::regex(R"(turn (\d+) of at most)")))
            t = std::stoi(m[1]) - 1;
        return mock_turn_interaction(t, n).dump();
    }
    if (user.find("Task (3)") != std::string::npos) {
        json reply;
        reply["message"] = mock_message(seed);
        return reply.dump();
    }

    // one-long: a full 15-turn document
    json doc;
    json speakers = json::array();
    for (int i = 0; i < n; ++i)
        speakers.push_back({{"name", names[static_cast<std::size_t>(i)]},
                            {"stance", i < pro ? "pro" : "against"}});
    json conversation = json::array();
    for (int t = 0; t < 15; ++t) {
        json turn = mock_turn_interaction(t, n);
        turn["message"] = mock_message(seed ^ mix(static_cast<std::uint64_t>(t) + 1));
        conversation.push_back(turn);
    }
    doc["conversation"] = conversation;
    doc["speakers"] = speakers;
    return doc.dump();
}

RatingRecord mock_human_rating(const Mpc& mpc, std::uint64_t seed) {
    RatingRecord record;
    record.mpc_id = mpc.id;
    record.rater_id = "mock-human";
    const std::uint64_t base = fnv1a64(mpc.id) ^ mix(seed);
    for (auto d : all_dimensions())
        record.scores[d] =
            1 + static_cast<int>(mix(base ^ fnv1a64(to_string(d))) % 5);
    return record;
}

std::unique_ptr<ChatClient> make_chat_client(const PipelineConfig& config) {
    if (config.provider == "mock")
        return std::make_unique<MockChatClient>(mock_chat_script);
    return std::make_unique<HttpChatClient>(config.http);
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const PipelineConfig& config) {
    if (config.provider == "mock")
        return std::make_unique<HashEmbeddingProvider>();
    return std::make_unique<HttpEmbeddingProvider>(config.http, config.model_id);
}

// --- Stage execution --------------------------------------------------------

namespace {

std::string strategy_file_tag(Strategy s) { return to_string(s); }

std::string group_label_for(const PipelineConfig& config, Strategy s) {
    return config.model_id + "/" + to_string(s);
}

struct StageContext {
    const PipelineConfig& config;
    RunManifest& manifest;
    bool force = false;

    std::string path(const std::string& file) const {
        return config.out_dir + "/" + file;
    }
};

std::string config_slice_digest(const PipelineConfig& config,
                                const std::string& stage) {
    json j;
    j["stage"] = stage;
    if (stage == "generate") {
        j["model_id"] = config.model_id;
        j["provider"] = config.provider;
        std::vector<std::string> strategies;
        for (auto s : config.strategies) strategies.push_back(to_string(s));
        j["strategies"] = strategies;
        j["variants"] = config.variant_numbers;
        j["distributions"] = config.distribution_labels;
        j["replicates"] = config.replicates;
        j["statement_limit"] = config.statement_limit;
        j["turn_budget"] = config.turn_budget;
        j["decoding"] = {{"temperature", config.decoding.temperature},
                         {"top_p", config.decoding.top_p},
                         {"top_k", config.decoding.top_k},
                         {"max_tokens", config.decoding.max_tokens}};
        j["statements"] = file_digest(config.statements_path);
    } else if (stage == "sample") {
        j["seed"] = config.seed;
        j["sample_per_cell"] = config.sample_per_cell;
    } else if (stage == "judge") {
        j["judge_model_id"] = config.judge_model_id;
        j["provider"] = config.provider;
    } else if (stage == "agree") {
        j["human_ratings"] = config.human_ratings_path.empty()
                                 ? std::string("synthetic")
                                 : file_digest(config.human_ratings_path);
    } else if (stage == "structure") {
        j["reference"] = config.reference_stream_path.empty()
                             ? std::string("none")
                             : file_digest(config.reference_stream_path);
    }
    return fnv1a64_hex(j.dump());
}

std::string stage_inputs_digest(const StageContext& ctx, const std::string& stage,
                                const std::vector<std::string>& input_files) {
    std::string acc = config_slice_digest(ctx.config, stage);
    for (const auto& file : input_files) acc += ":" + file + "=" + file_digest(ctx.path(file));
    return fnv1a64_hex(acc);
}

bool stage_current(const StageContext& ctx, const std::string& stage,
                   const std::string& inputs_digest) {
    if (ctx.force) return false;
    auto it = ctx.manifest.stages.find(stage);
    if (it == ctx.manifest.stages.end() || it->second.status != "done") return false;
    if (it->second.inputs_digest != inputs_digest) return false;
    for (const auto& [file, digest] : it->second.outputs)
        if (file_digest(ctx.path(file)) != digest) return false;
    return true;
}

void finish_stage(StageContext& ctx, const std::string& stage,
                  const std::string& inputs_digest,
                  const std::vector<std::string>& output_files,
                  std::map<std::string, std::int64_t> counts) {
    StageStatus status;
    status.status = "done";
    status.inputs_digest = inputs_digest;
    for (const auto& file : output_files)
        status.outputs[file] = file_digest(ctx.path(file));
    status.counts = std::move(counts);
    ctx.manifest.stages[stage] = std::move(status);
    write_manifest(manifest_path(ctx.config), ctx.manifest);
}

using StageResult = Result<bool, std::string>;  // true = executed, false = skipped

std::size_t count_lines(const std::string& path) {
    std::ifstream in(path);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    return lines;
}

Result<std::vector<TopicStatement>, std::string> load_statements_for(
    const PipelineConfig& config) {
    auto statements = load_topic_statements(config.statements_path);
    if (!statements.ok()) return statements;
    auto list = statements.take();
    if (config.statement_limit > 0 &&
        static_cast<int>(list.size()) > config.statement_limit)
        list.resize(static_cast<std::size_t>(config.statement_limit));
    return list;
}

StageResult run_generate(StageContext& ctx) {
    const std::string digest = stage_inputs_digest(ctx, "generate", {});
    if (stage_current(ctx, "generate", digest)) return false;

    auto statements = load_statements_for(ctx.config);
    if (!statements.ok()) return StageResult::err(statements.error());

    std::vector<std::string> outputs;
    std::map<std::string, std::int64_t> counts;
    auto client = make_chat_client(ctx.config);
    fs::create_directories(ctx.config.out_dir);

    for (Strategy strategy : ctx.config.strategies) {
        GridConfig grid;
        grid.statements = statements.value();
        grid.variants.clear();
        for (int v : ctx.config.variant_numbers)
            grid.variants.push_back(*PromptVariant::from_number(v));
        grid.distributions.clear();
        for (const auto& label : ctx.config.distribution_labels)
            grid.distributions.push_back(*distribution_from_label(label));
        grid.replicates = ctx.config.replicates;
        grid.strategy = strategy;
        grid.decoding = ctx.config.decoding;

        auto jobs = enumerate_jobs(grid);
        if (!jobs.ok()) return StageResult::err(jobs.error());

        const std::string tag = strategy_file_tag(strategy);
        const std::string outcome_file = "outcomes_" + tag + ".jsonl";
        const std::string corpus_file = "corpus_" + tag + ".jsonl";

        // job-granular resume: completed outcome lines are never redone
        const std::size_t already_done = count_lines(ctx.path(outcome_file));
        GeneratorOptions options;
        options.model_id = ctx.config.model_id;
        options.turn_budget = ctx.config.turn_budget;
        Generator generator(*client, options);
        {
            std::ofstream out(ctx.path(outcome_file), std::ios::app);
            for (std::size_t i = already_done; i < jobs.value().size(); ++i) {
                GenerationOutcome outcome = generator.run(jobs.value()[i]);
                out << serialize_outcome(outcome) << '\n';
                out.flush();
            }
        }

        auto outcomes = read_outcomes(ctx.path(outcome_file));
        if (!outcomes.ok()) return StageResult::err(outcomes.error());
        std::int64_t parsed = 0, failed = 0;
        {
            std::ofstream corpus(ctx.path(corpus_file));
            for (const auto& outcome : outcomes.value()) {
                if (outcome.parsed) {
                    corpus << serialize_mpc(*outcome.parsed) << '\n';
                    ++parsed;
                }
                if (outcome.failure) ++failed;
            }
        }
        counts["jobs_" + tag] = static_cast<std::int64_t>(jobs.value().size());
        counts["resumed_" + tag] = static_cast<std::int64_t>(already_done);
        counts["parsed_" + tag] = parsed;
        counts["failed_" + tag] = failed;
        outputs.push_back(outcome_file);
        outputs.push_back(corpus_file);
    }
    finish_stage(ctx, "generate", digest, outputs, std::move(counts));
    return true;
}

std::vector<std::string> outcome_files(const PipelineConfig& config) {
    std::vector<std::string> files;
    for (Strategy s : config.strategies)
        files.push_back("outcomes_" + strategy_file_tag(s) + ".jsonl");
    return files;
}

std::vector<std::string> corpus_files(const PipelineConfig& config) {
    std::vector<std::string> files;
    for (Strategy s : config.strategies)
        files.push_back("corpus_" + strategy_file_tag(s) + ".jsonl");
    return files;
}

json report_to_json(const ComplianceReport& report) {
    json j;
    j["mpc_id"] = report.mpc_id;
    j["group_keys"] = report.group_keys;
    j["verdicts"] = json::array();
    for (const auto& v : report.verdicts)
        j["verdicts"].push_back({{"constraint", to_string(v.constraint)},
                                 {"passed", v.passed},
                                 {"detail", v.detail}});
    j["all_passed"] = report.all_passed;
    j["warnings"] = report.warnings;
    j["first_turn_addresses_all"] = report.first_turn_addresses_all;
    return j;
}

StageResult run_validate(StageContext& ctx) {
    const std::string digest =
        stage_inputs_digest(ctx, "validate", outcome_files(ctx.config));
    if (stage_current(ctx, "validate", digest)) return false;

    std::vector<ComplianceReport> reports;
    for (Strategy strategy : ctx.config.strategies) {
        const std::string file = "outcomes_" + strategy_file_tag(strategy) + ".jsonl";
        auto outcomes = read_outcomes(ctx.path(file));
        if (!outcomes.ok()) return StageResult::err(outcomes.error());
        for (const auto& outcome : outcomes.value()) {
            ComplianceReport report = check_all(outcome);
            if (report.group_keys["model"].empty())
                report.group_keys["model"] = ctx.config.model_id;
            reports.push_back(std::move(report));
        }
    }

    std::int64_t passed = 0;
    {
        std::ofstream out(ctx.path("compliance.jsonl"));
        for (const auto& report : reports) {
            out << report_to_json(report).dump() << '\n';
            if (report.all_passed) ++passed;
        }
    }
    ComplianceTable table = tabulate(reports, {"model", "strategy"});
    {
        std::ofstream out(ctx.path("compliance_table.txt"));
        out << render_compliance_table(table);
    }
    {
        std::ofstream out(ctx.path("compliance_table.jsonl"));
        out << compliance_table_jsonl(table);
    }
    finish_stage(ctx, "validate", digest,
                 {"compliance.jsonl", "compliance_table.txt",
                  "compliance_table.jsonl"},
                 {{"reports", static_cast<std::int64_t>(reports.size())},
                  {"all_passed", passed}});
    return true;
}

StageResult run_variability(StageContext& ctx) {
    const std::string digest =
        stage_inputs_digest(ctx, "variability", corpus_files(ctx.config));
    if (stage_current(ctx, "variability", digest)) return false;

    CachingEmbedder embedder(make_embedding_provider(ctx.config));
    std::vector<std::pair<std::string, VariabilityReport>> groups;
    for (Strategy strategy : ctx.config.strategies) {
        const std::string file = "corpus_" + strategy_file_tag(strategy) + ".jsonl";
        auto corpus = read_corpus(ctx.path(file), /*strict=*/false);
        if (!corpus.ok()) return StageResult::err(corpus.error());
        auto report = variability_report(corpus.value(), embedder);
        if (!report.ok()) return StageResult::err(report.error());
        groups.emplace_back(group_label_for(ctx.config, strategy), report.take());
    }
    {
        std::ofstream out(ctx.path("variability.txt"));
        out << render_variability_report(groups);
    }
    {
        std::ofstream out(ctx.path("variability.jsonl"));
        out << variability_report_jsonl(groups);
    }
    finish_stage(ctx, "variability", digest, {"variability.txt", "variability.jsonl"},
                 {{"groups", static_cast<std::int64_t>(groups.size())}});
    return true;
}

StageResult run_structure(StageContext& ctx) {
    const std::string digest =
        stage_inputs_digest(ctx, "structure", corpus_files(ctx.config));
    if (stage_current(ctx, "structure", digest)) return false;

    std::vector<Mpc> reference;
    if (!ctx.config.reference_stream_path.empty()) {
        auto stream = read_reference_stream(ctx.config.reference_stream_path);
        if (!stream.ok()) return StageResult::err(stream.error());
        reference = extract_reference_conversations(stream.value());
    }

    std::vector<std::string> outputs;
    std::map<std::string, std::int64_t> counts;
    counts["reference_conversations"] = static_cast<std::int64_t>(reference.size());
    for (Strategy strategy : ctx.config.strategies) {
        const std::string tag = strategy_file_tag(strategy);
        auto corpus = read_corpus(ctx.path("corpus_" + tag + ".jsonl"),
                                  /*strict=*/false);
        if (!corpus.ok()) return StageResult::err(corpus.error());
        StructureReport report = structure_report(corpus.value(), reference);
        auto files = write_structure_report(report, ctx.path("structure"), tag);
        for (const auto& file : files)
            outputs.push_back("structure/" + fs::path(file).filename().string());
        counts["excluded_disconnected_" + tag] =
            static_cast<std::int64_t>(report.excluded_disconnected);
    }
    finish_stage(ctx, "structure", digest, outputs, std::move(counts));
    return true;
}

StageResult run_sample(StageContext& ctx) {
    const std::string digest =
        stage_inputs_digest(ctx, "sample", corpus_files(ctx.config));
    if (stage_current(ctx, "sample", digest)) return false;

    std::vector<SampleCell> cells;
    for (Strategy strategy : ctx.config.strategies) {
        const std::string tag = strategy_file_tag(strategy);
        auto corpus = read_corpus(ctx.path("corpus_" + tag + ".jsonl"),
                                  /*strict=*/false);
        if (!corpus.ok()) return StageResult::err(corpus.error());
        cells.push_back({group_label_for(ctx.config, strategy), corpus.take()});
    }
    auto sample = stratified_sample(cells, ctx.config.sample_per_cell, ctx.config.seed);
    if (!sample.ok()) return StageResult::err(sample.error());
    {
        std::ofstream out(ctx.path("sample.jsonl"));
        for (const auto& mpc : sample.value()) out << serialize_mpc(mpc) << '\n';
    }
    finish_stage(ctx, "sample", digest, {"sample.jsonl"},
                 {{"sampled", static_cast<std::int64_t>(sample.value().size())}});
    return true;
}

StageResult run_judge(StageContext& ctx) {
    const std::string digest = stage_inputs_digest(ctx, "judge", {"sample.jsonl"});
    if (stage_current(ctx, "judge", digest)) return false;

    auto sample = read_corpus(ctx.path("sample.jsonl"), /*strict=*/false);
    if (!sample.ok()) return StageResult::err(sample.error());

    auto client = make_chat_client(ctx.config);
    JudgeOptions options;
    options.judge_model_id = ctx.config.judge_model_id;
    std::vector<RatingRecord> ratings;
    for (const auto& mpc : sample.value()) {
        auto rating = judge_mpc(*client, mpc, options);
        if (!rating.ok())
            return StageResult::err(mpc.id + ": " + rating.error());
        ratings.push_back(rating.take());
    }
    write_ratings_jsonl(ctx.path("ratings_judge.jsonl"), ratings);
    finish_stage(ctx, "judge", digest, {"ratings_judge.jsonl"},
                 {{"rated", static_cast<std::int64_t>(ratings.size())}});
    return true;
}

StageResult run_agree(StageContext& ctx) {
    const std::string digest =
        stage_inputs_digest(ctx, "agree", {"sample.jsonl", "ratings_judge.jsonl"});
    if (stage_current(ctx, "agree", digest)) return false;

    auto judge = read_ratings_jsonl(ctx.path("ratings_judge.jsonl"));
    if (!judge.ok()) return StageResult::err(judge.error());
    auto sample = read_corpus(ctx.path("sample.jsonl"), /*strict=*/false);
    if (!sample.ok()) return StageResult::err(sample.error());

    std::vector<RatingRecord> human;
    if (!ctx.config.human_ratings_path.empty()) {
        const bool tsv = ctx.config.human_ratings_path.size() > 4 &&
                         ctx.config.human_ratings_path.rfind(".tsv") ==
                             ctx.config.human_ratings_path.size() - 4;
        auto loaded = tsv ? import_ratings(ctx.config.human_ratings_path)
                          : read_ratings_jsonl(ctx.config.human_ratings_path);
        if (!loaded.ok()) return StageResult::err(loaded.error());
        human = loaded.take();
    } else if (ctx.config.provider == "mock") {
        for (const auto& mpc : sample.value())
            human.push_back(mock_human_rating(mpc, ctx.config.seed));
    } else {
        return StageResult::err("no human rating file configured");
    }
    write_ratings_jsonl(ctx.path("ratings_human.jsonl"), human);

    std::map<std::string, std::string> group_of;
    for (const auto& mpc : sample.value())
        group_of[mpc.id] = mpc.provenance.model_id + "/" +
                           to_string(mpc.provenance.strategy);

    auto report = agreement_report(human, judge.value(), group_of);
    if (!report.ok()) return StageResult::err(report.error());
    {
        std::ofstream out(ctx.path("agreement.txt"));
        out << render_agreement_report(report.value());
    }
    {
        std::ofstream out(ctx.path("agreement.jsonl"));
        out << agreement_report_jsonl(report.value());
    }
    finish_stage(ctx, "agree", digest,
                 {"ratings_human.jsonl", "agreement.txt", "agreement.jsonl"},
                 {{"human_ratings", static_cast<std::int64_t>(human.size())},
                  {"dimensions",
                   static_cast<std::int64_t>(report.value().per_dimension.size())}});
    return true;
}

StageResult run_report(StageContext& ctx) {
    std::vector<std::string> inputs = {"compliance_table.txt", "variability.txt",
                                       "agreement.txt"};
    const std::string digest = stage_inputs_digest(ctx, "report", inputs);
    if (stage_current(ctx, "report", digest)) return false;

    auto rendered = render_reports(ctx.config, ctx.manifest);
    if (!rendered.ok()) return StageResult::err(rendered.error());
    {
        std::ofstream out(ctx.path("report.txt"));
        out << rendered.value();
    }
    {
        json summary;
        for (const auto& [stage, status] : ctx.manifest.stages) {
            summary["stages"][stage]["status"] = status.status;
            for (const auto& [key, count] : status.counts)
                summary["stages"][stage]["counts"][key] = count;
        }
        std::ofstream out(ctx.path("report.json"));
        out << summary.dump(2) << '\n';
    }
    finish_stage(ctx, "report", digest, {"report.txt", "report.json"}, {});
    return true;
}

}  // namespace

Result<RunManifest, PipelineError> run_pipeline(const PipelineConfig& config,
                                                bool force) {
    using R = Result<RunManifest, PipelineError>;
    auto errors = validate_pipeline_config(config);
    if (!errors.empty()) {
        std::string joined;
        for (const auto& e : errors) {
            if (!joined.empty()) joined += "; ";
            joined += e;
        }
        return R::err({"config", joined});
    }

    RunManifest manifest;
    const std::string path = manifest_path(config);
    if (fs::exists(path)) {
        auto loaded = read_manifest(path);
        if (loaded.ok()) manifest = loaded.take();
    }
    {
        json j;
        j["model_id"] = config.model_id;
        j["provider"] = config.provider;
        j["seed"] = config.seed;
        manifest.config_digest = fnv1a64_hex(j.dump());
        manifest.run_id = "run-" + manifest.config_digest;
    }

    StageContext ctx{config, manifest, force};
    std::set<std::string> requested(config.stages.begin(), config.stages.end());
    for (const auto& stage : kStageOrder) {
        if (!requested.empty() && !requested.count(stage)) continue;
        StageResult result = true;
        if (stage == "generate") result = run_generate(ctx);
        else if (stage == "validate") result = run_validate(ctx);
        else if (stage == "variability") result = run_variability(ctx);
        else if (stage == "structure") result = run_structure(ctx);
        else if (stage == "sample") result = run_sample(ctx);
        else if (stage == "judge") result = run_judge(ctx);
        else if (stage == "agree") result = run_agree(ctx);
        else if (stage == "report") result = run_report(ctx);
        if (!result.ok()) {
            manifest.stages[stage].status = "failed";
            write_manifest(path, manifest);
            return R::err({stage, result.error()});
        }
    }
    write_manifest(path, manifest);
    return manifest;
}

namespace {

std::string read_file_or_empty(const std::string& path) {
    std::ifstream in(path);
    if (!in) return "";
    std::ostringstream content;
    content << in.rdbuf();
    return content.str();
}

bool stage_done(const RunManifest& manifest, const std::string& stage) {
    auto it = manifest.stages.find(stage);
    return it != manifest.stages.end() && it->second.status == "done";
}

}  // namespace

Result<std::string, std::string> render_reports(const PipelineConfig& config,
                                                const RunManifest& manifest) {
    std::ostringstream out;
    out << "# Run report " << manifest.run_id << "\n\n";

    out << "## Compliance\n";
    if (stage_done(manifest, "validate"))
        out << read_file_or_empty(config.out_dir + "/compliance_table.txt") << '\n';
    else
        out << "(validate stage not run; section omitted)\n\n";

    out << "## Language variability\n";
    if (stage_done(manifest, "variability"))
        out << read_file_or_empty(config.out_dir + "/variability.txt") << '\n';
    else
        out << "(variability stage not run; section omitted)\n\n";

    out << "## Interaction structure\n";
    if (stage_done(manifest, "structure")) {
        auto it = manifest.stages.find("structure");
        for (const auto& [file, digest] : it->second.outputs)
            out << "- " << file << '\n';
        out << '\n';
    } else {
        out << "(structure stage not run; section omitted)\n\n";
    }

    out << "## Quality scores and agreement\n";
    if (stage_done(manifest, "judge") && stage_done(manifest, "agree"))
        out << read_file_or_empty(config.out_dir + "/agreement.txt") << '\n';
    else
        out << "(judge stage not run; mean-score and agreement sections "
               "omitted)\n\n";
    return out.str();
}

}  // namespace mpc
