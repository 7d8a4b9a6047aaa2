#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mpc/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "pipeline config file (JSON)")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", args.seed, "sampling seed (overrides config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--force", args.force, "rerun stages even when inputs are unchanged");
}

int run_stages(const CommonArgs& args, std::vector<std::string> stages,
               const std::string& model_override = "",
               const std::string& strategy_override = "") {
    auto loaded = mpc::load_pipeline_config(args.config_path);
    if (!loaded.ok()) {
        std::fprintf(stderr, "config: invalid configuration:\n");
        for (const auto& error : loaded.error())
            std::fprintf(stderr, "  - %s\n", error.c_str());
        return 2;
    }
    mpc::PipelineConfig config = loaded.take();
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (args.seed_set) config.seed = args.seed;
    if (!model_override.empty()) config.model_id = model_override;
    if (!strategy_override.empty()) {
        auto strategy = strategy_override == "ol"
                            ? mpc::Strategy::one_long
                            : strategy_override == "tt"
                                  ? mpc::Strategy::turn_by_turn
                                  : mpc::strategy_from_string(strategy_override)
                                        .value_or(mpc::Strategy::one_long);
        if (strategy_override != "ol" && strategy_override != "tt" &&
            !mpc::strategy_from_string(strategy_override)) {
            std::fprintf(stderr, "config: unknown strategy %s\n",
                         strategy_override.c_str());
            return 2;
        }
        config.strategies = {strategy};
    }
    if (!stages.empty()) config.stages = std::move(stages);

    auto result = mpc::run_pipeline(config, args.force);
    if (!result.ok()) {
        std::fprintf(stderr, "stage %s: %s\n", result.error().stage.c_str(),
                     result.error().message.c_str());
        return 1;
    }
    for (const auto& [stage, status] : result.value().stages)
        std::printf("%-12s %s\n", stage.c_str(), status.status.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic multi-party conversation pipeline"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string model_override, strategy_override;

    struct Sub {
        const char* name;
        const char* help;
        std::vector<std::string> stages;
    };
    const std::vector<Sub> subs = {
        {"generate", "run the generation grid", {"generate"}},
        {"validate", "check constraint compliance", {"validate"}},
        {"variability", "language variability metrics", {"variability"}},
        {"structure", "interaction-structure metrics and plots", {"structure"}},
        {"sample", "stratified evaluation sample", {"sample"}},
        {"judge", "LLM-as-a-judge scoring", {"judge"}},
        {"agree", "agreement statistics", {"agree"}},
        {"report", "render the report bundle", {"report"}},
        {"run", "all stages in order", {}},
    };
    std::vector<CLI::App*> commands;
    for (const auto& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        add_common(cmd, args);
        if (std::string(sub.name) == "generate") {
            cmd->add_option("--model", model_override, "model id (overrides config)");
            cmd->add_option("--strategy", strategy_override,
                            "generation strategy: ol | tt");
            cmd->add_flag("--resume", "resume a partial run (default behaviour)");
        }
        commands.push_back(cmd);
    }

    CLI11_PARSE(app, argc, argv);

    for (std::size_t i = 0; i < subs.size(); ++i)
        if (commands[i]->parsed())
            return run_stages(args, subs[i].stages, model_override,
                              strategy_override);
    return 2;
}
