#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rbsched/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rbsched: resource block scheduling experiments"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run one experiment from a config file");
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out, policy, rate;
    std::optional<int> episodes, eval_episodes, continuity, buffer;
    bool quiet = false;
    run_cmd->add_option("config", config_path, "config file (key = value lines)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--seed", seed, "master seed");
    run_cmd->add_option("--out", out, "output directory");
    run_cmd->add_option("--policy", policy, "dqn|mt|ml|random|mt+f|ml+f");
    run_cmd->add_option("--episodes", episodes, "training episodes");
    run_cmd->add_option("--eval-episodes", eval_episodes, "evaluation episodes");
    run_cmd->add_option("--rate", rate, "low|high");
    run_cmd->add_option("--continuity", continuity, "continuity length C");
    run_cmd->add_option("--buffer", buffer, "buffer length L");
    run_cmd->add_option("--set", overrides, "extra key=value overrides");
    run_cmd->add_flag("-q,--quiet", quiet, "no per-episode progress");

    auto* cmp_cmd = app.add_subcommand("compare", "tabulate runs grouped by policy");
    std::vector<std::string> dirs;
    cmp_cmd->add_option("dirs", dirs, "run output directories")->required()->check(CLI::ExistingDirectory);

    auto* keys_cmd = app.add_subcommand("keys", "list config keys with defaults");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            auto cfg = rbsched::load_config(config_path);
            if (seed) cfg.seed = *seed;
            if (out) cfg.out_dir = *out;
            if (policy) cfg.policy = rbsched::parse_policy(*policy);
            if (episodes) cfg.episodes = *episodes;
            if (eval_episodes) cfg.eval_episodes = *eval_episodes;
            if (rate) cfg.env.rate = rbsched::parse_rate_profile(*rate);
            if (continuity) cfg.env.continuity_len = *continuity;
            if (buffer) cfg.env.buffer_len = *buffer;
            for (const auto& kv : overrides) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
                rbsched::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
            }
            cfg.validate();
            rbsched::EpisodeCallback cb;
            if (!quiet) {
                const long per_episode = static_cast<long>(cfg.env.steps_per_episode) * cfg.env.channel.num_rbs;
                cb = [per_episode](const std::string& set, int e, const rbsched::RunMetrics& m) {
                    double sum = 0.0;
                    long count = 0;
                    // last episode only
                    for (auto it = m.rb_se.rbegin(); it != m.rb_se.rend() && count < per_episode; ++it, ++count) sum += *it;
                    std::cerr << set << " episode " << e << "  SE " << (count ? sum / count : 0.0) << '\n';
                };
            }
            auto res = rbsched::run(cfg, cb);
            std::cout << res.summary.dump(2) << '\n';
        } else if (*cmp_cmd) {
            std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
            std::cout << rbsched::format_comparison(rbsched::compare(paths));
        } else if (*keys_cmd) {
            std::cout << rbsched::ExperimentConfig{}.to_text();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
