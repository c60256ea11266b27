#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rbsched/agent.hpp"
#include "rbsched/environment.hpp"

namespace rbsched {

enum class PolicyKind { Dqn, Mt, Ml, Random, MtF, MlF };

PolicyKind parse_policy(std::string_view name);
std::string to_string(PolicyKind kind);

struct ExperimentConfig {
    EnvConfig env;
    AgentConfig agent;
    PolicyKind policy = PolicyKind::Dqn;
    int licensed_rbs = 4;          // only for mt+f / ml+f
    int episodes = 133;            // E, training set
    std::optional<int> eval_episodes;  // defaults to `episodes`
    std::uint64_t seed = 1;
    std::string out_dir;           // empty: keep results in memory only
    bool freeze_eval = false;      // disable learning during the evaluation set
    long max_rl_steps = 0;         // 0: no cap
    bool trace = false;
    bool checkpoint = false;

    int eval_count() const { return eval_episodes.value_or(episodes); }
    void validate() const;
    // Every key with its current value, in the same format load_config reads.
    std::string to_text() const;
};

// Flat "section.key = value" text; '#' starts a comment. Unknown keys and
// malformed values raise std::invalid_argument naming the key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Applies one key/value pair (also used for command-line overrides).
void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

std::vector<std::string> config_keys();

}  // namespace rbsched
