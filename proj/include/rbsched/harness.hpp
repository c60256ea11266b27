#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rbsched/config.hpp"
#include "rbsched/metrics.hpp"

namespace rbsched {

struct RunResult {
    RunMetrics train;
    RunMetrics eval;
    long rl_steps = 0;
    long updates = 0;
    bool capped = false;  // stopped early by run.max_rl_steps
    nlohmann::json summary;
};

// Optional per-episode hook: (set name, episode index, metrics of that set so far).
using EpisodeCallback = std::function<void(const std::string&, int, const RunMetrics&)>;

// Training set of `episodes` episodes followed by an evaluation set of
// `eval_episodes` with epsilon pinned at its floor. Baseline policies run the
// same two sets without any learning machinery. Writes artifacts when
// cfg.out_dir is non-empty.
RunResult run(const ExperimentConfig& cfg, const EpisodeCallback& on_episode = {});

nlohmann::json metrics_summary(const RunMetrics& m);

struct MetricStat {
    double mean = 0.0;
    double stddev = 0.0;  // sample std; 0 for a single run
};

struct ComparisonRow {
    std::string policy;
    int runs = 0;
    MetricStat se_licensed_adjusted;
    MetricStat se_unlicensed;
    MetricStat se_sum;
    MetricStat acceptance;
    MetricStat missed;
};

// Groups run directories by policy. All runs must share R, L, C, rate and
// episode length.
std::vector<ComparisonRow> compare(const std::vector<std::filesystem::path>& run_dirs);
std::vector<ComparisonRow> compare_summaries(const std::vector<nlohmann::json>& summaries);
std::string format_comparison(const std::vector<ComparisonRow>& rows);

}  // namespace rbsched
