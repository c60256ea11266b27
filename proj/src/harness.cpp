#include "rbsched/harness.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "rbsched/agent.hpp"

namespace rbsched {

namespace {

constexpr int kCurveWindowRlSteps = 1000;
constexpr int kCurveStrideTimeSteps = 100;

std::unique_ptr<Policy> make_baseline(const ExperimentConfig& cfg) {
    switch (cfg.policy) {
        case PolicyKind::Mt: return std::make_unique<MaxThroughputPolicy>();
        case PolicyKind::Ml: return std::make_unique<MinLatencyPolicy>();
        case PolicyKind::Random: return std::make_unique<RandomPolicy>(cfg.seed);
        case PolicyKind::MtF: return fixed_split(std::make_unique<MaxThroughputPolicy>(), cfg.licensed_rbs);
        case PolicyKind::MlF: return fixed_split(std::make_unique<MinLatencyPolicy>(), cfg.licensed_rbs);
        case PolicyKind::Dqn: break;
    }
    return nullptr;
}

nlohmann::json scenario_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["num_rbs"] = cfg.env.channel.num_rbs;
    j["buffer"] = cfg.env.buffer_len;
    j["continuity"] = cfg.env.continuity_len;
    j["rate"] = to_string(cfg.env.rate);
    j["steps_per_episode"] = cfg.env.steps_per_episode;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
}

void save_checkpoint(const std::filesystem::path& path, const QNetwork& net) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    net.save(os);
}

}  // namespace

nlohmann::json metrics_summary(const RunMetrics& m) {
    nlohmann::json j;
    j["time_steps"] = m.time_steps;
    j["delivered_bits"] = m.delivered_bits;
    j["missed_bits"] = m.missed_bits;
    j["arrivals"] = m.arrivals;
    j["accepted"] = m.accepted;
    j["dropped"] = m.dropped;
    j["missed"] = m.missed;
    j["satisfied"] = m.satisfied;
    j["invalid_actions"] = m.invalid_actions;
    j["unlicensed_bits"] = m.unlicensed_bits;
    j["unlicensed_rbs"] = m.unlicensed_rbs;
    if (m.time_steps > 0) {
        const double adj = se_licensed(m, true);
        const double unl = se_unlicensed(m);
        j["se_licensed"] = se_licensed(m, false);
        j["se_licensed_adjusted"] = adj;
        j["se_unlicensed"] = unl;
        j["se_sum"] = adj + unl;
    }
    if (m.arrivals > 0) {
        const auto r = ratios(m);
        j["acceptance_ratio"] = r.acceptance;
        j["missed_ratio"] = r.missed;
    }
    return j;
}

RunResult run(const ExperimentConfig& cfg, const EpisodeCallback& on_episode) {
    cfg.validate();
    const std::filesystem::path out_dir = cfg.out_dir;
    const bool write = !cfg.out_dir.empty();
    if (write) std::filesystem::create_directories(out_dir);

    Environment env(cfg.env, cfg.seed);
    UnlicensedLink unlicensed(env.link_model(), cfg.seed);
    std::unique_ptr<DqnAgent> agent;
    std::unique_ptr<Policy> baseline;
    if (cfg.policy == PolicyKind::Dqn) {
        agent = std::make_unique<DqnAgent>(env.state_dim(), env.num_actions(), cfg.agent, cfg.seed);
    } else {
        baseline = make_baseline(cfg);
    }

    std::optional<std::ofstream> trace;
    if (write && cfg.trace) trace.emplace(out_dir / "trace.jsonl");

    const double wt = cfg.env.channel.rb_resource();
    const int R = cfg.env.channel.num_rbs;
    RunResult result;
    result.train = RunMetrics(wt, R);
    result.eval = RunMetrics(wt, R);

    long train_steps = 0;
    auto run_set = [&](const std::string& name, int episodes, RunMetrics& metrics, bool evaluation) {
        for (int e = 0; e < episodes && !result.capped; ++e) {
            StateVector state = env.reset();
            bool done = false;
            while (!done) {
                int action;
                if (agent) {
                    const double eps =
                        evaluation ? cfg.agent.epsilon.eps_end : cfg.agent.epsilon.value(train_steps);
                    action = agent->act(state, eps);
                } else {
                    action = baseline->select(env);
                }
                StepOutcome out = env.step(action);
                metrics.record(out, env.catalog());
                if (out.info.time_step_finished) {
                    const long before = unlicensed.qualifying_rbs();
                    const long bits = unlicensed.on_time_step(out.info.continuity, cfg.env.continuity_len);
                    metrics.record_unlicensed(bits, unlicensed.qualifying_rbs() - before);
                }
                if (trace) write_trace_line(*trace, result.rl_steps, action, out);
                if (agent) {
                    try {
                        agent->observe(state, action, out.reward, out.next_state, out.terminal,
                                       !(evaluation && cfg.freeze_eval));
                    } catch (const NonFiniteLoss& err) {
                        if (write) save_checkpoint(out_dir / "checkpoint_abort.rbqn", agent->main());
                        throw NonFiniteLoss(std::string(err.what()) + " at RL step " +
                                            std::to_string(result.rl_steps) + " (" + name + " set, episode " +
                                            std::to_string(e) + ")");
                    }
                }
                if (!evaluation) ++train_steps;
                ++result.rl_steps;
                done = out.terminal;
                state = std::move(out.next_state);
                if (cfg.max_rl_steps > 0 && result.rl_steps >= cfg.max_rl_steps) {
                    result.capped = true;
                    break;
                }
            }
            if (on_episode) on_episode(name, e, metrics);
        }
    };

    run_set("train", cfg.episodes, result.train, false);
    run_set("eval", cfg.eval_count(), result.eval, true);
    if (agent) result.updates = agent->updates();

    nlohmann::json summary;
    summary["policy"] = to_string(cfg.policy);
    if (cfg.policy == PolicyKind::MtF || cfg.policy == PolicyKind::MlF) summary["licensed_rbs"] = cfg.licensed_rbs;
    summary["seed"] = cfg.seed;
    summary["scenario"] = scenario_json(cfg);
    summary["reward"] = {{"alpha", cfg.env.reward.alpha},
                         {"beta", cfg.env.reward.beta},
                         {"delta", cfg.env.reward.delta_is_infinite() ? nlohmann::json("inf")
                                                                      : nlohmann::json(cfg.env.reward.delta)}};
    summary["episodes"] = cfg.episodes;
    summary["eval_episodes"] = cfg.eval_count();
    summary["rl_steps"] = result.rl_steps;
    summary["updates"] = result.updates;
    summary["capped"] = result.capped;
    summary["train"] = metrics_summary(result.train);
    summary["eval"] = result.eval.time_steps > 0 ? metrics_summary(result.eval) : nlohmann::json(nullptr);
    result.summary = summary;

    if (write) {
        write_text(out_dir / "config.txt", cfg.to_text());
        write_text(out_dir / "summary.json", summary.dump(2) + "\n");

        RunMetrics all(wt, R);
        all.merge(result.train);
        all.merge(result.eval);
        auto curve = windowed_se(all, kCurveWindowRlSteps, kCurveStrideTimeSteps * R);
        for (auto& [step, _] : curve) step /= R;  // report in time steps
        write_series_csv(out_dir / "learning_curve.csv", curve);

        std::vector<std::pair<long, double>> per_step;
        for (std::size_t n = 0; n < all.step_se.size(); ++n) per_step.emplace_back(static_cast<long>(n), all.step_se[n]);
        write_series_csv(out_dir / "step_se.csv", per_step);

        const RunMetrics& final_set = result.eval.time_steps > 0 ? result.eval : result.train;
        for (const auto& svc : env.catalog()) {
            auto it = final_set.latency.find(svc.id);
            if (it == final_set.latency.end() || it->second.empty()) continue;
            write_cdf_csv(out_dir / ("latency_type" + std::to_string(svc.id) + ".csv"), latency_cdf(final_set, svc.id));
        }
        if (agent && cfg.checkpoint) save_checkpoint(out_dir / "checkpoint.rbqn", agent->main());
    }
    return result;
}

std::vector<ComparisonRow> compare_summaries(const std::vector<nlohmann::json>& summaries) {
    if (summaries.empty()) throw std::invalid_argument("compare needs at least one run");
    const auto& scenario = summaries.front().at("scenario");
    struct Acc {
        std::vector<double> adj, unl, sum, acc, miss;
    };
    std::map<std::string, Acc> groups;
    std::vector<std::string> order;
    for (const auto& s : summaries) {
        if (s.at("scenario") != scenario)
            throw std::invalid_argument("runs disagree on scenario parameters: " + s.at("scenario").dump() +
                                        " vs " + scenario.dump());
        std::string label = s.at("policy").get<std::string>();
        if (s.contains("licensed_rbs")) label += "(" + std::to_string(s.at("licensed_rbs").get<int>()) + ")";
        const auto& m = s.at("eval").is_null() ? s.at("train") : s.at("eval");
        if (!groups.count(label)) order.push_back(label);
        auto& g = groups[label];
        g.adj.push_back(m.value("se_licensed_adjusted", 0.0));
        g.unl.push_back(m.value("se_unlicensed", 0.0));
        g.sum.push_back(m.value("se_sum", 0.0));
        g.acc.push_back(m.value("acceptance_ratio", 0.0));
        g.miss.push_back(m.value("missed_ratio", 0.0));
    }
    auto stat = [](const std::vector<double>& x) {
        MetricStat st;
        for (double v : x) st.mean += v;
        st.mean /= static_cast<double>(x.size());
        if (x.size() > 1) {
            double ss = 0.0;
            for (double v : x) ss += (v - st.mean) * (v - st.mean);
            st.stddev = std::sqrt(ss / static_cast<double>(x.size() - 1));
        }
        return st;
    };
    std::vector<ComparisonRow> rows;
    for (const auto& label : order) {
        const auto& g = groups[label];
        rows.push_back({label, static_cast<int>(g.adj.size()), stat(g.adj), stat(g.unl), stat(g.sum), stat(g.acc),
                        stat(g.miss)});
    }
    return rows;
}

std::vector<ComparisonRow> compare(const std::vector<std::filesystem::path>& run_dirs) {
    std::vector<nlohmann::json> summaries;
    for (const auto& dir : run_dirs) {
        std::ifstream in(dir / "summary.json");
        if (!in) throw std::runtime_error("no summary.json in " + dir.string());
        summaries.push_back(nlohmann::json::parse(in));
    }
    return compare_summaries(summaries);
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
    std::ostringstream os;
    os << std::fixed;
    auto cell = [&](const MetricStat& s, int prec) {
        std::ostringstream c;
        c << std::fixed << std::setprecision(prec) << s.mean << " +- " << s.stddev;
        return c.str();
    };
    os << std::left << std::setw(12) << "policy" << std::setw(6) << "runs" << std::setw(22) << "SE~licensed"
       << std::setw(22) << "SE_unlicensed" << std::setw(22) << "SE_sum" << std::setw(22) << "acceptance"
       << "missed\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(12) << r.policy << std::setw(6) << r.runs << std::setw(22)
           << cell(r.se_licensed_adjusted, 4) << std::setw(22) << cell(r.se_unlicensed, 4) << std::setw(22)
           << cell(r.se_sum, 4) << std::setw(22) << cell(r.acceptance, 4) << cell(r.missed, 6) << '\n';
    }
    return os.str();
}

}  // namespace rbsched
