#include "rbsched/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rbsched {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw std::invalid_argument(std::string(key) + ": cannot parse '" + std::string(value) + "' as " +
                                std::string(expected));
}

double to_double(std::string_view key, std::string_view v) {
    double out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(out)) bad_value(key, v, "a number");
    return out;
}

long long to_integer(std::string_view key, std::string_view v) {
    long long out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) bad_value(key, v, "an integer");
    return out;
}

int to_int(std::string_view key, std::string_view v) {
    const auto x = to_integer(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) bad_value(key, v, "an int");
    return static_cast<int>(x);
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad_value(key, v, "a boolean");
}

std::vector<int> to_int_list(std::string_view key, std::string_view v) {
    std::vector<int> out;
    std::string item;
    std::istringstream is{std::string(v)};
    while (std::getline(is, item, ',')) out.push_back(to_int(key, trim(item)));
    if (out.empty()) bad_value(key, v, "a comma-separated list of integers");
    return out;
}

std::string fmt_double(double x) {
    if (x == std::numeric_limits<double>::infinity()) return "inf";
    // shortest text that parses back to the same double
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

struct Field {
    std::function<void(ExperimentConfig&, std::string_view, std::string_view)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

#define RB_DOUBLE(KEY, MEMBER)                                                                        \
    {KEY, {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.MEMBER = to_double(k, v); }, \
           [](const ExperimentConfig& c) { return fmt_double(c.MEMBER); }}}
#define RB_INT(KEY, MEMBER)                                                                        \
    {KEY, {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.MEMBER = to_int(k, v); }, \
           [](const ExperimentConfig& c) { return std::to_string(c.MEMBER); }}}
#define RB_BOOL(KEY, MEMBER)                                                                        \
    {KEY, {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.MEMBER = to_bool(k, v); }, \
           [](const ExperimentConfig& c) { return std::string(c.MEMBER ? "true" : "false"); }}}

const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = {
        RB_DOUBLE("channel.carrier_freq_hz", env.channel.carrier_freq_hz),
        RB_DOUBLE("channel.ref_distance_m", env.channel.ref_distance_m),
        RB_DOUBLE("channel.path_loss_exponent", env.channel.path_loss_exponent),
        RB_DOUBLE("channel.shadowing_sigma_db", env.channel.shadowing_sigma_db),
        RB_DOUBLE("channel.corr", env.channel.corr_param),
        RB_INT("channel.coherence_steps", env.channel.coherence_steps),
        RB_DOUBLE("channel.dist_min_m", env.channel.dist_min_m),
        RB_DOUBLE("channel.dist_max_m", env.channel.dist_max_m),
        RB_DOUBLE("channel.tx_power_w", env.channel.tx_power_w),
        RB_DOUBLE("channel.rb_bandwidth_hz", env.channel.rb_bandwidth_hz),
        RB_DOUBLE("channel.rb_duration_s", env.channel.rb_duration_s),
        RB_INT("channel.num_rbs", env.channel.num_rbs),
        RB_DOUBLE("channel.noise_temp_k", env.channel.noise_temp_k),
        RB_DOUBLE("channel.noise_figure_db", env.channel.noise_figure_db),
        {"traffic.rate",
         {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.env.rate = parse_rate_profile(v); },
          [](const ExperimentConfig& c) { return to_string(c.env.rate); }}},
        RB_INT("env.buffer", env.buffer_len),
        RB_INT("env.continuity", env.continuity_len),
        RB_DOUBLE("reward.alpha", env.reward.alpha),
        RB_DOUBLE("reward.beta", env.reward.beta),
        {"reward.delta",
         {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
              c.env.reward.delta = v == "inf" ? std::numeric_limits<double>::infinity() : to_double(k, v);
          },
          [](const ExperimentConfig& c) { return fmt_double(c.env.reward.delta); }}},
        RB_DOUBLE("agent.gamma", agent.gamma),
        RB_DOUBLE("agent.learning_rate", agent.learning_rate),
        RB_INT("agent.minibatch", agent.minibatch),
        RB_INT("agent.target_sync", agent.target_sync),
        RB_INT("agent.min_observations", agent.min_observations),
        {"agent.replay_capacity",
         {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
              const auto x = to_integer(k, v);
              if (x < 1) throw std::invalid_argument(std::string(k) + ": must be >= 1");
              c.agent.replay_capacity = static_cast<std::size_t>(x);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.agent.replay_capacity); }}},
        {"agent.hidden",
         {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.agent.hidden = to_int_list(k, v); },
          [](const ExperimentConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.agent.hidden.size(); ++i)
                  s += (i ? "," : "") + std::to_string(c.agent.hidden[i]);
              return s;
          }}},
        RB_DOUBLE("agent.init_std", agent.init_std),
        RB_DOUBLE("agent.eps_start", agent.epsilon.eps_start),
        RB_DOUBLE("agent.eps_end", agent.epsilon.eps_end),
        RB_DOUBLE("agent.eps_decay_steps", agent.epsilon.decay_steps),
        {"run.policy",
         {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.policy = parse_policy(v); },
          [](const ExperimentConfig& c) { return to_string(c.policy); }}},
        RB_INT("run.licensed_rbs", licensed_rbs),
        RB_INT("run.episodes", episodes),
        {"run.eval_episodes",
         {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.eval_episodes = to_int(k, v); },
          [](const ExperimentConfig& c) { return std::to_string(c.eval_count()); }}},
        RB_INT("run.steps_per_episode", env.steps_per_episode),
        {"run.seed",
         {[](ExperimentConfig& c, std::string_view k, std::string_view v) {
              const auto x = to_integer(k, v);
              if (x < 0) throw std::invalid_argument(std::string(k) + ": must be nonnegative");
              c.seed = static_cast<std::uint64_t>(x);
          },
          [](const ExperimentConfig& c) { return std::to_string(c.seed); }}},
        {"run.out",
         {[](ExperimentConfig& c, std::string_view, std::string_view v) { c.out_dir = std::string(v); },
          [](const ExperimentConfig& c) { return c.out_dir; }}},
        RB_BOOL("run.freeze_eval", freeze_eval),
        {"run.max_rl_steps",
         {[](ExperimentConfig& c, std::string_view k, std::string_view v) { c.max_rl_steps = to_integer(k, v); },
          [](const ExperimentConfig& c) { return std::to_string(c.max_rl_steps); }}},
        RB_BOOL("run.trace", trace),
        RB_BOOL("run.checkpoint", checkpoint),
    };
    return table;
}

#undef RB_DOUBLE
#undef RB_INT
#undef RB_BOOL

}  // namespace

PolicyKind parse_policy(std::string_view name) {
    if (name == "dqn") return PolicyKind::Dqn;
    if (name == "mt") return PolicyKind::Mt;
    if (name == "ml") return PolicyKind::Ml;
    if (name == "random") return PolicyKind::Random;
    if (name == "mt+f") return PolicyKind::MtF;
    if (name == "ml+f") return PolicyKind::MlF;
    throw std::invalid_argument("run.policy: unknown policy '" + std::string(name) +
                                "' (expected dqn|mt|ml|random|mt+f|ml+f)");
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Dqn: return "dqn";
        case PolicyKind::Mt: return "mt";
        case PolicyKind::Ml: return "ml";
        case PolicyKind::Random: return "random";
        case PolicyKind::MtF: return "mt+f";
        case PolicyKind::MlF: return "ml+f";
    }
    return "?";
}

void ExperimentConfig::validate() const {
    env.validate();
    agent.validate();
    if (episodes < 1) throw std::invalid_argument("run.episodes: must be >= 1");
    if (eval_count() < 0) throw std::invalid_argument("run.eval_episodes: must be >= 0");
    if (max_rl_steps < 0) throw std::invalid_argument("run.max_rl_steps: must be >= 0");
    if ((policy == PolicyKind::MtF || policy == PolicyKind::MlF) &&
        (licensed_rbs < 1 || licensed_rbs > env.channel.num_rbs))
        throw std::invalid_argument("run.licensed_rbs: must lie in [1, channel.num_rbs]");
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto& [key, field] : fields()) out += key + " = " + field.get(*this) + "\n";
    return out;
}

void set_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
    auto it = fields().find(key);
    if (it == fields().end()) throw std::invalid_argument("unknown configuration key '" + std::string(key) + "'");
    it->second.set(cfg, key, value);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [key, _] : fields()) keys.push_back(key);
    return keys;
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        try {
            set_config_value(cfg, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace rbsched
