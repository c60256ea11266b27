#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rbsched/agent.hpp"
#include "rbsched/harness.hpp"

namespace py = pybind11;
using namespace rbsched;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict outcome_dict(const StepOutcome& o) {
    py::dict d;
    d["next_state"] = o.next_state;
    d["reward"] = o.reward;
    d["terminal"] = o.terminal;
    d["rb"] = o.info.rb;
    d["delivered_bits"] = o.info.delivered_bits;
    d["se"] = o.info.se;
    d["invalid"] = o.info.invalid;
    d["buffer_was_empty"] = o.info.buffer_was_empty;
    d["time_step_finished"] = o.info.time_step_finished;
    if (o.info.time_step_finished) {
        d["mask"] = o.info.mask;
        d["continuity"] = o.info.continuity;
        d["missed"] = o.info.missed.size();
        d["arrivals"] = o.info.arrivals;
        d["admitted"] = o.info.admitted;
        d["dropped"] = o.info.dropped;
    }
    return d;
}

py::list buffer_list(const Environment& env) {
    py::list out;
    for (const auto& e : env.buffer()) {
        if (!e.occupied) {
            out.append(py::none());
            continue;
        }
        py::dict d;
        d["service"] = e.service;
        d["ttl"] = e.ttl;
        d["remaining_bits"] = e.remaining_bits;
        d["bits"] = e.bits;
        d["pdu_bits"] = e.pdu_bits;
        d["delivered_bits"] = e.delivered_bits;
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(rbsched, m) {
    m.doc() = "DRL resource-block scheduler: environment, baselines, DQN agent and experiment harness";

    py::register_exception<NonFiniteLoss>(m, "NonFiniteLoss", PyExc_ArithmeticError);

    py::enum_<RateProfile>(m, "RateProfile").value("Low", RateProfile::Low).value("High", RateProfile::High);

    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init<>())
        .def_readwrite("num_rbs", &ChannelParams::num_rbs)
        .def_readwrite("corr_param", &ChannelParams::corr_param)
        .def_readwrite("coherence_steps", &ChannelParams::coherence_steps)
        .def_readwrite("shadowing_sigma_db", &ChannelParams::shadowing_sigma_db)
        .def_readwrite("dist_min_m", &ChannelParams::dist_min_m)
        .def_readwrite("dist_max_m", &ChannelParams::dist_max_m)
        .def_readwrite("tx_power_w", &ChannelParams::tx_power_w)
        .def("rb_resource", &ChannelParams::rb_resource);

    py::class_<RewardParams>(m, "RewardParams")
        .def(py::init<>())
        .def(py::init([](double a, double b, double d) { return RewardParams{a, b, d}; }), py::arg("alpha"),
             py::arg("beta"), py::arg("delta"))
        .def_readwrite("alpha", &RewardParams::alpha)
        .def_readwrite("beta", &RewardParams::beta)
        .def_readwrite("delta", &RewardParams::delta);

    py::class_<EnvConfig>(m, "EnvConfig")
        .def(py::init<>())
        .def_readwrite("channel", &EnvConfig::channel)
        .def_readwrite("rate", &EnvConfig::rate)
        .def_readwrite("buffer_len", &EnvConfig::buffer_len)
        .def_readwrite("continuity_len", &EnvConfig::continuity_len)
        .def_readwrite("reward", &EnvConfig::reward)
        .def_readwrite("steps_per_episode", &EnvConfig::steps_per_episode)
        .def("validate", &EnvConfig::validate);

    py::class_<Environment>(m, "Environment")
        .def(py::init<EnvConfig, std::uint64_t>(), py::arg("config"), py::arg("seed"))
        .def("reset", &Environment::reset)
        .def("step", [](Environment& e, int a) { return outcome_dict(e.step(a)); }, py::arg("action"))
        .def("encode_state", &Environment::encode_state)
        .def("raw_state", &Environment::raw_state)
        .def("spectral_efficiency", &Environment::spectral_efficiency)
        .def("is_invalid", &Environment::is_invalid)
        .def("place_request", &Environment::place_request, py::arg("slot"), py::arg("service"), py::arg("ttl"),
             py::arg("remaining_bits"), py::arg("bits"))
        .def("set_continuity", &Environment::set_continuity)
        .def("clear_arrivals", &Environment::clear_arrivals)
        .def_property_readonly("state_dim", py::overload_cast<>(&Environment::state_dim, py::const_))
        .def_property_readonly("num_actions", &Environment::num_actions)
        .def_property_readonly("num_rbs", &Environment::num_rbs)
        .def_property_readonly("psi", &Environment::psi)
        .def_property_readonly("time_step", &Environment::time_step)
        .def_property_readonly("continuity", &Environment::continuity)
        .def_property_readonly("occupied_count", &Environment::occupied_count)
        .def_property_readonly("finished", &Environment::finished)
        .def_property_readonly("se_max", &Environment::se_max)
        .def_property_readonly("buffer", &buffer_list)
        .def_property_readonly("total_delivered_bits", &Environment::total_delivered_bits)
        .def_property_readonly("total_missed_bits", &Environment::total_missed_bits);

    m.def("continuity_function", &continuity_function, py::arg("v"), py::arg("continuity_len"));
    m.def("mt_action", &mt_action);
    m.def("ml_action", &ml_action);

    py::class_<EpsilonSchedule>(m, "EpsilonSchedule")
        .def(py::init<>())
        .def_readwrite("eps_start", &EpsilonSchedule::eps_start)
        .def_readwrite("eps_end", &EpsilonSchedule::eps_end)
        .def_readwrite("decay_steps", &EpsilonSchedule::decay_steps)
        .def("value", &EpsilonSchedule::value);

    py::class_<AgentConfig>(m, "AgentConfig")
        .def(py::init<>())
        .def_readwrite("hidden", &AgentConfig::hidden)
        .def_readwrite("learning_rate", &AgentConfig::learning_rate)
        .def_readwrite("gamma", &AgentConfig::gamma)
        .def_readwrite("minibatch", &AgentConfig::minibatch)
        .def_readwrite("target_sync", &AgentConfig::target_sync)
        .def_readwrite("min_observations", &AgentConfig::min_observations)
        .def_readwrite("replay_capacity", &AgentConfig::replay_capacity)
        .def_readwrite("init_std", &AgentConfig::init_std)
        .def_readwrite("epsilon", &AgentConfig::epsilon);

    py::class_<DqnAgent>(m, "DqnAgent")
        .def(py::init<int, int, AgentConfig, std::uint64_t>(), py::arg("state_dim"), py::arg("num_actions"),
             py::arg("config"), py::arg("seed"))
        .def("act", [](DqnAgent& a, const std::vector<float>& s, double eps) { return a.act(s, eps); })
        .def("observe",
             [](DqnAgent& a, const std::vector<float>& s, int act, double r, const std::vector<float>& s2, bool term,
                bool learn) { return a.observe(s, act, r, s2, term, learn); },
             py::arg("state"), py::arg("action"), py::arg("reward"), py::arg("next_state"), py::arg("terminal"),
             py::arg("learn") = true)
        .def("q_values",
             [](const DqnAgent& a, const std::vector<float>& s) {
                 auto q = a.main().forward(s);
                 return std::vector<float>(q.data(), q.data() + q.size());
             })
        .def_property_readonly("steps", &DqnAgent::steps)
        .def_property_readonly("updates", &DqnAgent::updates)
        .def_property_readonly("syncs", &DqnAgent::syncs);

    py::class_<RunMetrics>(m, "RunMetrics")
        .def_readonly("rb_se", &RunMetrics::rb_se)
        .def_readonly("step_se", &RunMetrics::step_se)
        .def_readonly("time_steps", &RunMetrics::time_steps)
        .def_readonly("delivered_bits", &RunMetrics::delivered_bits)
        .def_readonly("missed_bits", &RunMetrics::missed_bits)
        .def_readonly("arrivals", &RunMetrics::arrivals)
        .def_readonly("accepted", &RunMetrics::accepted)
        .def_readonly("missed", &RunMetrics::missed)
        .def_readonly("satisfied", &RunMetrics::satisfied)
        .def_readonly("invalid_actions", &RunMetrics::invalid_actions)
        .def("summary", [](const RunMetrics& r) { return to_py(metrics_summary(r)); })
        .def("windowed_se", [](const RunMetrics& r, int w, int s) { return windowed_se(r, w, s); },
             py::arg("window") = 1000, py::arg("stride") = 600)
        .def("latency_cdf", [](const RunMetrics& r, int service) { return latency_cdf(r, service); });

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("env", &ExperimentConfig::env)
        .def_readwrite("agent", &ExperimentConfig::agent)
        .def_property(
            "policy", [](const ExperimentConfig& c) { return to_string(c.policy); },
            [](ExperimentConfig& c, const std::string& s) { c.policy = parse_policy(s); })
        .def_readwrite("licensed_rbs", &ExperimentConfig::licensed_rbs)
        .def_readwrite("episodes", &ExperimentConfig::episodes)
        .def_readwrite("eval_episodes", &ExperimentConfig::eval_episodes)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("out_dir", &ExperimentConfig::out_dir)
        .def_readwrite("freeze_eval", &ExperimentConfig::freeze_eval)
        .def_readwrite("max_rl_steps", &ExperimentConfig::max_rl_steps)
        .def_readwrite("trace", &ExperimentConfig::trace)
        .def_readwrite("checkpoint", &ExperimentConfig::checkpoint)
        .def("set", [](ExperimentConfig& c, const std::string& k, const std::string& v) { set_config_value(c, k, v); })
        .def("validate", &ExperimentConfig::validate)
        .def("to_text", &ExperimentConfig::to_text);

    m.def("parse_config", [](const std::string& text) { return parse_config(text); });
    m.def("load_config", &load_config);
    m.def("config_keys", &config_keys);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("train", &RunResult::train)
        .def_readonly("eval", &RunResult::eval)
        .def_readonly("rl_steps", &RunResult::rl_steps)
        .def_readonly("updates", &RunResult::updates)
        .def_readonly("capped", &RunResult::capped)
        .def_property_readonly("summary", [](const RunResult& r) { return to_py(r.summary); });

    m.def(
        "run",
        [](const ExperimentConfig& cfg, const EpisodeCallback& cb) {
            py::gil_scoped_release release;
            if (!cb) return run(cfg);
            // the callback re-enters Python
            return run(cfg, [&](const std::string& set, int e, const RunMetrics& rm) {
                py::gil_scoped_acquire acquire;
                cb(set, e, rm);
            });
        },
        py::arg("config"), py::arg("on_episode") = EpisodeCallback{});

    m.def("compare", [](const std::vector<std::filesystem::path>& dirs) {
        return format_comparison(compare(dirs));
    });
}
