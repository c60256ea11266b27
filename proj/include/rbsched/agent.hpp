#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rbsched/environment.hpp"
#include "rbsched/mlp.hpp"

namespace rbsched {

using QNetwork = Mlp<float>;

struct Transition {
    StateVector state;
    int action = 0;
    double reward = 0.0;
    StateVector next_state;
    bool terminal = false;
};

// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
// States are stored contiguously so a minibatch gathers without reallocating.
class ReplayMemory {
public:
    ReplayMemory(std::size_t capacity, int state_dim);

    void push(std::span<const float> state, int action, double reward, std::span<const float> next_state,
              bool terminal);
    void push(const Transition& t) { push(t.state, t.action, t.reward, t.next_state, t.terminal); }

    std::size_t size() const { return count_; }
    std::size_t capacity() const { return capacity_; }
    int state_dim() const { return dim_; }

    // i = 0 is the oldest live transition.
    Transition at(std::size_t i) const;

    // Uniform indices (with replacement) into the live transitions.
    std::vector<std::size_t> sample_indices(std::size_t batch, Rng& rng) const;

    struct Batch {
        QNetwork::Matrix states;       // dim x M
        QNetwork::Matrix next_states;  // dim x M
        std::vector<int> actions;
        std::vector<float> rewards;
        std::vector<bool> terminal;
    };
    Batch gather(std::span<const std::size_t> indices) const;

private:
    std::size_t slot_of(std::size_t i) const;

    std::size_t capacity_;
    int dim_;
    std::size_t head_ = 0;  // next write position
    std::size_t count_ = 0;
    std::vector<float> states_;
    std::vector<float> next_states_;
    std::vector<int> actions_;
    std::vector<float> rewards_;
    std::vector<std::uint8_t> terminal_;
};

// Linear decay from eps_start to eps_end over decay_steps RL steps, then flat.
struct EpsilonSchedule {
    double eps_start = 1.0;
    double eps_end = 0.01;
    double decay_steps = 80000;

    double value(long rl_step) const;
};

struct AgentConfig {
    std::vector<int> hidden = {512, 512, 512};
    double learning_rate = 1e-4;
    double gamma = 0.99;
    int minibatch = 32;
    int target_sync = 100;
    int min_observations = 1000;
    std::size_t replay_capacity = 100000;
    double init_std = 0.05;
    EpsilonSchedule epsilon;

    void validate() const;
};

// y_j = r_j for terminal transitions, else r_j + gamma * max_a Qhat(s'_j, a).
std::vector<float> dqn_targets(const ReplayMemory::Batch& batch, const QNetwork& target, double gamma);

// Epsilon-greedy: always consumes one uniform draw, plus one more when exploring.
int select_action(const QNetwork& net, std::span<const float> state, double epsilon, Rng& rng);

// Main/target network pair with experience replay.
class DqnAgent {
public:
    DqnAgent(int state_dim, int num_actions, AgentConfig cfg, std::uint64_t seed);

    int act(std::span<const float> state, double epsilon);

    // Stores the transition and, once enough observations exist, performs one
    // minibatch update. Returns the loss, or a negative value if no update ran.
    double observe(std::span<const float> state, int action, double reward, std::span<const float> next_state,
                   bool terminal, bool learn = true);

    void sync_target() { target_.copy_weights_from(main_); }

    const QNetwork& main() const { return main_; }
    const QNetwork& target() const { return target_; }
    QNetwork& main() { return main_; }
    const ReplayMemory& replay() const { return replay_; }
    const AgentConfig& config() const { return cfg_; }
    long steps() const { return steps_; }
    long updates() const { return updates_; }
    long syncs() const { return syncs_; }

private:
    AgentConfig cfg_;
    QNetwork main_;
    QNetwork target_;
    ReplayMemory replay_;
    Rng explore_rng_;
    Rng replay_rng_;
    long steps_ = 0;
    long updates_ = 0;
    long syncs_ = 0;
};

// --- baseline schedulers --------------------------------------------------

class Policy {
public:
    virtual ~Policy() = default;
    virtual int select(const Environment& env) = 0;
    virtual std::string name() const = 0;
};

// Occupied slot with the highest SE on the current RB (0 if the buffer is empty).
int mt_action(const Environment& env);
// Occupied slot with the smallest TTL relative to its deadline (0 if empty).
int ml_action(const Environment& env);

class MaxThroughputPolicy final : public Policy {
public:
    int select(const Environment& env) override { return mt_action(env); }
    std::string name() const override { return "mt"; }
};

class MinLatencyPolicy final : public Policy {
public:
    int select(const Environment& env) override { return ml_action(env); }
    std::string name() const override { return "ml"; }
};

class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(make_substream(seed, "explore")) {}
    int select(const Environment& env) override;
    std::string name() const override { return "random"; }

private:
    Rng rng_;
};

// RBs beyond the first `licensed_rbs` are never allocated.
class FixedSplitPolicy final : public Policy {
public:
    FixedSplitPolicy(std::unique_ptr<Policy> inner, int licensed_rbs);
    int select(const Environment& env) override;
    std::string name() const override { return inner_->name() + "+f"; }
    int licensed_rbs() const { return licensed_rbs_; }

private:
    std::unique_ptr<Policy> inner_;
    int licensed_rbs_;
};

std::unique_ptr<Policy> fixed_split(std::unique_ptr<Policy> inner, int licensed_rbs);

}  // namespace rbsched
