#include "rbsched/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbsched {

ReplayMemory::ReplayMemory(std::size_t capacity, int state_dim)
    : capacity_(capacity),
      dim_(state_dim),
      states_(capacity * state_dim),
      next_states_(capacity * state_dim),
      actions_(capacity),
      rewards_(capacity),
      terminal_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
    if (state_dim < 1) throw std::invalid_argument("state dimension must be positive");
}

void ReplayMemory::push(std::span<const float> state, int action, double reward, std::span<const float> next_state,
                        bool terminal) {
    if (static_cast<int>(state.size()) != dim_ || static_cast<int>(next_state.size()) != dim_)
        throw std::invalid_argument("transition state has the wrong dimension");
    std::copy(state.begin(), state.end(), states_.begin() + head_ * dim_);
    std::copy(next_state.begin(), next_state.end(), next_states_.begin() + head_ * dim_);
    actions_[head_] = action;
    rewards_[head_] = static_cast<float>(reward);
    terminal_[head_] = terminal ? 1 : 0;
    head_ = (head_ + 1) % capacity_;
    count_ = std::min(count_ + 1, capacity_);
}

std::size_t ReplayMemory::slot_of(std::size_t i) const {
    if (i >= count_) throw std::out_of_range("replay index");
    return (head_ + capacity_ - count_ + i) % capacity_;
}

Transition ReplayMemory::at(std::size_t i) const {
    const std::size_t s = slot_of(i);
    Transition t;
    t.state.assign(states_.begin() + s * dim_, states_.begin() + (s + 1) * dim_);
    t.next_state.assign(next_states_.begin() + s * dim_, next_states_.begin() + (s + 1) * dim_);
    t.action = actions_[s];
    t.reward = rewards_[s];
    t.terminal = terminal_[s] != 0;
    return t;
}

std::vector<std::size_t> ReplayMemory::sample_indices(std::size_t batch, Rng& rng) const {
    if (count_ == 0) throw std::logic_error("cannot sample from an empty replay memory");
    std::uniform_int_distribution<std::size_t> pick(0, count_ - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

ReplayMemory::Batch ReplayMemory::gather(std::span<const std::size_t> indices) const {
    const auto m = static_cast<Eigen::Index>(indices.size());
    Batch b;
    b.states.resize(dim_, m);
    b.next_states.resize(dim_, m);
    b.actions.resize(m);
    b.rewards.resize(m);
    b.terminal.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const std::size_t s = slot_of(indices[j]);
        b.states.col(j) = Eigen::Map<const Eigen::VectorXf>(states_.data() + s * dim_, dim_);
        b.next_states.col(j) = Eigen::Map<const Eigen::VectorXf>(next_states_.data() + s * dim_, dim_);
        b.actions[j] = actions_[s];
        b.rewards[j] = rewards_[s];
        b.terminal[j] = terminal_[s] != 0;
    }
    return b;
}

double EpsilonSchedule::value(long rl_step) const {
    if (rl_step >= decay_steps) return eps_end;  // 1 - 0.99 is not exactly 0.01
    return std::max(eps_end, eps_start - static_cast<double>(rl_step) * (eps_start - eps_end) / decay_steps);
}

void AgentConfig::validate() const {
    auto fail = [](const char* field, const char* what) {
        throw std::invalid_argument(std::string("agent.") + field + ": " + what);
    };
    if (hidden.empty()) fail("hidden", "need at least one hidden layer");
    for (int h : hidden)
        if (h < 1) fail("hidden", "layer sizes must be positive");
    if (!(learning_rate > 0)) fail("learning_rate", "must be positive");
    if (!(gamma > 0 && gamma <= 1)) fail("gamma", "must lie in (0, 1]");
    if (minibatch < 1) fail("minibatch", "must be >= 1");
    if (target_sync < 1) fail("target_sync", "must be >= 1");
    if (min_observations < 0) fail("min_observations", "must be >= 0");
    if (replay_capacity < 1) fail("replay_capacity", "must be >= 1");
    if (!(init_std > 0)) fail("init_std", "must be positive");
    if (!(epsilon.eps_end >= 0 && epsilon.eps_end <= epsilon.eps_start && epsilon.eps_start <= 1))
        fail("eps_start", "need 0 <= eps_end <= eps_start <= 1");
    if (!(epsilon.decay_steps > 0)) fail("eps_decay_steps", "must be positive");
}

std::vector<float> dqn_targets(const ReplayMemory::Batch& batch, const QNetwork& target, double gamma) {
    const auto m = batch.next_states.cols();
    if (m == 0) throw std::invalid_argument("empty minibatch");
    const QNetwork::Matrix q_next = target.forward_batch(batch.next_states);
    std::vector<float> y(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double v = batch.rewards[j];
        if (!batch.terminal[j]) v += gamma * static_cast<double>(q_next.col(j).maxCoeff());
        y[j] = static_cast<float>(v);
    }
    return y;
}

int select_action(const QNetwork& net, std::span<const float> state, double epsilon, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < epsilon) {
        std::uniform_int_distribution<int> pick(0, net.output_dim() - 1);
        return pick(rng);
    }
    return argmax_lowest(net.forward(state));
}

DqnAgent::DqnAgent(int state_dim, int num_actions, AgentConfig cfg, std::uint64_t seed)
    : cfg_((cfg.validate(), std::move(cfg))),
      replay_(cfg_.replay_capacity, state_dim),
      explore_rng_(make_substream(seed, "explore")),
      replay_rng_(make_substream(seed, "replay")) {
    std::vector<int> sizes{state_dim};
    sizes.insert(sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    sizes.push_back(num_actions);
    Rng init_rng = make_substream(seed, "init");
    main_ = QNetwork(sizes, cfg_.init_std, init_rng);
    target_ = main_;
}

int DqnAgent::act(std::span<const float> state, double epsilon) {
    return select_action(main_, state, epsilon, explore_rng_);
}

double DqnAgent::observe(std::span<const float> state, int action, double reward, std::span<const float> next_state,
                         bool terminal, bool learn) {
    replay_.push(state, action, reward, next_state, terminal);
    ++steps_;
    double loss = -1.0;
    const auto ready = std::max<std::size_t>(cfg_.min_observations, cfg_.minibatch);
    if (learn && replay_.size() >= ready) {
        const auto idx = replay_.sample_indices(cfg_.minibatch, replay_rng_);
        const auto batch = replay_.gather(idx);
        const auto y = dqn_targets(batch, target_, cfg_.gamma);
        loss = main_.train_step(batch.states, batch.actions, y, cfg_.learning_rate);
        ++updates_;
    }
    if (steps_ % cfg_.target_sync == 0) {
        sync_target();
        ++syncs_;
    }
    return loss;
}

int mt_action(const Environment& env) {
    int best = 0;
    int best_bits = -1;
    for (int j = 0; j < static_cast<int>(env.buffer().size()); ++j) {
        if (!env.buffer()[j].occupied) continue;
        const int bits = env.deliverable_bits_now(j + 1);
        if (bits > best_bits) {
            best_bits = bits;
            best = j + 1;
        }
    }
    return best;
}

int ml_action(const Environment& env) {
    int best = 0;
    long best_ttl = 0, best_max = 1;
    for (int j = 0; j < static_cast<int>(env.buffer().size()); ++j) {
        const auto& e = env.buffer()[j];
        if (!e.occupied) continue;
        // ttl/max < best_ttl/best_max, compared exactly
        if (best == 0 || static_cast<long>(e.ttl) * best_max < best_ttl * e.max_latency) {
            best = j + 1;
            best_ttl = e.ttl;
            best_max = e.max_latency;
        }
    }
    return best;
}

int RandomPolicy::select(const Environment& env) {
    std::uniform_int_distribution<int> pick(0, env.num_actions() - 1);
    return pick(rng_);
}

FixedSplitPolicy::FixedSplitPolicy(std::unique_ptr<Policy> inner, int licensed_rbs)
    : inner_(std::move(inner)), licensed_rbs_(licensed_rbs) {
    if (!inner_) throw std::invalid_argument("fixed split needs an inner policy");
    if (licensed_rbs < 1) throw std::invalid_argument("licensed_rbs must be >= 1");
}

int FixedSplitPolicy::select(const Environment& env) {
    if (licensed_rbs_ > env.num_rbs()) throw std::invalid_argument("licensed_rbs exceeds the number of RBs");
    return env.psi() > licensed_rbs_ ? 0 : inner_->select(env);
}

std::unique_ptr<Policy> fixed_split(std::unique_ptr<Policy> inner, int licensed_rbs) {
    return std::make_unique<FixedSplitPolicy>(std::move(inner), licensed_rbs);
}

}  // namespace rbsched
