#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "rbsched/channel.hpp"
#include "rbsched/traffic.hpp"

namespace rbsched {

using StateVector = std::vector<float>;

struct RewardParams {
    double alpha = 1.0;
    double beta = 0.0;
    // Latency sharpness; +infinity turns the latency factor into a constant 1.
    double delta = std::numeric_limits<double>::infinity();

    bool delta_is_infinite() const { return delta == std::numeric_limits<double>::infinity(); }
};

struct EnvConfig {
    ChannelParams channel;
    RateProfile rate = RateProfile::High;
    int buffer_len = 10;      // L
    int continuity_len = 2;   // C
    RewardParams reward;
    int steps_per_episode = 500;  // I

    void validate() const;
};

// One slot of the requests' buffer.
struct BufferEntry {
    bool occupied = false;
    int service = 0;          // q1
    int ttl = 0;              // q2, time steps left
    int remaining_bits = 0;   // q3
    std::vector<int> bits;    // t, deliverable bits per RB
    // bookkeeping outside the agent's view
    int pdu_bits = 0;
    int max_latency = 0;
    int delivered_bits = 0;
    int admitted_step = 0;
    LinkState link;
};

struct MissedRequest {
    int slot;
    int service;
    int delivered_bits;
};

struct SatisfiedRequest {
    int slot;
    int service;
    int latency_steps;
};

struct StepInfo {
    int rb = 0;  // 0-based RB the action applied to
    int delivered_bits = 0;
    double se = 0.0;
    bool invalid = false;
    bool buffer_was_empty = false;
    std::optional<SatisfiedRequest> satisfied;

    // Filled only on the last RB of a time step.
    bool time_step_finished = false;
    int time_step = 0;  // index of the step that just finished
    std::vector<bool> mask;
    std::vector<int> continuity;
    std::vector<MissedRequest> missed;
    int arrivals = 0;
    int admitted = 0;
    int dropped = 0;
};

struct StepOutcome {
    StateVector next_state;
    double reward = 0.0;
    bool terminal = false;
    StepInfo info;
};

int continuity_function(int v, int continuity_len);

// The allocation MDP. One RL step assigns the current RB (psi) to a buffer
// slot or leaves it free; every R RL steps close a time step.
class Environment {
public:
    Environment(EnvConfig cfg, std::uint64_t seed);

    static int state_dim(int buffer_len, int num_rbs) { return (num_rbs + 3) * buffer_len + num_rbs + 1; }
    int state_dim() const { return state_dim(cfg_.buffer_len, num_rbs()); }
    int num_actions() const { return cfg_.buffer_len + 1; }
    int num_rbs() const { return cfg_.channel.num_rbs; }

    // Empties the buffer and draws a fresh arrival stream for one episode.
    StateVector reset();

    StepOutcome step(int action);

    // Network input: every field scaled into a bounded range.
    StateVector encode_state() const;
    // Same layout, unscaled (q1, q2, q3, t..., v..., psi).
    std::vector<double> raw_state() const;

    // SE the current RB would carry under `action`; 0 for a free or invalid choice.
    double spectral_efficiency(int action) const;
    int deliverable_bits_now(int action) const;
    bool is_invalid(int action) const;

    const EnvConfig& config() const { return cfg_; }
    const LinkModel& link_model() const { return links_; }
    const std::vector<ServiceType>& catalog() const { return catalog_; }
    const std::vector<BufferEntry>& buffer() const { return slots_; }
    const std::vector<int>& continuity() const { return v_; }
    const std::vector<bool>& current_mask() const { return mask_; }
    int current_rb() const { return rb_; }  // 0-based
    int psi() const { return rb_ + 1; }
    int time_step() const { return n_; }
    long rl_step() const { return i_; }
    int occupied_count() const;
    bool finished() const { return finished_; }
    double se_max() const { return se_max_; }
    double r1() const { return r1_; }

    long total_delivered_bits() const { return total_delivered_; }
    long total_missed_bits() const { return total_missed_bits_; }

    // Scenario construction for tests and tools.
    void place_request(int slot, int service, int ttl, int remaining_bits, std::vector<int> bits);
    void set_continuity(std::vector<int> v);
    void clear_arrivals();

private:
    void finish_time_step(StepInfo& info);
    void admit(StepInfo& info);
    double latency_factor() const;
    const ServiceType& service(int id) const { return catalog_.at(id - 1); }

    EnvConfig cfg_;
    LinkModel links_;
    std::vector<ServiceType> catalog_;
    Rng traffic_rng_;
    Rng channel_rng_;
    double se_max_;
    int max_bits_;

    std::vector<BufferEntry> slots_;
    std::vector<int> v_;
    std::vector<bool> mask_;
    std::vector<Request> arrivals_;
    std::size_t next_arrival_ = 0;
    int rb_ = 0;
    int n_ = 0;
    long i_ = 0;
    double r1_ = 0.0;
    bool finished_ = true;
    long total_delivered_ = 0;
    long total_missed_bits_ = 0;
};

// One JSON object per line: i, a, r, bits, mask, v.
void write_trace_line(std::ostream& os, long rl_step, int action, const StepOutcome& out);

}  // namespace rbsched
