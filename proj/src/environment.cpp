#include "rbsched/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace rbsched {

namespace {

constexpr double kContinuityCap = 64.0;

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

}  // namespace

void EnvConfig::validate() const {
    channel.validate();
    require(buffer_len >= 1, "env.buffer", "must be >= 1");
    require(continuity_len >= 1, "env.continuity", "must be >= 1");
    require(steps_per_episode >= 1, "run.steps_per_episode", "must be >= 1");
    require(reward.alpha >= 0, "reward.alpha", "must be nonnegative");
    require(reward.beta >= 0, "reward.beta", "must be nonnegative");
    require(reward.delta > 0, "reward.delta", "must be positive or inf");
}

int continuity_function(int v, int continuity_len) { return v >= continuity_len ? 1 : 0; }

Environment::Environment(EnvConfig cfg, std::uint64_t seed)
    : cfg_((cfg.validate(), std::move(cfg))),
      links_(cfg_.channel),
      catalog_(service_catalog(cfg_.rate)),
      traffic_rng_(make_substream(seed, "traffic")),
      channel_rng_(make_substream(seed, "channel")),
      max_bits_(links_.max_bits()) {
    // Largest SE an RB can actually carry after flooring to whole bits.
    se_max_ = max_bits_ / cfg_.channel.rb_resource();
    slots_.resize(cfg_.buffer_len);
    v_.assign(num_rbs(), 0);
    mask_.assign(num_rbs(), false);
}

StateVector Environment::reset() {
    for (auto& s : slots_) s = BufferEntry{};
    v_.assign(num_rbs(), 0);
    mask_.assign(num_rbs(), false);
    rb_ = 0;
    n_ = 0;
    i_ = 0;
    r1_ = 0.0;
    finished_ = false;
    arrivals_ = generate_arrivals(catalog_, cfg_.steps_per_episode, traffic_rng_);
    next_arrival_ = 0;
    StepInfo scratch;
    admit(scratch);
    return encode_state();
}

int Environment::occupied_count() const {
    return static_cast<int>(std::count_if(slots_.begin(), slots_.end(), [](const auto& s) { return s.occupied; }));
}

bool Environment::is_invalid(int action) const {
    return action > 0 && !slots_[action - 1].occupied;
}

int Environment::deliverable_bits_now(int action) const {
    if (action <= 0 || action > cfg_.buffer_len) return 0;
    const auto& e = slots_[action - 1];
    if (!e.occupied) return 0;
    return std::min(e.bits[rb_], e.remaining_bits);
}

double Environment::spectral_efficiency(int action) const {
    return deliverable_bits_now(action) / cfg_.channel.rb_resource();
}

double Environment::latency_factor() const {
    if (cfg_.reward.delta_is_infinite()) return 1.0;
    double min_norm = std::numeric_limits<double>::infinity();
    for (const auto& e : slots_) {
        if (e.occupied) min_norm = std::min(min_norm, static_cast<double>(e.ttl) / e.max_latency);
    }
    return 1.0 - std::exp(-cfg_.reward.delta * min_norm);
}

StepOutcome Environment::step(int action) {
    if (finished_) throw std::logic_error("step() called on a finished episode; call reset()");
    if (action < 0 || action > cfg_.buffer_len)
        throw std::out_of_range("action " + std::to_string(action) + " outside [0, L]");

    const int R = num_rbs();
    StepOutcome out;
    StepInfo& info = out.info;
    info.rb = rb_;
    info.buffer_was_empty = occupied_count() == 0;
    info.invalid = !info.buffer_was_empty && is_invalid(action);
    const bool last_rb = rb_ == R - 1;
    // The latency factor reads the state the action was taken in.
    const double r3 = (last_rb && !info.buffer_was_empty) ? latency_factor() : 0.0;

    if (action > 0 && !is_invalid(action)) {
        auto& e = slots_[action - 1];
        const int bits = std::min(e.bits[rb_], e.remaining_bits);
        e.remaining_bits -= bits;
        e.delivered_bits += bits;
        total_delivered_ += bits;
        info.delivered_bits = bits;
        info.se = bits / cfg_.channel.rb_resource();
        mask_[rb_] = true;
        if (e.remaining_bits == 0) {
            info.satisfied = SatisfiedRequest{action - 1, e.service, n_ - e.admitted_step + 1};
            e = BufferEntry{};
        }
    }

    double reward = 0.0;
    if (info.invalid) {
        reward = -1.0;
    } else if (!info.buffer_was_empty) {
        r1_ += info.se / se_max_;
    }

    if (last_rb) {
        finish_time_step(info);
        if (!info.buffer_was_empty) {
            double r2 = 0.0;
            for (int v : info.continuity) r2 += continuity_function(v, cfg_.continuity_len);
            reward += (cfg_.reward.alpha * r1_ + cfg_.reward.beta * r2) * r3 / R;
        }
        r1_ = 0.0;
        rb_ = 0;
    } else {
        ++rb_;
    }
    ++i_;

    out.reward = reward;
    out.terminal = i_ >= static_cast<long>(cfg_.steps_per_episode) * R;
    finished_ = out.terminal;
    out.next_state = encode_state();
    return out;
}

void Environment::finish_time_step(StepInfo& info) {
    const int R = num_rbs();
    info.time_step_finished = true;
    info.time_step = n_;
    info.mask = mask_;

    for (int k = 0; k < R; ++k) v_[k] = mask_[k] ? 0 : v_[k] + 1;
    info.continuity = v_;
    mask_.assign(R, false);

    for (int j = 0; j < cfg_.buffer_len; ++j) {
        auto& e = slots_[j];
        if (!e.occupied) continue;
        --e.ttl;
        ++e.link.age;
        if (e.ttl == 0) {
            info.missed.push_back({j, e.service, e.delivered_bits});
            total_missed_bits_ += e.delivered_bits;
            e = BufferEntry{};
        }
    }

    ++n_;
    admit(info);

    if (n_ % cfg_.channel.coherence_steps == 0) {
        for (auto& e : slots_) {
            if (!e.occupied) continue;
            links_.redraw_small_scale(e.link, channel_rng_);
            links_.fill_bits(e.link, e.bits);
        }
    }
}

void Environment::admit(StepInfo& info) {
    while (next_arrival_ < arrivals_.size() && arrivals_[next_arrival_].arrival_step <= n_) {
        const auto& req = arrivals_[next_arrival_++];
        ++info.arrivals;
        auto free_slot = std::find_if(slots_.begin(), slots_.end(), [](const auto& s) { return !s.occupied; });
        if (free_slot == slots_.end()) {
            ++info.dropped;
            continue;
        }
        const auto& svc = service(req.service);
        BufferEntry e;
        e.occupied = true;
        e.service = svc.id;
        e.ttl = svc.max_latency_steps;
        e.remaining_bits = svc.pdu_bits;
        e.pdu_bits = svc.pdu_bits;
        e.max_latency = svc.max_latency_steps;
        e.admitted_step = n_;
        e.link = links_.draw_link(channel_rng_);
        links_.fill_bits(e.link, e.bits);
        *free_slot = std::move(e);
        ++info.admitted;
    }
}

std::vector<double> Environment::raw_state() const {
    const int R = num_rbs();
    std::vector<double> s;
    s.reserve(state_dim());
    for (const auto& e : slots_) {
        if (!e.occupied) {
            s.insert(s.end(), R + 3, 0.0);
            continue;
        }
        s.push_back(e.service);
        s.push_back(e.ttl);
        s.push_back(e.remaining_bits);
        for (int b : e.bits) s.push_back(b);
    }
    for (int v : v_) s.push_back(v);
    s.push_back(psi());
    return s;
}

StateVector Environment::encode_state() const {
    const int R = num_rbs();
    StateVector s;
    s.reserve(state_dim());
    for (const auto& e : slots_) {
        if (!e.occupied) {
            s.insert(s.end(), R + 3, 0.0f);
            continue;
        }
        s.push_back(static_cast<float>(e.service));
        s.push_back(static_cast<float>(static_cast<double>(e.ttl) / e.max_latency));
        s.push_back(static_cast<float>(static_cast<double>(e.remaining_bits) / e.pdu_bits));
        for (int b : e.bits) s.push_back(static_cast<float>(static_cast<double>(b) / max_bits_));
    }
    for (int v : v_) s.push_back(static_cast<float>(std::min<double>(v, kContinuityCap) / kContinuityCap));
    s.push_back(static_cast<float>(static_cast<double>(psi()) / R));
    return s;
}

void Environment::place_request(int slot, int service_id, int ttl, int remaining_bits, std::vector<int> bits) {
    const auto& svc = service(service_id);
    if (slot < 0 || slot >= cfg_.buffer_len) throw std::out_of_range("slot");
    if (static_cast<int>(bits.size()) != num_rbs()) throw std::invalid_argument("bits must have R entries");
    if (ttl < 1 || ttl > svc.max_latency_steps) throw std::invalid_argument("ttl outside [1, u2]");
    if (remaining_bits < 1 || remaining_bits > svc.pdu_bits) throw std::invalid_argument("remaining outside [1, u1]");
    BufferEntry e;
    e.occupied = true;
    e.service = svc.id;
    e.ttl = ttl;
    e.remaining_bits = remaining_bits;
    e.bits = std::move(bits);
    e.pdu_bits = svc.pdu_bits;
    e.max_latency = svc.max_latency_steps;
    e.delivered_bits = svc.pdu_bits - remaining_bits;
    e.admitted_step = n_ - (svc.max_latency_steps - ttl);
    e.link = links_.draw_link(channel_rng_);
    slots_[slot] = std::move(e);
}

void Environment::set_continuity(std::vector<int> v) {
    if (static_cast<int>(v.size()) != num_rbs()) throw std::invalid_argument("continuity must have R entries");
    v_ = std::move(v);
}

void Environment::clear_arrivals() {
    arrivals_.clear();
    next_arrival_ = 0;
}

void write_trace_line(std::ostream& os, long rl_step, int action, const StepOutcome& out) {
    nlohmann::json j;
    j["i"] = rl_step;
    j["a"] = action;
    j["r"] = out.reward;
    j["bits"] = out.info.delivered_bits;
    if (out.info.time_step_finished) {
        j["mask"] = out.info.mask;
        j["v"] = out.info.continuity;
    }
    os << j.dump() << '\n';
}

}  // namespace rbsched
