#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rbsched/rng.hpp"

namespace rbsched {

enum class RateProfile { Low, High };

RateProfile parse_rate_profile(std::string_view name);
std::string to_string(RateProfile rate);

struct ServiceType {
    int id;                     // 1-based
    int pdu_bits;               // u1
    int max_latency_steps;      // u2
    double mean_interarrival_ms;
};

// One arrival, already quantized to the time step at which it is offered to the buffer.
struct Request {
    int arrival_step;
    int service;  // ServiceType::id
    double arrival_time_ms;
};

// Three service types: audio-like, video-like and bulk.
std::vector<ServiceType> service_catalog(RateProfile rate);

double sample_interarrival(double mean_ms, Rng& rng);

// Merges one renewal stream per service type over [0, horizon) time steps.
// Continuous times are rounded up to the next step boundary; ties inside a
// step are ordered by service id, then by continuous time.
std::vector<Request> generate_arrivals(const std::vector<ServiceType>& catalog, int horizon_steps, Rng& rng);

}  // namespace rbsched
