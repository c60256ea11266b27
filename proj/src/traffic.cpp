#include "rbsched/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace rbsched {

RateProfile parse_rate_profile(std::string_view name) {
    if (name == "low") return RateProfile::Low;
    if (name == "high") return RateProfile::High;
    throw std::invalid_argument("unknown rate profile '" + std::string(name) + "' (expected low|high)");
}

std::string to_string(RateProfile rate) { return rate == RateProfile::Low ? "low" : "high"; }

std::vector<ServiceType> service_catalog(RateProfile rate) {
    const bool high = rate == RateProfile::High;
    return {
        {1, 3200, 150, high ? 5.0 : 10.0},
        {2, 64000, 200, high ? 25.0 : 50.0},
        {3, 200000, 300, high ? 50.0 : 100.0},
    };
}

double sample_interarrival(double mean_ms, Rng& rng) {
    if (!(mean_ms > 0)) throw std::invalid_argument("mean inter-arrival time must be positive");
    std::exponential_distribution<double> exp(1.0 / mean_ms);
    double x;
    do {
        x = exp(rng);
    } while (x <= 0.0);
    return x;
}

std::vector<Request> generate_arrivals(const std::vector<ServiceType>& catalog, int horizon_steps, Rng& rng) {
    std::vector<Request> out;
    if (horizon_steps <= 0) return out;
    for (const auto& svc : catalog) {
        double t = 0.0;
        while (true) {
            t += sample_interarrival(svc.mean_interarrival_ms, rng);
            const double step = std::ceil(t);
            if (step >= horizon_steps) break;
            out.push_back({static_cast<int>(step), svc.id, t});
        }
    }
    std::sort(out.begin(), out.end(), [](const Request& a, const Request& b) {
        return std::tie(a.arrival_step, a.service, a.arrival_time_ms) <
               std::tie(b.arrival_step, b.service, b.arrival_time_ms);
    });
    return out;
}

}  // namespace rbsched
