#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "rbsched/channel.hpp"
#include "rbsched/environment.hpp"

namespace rbsched {

struct LatencySample {
    int latency_steps;
    bool missed;
};

// A single opportunistic link that transmits on every RB whose vacancy run
// has reached the continuity length. Repositioned once per coherence period.
class UnlicensedLink {
public:
    UnlicensedLink(const LinkModel& model, std::uint64_t seed);

    // Called once per finished time step with the finalized continuity vector.
    // Returns the bits carried in that step.
    long on_time_step(std::span<const int> continuity, int continuity_len);

    const LinkState& link() const { return link_; }
    long bits_delivered() const { return bits_; }
    long qualifying_rbs() const { return rbs_; }

private:
    const LinkModel* model_;
    Rng rng_;
    LinkState link_;
    std::vector<int> bits_per_rb_;
    long steps_ = 0;
    long bits_ = 0;
    long rbs_ = 0;
};

// Accumulators for one run (or a merge of several).
struct RunMetrics {
    double rb_resource = 0.0;  // W*T
    int num_rbs = 0;

    std::vector<double> rb_se;        // one SE sample per RL step
    std::vector<double> step_se;      // mean SE over the R RBs of each time step
    long time_steps = 0;
    long delivered_bits = 0;
    long missed_bits = 0;             // bits already delivered to requests that later missed
    long arrivals = 0;
    long accepted = 0;
    long dropped = 0;
    long missed = 0;
    long satisfied = 0;
    long invalid_actions = 0;
    std::map<int, std::vector<LatencySample>> latency;  // by service id
    long unlicensed_bits = 0;
    long unlicensed_rbs = 0;

    RunMetrics() = default;
    RunMetrics(double rb_resource_, int num_rbs_) : rb_resource(rb_resource_), num_rbs(num_rbs_) {}

    // Consumes one RL-step outcome. Missed requests enter the latency record at
    // their deadline, taken from `catalog`.
    void record(const StepOutcome& out, const std::vector<ServiceType>& catalog);
    void record_unlicensed(long bits, long qualifying_rbs);

    // Counters add, sample series concatenate.
    void merge(const RunMetrics& other);
};

double se_licensed(const RunMetrics& m, bool adjusted);
double se_unlicensed(const RunMetrics& m);

struct Ratios {
    double acceptance;
    double missed;
};
Ratios ratios(const RunMetrics& m);

// (latency, cumulative fraction) at every distinct latency value.
std::vector<std::pair<int, double>> latency_cdf(const RunMetrics& m, int service);

// Trailing mean over `window` RB samples, taken every `stride` RB samples.
// Point k reports the window ending at sample (k+1)*stride.
std::vector<std::pair<long, double>> windowed_se(const RunMetrics& m, int window, int stride);

// CSV/JSON emission. Column names: step,value for series; latency,cdf for CDFs.
void write_series_csv(const std::filesystem::path& path, const std::vector<std::pair<long, double>>& series);
void write_cdf_csv(const std::filesystem::path& path, const std::vector<std::pair<int, double>>& cdf);

}  // namespace rbsched
