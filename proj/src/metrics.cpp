#include "rbsched/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace rbsched {

UnlicensedLink::UnlicensedLink(const LinkModel& model, std::uint64_t seed)
    : model_(&model), rng_(make_substream(seed, "unlicensed")) {
    link_ = model_->draw_link(rng_);
    model_->fill_bits(link_, bits_per_rb_);
}

long UnlicensedLink::on_time_step(std::span<const int> continuity, int continuity_len) {
    long carried = 0;
    for (std::size_t k = 0; k < continuity.size(); ++k) {
        if (continuity_function(continuity[k], continuity_len)) {
            carried += bits_per_rb_[k];
            ++rbs_;
        }
    }
    bits_ += carried;
    ++steps_;
    ++link_.age;
    if (steps_ % model_->params().coherence_steps == 0) {
        link_ = model_->draw_link(rng_);
        model_->fill_bits(link_, bits_per_rb_);
    }
    return carried;
}

void RunMetrics::record(const StepOutcome& out, const std::vector<ServiceType>& catalog) {
    const auto& info = out.info;
    rb_se.push_back(info.se);
    delivered_bits += info.delivered_bits;
    if (info.invalid) ++invalid_actions;
    if (info.satisfied) {
        ++satisfied;
        latency[info.satisfied->service].push_back({info.satisfied->latency_steps, false});
    }
    if (!info.time_step_finished) return;

    ++time_steps;
    double sum = 0.0;
    const std::size_t r = static_cast<std::size_t>(num_rbs);
    for (std::size_t k = rb_se.size() >= r ? rb_se.size() - r : 0; k < rb_se.size(); ++k) sum += rb_se[k];
    step_se.push_back(sum / num_rbs);

    for (const auto& m : info.missed) {
        ++missed;
        missed_bits += m.delivered_bits;
        latency[m.service].push_back({catalog.at(m.service - 1).max_latency_steps, true});
    }
    arrivals += info.arrivals;
    accepted += info.admitted;
    dropped += info.dropped;
}

void RunMetrics::record_unlicensed(long bits, long qualifying_rbs) {
    unlicensed_bits += bits;
    unlicensed_rbs += qualifying_rbs;
}

void RunMetrics::merge(const RunMetrics& o) {
    if (rb_resource == 0.0) {
        rb_resource = o.rb_resource;
        num_rbs = o.num_rbs;
    } else if (o.num_rbs != num_rbs || o.rb_resource != rb_resource) {
        throw std::invalid_argument("cannot merge metrics of different resource grids");
    }
    rb_se.insert(rb_se.end(), o.rb_se.begin(), o.rb_se.end());
    step_se.insert(step_se.end(), o.step_se.begin(), o.step_se.end());
    time_steps += o.time_steps;
    delivered_bits += o.delivered_bits;
    missed_bits += o.missed_bits;
    arrivals += o.arrivals;
    accepted += o.accepted;
    dropped += o.dropped;
    missed += o.missed;
    satisfied += o.satisfied;
    invalid_actions += o.invalid_actions;
    for (const auto& [svc, samples] : o.latency) {
        auto& dst = latency[svc];
        dst.insert(dst.end(), samples.begin(), samples.end());
    }
    unlicensed_bits += o.unlicensed_bits;
    unlicensed_rbs += o.unlicensed_rbs;
}

double se_licensed(const RunMetrics& m, bool adjusted) {
    if (m.time_steps == 0) throw std::logic_error("no time steps recorded");
    const double denom = m.rb_resource * m.num_rbs * static_cast<double>(m.time_steps);
    const double bits = static_cast<double>(m.delivered_bits) - (adjusted ? static_cast<double>(m.missed_bits) : 0.0);
    return bits / denom;
}

double se_unlicensed(const RunMetrics& m) {
    if (m.unlicensed_rbs == 0) return 0.0;
    return static_cast<double>(m.unlicensed_bits) / (m.rb_resource * static_cast<double>(m.unlicensed_rbs));
}

Ratios ratios(const RunMetrics& m) {
    if (m.arrivals == 0) throw std::logic_error("no arrivals recorded");
    Ratios r;
    r.acceptance = static_cast<double>(m.accepted) / static_cast<double>(m.arrivals);
    r.missed = m.accepted == 0 ? 0.0 : static_cast<double>(m.missed) / static_cast<double>(m.accepted);
    return r;
}

std::vector<std::pair<int, double>> latency_cdf(const RunMetrics& m, int service) {
    auto it = m.latency.find(service);
    if (it == m.latency.end() || it->second.empty())
        throw std::logic_error("no latency samples for service type " + std::to_string(service));
    std::vector<int> values;
    values.reserve(it->second.size());
    for (const auto& s : it->second) values.push_back(s.latency_steps);
    std::sort(values.begin(), values.end());
    std::vector<std::pair<int, double>> cdf;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        cdf.emplace_back(values[i], static_cast<double>(i + 1) / n);
    }
    return cdf;
}

std::vector<std::pair<long, double>> windowed_se(const RunMetrics& m, int window, int stride) {
    if (window < 1 || stride < 1) throw std::invalid_argument("window and stride must be >= 1");
    std::vector<std::pair<long, double>> out;
    const auto& x = m.rb_se;
    // prefix sums keep this linear in the series length
    std::vector<double> prefix(x.size() + 1, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) prefix[i + 1] = prefix[i] + x[i];
    for (std::size_t end = stride; end <= x.size(); end += stride) {
        const std::size_t begin = end >= static_cast<std::size_t>(window) ? end - window : 0;
        out.emplace_back(static_cast<long>(end), (prefix[end] - prefix[begin]) / static_cast<double>(end - begin));
    }
    return out;
}

void write_series_csv(const std::filesystem::path& path, const std::vector<std::pair<long, double>>& series) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "step,value\n" << std::setprecision(17);
    for (const auto& [step, value] : series) os << step << ',' << value << '\n';
}

void write_cdf_csv(const std::filesystem::path& path, const std::vector<std::pair<int, double>>& cdf) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << "latency,cdf\n" << std::setprecision(17);
    for (const auto& [lat, frac] : cdf) os << lat << ',' << frac << '\n';
}

}  // namespace rbsched
