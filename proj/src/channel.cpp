#include "rbsched/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rbsched {

namespace {

void require(bool ok, const char* field, const std::string& what) {
    if (!ok) throw std::invalid_argument(std::string("channel.") + field + ": " + what);
}

}  // namespace

void ChannelParams::validate() const {
    require(carrier_freq_hz > 0, "carrier_freq_hz", "must be positive");
    require(ref_distance_m > 0, "ref_distance_m", "must be positive");
    require(path_loss_exponent > 0, "path_loss_exponent", "must be positive");
    require(shadowing_sigma_db >= 0, "shadowing_sigma_db", "must be nonnegative");
    require(corr_param >= 0 && corr_param <= 1, "corr_param", "must lie in [0, 1]");
    require(coherence_steps >= 1, "coherence_steps", "must be >= 1");
    require(dist_min_m > 0 && dist_min_m < dist_max_m, "dist_min_m", "need 0 < dist_min_m < dist_max_m");
    require(tx_power_w > 0, "tx_power_w", "must be positive");
    require(rb_bandwidth_hz > 0, "rb_bandwidth_hz", "must be positive");
    require(rb_duration_s > 0, "rb_duration_s", "must be positive");
    require(num_rbs >= 1, "num_rbs", "must be >= 1");
    require(noise_temp_k > 0, "noise_temp_k", "must be positive");
}

CqiTable::CqiTable(const std::array<double, kMaxCqi + 1>& efficiencies) : eff_(efficiencies) {
    if (eff_[0] != 0.0) throw std::invalid_argument("CQI table: entry 0 must be 0");
    for (int i = 2; i <= kMaxCqi; ++i) {
        if (!(eff_[i] > eff_[i - 1])) throw std::invalid_argument("CQI table: entries must increase");
    }
    if (!(eff_[1] > 0)) throw std::invalid_argument("CQI table: entry 1 must be positive");
}

const CqiTable& CqiTable::lte() {
    static const CqiTable table({0.0, 0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766,
                                 1.9141, 2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547});
    return table;
}

double CqiTable::efficiency(int cqi) const {
    if (cqi < 0 || cqi > kMaxCqi) throw std::out_of_range("CQI index " + std::to_string(cqi));
    return eff_[cqi];
}

int CqiTable::from_sinr(double sinr) const {
    const double capacity = std::log2(1.0 + std::max(sinr, 0.0));
    int q = 0;
    while (q < kMaxCqi && eff_[q + 1] <= capacity) ++q;
    return q;
}

double free_space_constant_db(const ChannelParams& p) {
    return 20.0 * std::log10(kSpeedOfLight / (4.0 * std::numbers::pi * p.ref_distance_m * p.carrier_freq_hz));
}

double path_gain_db(const ChannelParams& p, double distance_m, double shadowing_db) {
    return free_space_constant_db(p) - 10.0 * p.path_loss_exponent * std::log10(distance_m / p.ref_distance_m) +
           shadowing_db;
}

LargeScaleSample sample_large_scale(const ChannelParams& p, Rng& rng) {
    std::uniform_real_distribution<double> dist(p.dist_min_m, p.dist_max_m);
    std::normal_distribution<double> shadow(0.0, p.shadowing_sigma_db);
    LargeScaleSample s;
    s.distance_m = dist(rng);
    s.gain_db = path_gain_db(p, s.distance_m, p.shadowing_sigma_db > 0 ? shadow(rng) : 0.0);
    s.gain = std::pow(10.0, s.gain_db / 10.0);
    return s;
}

double noise_power_w(const ChannelParams& p) {
    return kBoltzmann * p.noise_temp_k * p.rb_bandwidth_hz * std::pow(10.0, p.noise_figure_db / 10.0);
}

double sinr_from_gain(const ChannelParams& p, double gain, double noise_w) {
    return (p.tx_power_w / p.num_rbs) * gain / noise_w;
}

double sinr(const ChannelParams& p, std::complex<double> h) {
    return sinr_from_gain(p, std::norm(h), noise_power_w(p));
}

double cqi_to_se(int cqi, const CqiTable& table) { return table.efficiency(cqi); }

int deliverable_bits(int cqi, const ChannelParams& p, const CqiTable& table) {
    return static_cast<int>(std::floor(p.rb_resource() * table.efficiency(cqi)));
}

SmallScaleSampler::SmallScaleSampler(const ChannelParams& p) {
    const int r = p.num_rbs;
    phi_.resize(r, r);
    for (int m = 0; m < r; ++m)
        for (int l = 0; l < r; ++l) phi_(m, l) = std::pow(p.corr_param, std::abs(m - l));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(phi_);
    if (eig.info() != Eigen::Success) throw std::runtime_error("correlation matrix eigendecomposition failed");
    Eigen::VectorXd lambda = eig.eigenvalues();
    constexpr double kTol = 1e-9;
    for (int i = 0; i < r; ++i) {
        if (lambda(i) < -kTol) throw std::runtime_error("correlation matrix is not positive semidefinite");
        // round-off eigenvalues of a (near) rank-deficient Phi would otherwise
        // leak ~1e-8 noise through the square root
        lambda(i) = lambda(i) < kTol * r ? 0.0 : std::sqrt(lambda(i));
    }
    sqrt_phi_ = eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

std::vector<std::complex<double>> SmallScaleSampler::sample(Rng& rng) const {
    const int r = static_cast<int>(phi_.rows());
    std::normal_distribution<double> half(0.0, std::sqrt(0.5));
    Eigen::VectorXd re(r), im(r);
    for (int k = 0; k < r; ++k) {
        re(k) = half(rng);
        im(k) = half(rng);
    }
    const Eigen::VectorXd zr = sqrt_phi_ * re;
    const Eigen::VectorXd zi = sqrt_phi_ * im;
    std::vector<std::complex<double>> out(r);
    for (int k = 0; k < r; ++k) out[k] = {zr(k), zi(k)};
    return out;
}

LinkModel::LinkModel(ChannelParams params, const CqiTable& table)
    : params_((params.validate(), params)), table_(table), sampler_(params_), noise_w_(noise_power_w(params_)) {}

LinkState LinkModel::draw_link(Rng& rng) const {
    const auto ls = sample_large_scale(params_, rng);
    LinkState link;
    link.distance_m = ls.distance_m;
    link.large_scale = ls.gain;
    link.small_scale = sampler_.sample(rng);
    link.age = 0;
    return link;
}

void LinkModel::redraw_small_scale(LinkState& link, Rng& rng) const {
    link.small_scale = sampler_.sample(rng);
    link.age = 0;
}

double LinkModel::rb_sinr(const LinkState& link, int rb) const {
    return sinr_from_gain(params_, link.large_scale * std::norm(link.small_scale.at(rb)), noise_w_);
}

int LinkModel::rb_cqi(const LinkState& link, int rb) const { return table_.from_sinr(rb_sinr(link, rb)); }

int LinkModel::rb_bits(const LinkState& link, int rb) const {
    return deliverable_bits(rb_cqi(link, rb), params_, table_);
}

void LinkModel::fill_bits(const LinkState& link, std::vector<int>& bits) const {
    bits.resize(params_.num_rbs);
    for (int k = 0; k < params_.num_rbs; ++k) bits[k] = rb_bits(link, k);
}

int LinkModel::max_bits() const { return deliverable_bits(CqiTable::kMaxCqi, params_, table_); }

}  // namespace rbsched
