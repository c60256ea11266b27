#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rbsched/rng.hpp"

namespace rbsched {

inline constexpr double kSpeedOfLight = 2.998e8;   // m/s
inline constexpr double kBoltzmann = 1.380649e-23;  // J/K

// Radio and resource-grid parameters shared by every link in the cell.
// Defaults are the desk-scale small-cell scenario (1 GHz, 6 RBs of 180 kHz x 1 ms).
struct ChannelParams {
    double carrier_freq_hz = 1e9;
    double ref_distance_m = 10.0;
    double path_loss_exponent = 3.5;
    double shadowing_sigma_db = 5.2;
    double corr_param = 0.001;  // small-scale correlation between adjacent RBs
    int coherence_steps = 12;
    double dist_min_m = 10.0;
    double dist_max_m = 100.0;
    double tx_power_w = 0.1;
    double rb_bandwidth_hz = 180e3;
    double rb_duration_s = 1e-3;
    int num_rbs = 6;
    double noise_temp_k = 300.0;
    double noise_figure_db = 9.0;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    double rb_resource() const { return rb_bandwidth_hz * rb_duration_s; }  // W*T
};

// CQI index -> spectral efficiency [b/s/Hz]. Index 0 means "out of range".
class CqiTable {
public:
    static constexpr int kMaxCqi = 15;

    explicit CqiTable(const std::array<double, kMaxCqi + 1>& efficiencies);

    // 15-level LTE efficiency column (QPSK 78/1024 ... 64QAM 948/1024).
    static const CqiTable& lte();

    double efficiency(int cqi) const;
    double max_efficiency() const { return eff_[kMaxCqi]; }

    // Largest index whose efficiency does not exceed log2(1 + sinr).
    int from_sinr(double sinr) const;

    const std::array<double, kMaxCqi + 1>& efficiencies() const { return eff_; }

private:
    std::array<double, kMaxCqi + 1> eff_;
};

struct LargeScaleSample {
    double distance_m;
    double gain_db;
    double gain;  // linear power gain, 10^(gain_db/10)
};

// Per-request channel: the large-scale gain is fixed for the lifetime of the
// request, the small-scale vector is redrawn once per coherence period.
struct LinkState {
    double distance_m = 0.0;
    double large_scale = 0.0;
    std::vector<std::complex<double>> small_scale;
    int age = 0;
};

double free_space_constant_db(const ChannelParams& p);

// K - 10 eta log10(d/d0) + shadowing
double path_gain_db(const ChannelParams& p, double distance_m, double shadowing_db);

LargeScaleSample sample_large_scale(const ChannelParams& p, Rng& rng);

double noise_power_w(const ChannelParams& p);

// Uniform power split over the RBs; |h|^2 is the full (large x small) power gain.
double sinr(const ChannelParams& p, std::complex<double> h);
double sinr_from_gain(const ChannelParams& p, double gain, double noise_w);

double cqi_to_se(int cqi, const CqiTable& table);

// floor(W*T*SE[cqi]) whole bits.
int deliverable_bits(int cqi, const ChannelParams& p, const CqiTable& table);

// Draws zeta = Phi^{1/2} z with [Phi]_{m,l} = omega^|m-l| and z ~ CN(0, I).
class SmallScaleSampler {
public:
    explicit SmallScaleSampler(const ChannelParams& p);

    std::vector<std::complex<double>> sample(Rng& rng) const;

    const Eigen::MatrixXd& covariance() const { return phi_; }
    const Eigen::MatrixXd& sqrt_covariance() const { return sqrt_phi_; }

private:
    Eigen::MatrixXd phi_;
    Eigen::MatrixXd sqrt_phi_;
};

// Bundles everything needed to turn a link into per-RB deliverable bits.
class LinkModel {
public:
    explicit LinkModel(ChannelParams params, const CqiTable& table = CqiTable::lte());

    const ChannelParams& params() const { return params_; }
    const CqiTable& table() const { return table_; }
    double noise_w() const { return noise_w_; }

    LinkState draw_link(Rng& rng) const;
    void redraw_small_scale(LinkState& link, Rng& rng) const;

    double rb_sinr(const LinkState& link, int rb) const;
    int rb_cqi(const LinkState& link, int rb) const;
    int rb_bits(const LinkState& link, int rb) const;
    void fill_bits(const LinkState& link, std::vector<int>& bits) const;

    // Bits of a CQI-15 RB, the normalizer for the "t" block of the state.
    int max_bits() const;

private:
    ChannelParams params_;
    CqiTable table_;
    SmallScaleSampler sampler_;
    double noise_w_;
};

}  // namespace rbsched
