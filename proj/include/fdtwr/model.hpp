#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "fdtwr/numerics.hpp"

namespace fdtwr {

double db_to_linear(double db);
double linear_to_db(double linear);

/// Antenna counts, power budgets and residual-SI variances, all linear and
/// normalized to unit noise power, plus the solver controls.
struct SystemConfig {
    int tx_antennas = 3; // M_T
    int rx_antennas = 3; // M_R
    double power_a = 10.0;
    double power_b = 10.0;
    double power_relay = 10.0;
    double si_a = 0.01;
    double si_b = 0.01;
    double si_relay = 0.01;
    double gain_br = 1.0; // average gain of h_BR and h_RB

    int alpha_grid = 21;
    double alpha_tol = 1e-3;
    int iter_max = 50;
    double conv_tol = 1e-6;
    int grid_points = 201;

    /// Throws ConfigError on negative powers, M_T < 2, iter_max < 1, ...
    void validate() const;
};

void to_json(nlohmann::json& j, const SystemConfig& config);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, SystemConfig& config);

/// One draw of all channels between A, B and R.
struct ChannelRealization {
    CVec h_ar; // A -> R receive antennas, M_R
    CVec h_br; // B -> R, M_R
    CVec h_ra; // R transmit antennas -> A, M_T
    CVec h_rb; // R -> B, M_T
    cdouble h_aa{0.0, 0.0};
    cdouble h_bb{0.0, 0.0};
    CMat h_rr; // residual relay loop, M_R x M_T

    int tx_antennas() const { return static_cast<int>(h_ra.size()); }
    int rx_antennas() const { return static_cast<int>(h_ar.size()); }
};

/// Deterministic in (config, seed). Unit-variance CN entries on the A links,
/// gain_br on the B links, si_* on the residual SI channels (exact zero when
/// the variance is zero).
ChannelRealization sample_channels(const SystemConfig& config, std::uint64_t seed);

/// Complex entries are stored as [re, im] pairs; matrices as row-major lists of rows.
void to_json(nlohmann::json& j, const ChannelRealization& ch);
void from_json(const nlohmann::json& j, ChannelRealization& ch);

/// Rank-one relay processing W = w_t w_r^H.
struct RelayBeamformer {
    CVec w_t;
    CVec w_r;
    double alpha = 0.0;
};

struct PowerAllocation {
    double p_a = 0.0;
    double p_b = 0.0;
    double p_r = 0.0; // resulting relay output power
};

struct OperatingPoint {
    RelayBeamformer beamformer;
    PowerAllocation powers;
    double gamma_a = 0.0;
    double gamma_b = 0.0;
    double rate_a = 0.0;
    double rate_b = 0.0;
    double prelog = 1.0; // 1/2 for two-phase schemes
    int iterations = 0;
    std::vector<double> trace;

    double sum_rate() const { return rate_a + rate_b; }
};

struct EffectiveGains {
    double c_at = 0.0; // |h_RA^H w_t|^2
    double c_rb = 0.0; // |w_r^H h_BR|^2
    double c_bt = 0.0; // |h_RB^H w_t|^2
    double c_ra = 0.0; // |w_r^H h_AR|^2
};

struct SinrPair {
    double gamma_a = 0.0;
    double gamma_b = 0.0;
};

/// How a scheme drives the shared solvers: whether source powers adapt, and
/// the pre-log factor applied to reported rates.
struct SolverMode {
    bool adapt_powers = true;
    double prelog = 1.0;
};

inline double rate_of(double gamma, double prelog = 1.0) { return prelog * std::log2(1.0 + gamma); }

/// Receive combiner as printed: alpha * unit(P h_AR) + sqrt(1 - alpha) * unit(P_perp h_AR),
/// P the projector onto h_BR. Not unit norm for alpha in (0, 1).
CVec receive_combiner_unnormalized(const ChannelRealization& ch, double alpha);

/// The printed combiner renormalized to unit norm. Throws
/// DegenerateGeometryError when h_AR is (numerically) parallel to h_BR and
/// alpha < 1; at alpha = 1 the h_BR direction is returned.
CVec receive_combiner(const ChannelRealization& ch, double alpha);

/// W = w_t w_r^H, mapping C^{M_R} -> C^{M_T}.
CMat assemble_relay_matrix(const CVec& w_t, const CVec& w_r);

EffectiveGains effective_gains(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r);

/// Rank-one SINRs at A and B.
SinrPair sinr_pair(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r, double p_a,
                   double p_b);
SinrPair sinr_pair(const ChannelRealization& ch, const EffectiveGains& g, double p_a, double p_b);

/// SINRs for a general relay matrix W (no rank-one assumption).
SinrPair sinr_pair_general(const ChannelRealization& ch, const CMat& w, double p_a, double p_b);

double relay_output_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                          double p_a, double p_b);
double relay_output_power_general(const ChannelRealization& ch, const CMat& w, double p_a,
                                  double p_b);

/// |w_r^H H_RR w_t|.
double zf_residual(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r);

/// Evaluates SINRs, rates and relay power for a fixed beamformer and powers.
OperatingPoint evaluate_point(const ChannelRealization& ch, const RelayBeamformer& bf, double p_a,
                              double p_b, double prelog = 1.0);

/// Transmit-side quantities fixed once w_r is chosen: the ZF null space and the
/// projected channel directions.
struct TransmitGeometry {
    CMat null_basis; // N_t, M_T x n, orthonormal columns; identity when w_r^H H_RR = 0
    CVec a_proj;     // N_t^H h_RA
    CVec b_proj;     // N_t^H h_RB
    double a_norm2 = 0.0;
    double b_norm2 = 0.0;
    CVec d1;         // unit(b_proj), empty when b_proj = 0
    CVec d2;         // unit(a_proj), empty when a_proj = 0
    double r = 0.0;   // |d2^H d1|
    double phi = 0.0; // arg(d2^H d1)
    double c_ra = 0.0;
    double c_rb = 0.0;

    int dimension() const { return static_cast<int>(null_basis.cols()); }
};

TransmitGeometry make_transmit_geometry(const ChannelRealization& ch, const CVec& w_r);

} // namespace fdtwr
