#pragma once

#include <cstdint>
#include <vector>

#include "fdtwr/model.hpp"

namespace fdtwr::oracles {

/// Brute-force result. `resolution` is the grid step or final search step, so
/// callers can derive tolerances instead of hard-coding them.
struct OracleReport {
    double best_value = 0.0; // -inf when nothing feasible was found
    std::vector<double> best_point;
    long samples = 0;
    double resolution = 0.0;

    bool found() const;
};

enum class PowerObjective { p1, p2 };

/// Exhaustive n x n grid over [0, P_A] x [0, P_B]. For p1 the value is gamma_A
/// subject to gamma_B >= gamma_b; for p2 the sum rate. Relay budget checked per point.
OracleReport grid_power_oracle(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                               const SystemConfig& config, PowerObjective objective,
                               double gamma_b, int n);

/// How far the n x n grid optimum may trail a point (p_a, p_b) through
/// discretization alone: twice the local gradient norm times the distance to
/// the nearest feasible node. Infinite when no node is feasible.
double grid_trailing_bound(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                           const SystemConfig& config, PowerObjective objective, double gamma_b, int n,
                           double p_a, double p_b);

/// Fixed powers and relay budget for beamformer sampling.
struct BeamformerTask {
    double p_a = 0.0;
    double p_b = 0.0;
    double power_relay = 0.0;
    PowerObjective objective = PowerObjective::p1;
    double gamma_b = 0.0; // p1 only
};

/// Random unit directions in the ZF null space of w_r^H H_RR (computed here
/// independently), scaled to the full relay budget, pulled onto B's SINR
/// constraint when they miss it, then refined by a shrinking random pattern search.
OracleReport sampled_beamformer_oracle(const ChannelRealization& ch, const CVec& w_r,
                                       const BeamformerTask& task, int n_samples,
                                       std::uint64_t seed);

/// max |d2^H z|^2 s.t. |d1^H z|^2 = q, ||z|| = 1 by a dense sweep over the real
/// coefficient g of z = b e^{-j phi} d1 + g d2, bisecting the norm residual.
double lagrangian_boundary_oracle(const CVec& d1, const CVec& d2, double q, int n_sweep = 20001);

/// Linearized sum-rate objective at fixed powers, on the reachable set of
/// (|h_RA^H w_t|^2, |h_RB^H w_t|^2) with ||w_t||^2 = p_prime and w_t in the ZF
/// null space. Grid over (angle, phase, radius) of z = sin(t) d1 + cos(t) u.
/// best_point = {s_A, s_B}.
struct DcTask {
    double p_a = 0.0;
    double p_b = 0.0;
    double p_prime = 0.0;
    double anchor_s_a = 0.0;
    double anchor_s_b = 0.0;
};

OracleReport dc_grid_oracle(const ChannelRealization& ch, const CVec& w_r, const DcTask& task,
                            int n);

} // namespace fdtwr::oracles
