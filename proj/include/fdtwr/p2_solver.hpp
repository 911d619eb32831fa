#pragma once

#include <vector>

#include "fdtwr/model.hpp"
#include "fdtwr/p1_solver.hpp"

namespace fdtwr::p2 {

using p1::PowerPair;

/// Point at which the subtracted (convex) term is linearized.
struct DcAnchor {
    double s_a = 0.0; // |h_RA^H w_t|^2
    double s_b = 0.0; // |h_RB^H w_t|^2
    CVec w_t;
};

struct DcState {
    double s_a = 0.0;
    double s_b = 0.0;
    double p_prime = 0.0; // trace budget ||w_t||^2
    double f_value = 0.0;
    int k = 0;
};

/// z = b d1 + g e^{j psi} e2 + sqrt(delta2) e3 in the orthonormal frame
/// {d1, e2, e3}, where e2 completes d2 against d1 and e3 is orthogonal to both.
struct ReducedCoords {
    double b = 0.0;
    double g = 0.0;
    double psi = 0.0;
    double delta2 = 0.0;
};

struct SetBounds {
    double s_a_min = 0.0;
    double s_a_max = 0.0;
};

struct DcStepResult {
    double s_a = 0.0;
    double s_b = 0.0;
    CVec w_t;
    bool accepted = false; // false: the anchor was returned
};

struct TxbfResult {
    CVec w_t;
    std::vector<double> f_trace;
    std::vector<DcState> states;
    int iterations = 0;
};

/// Sum rate as a function of the two quadratic forms s_A, s_B.
double dc_objective(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                    double s_a, double s_b);
/// Both parts are concave in (s_A, s_B); dc_objective = f - g.
double dc_f_part(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                       double s_a, double s_b);
double dc_g_part(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                      double s_a, double s_b);

/// f - g_L with g replaced by its tangent at `anchor`. Since g is concave this
/// is a lower bound on dc_objective, tight at the anchor.
double dc_linearized_objective(const ChannelRealization& ch, const CVec& w_r, double p_a,
                               double p_b, double s_a, double s_b, const DcAnchor& anchor);

/// Range of s_A reachable by unit-norm ZF beamformers with ||w_t||^2 = p_prime
/// and |h_RB^H w_t|^2 = s_b. Throws Error when s_b is out of range.
SetBounds feasible_set_bounds(const ChannelRealization& ch, const CVec& w_r, double p_prime,
                              double s_b);
SetBounds feasible_set_bounds(const TransmitGeometry& geo, double p_prime, double s_b);

/// Frame coordinates of a unit z achieving the pair (s_a, s_b).
ReducedCoords reduced_coords(const TransmitGeometry& geo, double p_prime, double s_a, double s_b);

/// w_t = sqrt(p_prime) N_t z for a pair (s_a, s_b) inside the reachable set.
CVec reconstruct_beamformer(const TransmitGeometry& geo, double p_prime, double s_a, double s_b);

/// ||w_t||^2 budget P_R / (p_A C_rA + p_B C_rB + 1).
double trace_budget(const TransmitGeometry& geo, double p_a, double p_b, double power_relay);

/// One convex step: maximize the linearized objective over the reachable set.
DcStepResult dc_step(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                     const DcAnchor& anchor, const SystemConfig& config);
DcStepResult dc_step(const ChannelRealization& ch, const TransmitGeometry& geo, double p_a,
                     double p_b, const DcAnchor& anchor, const SystemConfig& config);

/// Transmit beamformer for fixed (w_r, p_A, p_B). Null space of dimension one
/// reduces to a scalar power search; otherwise sequential DC steps starting
/// from `warm_start` (if given) or the direction of N_t^H h_RA.
TxbfResult solve_txbf(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                      const SystemConfig& config, const CVec* warm_start = nullptr);
TxbfResult solve_txbf(const ChannelRealization& ch, const TransmitGeometry& geo, double p_a,
                      double p_b, const SystemConfig& config, const CVec* warm_start = nullptr);

/// Sum rate at fixed gains and powers.
double power_sum_rate(const ChannelRealization& ch, const EffectiveGains& g, double p_a, double p_b);

/// Source powers for fixed beamformers: binary candidates plus the stationary
/// points of the sum rate along the active relay-budget line.
PowerPair solve_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                      const SystemConfig& config);

OperatingPoint optimize_fixed_alpha(const ChannelRealization& ch, double alpha,
                                    const SystemConfig& config, const SolverMode& mode = {});

OperatingPoint max_sum_rate(const ChannelRealization& ch, const SystemConfig& config,
                            const SolverMode& mode = {});

} // namespace fdtwr::p2
