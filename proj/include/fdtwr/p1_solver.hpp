#pragma once

#include <vector>

#include "fdtwr/errors.hpp"
#include "fdtwr/model.hpp"

namespace fdtwr::p1 {

/// Quantities of the transmit-beamformer subproblem at fixed (w_r, p_A, p_B, Gamma_B).
struct Subproblem {
    double gamma_b = 0.0;     // SINR target for B
    double gamma_b_bar = 0.0; // required |h_RB^H w_t|^2
    double p_bar = 0.0;       // ||w_t||^2 budget
    double q = 0.0;           // gamma_b_bar / (p_bar ||N_t^H h_RB||^2)
};

struct PowerPair {
    double p_a = 0.0;
    double p_b = 0.0;
};

/// Unit z maximizing |d2^H z|^2 subject to |d1^H z|^2 = q. Collinear d1, d2
/// put the remaining weight on a direction orthogonal to d1; in one dimension
/// that is only possible for q = 1 (otherwise DegenerateGeometryError).
CVec boundary_unit_vector(const CVec& d1, const CVec& d2, double q);

/// Evaluates the gate quantities; step-1 infeasibility when p_A C_rA <= Gamma_B.
Solved<Subproblem> make_subproblem(const TransmitGeometry& geo, double p_a, double p_b,
                                   double gamma_b, double power_relay, double si_b);

/// Closed-form ZF transmit beamformer maximizing |h_RA^H w_t|^2 subject to
/// B's SINR target and the relay budget.
Solved<CVec> solve_txbf(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                        double gamma_b, double power_relay);
Solved<CVec> solve_txbf(const ChannelRealization& ch, const TransmitGeometry& geo, double p_a,
                        double p_b, double gamma_b, double power_relay);

/// Source powers maximizing A's SINR for fixed beamformers, by enumerating the
/// vertices of the feasible polygon (linear-fractional objective).
Solved<PowerPair> solve_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                              double gamma_b, const SystemConfig& config);

/// The case-by-case rule (binary box solution, then the two-equality system).
/// Kept as a cross-check for solve_power.
Solved<PowerPair> stepwise_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                                 double gamma_b, const SystemConfig& config);

/// Whether the alternation at this alpha has a feasible starting point.
bool feasible_at_alpha(const ChannelRealization& ch, double alpha, double gamma_b,
                       const SystemConfig& config, const SolverMode& mode = {});

/// Alternates beamformer and power updates at a fixed receive combiner.
Solved<OperatingPoint> optimize_fixed_alpha(const ChannelRealization& ch, double alpha,
                                            double gamma_b, const SystemConfig& config,
                                            const SolverMode& mode = {});

/// Best A rate subject to R_B >= r_b, searching alpha on the grid with
/// golden-section refinement.
Solved<OperatingPoint> max_rate_given_rb(const ChannelRealization& ch, double r_b,
                                         const SystemConfig& config, const SolverMode& mode = {});

/// Largest r_b for which some alpha-grid point has a feasible start.
double max_feasible_rb(const ChannelRealization& ch, const SystemConfig& config,
                       const SolverMode& mode = {});

struct RegionPoint {
    double r_b_target = 0.0;
    Solved<OperatingPoint> point;
};

/// Sweeps r_b over n_points values in [0, max_feasible_rb] and applies the
/// monotone repair (a point beaten in R_A by a higher target takes its rates).
std::vector<RegionPoint> rate_region(const ChannelRealization& ch, int n_points,
                                     const SystemConfig& config, const SolverMode& mode = {});

} // namespace fdtwr::p1
