#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fdtwr/model.hpp"
#include "fdtwr/p1_solver.hpp"

namespace fdtwr::baselines {

enum class SchemeId { proposed_fd, hd_anc, fd_oneway, fd_upper_bound, local_csi };

/// CLI names: proposed, hd, fd2, ub, localcsi.
std::string_view to_string(SchemeId id);
/// Throws ConfigError for unknown names.
SchemeId scheme_from_string(std::string_view name);

/// Copy of `ch` with h_AA = h_BB = 0 and H_RR = 0.
ChannelRealization strip_self_interference(const ChannelRealization& ch);
/// Copy of `ch` with H_RR = 0; source SI kept.
ChannelRealization drop_relay_loop(const ChannelRealization& ch);

/// Full source powers, rates carrying the two-phase factor 1/2.
SolverMode hd_mode();

OperatingPoint hd_anc_sum_rate(const ChannelRealization& ch, const SystemConfig& config);
Solved<OperatingPoint> hd_anc_region_point(const ChannelRealization& ch, double r_b,
                                           const SystemConfig& config);
std::vector<p1::RegionPoint> hd_anc_region(const ChannelRealization& ch, int n_points,
                                           const SystemConfig& config);

enum class Direction { b_to_a, a_to_b };

/// One-way FD SINRs with receive ZF (w_t along the destination channel) and
/// transmit ZF (w_r along the source channel).
struct OneWaySinr {
    double receive_zf = 0.0;
    double transmit_zf = 0.0;
};

OneWaySinr fd_oneway_sinrs(const ChannelRealization& ch, Direction direction,
                           const SystemConfig& config);
/// log2(1 + max of the two ZF SINRs).
double fd_oneway_direction_rate(const ChannelRealization& ch, Direction direction,
                                const SystemConfig& config);

struct RatePair {
    double r_a = 0.0;
    double r_b = 0.0;
};

/// Time-sharing segment from (R_A, 0) at t = 1 to (0, R_B) at t = 0.
std::vector<RatePair> fd_oneway_region(const ChannelRealization& ch, int n_points,
                                       const SystemConfig& config);
/// (R_A + R_B) / 2.
double fd_oneway_sum_rate(const ChannelRealization& ch, const SystemConfig& config);
RatePair fd_oneway_rates(const ChannelRealization& ch, const SystemConfig& config);

/// Sum-rate solver on the loop-free channels. Every point of the proposed
/// scheme stays feasible there with the same rates, so the better of the two
/// is returned; `proposed` is solved here when not supplied.
OperatingPoint upper_bound_sum_rate(const ChannelRealization& ch, const SystemConfig& config,
                                    const OperatingPoint* proposed = nullptr);
std::vector<p1::RegionPoint> upper_bound_region(const ChannelRealization& ch, int n_points,
                                                const SystemConfig& config);

/// Full source powers, alpha = 1/2 and a seeded random direction in the ZF
/// null space scaled to use the whole relay budget.
OperatingPoint local_csi_sum_rate(const ChannelRealization& ch, const SystemConfig& config,
                                  std::uint64_t seed);

} // namespace fdtwr::baselines
