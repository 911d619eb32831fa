#include "fdtwr/baselines.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <string>

#include "fdtwr/p2_solver.hpp"

namespace fdtwr::baselines {

namespace {

constexpr std::array<std::pair<SchemeId, std::string_view>, 5> kNames{{
    {SchemeId::proposed_fd, "proposed"},
    {SchemeId::hd_anc, "hd"},
    {SchemeId::fd_oneway, "fd2"},
    {SchemeId::fd_upper_bound, "ub"},
    {SchemeId::local_csi, "localcsi"},
}};

// I - projector onto v, or I when v vanishes.
CMat complement_or_identity(const CVec& v) {
    try {
        return numerics::orth_complement_projector(CMat(v));
    } catch (const RankDeficientError&) {
        return CMat::Identity(v.size(), v.size());
    }
}

double oneway_sinr(double source, double relay) { return source * relay / (source + relay + 1.0); }

} // namespace

std::string_view to_string(SchemeId id) {
    for (const auto& [key, name] : kNames) {
        if (key == id) {
            return name;
        }
    }
    return "unknown";
}

SchemeId scheme_from_string(std::string_view name) {
    for (const auto& [key, label] : kNames) {
        if (label == name) {
            return key;
        }
    }
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

ChannelRealization strip_self_interference(const ChannelRealization& ch) {
    ChannelRealization out = drop_relay_loop(ch);
    out.h_aa = 0.0;
    out.h_bb = 0.0;
    return out;
}

ChannelRealization drop_relay_loop(const ChannelRealization& ch) {
    ChannelRealization out = ch;
    out.h_rr.setZero();
    return out;
}

SolverMode hd_mode() { return {false, 0.5}; }

OperatingPoint hd_anc_sum_rate(const ChannelRealization& ch, const SystemConfig& config) {
    return p2::max_sum_rate(strip_self_interference(ch), config, hd_mode());
}

Solved<OperatingPoint> hd_anc_region_point(const ChannelRealization& ch, double r_b,
                                           const SystemConfig& config) {
    return p1::max_rate_given_rb(strip_self_interference(ch), r_b, config, hd_mode());
}

std::vector<p1::RegionPoint> hd_anc_region(const ChannelRealization& ch, int n_points,
                                           const SystemConfig& config) {
    return p1::rate_region(strip_self_interference(ch), n_points, config, hd_mode());
}

OneWaySinr fd_oneway_sinrs(const ChannelRealization& ch, Direction direction,
                           const SystemConfig& config) {
    const bool to_a = direction == Direction::b_to_a;
    const CVec& h_in = to_a ? ch.h_br : ch.h_ar;   // source -> relay
    const CVec& h_out = to_a ? ch.h_ra : ch.h_rb;  // relay -> destination
    const double p_src = to_a ? config.power_b : config.power_a;
    const double p_r = config.power_relay;

    const CMat d = complement_or_identity(ch.h_rr * h_out);
    const CMat b = complement_or_identity(ch.h_rr.adjoint() * h_in);
    OneWaySinr s;
    s.receive_zf = oneway_sinr(p_src * (d * h_in).squaredNorm(), p_r * h_out.squaredNorm());
    s.transmit_zf = oneway_sinr(p_src * h_in.squaredNorm(), p_r * (b * h_out).squaredNorm());
    return s;
}

double fd_oneway_direction_rate(const ChannelRealization& ch, Direction direction,
                                const SystemConfig& config) {
    const auto s = fd_oneway_sinrs(ch, direction, config);
    return rate_of(std::max(s.receive_zf, s.transmit_zf));
}

RatePair fd_oneway_rates(const ChannelRealization& ch, const SystemConfig& config) {
    return {fd_oneway_direction_rate(ch, Direction::b_to_a, config),
            fd_oneway_direction_rate(ch, Direction::a_to_b, config)};
}

std::vector<RatePair> fd_oneway_region(const ChannelRealization& ch, int n_points,
                                       const SystemConfig& config) {
    if (n_points < 2) {
        throw Error("fd_oneway_region: need at least two points");
    }
    const auto ends = fd_oneway_rates(ch, config);
    std::vector<RatePair> out;
    out.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double t = 1.0 - static_cast<double>(i) / (n_points - 1);
        out.push_back({t * ends.r_a, (1.0 - t) * ends.r_b});
    }
    return out;
}

double fd_oneway_sum_rate(const ChannelRealization& ch, const SystemConfig& config) {
    const auto r = fd_oneway_rates(ch, config);
    return 0.5 * (r.r_a + r.r_b);
}

OperatingPoint upper_bound_sum_rate(const ChannelRealization& ch, const SystemConfig& config,
                                    const OperatingPoint* proposed) {
    auto relaxed = p2::max_sum_rate(drop_relay_loop(ch), config);
    const auto own = proposed ? *proposed : p2::max_sum_rate(ch, config);
    return own.sum_rate() > relaxed.sum_rate() ? own : relaxed;
}

std::vector<p1::RegionPoint> upper_bound_region(const ChannelRealization& ch, int n_points,
                                                const SystemConfig& config) {
    return p1::rate_region(drop_relay_loop(ch), n_points, config);
}

OperatingPoint local_csi_sum_rate(const ChannelRealization& ch, const SystemConfig& config,
                                  std::uint64_t seed) {
    constexpr double alpha = 0.5;
    CVec w_r;
    try {
        w_r = receive_combiner(ch, alpha);
    } catch (const DegenerateGeometryError&) {
        w_r = receive_combiner(ch, 1.0);
    }
    const auto geo = make_transmit_geometry(ch, w_r);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    CVec z(geo.dimension());
    for (auto& x : z) {
        x = cdouble(normal(rng), normal(rng));
    }
    z.normalize();

    const double budget =
        config.power_relay / (config.power_a * geo.c_ra + config.power_b * geo.c_rb + 1.0);
    const CVec w_t = std::sqrt(budget) * (geo.null_basis * z);
    return evaluate_point(ch, {w_t, w_r, alpha}, config.power_a, config.power_b);
}

} // namespace fdtwr::baselines
