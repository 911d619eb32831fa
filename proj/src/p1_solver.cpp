#include "fdtwr/p1_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

namespace fdtwr::p1 {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double target_sinr(double r_b, const SolverMode& mode) {
    return std::exp2(r_b / mode.prelog) - 1.0;
}

std::optional<CVec> combiner_or_none(const ChannelRealization& ch, double alpha) {
    try {
        return receive_combiner(ch, alpha);
    } catch (const DegenerateGeometryError&) {
        return std::nullopt;
    }
}

std::vector<PowerPair> starting_powers(const SystemConfig& config, const SolverMode& mode) {
    if (!mode.adapt_powers) {
        return {{config.power_a, config.power_b}};
    }
    return {{config.power_a, config.power_b}, {config.power_a, 0.0}};
}

double objective(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                 const PowerPair& p) {
    return sinr_pair(ch, w_t, w_r, p.p_a, p.p_b).gamma_a;
}

// a * p_A + b * p_B <= c
struct HalfPlane {
    double a;
    double b;
    double c;

    double slack(double pa, double pb) const { return c - (a * pa + b * pb); }
    double tolerance(const SystemConfig& cfg) const {
        return 1e-10 * (std::abs(a) * cfg.power_a + std::abs(b) * cfg.power_b + std::abs(c) + 1.0);
    }
};

} // namespace

CVec boundary_unit_vector(const CVec& d1, const CVec& d2, double q) {
    if (d1.size() != d2.size() || d1.size() == 0) {
        throw DimensionError("boundary_unit_vector: d1 and d2 must have equal nonzero length");
    }
    if (!(q >= -1e-12 && q <= 1.0 + 1e-12)) {
        throw Error("boundary_unit_vector: q must lie in [0, 1]");
    }
    q = std::clamp(q, 0.0, 1.0);
    const cdouble inner = d2.dot(d1);
    const double r = std::min(1.0, std::abs(inner));
    const double phi = std::arg(inner);
    const double sq = std::sqrt(q);

    if (1.0 - r * r < 1e-10) {
        // d2 is a phase rotation of d1: the value is q whatever the rest of z does.
        const CVec aligned = std::polar(1.0, -phi) * d1;
        if (q >= 1.0 - 1e-12) {
            return aligned;
        }
        if (d1.size() < 2) {
            throw DegenerateGeometryError(
                "boundary_unit_vector: collinear one-dimensional geometry cannot meet q < 1");
        }
        const CVec u = numerics::null_space_basis(d1).col(0);
        return sq * aligned + std::sqrt(1.0 - q) * u;
    }

    const double g = std::sqrt((1.0 - q) / (1.0 - r * r));
    const cdouble rot = std::polar(1.0, M_PI - phi);
    return (r * g - sq) * rot * d1 + g * d2;
}

Solved<Subproblem> make_subproblem(const TransmitGeometry& geo, double p_a, double p_b,
                                   double gamma_b, double power_relay, double si_b) {
    Subproblem sub;
    sub.gamma_b = gamma_b;
    const double a_gain = p_a * geo.c_ra;
    if (gamma_b > 0.0) {
        if (a_gain <= gamma_b) {
            return Infeasible{InfeasibleCause::SinrGate};
        }
        sub.gamma_b_bar = gamma_b * (p_b * si_b + 1.0) / (a_gain - gamma_b);
    }
    sub.p_bar = power_relay / (a_gain + p_b * geo.c_rb + 1.0);
    const double reach = sub.p_bar * geo.b_norm2;
    if (reach < sub.gamma_b_bar) {
        return Infeasible{InfeasibleCause::NullSpaceBudget};
    }
    sub.q = sub.gamma_b_bar > 0.0 ? std::min(1.0, sub.gamma_b_bar / reach) : 0.0;
    return sub;
}

Solved<CVec> solve_txbf(const ChannelRealization& ch, const TransmitGeometry& geo, double p_a,
                        double p_b, double gamma_b, double power_relay) {
    const auto sub = make_subproblem(geo, p_a, p_b, gamma_b, power_relay, std::norm(ch.h_bb));
    if (!sub) {
        return Infeasible{sub.cause()};
    }
    const double scale = std::sqrt(sub->p_bar);

    if (geo.d2.size() == 0) {
        // A's link is blind to the null space; any budget-feasible direction is optimal.
        const CVec z = geo.d1.size() != 0 ? geo.d1 : CVec(CVec::Unit(geo.dimension(), 0));
        return CVec(scale * (geo.null_basis * z));
    }

    // Step 3: the unconstrained maximizer, if B's constraint happens to hold.
    if (sub->p_bar * geo.b_norm2 * geo.r * geo.r >= sub->gamma_b_bar) {
        return CVec(scale * (geo.null_basis * geo.d2));
    }

    // Step 4: both constraints active.
    try {
        const CVec z = boundary_unit_vector(geo.d1, geo.d2, sub->q);
        return CVec(scale * (geo.null_basis * z));
    } catch (const DegenerateGeometryError&) {
        return Infeasible{InfeasibleCause::Degenerate};
    }
}

Solved<CVec> solve_txbf(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                        double gamma_b, double power_relay) {
    return solve_txbf(ch, make_transmit_geometry(ch, w_r), p_a, p_b, gamma_b, power_relay);
}

Solved<PowerPair> solve_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                              double gamma_b, const SystemConfig& config) {
    const auto g = effective_gains(ch, w_t, w_r);
    const double si_a = std::norm(ch.h_aa);
    const double si_b = std::norm(ch.h_bb);
    const double wt2 = w_t.squaredNorm();

    if (gamma_b > 0.0 && config.power_a * g.c_bt * g.c_ra <= gamma_b) {
        return Infeasible{InfeasibleCause::SinrGate};
    }

    const std::array<HalfPlane, 6> planes{{
        {-g.c_bt * g.c_ra, gamma_b * si_b, -gamma_b * (g.c_bt + 1.0)}, // B's SINR target
        {wt2 * g.c_ra, wt2 * g.c_rb, config.power_relay - wt2},         // relay budget
        {-1.0, 0.0, 0.0},
        {1.0, 0.0, config.power_a},
        {0.0, -1.0, 0.0},
        {0.0, 1.0, config.power_b},
    }};

    std::optional<PowerPair> best;
    double best_value = kNegInf;
    for (std::size_t i = 0; i < planes.size(); ++i) {
        for (std::size_t k = i + 1; k < planes.size(); ++k) {
            const auto& u = planes[i];
            const auto& v = planes[k];
            const double det = u.a * v.b - u.b * v.a;
            const double size = (std::abs(u.a) + std::abs(u.b)) * (std::abs(v.a) + std::abs(v.b));
            if (std::abs(det) <= 1e-14 * size) {
                continue;
            }
            const double pa = (u.c * v.b - u.b * v.c) / det;
            const double pb = (u.a * v.c - u.c * v.a) / det;
            bool ok = true;
            for (const auto& h : planes) {
                if (h.slack(pa, pb) < -h.tolerance(config)) {
                    ok = false;
                    break;
                }
            }
            if (!ok) {
                continue;
            }
            const PowerPair p{std::clamp(pa, 0.0, config.power_a), std::clamp(pb, 0.0, config.power_b)};
            const double value = p.p_b * g.c_at * g.c_rb / (g.c_at + p.p_a * si_a + 1.0);
            if (value > best_value) {
                best_value = value;
                best = p;
            }
        }
    }
    if (!best) {
        return Infeasible{InfeasibleCause::EmptyPolygon};
    }
    return *best;
}

Solved<PowerPair> stepwise_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                                 double gamma_b, const SystemConfig& config) {
    const auto g = effective_gains(ch, w_t, w_r);
    const double si_b = std::norm(ch.h_bb);
    const double wt2 = w_t.squaredNorm();
    const double link = g.c_bt * g.c_ra;

    if (gamma_b > 0.0 && config.power_a * link <= gamma_b) {
        return Infeasible{InfeasibleCause::SinrGate};
    }

    // Ignore the relay budget: one source at full power.
    PowerPair p;
    const double needed_a = gamma_b * (g.c_bt + config.power_b * si_b + 1.0) / link;
    if (config.power_a >= needed_a) {
        p = {needed_a, config.power_b};
    } else {
        p.p_a = config.power_a;
        p.p_b = si_b > 0.0
                    ? std::min(config.power_b, (p.p_a * link / gamma_b - 1.0 - g.c_bt) / si_b)
                    : config.power_b;
        if (p.p_b < 0.0 || (si_b == 0.0 && p.p_a < needed_a)) {
            return Infeasible{InfeasibleCause::EmptyPolygon};
        }
    }
    if (wt2 * (p.p_a * g.c_ra + p.p_b * g.c_rb + 1.0) <= config.power_relay * (1.0 + 1e-12)) {
        return p;
    }

    // Relay budget binds as well: intersect B's SINR line with the budget line.
    //   link * p_A - gamma_b si_b p_B = gamma_b (C_Bt + 1)
    //   C_rA p_A + C_rB p_B = P_R / ||w_t||^2 - 1
    const double rhs1 = gamma_b * (g.c_bt + 1.0);
    const double rhs2 = config.power_relay / wt2 - 1.0;
    const double det = link * g.c_rb + gamma_b * si_b * g.c_ra;
    if (det == 0.0) {
        return Infeasible{InfeasibleCause::EmptyPolygon};
    }
    return PowerPair{(rhs1 * g.c_rb + gamma_b * si_b * rhs2) / det, (link * rhs2 - g.c_ra * rhs1) / det};
}

bool feasible_at_alpha(const ChannelRealization& ch, double alpha, double gamma_b,
                       const SystemConfig& config, const SolverMode& mode) {
    const auto w_r = combiner_or_none(ch, alpha);
    if (!w_r) {
        return false;
    }
    const auto geo = make_transmit_geometry(ch, *w_r);
    for (const auto& p : starting_powers(config, mode)) {
        if (make_subproblem(geo, p.p_a, p.p_b, gamma_b, config.power_relay, std::norm(ch.h_bb))) {
            return true;
        }
    }
    return false;
}

Solved<OperatingPoint> optimize_fixed_alpha(const ChannelRealization& ch, double alpha,
                                            double gamma_b, const SystemConfig& config,
                                            const SolverMode& mode) {
    const auto w_r = combiner_or_none(ch, alpha);
    if (!w_r) {
        return Infeasible{InfeasibleCause::Degenerate};
    }
    const auto geo = make_transmit_geometry(ch, *w_r);

    std::optional<InfeasibleCause> cause;
    for (const auto& start : starting_powers(config, mode)) {
        auto w_t = solve_txbf(ch, geo, start.p_a, start.p_b, gamma_b, config.power_relay);
        if (!w_t) {
            cause = w_t.cause();
            continue;
        }
        CVec wt = *w_t;
        PowerPair p = start;
        std::vector<double> trace{objective(ch, wt, *w_r, p)};
        int iterations = 0;
        while (mode.adapt_powers && iterations < config.iter_max) {
            ++iterations;
            const auto next_p = solve_power(ch, wt, *w_r, gamma_b, config);
            if (!next_p) {
                break;
            }
            const auto next_w = solve_txbf(ch, geo, next_p->p_a, next_p->p_b, gamma_b, config.power_relay);
            if (!next_w) {
                break;
            }
            const double value = objective(ch, *next_w, *w_r, *next_p);
            const double prev = trace.back();
            if (value < prev) {
                break; // rounding-level regression; keep the previous iterate
            }
            wt = *next_w;
            p = *next_p;
            trace.push_back(value);
            if (value - prev < config.conv_tol * std::max(1.0, prev)) {
                break;
            }
        }
        auto op = evaluate_point(ch, {wt, *w_r, alpha}, p.p_a, p.p_b, mode.prelog);
        op.trace = std::move(trace);
        op.iterations = iterations;
        return op;
    }
    return Infeasible{cause.value_or(InfeasibleCause::SinrGate)};
}

Solved<OperatingPoint> max_rate_given_rb(const ChannelRealization& ch, double r_b,
                                         const SystemConfig& config, const SolverMode& mode) {
    if (!(r_b >= 0.0)) {
        throw Error("max_rate_given_rb: r_b must be >= 0");
    }
    const double gamma_b = target_sinr(r_b, mode);
    std::optional<OperatingPoint> best;
    auto score = [&](double alpha) {
        auto op = optimize_fixed_alpha(ch, alpha, gamma_b, config, mode);
        if (!op) {
            return kNegInf;
        }
        const double value = op->gamma_a;
        if (!best || value > best->gamma_a) {
            best = *op;
        }
        return value;
    };
    numerics::maximize_1d(score, 0.0, 1.0, config.alpha_tol, config.alpha_grid);
    if (!best) {
        return Infeasible{InfeasibleCause::NoFeasibleAlpha};
    }
    return *best;
}

double max_feasible_rb(const ChannelRealization& ch, const SystemConfig& config,
                       const SolverMode& mode) {
    const int n = config.alpha_grid;
    auto feasible = [&](double r_b) {
        const double gamma_b = target_sinr(r_b, mode);
        for (int i = 0; i < n; ++i) {
            if (feasible_at_alpha(ch, static_cast<double>(i) / (n - 1), gamma_b, config, mode)) {
                return true;
            }
        }
        return false;
    };
    if (!feasible(0.0)) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 1.0;
    while (feasible(hi) && hi < 1024.0) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 60 && hi - lo > 1e-10; ++i) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

std::vector<RegionPoint> rate_region(const ChannelRealization& ch, int n_points,
                                     const SystemConfig& config, const SolverMode& mode) {
    if (n_points < 2) {
        throw Error("rate_region: need at least two points");
    }
    const double r_max = max_feasible_rb(ch, config, mode);
    std::vector<RegionPoint> region;
    region.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double target = r_max * i / (n_points - 1);
        region.push_back({target, max_rate_given_rb(ch, target, config, mode)});
    }

    // Monotone repair from the top target down.
    std::optional<OperatingPoint> best_above;
    for (auto it = region.rbegin(); it != region.rend(); ++it) {
        if (!it->point) {
            continue;
        }
        if (best_above && it->point->rate_a < best_above->rate_a) {
            it->point = *best_above;
        } else {
            best_above = *it->point;
        }
    }
    return region;
}

} // namespace fdtwr::p1
