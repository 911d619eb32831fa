#include "fdtwr/p2_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace fdtwr::p2 {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// 1 + gamma_A = 1 + k_a s_A / (s_A + c_a), and likewise for B.
struct Terms {
    double k_a; // p_B C_rB
    double c_a; // p_A |h_AA|^2 + 1
    double k_b; // p_A C_rA
    double c_b; // p_B |h_BB|^2 + 1

    double concave(double s_a, double s_b) const {
        return std::log2((k_a + 1.0) * s_a + c_a) + std::log2((k_b + 1.0) * s_b + c_b);
    }
    double convex(double s_a, double s_b) const {
        return std::log2(s_a + c_a) + std::log2(s_b + c_b);
    }
    double objective(double s_a, double s_b) const {
        return std::log2(1.0 + k_a * s_a / (s_a + c_a)) + std::log2(1.0 + k_b * s_b / (s_b + c_b));
    }
    double linearized(double s_a, double s_b, double a_k, double b_k) const {
        const double g_l = convex(a_k, b_k) + ((s_a - a_k) / (a_k + c_a) + (s_b - b_k) / (b_k + c_b)) /
                                                  std::numbers::ln2;
        return concave(s_a, s_b) - g_l;
    }
};

Terms make_terms(const ChannelRealization& ch, double c_ra, double c_rb, double p_a, double p_b) {
    return {p_b * c_rb, p_a * std::norm(ch.h_aa) + 1.0, p_a * c_ra, p_b * std::norm(ch.h_bb) + 1.0};
}

Terms make_terms(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b) {
    return make_terms(ch, std::norm(w_r.dot(ch.h_ar)), std::norm(w_r.dot(ch.h_br)), p_a, p_b);
}

struct Forms {
    double s_a;
    double s_b;
};

Forms forms_of(const ChannelRealization& ch, const CVec& w_t) {
    return {std::norm(ch.h_ra.dot(w_t)), std::norm(ch.h_rb.dot(w_t))};
}

// Direction in the null space when one of the projected channels vanishes:
// the objective then depends on a single form and is increasing in it.
std::optional<CVec> degenerate_direction(const TransmitGeometry& geo) {
    if (geo.d1.size() != 0 && geo.d2.size() != 0) {
        return std::nullopt;
    }
    if (geo.d2.size() != 0) {
        return geo.d2;
    }
    if (geo.d1.size() != 0) {
        return geo.d1;
    }
    return CVec(CVec::Unit(geo.dimension(), 0));
}

bool collinear(const TransmitGeometry& geo) { return 1.0 - geo.r * geo.r < 1e-10; }

// Orthonormal completion {e2, e3} of d1 inside the null-space coordinates.
struct Frame {
    CVec e2;
    CVec e3; // empty when the dimension is two
};

Frame make_frame(const TransmitGeometry& geo) {
    Frame fr;
    const int n = geo.dimension();
    if (collinear(geo)) {
        fr.e2 = numerics::null_space_basis(geo.d1).col(0);
    } else {
        const CVec along = std::polar(geo.r, -geo.phi) * geo.d1;
        fr.e2 = (geo.d2 - along) / std::sqrt(1.0 - geo.r * geo.r);
    }
    if (n >= 3) {
        double best = -1.0;
        for (int k = 0; k < n; ++k) {
            CVec v = CVec::Unit(n, k);
            v -= geo.d1 * geo.d1.dot(v);
            v -= fr.e2 * fr.e2.dot(v);
            if (v.norm() > best) {
                best = v.norm();
                fr.e3 = v;
            }
        }
        fr.e3 /= best;
    }
    return fr;
}

double unit_root_span(double q, double r) {
    return std::sqrt(std::max(0.0, (1.0 - q) * (1.0 - r * r)));
}

} // namespace

double dc_objective(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                    double s_a, double s_b) {
    return make_terms(ch, w_r, p_a, p_b).objective(s_a, s_b);
}

double dc_f_part(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                       double s_a, double s_b) {
    return make_terms(ch, w_r, p_a, p_b).concave(s_a, s_b);
}

double dc_g_part(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                      double s_a, double s_b) {
    return make_terms(ch, w_r, p_a, p_b).convex(s_a, s_b);
}

double dc_linearized_objective(const ChannelRealization& ch, const CVec& w_r, double p_a,
                               double p_b, double s_a, double s_b, const DcAnchor& anchor) {
    return make_terms(ch, w_r, p_a, p_b).linearized(s_a, s_b, anchor.s_a, anchor.s_b);
}

SetBounds feasible_set_bounds(const TransmitGeometry& geo, double p_prime, double s_b) {
    const double reach = p_prime * geo.b_norm2;
    if (!(s_b >= -1e-12 * std::max(1.0, reach) && s_b <= reach * (1.0 + 1e-12) + 1e-300)) {
        throw Error("feasible_set_bounds: s_b outside [0, P' ||N_t^H h_RB||^2]");
    }
    const double scale = p_prime * geo.a_norm2;
    if (geo.d1.size() == 0 || geo.d2.size() == 0) {
        return {0.0, scale};
    }
    const double q = reach > 0.0 ? std::clamp(s_b / reach, 0.0, 1.0) : 0.0;
    const double hi = geo.r * std::sqrt(q) + unit_root_span(q, geo.r);
    double lo = geo.r * std::sqrt(q) - unit_root_span(q, geo.r);
    if (geo.dimension() >= 3) {
        lo = std::max(0.0, lo);
    }
    if (geo.dimension() == 1) {
        return {scale * q, scale * q};
    }
    return {scale * lo * lo, scale * hi * hi};
}

SetBounds feasible_set_bounds(const ChannelRealization& ch, const CVec& w_r, double p_prime,
                              double s_b) {
    return feasible_set_bounds(make_transmit_geometry(ch, w_r), p_prime, s_b);
}

ReducedCoords reduced_coords(const TransmitGeometry& geo, double p_prime, double s_a, double s_b) {
    if (geo.d1.size() == 0 || geo.d2.size() == 0 || geo.dimension() < 2) {
        throw DegenerateGeometryError("reduced_coords: needs two nonzero projected channels");
    }
    const double q = std::clamp(s_b / (p_prime * geo.b_norm2), 0.0, 1.0);
    const auto bounds = feasible_set_bounds(geo, p_prime, s_b);
    const double t =
        std::clamp(s_a, bounds.s_a_min, bounds.s_a_max) / (p_prime * geo.a_norm2);

    ReducedCoords c;
    c.b = std::sqrt(q);
    if (collinear(geo)) {
        c.g = std::sqrt(1.0 - q);
        return c;
    }
    const double r = geo.r;
    const double sr = std::sqrt(1.0 - r * r);
    if (geo.dimension() == 2) {
        c.g = std::sqrt(1.0 - q);
        const double denom = 2.0 * r * c.b * sr * c.g;
        const double cosine =
            denom > 0.0 ? std::clamp((t - r * r * q - sr * sr * c.g * c.g) / denom, -1.0, 1.0) : 1.0;
        c.psi = geo.phi + std::acos(cosine);
        return c;
    }
    const double st = std::sqrt(t);
    c.psi = st >= r * c.b ? geo.phi : geo.phi + std::numbers::pi;
    c.g = std::abs(st - r * c.b) / sr;
    c.delta2 = std::max(0.0, 1.0 - q - c.g * c.g);
    return c;
}

CVec reconstruct_beamformer(const TransmitGeometry& geo, double p_prime, double s_a, double s_b) {
    const auto c = reduced_coords(geo, p_prime, s_a, s_b);
    const auto fr = make_frame(geo);
    CVec z = c.b * geo.d1 + std::polar(c.g, c.psi) * fr.e2;
    if (c.delta2 > 0.0 && fr.e3.size() != 0) {
        z += std::sqrt(c.delta2) * fr.e3;
    }
    z.normalize();
    return std::sqrt(p_prime) * (geo.null_basis * z);
}

double trace_budget(const TransmitGeometry& geo, double p_a, double p_b, double power_relay) {
    return power_relay / (p_a * geo.c_ra + p_b * geo.c_rb + 1.0);
}

DcStepResult dc_step(const ChannelRealization& ch, const TransmitGeometry& geo, double p_a,
                     double p_b, const DcAnchor& anchor, const SystemConfig& config) {
    const Terms terms = make_terms(ch, geo.c_ra, geo.c_rb, p_a, p_b);
    const double p_prime = trace_budget(geo, p_a, p_b, config.power_relay);
    const double anchor_value = terms.objective(anchor.s_a, anchor.s_b);
    const DcStepResult keep{anchor.s_a, anchor.s_b, anchor.w_t, false};

    if (const auto z = degenerate_direction(geo)) {
        const CVec w_t = std::sqrt(p_prime) * (geo.null_basis * *z);
        const auto s = forms_of(ch, w_t);
        if (terms.objective(s.s_a, s.s_b) < anchor_value) {
            return keep;
        }
        return {s.s_a, s.s_b, w_t, true};
    }

    // The linearized objective is concave in s_A with this stationary point.
    const double s_a_free = anchor.s_a + terms.c_a * terms.k_a / (terms.k_a + 1.0);
    auto best_s_a = [&](double s_b) {
        const auto b = feasible_set_bounds(geo, p_prime, s_b);
        return std::clamp(s_a_free, b.s_a_min, b.s_a_max);
    };
    auto outer = [&](double s_b) {
        return terms.linearized(best_s_a(s_b), s_b, anchor.s_a, anchor.s_b);
    };
    const double s_b_max = p_prime * geo.b_norm2;
    const auto m = numerics::maximize_1d(outer, 0.0, s_b_max, 1e-11 * s_b_max, config.grid_points);

    const double s_b = m.x;
    const double s_a = best_s_a(s_b);
    const CVec w_t = reconstruct_beamformer(geo, p_prime, s_a, s_b);
    const auto s = forms_of(ch, w_t);
    if (terms.objective(s.s_a, s.s_b) < anchor_value) {
        return keep;
    }
    return {s.s_a, s.s_b, w_t, true};
}

DcStepResult dc_step(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                     const DcAnchor& anchor, const SystemConfig& config) {
    return dc_step(ch, make_transmit_geometry(ch, w_r), p_a, p_b, anchor, config);
}

TxbfResult solve_txbf(const ChannelRealization& ch, const TransmitGeometry& geo, double p_a,
                      double p_b, const SystemConfig& config, const CVec* warm_start) {
    const Terms terms = make_terms(ch, geo.c_ra, geo.c_rb, p_a, p_b);
    const double p_prime = trace_budget(geo, p_a, p_b, config.power_relay);
    TxbfResult out;
    auto record = [&](const CVec& w_t, int k) {
        const auto s = forms_of(ch, w_t);
        const double value = terms.objective(s.s_a, s.s_b);
        out.f_trace.push_back(value);
        out.states.push_back({s.s_a, s.s_b, p_prime, value, k});
        out.w_t = w_t;
        return value;
    };

    if (geo.dimension() == 1) {
        const CVec n_hat = geo.null_basis.col(0);
        auto f = [&](double p_t) { return terms.objective(p_t * geo.a_norm2, p_t * geo.b_norm2); };
        const auto m = numerics::maximize_1d(f, 0.0, p_prime, 1e-12 * p_prime, config.grid_points);
        record(std::sqrt(m.x) * n_hat, 0);
        return out;
    }
    if (const auto z = degenerate_direction(geo)) {
        record(std::sqrt(p_prime) * (geo.null_basis * *z), 0);
        return out;
    }

    CVec z = geo.d2;
    if (warm_start != nullptr) {
        const CVec coords = geo.null_basis.adjoint() * *warm_start;
        if (coords.norm() > 0.0) {
            z = coords.normalized();
        }
    }
    double value = record(std::sqrt(p_prime) * (geo.null_basis * z), 0);
    DcAnchor anchor{out.states.back().s_a, out.states.back().s_b, out.w_t};

    for (int k = 1; k <= config.iter_max; ++k) {
        const auto step = dc_step(ch, geo, p_a, p_b, anchor, config);
        if (!step.accepted) {
            break;
        }
        const double next = record(step.w_t, k);
        out.iterations = k;
        anchor = {step.s_a, step.s_b, step.w_t};
        const double gain = next - value;
        value = next;
        if (gain < config.conv_tol) {
            break;
        }
    }
    return out;
}

TxbfResult solve_txbf(const ChannelRealization& ch, const CVec& w_r, double p_a, double p_b,
                      const SystemConfig& config, const CVec* warm_start) {
    return solve_txbf(ch, make_transmit_geometry(ch, w_r), p_a, p_b, config, warm_start);
}

double power_sum_rate(const ChannelRealization& ch, const EffectiveGains& g, double p_a, double p_b) {
    const auto s = sinr_pair(ch, g, p_a, p_b);
    return rate_of(s.gamma_a) + rate_of(s.gamma_b);
}

PowerPair solve_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                      const SystemConfig& config) {
    const auto g = effective_gains(ch, w_t, w_r);
    const double si_a = std::norm(ch.h_aa);
    const double si_b = std::norm(ch.h_bb);
    const double wt2 = w_t.squaredNorm();
    const double pa_max = config.power_a;
    const double pb_max = config.power_b;

    std::vector<PowerPair> candidates{{0.0, 0.0}};
    auto fits = [&](double pa, double pb) {
        return wt2 * (pa * g.c_ra + pb * g.c_rb + 1.0) <= config.power_relay * (1.0 + 1e-12);
    };
    for (const PowerPair p : {PowerPair{0.0, pb_max}, PowerPair{pa_max, 0.0}, PowerPair{pa_max, pb_max}}) {
        if (fits(p.p_a, p.p_b)) {
            candidates.push_back(p);
        }
    }

    const double rho = wt2 > 0.0 ? config.power_relay / wt2 : std::numeric_limits<double>::infinity();
    const double room = rho - 1.0;
    if (std::isfinite(rho) && room > 0.0) {
        // Single-source points on the budget line.
        if (g.c_rb > 0.0) {
            candidates.push_back({0.0, std::min(pb_max, room / g.c_rb)});
        }
        if (g.c_ra > 0.0) {
            candidates.push_back({std::min(pa_max, room / g.c_ra), 0.0});
        }
    }

    if (std::isfinite(rho) && room > 0.0 && g.c_ra > 0.0 && g.c_rb > 0.0) {
        // p_A(p_B) = a0 - a1 p_B on the active relay constraint.
        const double a0 = room / g.c_ra;
        const double a1 = g.c_rb / g.c_ra;
        const double lo = std::max(0.0, (a0 - pa_max) / a1);
        const double hi = std::min(pb_max, a0 / a1);
        if (lo <= hi) {
            auto on_curve = [&](double pb) {
                return PowerPair{std::clamp(a0 - a1 * pb, 0.0, pa_max), std::clamp(pb, 0.0, pb_max)};
            };
            candidates.push_back(on_curve(lo));
            candidates.push_back(on_curve(hi));

            // y = log(L1/L2) + log(L3/L4) with L_i = alpha_i + beta_i p_B; dy/dp_B = 0
            // is sum_i sign_i beta_i prod_{j != i} L_j = 0.
            using Lin = std::array<double, 2>;
            const std::array<Lin, 4> lin{{
                {g.c_at + 1.0 + a0 * si_a, g.c_at * g.c_rb - a1 * si_a},
                {g.c_at + 1.0 + a0 * si_a, -a1 * si_a},
                {g.c_bt + 1.0 + a0 * g.c_bt * g.c_ra, si_b - a1 * g.c_bt * g.c_ra},
                {g.c_bt + 1.0, si_b},
            }};
            const std::array<double, 4> sign{1.0, -1.0, 1.0, -1.0};
            std::array<double, 4> poly{}; // ascending powers
            for (std::size_t i = 0; i < 4; ++i) {
                std::array<double, 4> term{sign[i] * lin[i][1], 0.0, 0.0, 0.0};
                int degree = 0;
                for (std::size_t j = 0; j < 4; ++j) {
                    if (j == i) {
                        continue;
                    }
                    std::array<double, 4> next{};
                    for (int d = 0; d <= degree; ++d) {
                        next[d] += term[d] * lin[j][0];
                        next[d + 1] += term[d] * lin[j][1];
                    }
                    term = next;
                    ++degree;
                }
                for (std::size_t d = 0; d < 4; ++d) {
                    poly[d] += term[d];
                }
            }
            const bool zero = std::all_of(poly.begin(), poly.end(), [](double c) { return c == 0.0; });
            if (!zero) {
                for (double x : numerics::real_cubic_roots(poly[3], poly[2], poly[1], poly[0])) {
                    if (x > lo && x < hi) {
                        candidates.push_back(on_curve(x));
                    }
                }
            }
        }
    }

    PowerPair best{0.0, 0.0};
    double best_value = kNegInf;
    for (const auto& p : candidates) {
        const double value = power_sum_rate(ch, g, p.p_a, p.p_b);
        if (value > best_value) {
            best_value = value;
            best = p;
        }
    }
    return best;
}

OperatingPoint optimize_fixed_alpha(const ChannelRealization& ch, double alpha,
                                    const SystemConfig& config, const SolverMode& mode) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error("optimize_fixed_alpha: alpha must lie in [0, 1]");
    }
    CVec w_r;
    try {
        w_r = receive_combiner(ch, alpha);
    } catch (const DegenerateGeometryError&) {
        // h_AR parallel to h_BR: every alpha gives the same direction.
        w_r = receive_combiner(ch, 1.0);
    }
    const auto geo = make_transmit_geometry(ch, w_r);

    PowerPair p{config.power_a, config.power_b};
    CVec w_t = solve_txbf(ch, geo, p.p_a, p.p_b, config).w_t;
    auto sum_rate = [&](const CVec& wt, const PowerPair& pp) {
        return mode.prelog * power_sum_rate(ch, effective_gains(ch, wt, w_r), pp.p_a, pp.p_b);
    };
    std::vector<double> trace{sum_rate(w_t, p)};
    int iterations = 0;
    while (mode.adapt_powers && iterations < config.iter_max) {
        ++iterations;
        const auto next_p = solve_power(ch, w_t, w_r, config);
        const CVec next_w = solve_txbf(ch, geo, next_p.p_a, next_p.p_b, config, &w_t).w_t;
        const double value = sum_rate(next_w, next_p);
        const double prev = trace.back();
        if (value < prev) {
            break;
        }
        w_t = next_w;
        p = next_p;
        trace.push_back(value);
        if (value - prev < config.conv_tol * std::max(1.0, prev)) {
            break;
        }
    }
    auto op = evaluate_point(ch, {w_t, w_r, alpha}, p.p_a, p.p_b, mode.prelog);
    op.trace = std::move(trace);
    op.iterations = iterations;
    return op;
}

OperatingPoint max_sum_rate(const ChannelRealization& ch, const SystemConfig& config,
                            const SolverMode& mode) {
    std::optional<OperatingPoint> best;
    auto score = [&](double alpha) {
        auto op = optimize_fixed_alpha(ch, alpha, config, mode);
        const double value = op.sum_rate();
        if (!best || value > best->sum_rate()) {
            best = std::move(op);
        }
        return value;
    };
    numerics::maximize_1d(score, 0.0, 1.0, config.alpha_tol, config.alpha_grid);
    return *best;
}

} // namespace fdtwr::p2
