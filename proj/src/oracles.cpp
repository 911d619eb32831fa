#include "fdtwr/oracles.hpp"

#include "fdtwr/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace fdtwr::oracles {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Orthonormal basis of {x : w_r^H H_RR x = 0} from the SVD of the 1 x M_T row.
CMat zf_null_space(const ChannelRealization& ch, const CVec& w_r) {
    const CMat row = w_r.adjoint() * ch.h_rr;
    const auto m = row.cols();
    if (row.norm() == 0.0) {
        return CMat::Identity(m, m);
    }
    const Eigen::JacobiSVD<CMat> svd(row, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(m - 1);
}

CVec random_complex(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CVec v(n);
    for (auto& x : v) {
        x = cdouble(normal(rng), normal(rng));
    }
    return v;
}

} // namespace

bool OracleReport::found() const { return std::isfinite(best_value); }

OracleReport grid_power_oracle(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                               const SystemConfig& config, PowerObjective objective,
                               double gamma_b, int n) {
    if (n < 2) {
        throw Error("grid_power_oracle: grid needs at least two points per axis");
    }
    OracleReport rep;
    rep.best_value = kNegInf;
    rep.best_point = {0.0, 0.0};
    rep.resolution = std::max(config.power_a, config.power_b) / (n - 1);
    for (int i = 0; i < n; ++i) {
        const double pa = config.power_a * i / (n - 1);
        for (int k = 0; k < n; ++k) {
            const double pb = config.power_b * k / (n - 1);
            ++rep.samples;
            if (relay_output_power(ch, w_t, w_r, pa, pb) > config.power_relay * (1.0 + 1e-12)) {
                continue;
            }
            const auto s = sinr_pair(ch, w_t, w_r, pa, pb);
            double value = 0.0;
            if (objective == PowerObjective::p1) {
                if (s.gamma_b < gamma_b) {
                    continue;
                }
                value = s.gamma_a;
            } else {
                value = rate_of(s.gamma_a) + rate_of(s.gamma_b);
            }
            if (value > rep.best_value) {
                rep.best_value = value;
                rep.best_point = {pa, pb};
            }
        }
    }
    return rep;
}

double grid_trailing_bound(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                           const SystemConfig& config, PowerObjective objective, double gamma_b, int n,
                           double p_a, double p_b) {
    const double step_a = config.power_a / (n - 1);
    const double step_b = config.power_b / (n - 1);
    auto value = [&](double pa, double pb) {
        const auto s = sinr_pair(ch, w_t, w_r, pa, pb);
        return objective == PowerObjective::p1 ? s.gamma_a : rate_of(s.gamma_a) + rate_of(s.gamma_b);
    };
    auto feasible = [&](int i, int k) {
        const double pa = config.power_a * i / (n - 1);
        const double pb = config.power_b * k / (n - 1);
        if (relay_output_power(ch, w_t, w_r, pa, pb) > config.power_relay * (1.0 + 1e-12)) {
            return false;
        }
        return objective != PowerObjective::p1 || sinr_pair(ch, w_t, w_r, pa, pb).gamma_b >= gamma_b;
    };

    // Nearest feasible node, scanning square rings around the point; the
    // Euclidean nearest lies within sqrt(2) times the first ring that hits.
    const int ci = static_cast<int>(std::lround(p_a / step_a));
    const int ck = static_cast<int>(std::lround(p_b / step_b));
    double best_d2 = std::numeric_limits<double>::infinity();
    int hit_ring = -1;
    for (int ring = 0; ring < n; ++ring) {
        if (hit_ring >= 0 && ring > static_cast<int>(std::ceil(std::sqrt(2.0) * hit_ring)) + 1) {
            break;
        }
        for (int i = ci - ring; i <= ci + ring; ++i) {
            for (int k = ck - ring; k <= ck + ring; ++k) {
                if (std::max(std::abs(i - ci), std::abs(k - ck)) != ring || i < 0 || k < 0 || i >= n || k >= n) {
                    continue;
                }
                const double da = config.power_a * i / (n - 1) - p_a;
                const double db = config.power_b * k / (n - 1) - p_b;
                const double d2 = da * da + db * db;
                if (d2 < best_d2 && feasible(i, k)) {
                    best_d2 = d2;
                    if (hit_ring < 0) {
                        hit_ring = ring;
                    }
                }
            }
        }
    }
    if (hit_ring < 0) {
        return std::numeric_limits<double>::infinity();
    }
    const double h = 1e-7 * std::max(1.0, std::max(config.power_a, config.power_b));
    const double ga = (value(p_a + h, p_b) - value(std::max(0.0, p_a - h), p_b)) / (p_a + h - std::max(0.0, p_a - h));
    const double gb = (value(p_a, p_b + h) - value(p_a, std::max(0.0, p_b - h))) / (p_b + h - std::max(0.0, p_b - h));
    return 2.0 * std::hypot(ga, gb) * std::sqrt(best_d2) + 1e-12 * std::abs(value(p_a, p_b));
}

OracleReport sampled_beamformer_oracle(const ChannelRealization& ch, const CVec& w_r,
                                       const BeamformerTask& task, int n_samples,
                                       std::uint64_t seed) {
    const CMat basis = zf_null_space(ch, w_r);
    const double c_ra = std::norm(w_r.dot(ch.h_ar));
    const double c_rb = std::norm(w_r.dot(ch.h_br));
    const double budget = task.power_relay / (task.p_a * c_ra + task.p_b * c_rb + 1.0);

    const CVec b_dir = (basis.adjoint() * ch.h_rb).normalized();
    auto sinrs = [&](const CVec& z) {
        return sinr_pair(ch, std::sqrt(budget) * (basis * z.normalized()), w_r, task.p_a, task.p_b);
    };
    // Infeasible p1 samples are pulled toward the B-optimal direction by the
    // smallest mixing weight that meets the target, so the search can follow
    // the constraint boundary.
    auto repair = [&](CVec& z) {
        if (task.objective != PowerObjective::p1 || sinrs(z).gamma_b >= task.gamma_b) {
            return;
        }
        const cdouble align = b_dir.dot(z);
        const CVec toward = std::abs(align) > 0.0 ? CVec(b_dir * (align / std::abs(align))) : b_dir;
        auto mix = [&](double t) { return CVec(((1.0 - t) * z + t * toward).normalized()); };
        if (sinrs(toward).gamma_b < task.gamma_b) {
            return;
        }
        double lo = 0.0;
        double hi = 1.0;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (sinrs(mix(mid)).gamma_b >= task.gamma_b ? hi : lo) = mid;
        }
        z = mix(hi);
    };
    auto evaluate = [&](CVec& z) {
        repair(z);
        const auto s = sinrs(z);
        if (task.objective == PowerObjective::p1) {
            return s.gamma_b >= task.gamma_b ? s.gamma_a : kNegInf;
        }
        return rate_of(s.gamma_a) + rate_of(s.gamma_b);
    };

    std::mt19937_64 rng(seed);
    OracleReport rep;
    rep.best_value = kNegInf;
    CVec best;
    for (int i = 0; i < n_samples; ++i) {
        CVec z = random_complex(rng, basis.cols());
        const double v = evaluate(z);
        ++rep.samples;
        if (v > rep.best_value) {
            rep.best_value = v;
            best = z.normalized();
        }
    }
    if (!rep.found()) {
        return rep;
    }

    double step = 0.25;
    int misses = 0;
    const int patience = 8 * static_cast<int>(basis.cols());
    while (step > 1e-12 && rep.samples < n_samples + 200000) {
        CVec trial = (best + step * random_complex(rng, basis.cols())).normalized();
        const double v = evaluate(trial);
        ++rep.samples;
        if (v > rep.best_value) {
            rep.best_value = v;
            best = trial;
            misses = 0;
        } else if (++misses >= patience) {
            step *= 0.5;
            misses = 0;
        }
    }
    rep.resolution = step;
    const CVec w_t = std::sqrt(budget) * (basis * best);
    for (const auto& x : w_t) {
        rep.best_point.push_back(x.real());
        rep.best_point.push_back(x.imag());
    }
    return rep;
}

double lagrangian_boundary_oracle(const CVec& d1, const CVec& d2, double q, int n_sweep) {
    const cdouble inner = d2.dot(d1);
    const double r = std::min(1.0, std::abs(inner));
    if (1.0 - r * r < 1e-12) {
        return q; // |d2^H z| = |d1^H z| for every z
    }
    const double sq = std::sqrt(q);
    const double span = 1.0 / std::sqrt(1.0 - r * r) + 1.0;

    double best = kNegInf;
    for (const double sign : {1.0, -1.0}) {
        auto b_of = [&](double g) { return sign * sq - g * r; };
        auto residual = [&](double g) {
            const double b = b_of(g);
            return b * b + g * g + 2.0 * b * g * r - 1.0;
        };
        auto value = [&](double g) {
            const double v = b_of(g) * r + g;
            return v * v;
        };
        double prev_g = -span;
        double prev_res = residual(prev_g);
        for (int i = 0; i < n_sweep; ++i) {
            const double g = -span + 2.0 * span * i / (n_sweep - 1);
            const double res = residual(g);
            if (std::abs(res) <= 1e-14) {
                best = std::max(best, value(g));
            } else if ((res < 0.0) != (prev_res < 0.0) && i > 0) {
                double lo = prev_g;
                double hi = g;
                for (int it = 0; it < 200 && hi - lo > 1e-16 * span; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    ((residual(mid) < 0.0) == (prev_res < 0.0) ? lo : hi) = mid;
                }
                best = std::max(best, value(0.5 * (lo + hi)));
            }
            prev_g = g;
            prev_res = res;
        }
    }
    return best;
}

OracleReport dc_grid_oracle(const ChannelRealization& ch, const CVec& w_r, const DcTask& task,
                            int n) {
    if (n < 2) {
        throw Error("dc_grid_oracle: grid needs at least two points per axis");
    }
    const CMat basis = zf_null_space(ch, w_r);
    const CVec a = basis.adjoint() * ch.h_ra;
    const CVec b = basis.adjoint() * ch.h_rb;
    const double a2 = a.squaredNorm();
    const double b2 = b.squaredNorm();
    const cdouble inner = a.dot(b) / std::sqrt(a2 * b2);
    const double r = std::min(1.0, std::abs(inner));
    const double phi = std::arg(inner);
    const double rho_max = std::sqrt(std::max(0.0, 1.0 - r * r));
    const bool disc = basis.cols() >= 3;

    const double c_ra = std::norm(w_r.dot(ch.h_ar));
    const double c_rb = std::norm(w_r.dot(ch.h_br));
    const double k_a = task.p_b * c_rb;
    const double c_a = task.p_a * std::norm(ch.h_aa) + 1.0;
    const double k_b = task.p_a * c_ra;
    const double c_b = task.p_b * std::norm(ch.h_bb) + 1.0;
    const double g_k = std::log2(task.anchor_s_a + c_a) + std::log2(task.anchor_s_b + c_b);
    auto linearized = [&](double s_a, double s_b) {
        const double f = std::log2((k_a + 1.0) * s_a + c_a) + std::log2((k_b + 1.0) * s_b + c_b);
        const double g_l = g_k + ((s_a - task.anchor_s_a) / (task.anchor_s_a + c_a) +
                                  (s_b - task.anchor_s_b) / (task.anchor_s_b + c_b)) /
                                     std::numbers::ln2;
        return f - g_l;
    };
    // z = sin(t) d1 + cos(t) u with d2^H u = rho e^{j theta}; q = sin^2(t) keeps
    // both coefficients smooth near q = 1.
    auto forms = [&](double t, double theta, double rho) {
        const cdouble d2z = std::polar(r * std::sin(t), phi) + std::cos(t) * std::polar(rho, theta);
        const double q = std::sin(t) * std::sin(t);
        return std::array<double, 2>{task.p_prime * a2 * std::norm(d2z), task.p_prime * b2 * q};
    };
    constexpr double t_max = std::numbers::pi / 2.0;

    OracleReport rep;
    rep.best_value = kNegInf;
    rep.resolution = 1.0 / (n - 1);
    const int n_rho = disc ? std::max(2, n / 8) : 1;
    std::array<double, 3> arg{0.0, 0.0, rho_max};
    auto consider = [&](double t, double theta, double rho) {
        const auto s = forms(t, theta, rho);
        const double v = linearized(s[0], s[1]);
        ++rep.samples;
        if (v > rep.best_value) {
            rep.best_value = v;
            rep.best_point = {s[0], s[1]};
            arg = {t, theta, rho};
        }
    };
    for (int i = 0; i < n; ++i) {
        const double t = t_max * i / (n - 1);
        for (int k = 0; k < n; ++k) {
            const double theta = 2.0 * std::numbers::pi * k / n;
            for (int m = 0; m < n_rho; ++m) {
                consider(t, theta, disc ? rho_max * m / (n_rho - 1) : rho_max);
            }
        }
    }

    // Pattern refinement over all sign combinations of the three steps, so the
    // search can follow ridges that are not aligned with a coordinate axis.
    std::array<double, 3> step{t_max * rep.resolution, 2.0 * std::numbers::pi / n, disc ? rho_max / n_rho : 0.0};
    while (step[0] > 1e-13) {
        bool moved = false;
        for (int code = 0; code < 27; ++code) {
            if (code == 13) {
                continue;
            }
            auto next = arg;
            for (int c = 0, k = code; c < 3; ++c, k /= 3) {
                next[c] += (k % 3 - 1) * step[c];
            }
            next[0] = std::clamp(next[0], 0.0, t_max);
            next[2] = disc ? std::clamp(next[2], 0.0, rho_max) : rho_max;
            const double before = rep.best_value;
            consider(next[0], next[1], next[2]);
            moved = moved || rep.best_value > before;
        }
        if (!moved) {
            for (auto& s : step) {
                s *= 0.5;
            }
        }
    }
    return rep;
}

} // namespace fdtwr::oracles
