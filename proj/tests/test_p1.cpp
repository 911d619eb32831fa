#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fdtwr/errors.hpp"
#include "fdtwr/oracles.hpp"
#include "fdtwr/p1_solver.hpp"
#include "support.hpp"

using namespace fdtwr;
using fdtwr::testing::channels;
using fdtwr::testing::random_unit;
using fdtwr::testing::rel_diff;
using fdtwr::testing::uniform;

namespace {

double boundary_value(const CVec& d1, const CVec& d2, double q) {
    const double r = std::abs(d2.dot(d1));
    const double v = r * std::sqrt(q) + std::sqrt((1.0 - q) * (1.0 - r * r));
    return v * v;
}

// Gamma_B at a fraction of what the alpha-combiner can deliver to B.
double b_target(const ChannelRealization& ch, const CVec& w_r, const SystemConfig& c, double frac) {
    const auto geo = make_transmit_geometry(ch, w_r);
    const double p_bar = c.power_relay / (c.power_a * geo.c_ra + c.power_b * geo.c_rb + 1.0);
    const double cbt = p_bar * geo.b_norm2;
    const double best = c.power_a * geo.c_ra * cbt / (cbt + c.power_b * std::norm(ch.h_bb) + 1.0);
    return frac * best;
}

} // namespace

TEST_CASE("boundary_unit_vector closed form") {
    std::mt19937_64 rng(5);
    SUBCASE("q = 1 saturates at r^2") {
        const CVec d1 = random_unit(rng, 3);
        const CVec d2 = random_unit(rng, 3);
        const CVec z = p1::boundary_unit_vector(d1, d2, 1.0);
        const double r = std::abs(d2.dot(d1));
        CHECK(std::norm(d2.dot(z)) == doctest::Approx(r * r).epsilon(1e-12));
        CHECK(std::norm(d1.dot(z)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("orthogonal directions, q = 0 gives d2") {
        CVec d1 = CVec::Zero(3);
        CVec d2 = CVec::Zero(3);
        d1(0) = 1.0;
        d2(1) = 1.0;
        const CVec z = p1::boundary_unit_vector(d1, d2, 0.0);
        CHECK(std::norm(d2.dot(z)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("constraints and value on random instances; matches the Lagrangian oracle") {
        for (int i = 0; i < 50; ++i) {
            const CVec d1 = random_unit(rng, 3);
            const CVec d2 = random_unit(rng, 3);
            const double q = uniform(rng, 0.02, 0.98);
            const CVec z = p1::boundary_unit_vector(d1, d2, q);
            CHECK(std::abs(z.norm() - 1.0) <= 1e-12);
            CHECK(std::abs(std::norm(d1.dot(z)) - q) <= 1e-12);
            const double value = std::norm(d2.dot(z));
            CHECK(std::abs(value - boundary_value(d1, d2, q)) <= 1e-10);
            CHECK(std::abs(value - oracles::lagrangian_boundary_oracle(d1, d2, q)) <= 1e-8);
        }
    }
    SUBCASE("no random feasible unit vector beats it") {
        const CVec d1 = random_unit(rng, 3);
        const CVec d2 = random_unit(rng, 3);
        const double q = 0.4;
        const double value = std::norm(d2.dot(p1::boundary_unit_vector(d1, d2, q)));
        double best = 0.0;
        for (int i = 0; i < 200000; ++i) {
            // Project a random direction onto the constraint |d1^H z|^2 = q.
            CVec u = random_unit(rng, 3);
            u -= d1 * d1.dot(u);
            u.normalize();
            const double ph = uniform(rng, 0.0, 2.0 * std::numbers::pi);
            const CVec z = std::sqrt(q) * std::polar(1.0, ph) * d1 + std::sqrt(1.0 - q) * u;
            best = std::max(best, std::norm(d2.dot(z)));
        }
        CHECK(best <= value + 1e-12);
        CHECK(best >= value - 1e-2);
    }
    SUBCASE("collinear directions") {
        const CVec d1 = random_unit(rng, 3);
        const CVec d2 = std::polar(1.0, 0.7) * d1;
        const CVec z = p1::boundary_unit_vector(d1, d2, 0.3);
        CHECK(std::abs(z.norm() - 1.0) <= 1e-12);
        CHECK(std::abs(std::norm(d1.dot(z)) - 0.3) <= 1e-12);
        CVec e1(1);
        e1(0) = 1.0;
        CHECK_THROWS_AS(p1::boundary_unit_vector(e1, e1, 0.3), DegenerateGeometryError);
        CHECK(std::norm(p1::boundary_unit_vector(e1, e1, 1.0)(0)) == doctest::Approx(1.0));
    }
}

TEST_CASE("p1 transmit beamformer") {
    const SystemConfig c;
    SUBCASE("step-1 gate") {
        const auto ch = channels(3);
        const CVec w_r = receive_combiner(ch, 0.5);
        const double c_ra = std::norm(w_r.dot(ch.h_ar));
        const double p_a = 0.5 / c_ra;
        const auto res = p1::solve_txbf(ch, w_r, p_a, 1.0, 1.0, c.power_relay);
        REQUIRE_FALSE(res.feasible());
        CHECK(res.cause() == InfeasibleCause::SinrGate);
    }
    SUBCASE("null-space budget gate") {
        const auto ch = channels(4);
        const CVec w_r = receive_combiner(ch, 0.5);
        const auto res = p1::solve_txbf(ch, w_r, 1e6, c.power_b, 50.0, 1e-6);
        REQUIRE_FALSE(res.feasible());
        CHECK(res.cause() == InfeasibleCause::NullSpaceBudget);
    }
    SUBCASE("Gamma_B = 0 with zero relay loop: w_t follows h_RA") {
        auto ch = channels(6);
        ch.h_rr.setZero();
        const CVec w_r = receive_combiner(ch, 0.5);
        const auto res = p1::solve_txbf(ch, w_r, c.power_a, c.power_b, 0.0, c.power_relay);
        REQUIRE(res.feasible());
        const CVec& w_t = *res;
        CHECK(std::abs(w_t.normalized().dot(ch.h_ra.normalized())) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(relay_output_power(ch, w_t, w_r, c.power_a, c.power_b) ==
              doctest::Approx(c.power_relay).epsilon(1e-10));
    }
    SUBCASE("invariants and the sampled oracle on random feasible instances") {
        int checked = 0;
        for (std::uint64_t seed = 100; seed < 140; ++seed) {
            const auto ch = channels(seed);
            const CVec w_r = receive_combiner(ch, 0.6);
            const double gamma_b = b_target(ch, w_r, c, 0.5);
            const auto res = p1::solve_txbf(ch, w_r, c.power_a, c.power_b, gamma_b, c.power_relay);
            REQUIRE(res.feasible());
            const CVec& w_t = *res;
            CHECK(zf_residual(ch, w_t, w_r) <= 1e-9);
            CHECK(std::abs(relay_output_power(ch, w_t, w_r, c.power_a, c.power_b) - c.power_relay) <=
                  1e-8 * c.power_relay);
            const auto s = sinr_pair(ch, w_t, w_r, c.power_a, c.power_b);
            CHECK(s.gamma_b >= gamma_b * (1.0 - 1e-8));

            if (checked < 15) {
                const oracles::BeamformerTask task{c.power_a, c.power_b, c.power_relay,
                                                   oracles::PowerObjective::p1, gamma_b};
                const auto rep = oracles::sampled_beamformer_oracle(ch, w_r, task, 20000, seed);
                REQUIRE(rep.found());
                // Sampled points are strictly feasible, so the oracle may only trail.
                CHECK(rep.best_value <= s.gamma_a * (1.0 + 1e-9));
                CHECK(rel_diff(rep.best_value, s.gamma_a) <= 1e-4);
                ++checked;
            }
        }
        CHECK(checked == 15);
    }
    SUBCASE("step-3 shortcut and boundary solution meet at the switching target") {
        const auto ch = channels(8);
        const CVec w_r = receive_combiner(ch, 0.6);
        const auto free = p1::solve_txbf(ch, w_r, c.power_a, c.power_b, 0.0, c.power_relay);
        REQUIRE(free.feasible());
        const double g_switch = sinr_pair(ch, *free, w_r, c.power_a, c.power_b).gamma_b;
        const auto below = p1::solve_txbf(ch, w_r, c.power_a, c.power_b, g_switch * (1 - 1e-9), c.power_relay);
        const auto above = p1::solve_txbf(ch, w_r, c.power_a, c.power_b, g_switch * (1 + 1e-9), c.power_relay);
        REQUIRE(below.feasible());
        REQUIRE(above.feasible());
        const double ga_below = sinr_pair(ch, *below, w_r, c.power_a, c.power_b).gamma_a;
        const double ga_above = sinr_pair(ch, *above, w_r, c.power_a, c.power_b).gamma_a;
        CHECK(rel_diff(ga_below, ga_above) <= 1e-6);
    }
}

TEST_CASE("p1 power allocation") {
    SUBCASE("zero SI, slack relay budget: p_B = P_B and p_A meets B's target exactly") {
        SystemConfig c;
        c.si_a = c.si_b = 0.0;
        c.power_relay = 1e6;
        const auto ch = channels(11, c);
        const CVec w_r = receive_combiner(ch, 0.5);
        const CVec w_t = ch.h_ra.normalized() * 1e-3;
        const auto g = effective_gains(ch, w_t, w_r);
        const double gamma_b = 0.2 * c.power_a * g.c_bt * g.c_ra / (g.c_bt + 1.0);
        const auto res = p1::solve_power(ch, w_t, w_r, gamma_b, c);
        REQUIRE(res.feasible());
        CHECK(res->p_b == doctest::Approx(c.power_b));
        CHECK(res->p_a == doctest::Approx(gamma_b * (g.c_bt + 1.0) / (g.c_bt * g.c_ra)).epsilon(1e-10));
    }
    SUBCASE("target above the single-hop limit is infeasible") {
        const SystemConfig c;
        const auto ch = channels(12);
        const CVec w_r = receive_combiner(ch, 0.5);
        const auto tx = p1::solve_txbf(ch, w_r, c.power_a, c.power_b, 0.0, c.power_relay);
        REQUIRE(tx.feasible());
        const auto g = effective_gains(ch, *tx, w_r);
        const double gamma_b = 1.01 * c.power_a * g.c_bt * g.c_ra / (g.c_bt + 1.0);
        const auto res = p1::solve_power(ch, *tx, w_r, gamma_b, c);
        REQUIRE_FALSE(res.feasible());
        CHECK(res.cause() == InfeasibleCause::EmptyPolygon);
    }
    SUBCASE("vertex enumeration vs grid oracle and the stepwise rule") {
        const SystemConfig c;
        int agree = 0;
        for (std::uint64_t seed = 200; seed < 230; ++seed) {
            const auto ch = channels(seed);
            const CVec w_r = receive_combiner(ch, 0.5);
            // Transmit beamformer deliberately off the relay budget so both constraints bite.
            std::mt19937_64 rng(seed);
            const auto geo = make_transmit_geometry(ch, w_r);
            const CVec w_t = geo.null_basis * random_unit(rng, geo.dimension()) * uniform(rng, 0.3, 1.5);
            const double gamma_b = uniform(rng, 0.0, 2.0);
            const auto res = p1::solve_power(ch, w_t, w_r, gamma_b, c);
            const auto rep = oracles::grid_power_oracle(ch, w_t, w_r, c, oracles::PowerObjective::p1, gamma_b, 400);
            if (!res.feasible()) {
                CHECK_FALSE(rep.found());
                continue;
            }
            const auto s = sinr_pair(ch, w_t, w_r, res->p_a, res->p_b);
            CHECK(s.gamma_b >= gamma_b * (1.0 - 1e-8));
            CHECK(relay_output_power(ch, w_t, w_r, res->p_a, res->p_b) <= c.power_relay * (1.0 + 1e-9));
            CHECK(res->p_a <= c.power_a * (1.0 + 1e-12));
            CHECK(res->p_b <= c.power_b * (1.0 + 1e-12));
            if (rep.found()) {
                CHECK(rep.best_value <= s.gamma_a * (1.0 + 1e-9));
                const double bound = oracles::grid_trailing_bound(ch, w_t, w_r, c, oracles::PowerObjective::p1,
                                                                  gamma_b, 400, res->p_a, res->p_b);
                CHECK(s.gamma_a - rep.best_value <= bound);
            }
            const auto step = p1::stepwise_power(ch, w_t, w_r, gamma_b, c);
            if (step.feasible()) {
                const double ga = sinr_pair(ch, w_t, w_r, step->p_a, step->p_b).gamma_a;
                CHECK(ga <= s.gamma_a * (1.0 + 1e-9));
                if (rel_diff(ga, s.gamma_a) <= 1e-9) {
                    ++agree;
                }
            }
        }
        CHECK(agree > 0);
    }
}

TEST_CASE("p1 alternation and alpha search") {
    const SystemConfig c;
    SUBCASE("trace is nondecreasing and points satisfy the invariants") {
        for (std::uint64_t seed = 300; seed < 320; ++seed) {
            const auto ch = channels(seed);
            const CVec w_r = receive_combiner(ch, 0.5);
            const double gamma_b = b_target(ch, w_r, c, 0.3);
            const auto res = p1::optimize_fixed_alpha(ch, 0.5, gamma_b, c);
            REQUIRE(res.feasible());
            const auto& tr = res->trace;
            REQUIRE_FALSE(tr.empty());
            for (std::size_t i = 1; i < tr.size(); ++i) {
                CHECK(tr[i] >= tr[i - 1] - 1e-9);
            }
            CHECK(zf_residual(ch, res->beamformer.w_t, res->beamformer.w_r) <= 1e-9);
            CHECK(res->powers.p_r <= c.power_relay * (1.0 + 1e-8));
            CHECK(res->gamma_b >= gamma_b * (1.0 - 1e-8));
        }
    }
    SUBCASE("Gamma_B = 0 converges quickly with p_B at its budget") {
        const auto ch = channels(321);
        const auto res = p1::optimize_fixed_alpha(ch, 0.5, 0.0, c);
        REQUIRE(res.feasible());
        CHECK(res->iterations <= 3);
        CHECK(res->powers.p_b == doctest::Approx(c.power_b));
    }
    SUBCASE("unreachable target is infeasible") {
        const auto ch = channels(322);
        const auto res = p1::optimize_fixed_alpha(ch, 0.5, 1e9, c);
        CHECK_FALSE(res.feasible());
        const auto best = p1::max_rate_given_rb(ch, 40.0, c);
        REQUIRE_FALSE(best.feasible());
        CHECK(best.cause() == InfeasibleCause::NoFeasibleAlpha);
    }
    SUBCASE("r_B = 0 dominates the alpha = 1 endpoint; targets are met") {
        for (std::uint64_t seed = 330; seed < 340; ++seed) {
            const auto ch = channels(seed);
            const auto free = p1::max_rate_given_rb(ch, 0.0, c);
            const auto end = p1::optimize_fixed_alpha(ch, 1.0, 0.0, c);
            REQUIRE(free.feasible());
            REQUIRE(end.feasible());
            CHECK(free->rate_a >= end->rate_a - 1e-9);
            const double rb = 0.5 * p1::max_feasible_rb(ch, c);
            const auto mid = p1::max_rate_given_rb(ch, rb, c);
            REQUIRE(mid.feasible());
            CHECK(mid->rate_b >= rb - 1e-6);
            CHECK(mid->rate_a <= free->rate_a + 1e-9);
        }
    }
}

TEST_CASE("p1 rate region") {
    const SystemConfig c;
    SUBCASE("two points are the endpoints") {
        const auto ch = channels(400);
        const auto region = p1::rate_region(ch, 2, c);
        REQUIRE(region.size() == 2);
        CHECK(region[0].r_b_target == 0.0);
        REQUIRE(region[0].point.feasible());
        CHECK(region[0].point->rate_a > 0.0);
        CHECK(region[1].r_b_target == doctest::Approx(p1::max_feasible_rb(ch, c)));
    }
    SUBCASE("R_A nonincreasing in the target and targets met") {
        for (std::uint64_t seed = 401; seed < 411; ++seed) {
            const auto ch = channels(seed);
            const auto region = p1::rate_region(ch, 9, c);
            double prev = std::numeric_limits<double>::infinity();
            for (const auto& pt : region) {
                if (!pt.point.feasible()) {
                    continue;
                }
                CHECK(pt.point->rate_a <= prev + 1e-6);
                CHECK(pt.point->rate_b >= pt.r_b_target - 1e-6);
                prev = pt.point->rate_a;
            }
        }
    }
}
