#include <doctest.h>

#include <cmath>
#include <random>

#include "fdtwr/errors.hpp"
#include "fdtwr/oracles.hpp"
#include "support.hpp"

using namespace fdtwr;
using namespace fdtwr::oracles;
using fdtwr::testing::channels;
using fdtwr::testing::random_unit;

TEST_CASE("Lagrangian oracle reproduces the two-direction optimum") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
        const CVec d1 = random_unit(rng, 4);
        const CVec d2 = random_unit(rng, 4);
        const double r = std::abs(d2.dot(d1));
        for (double q : {0.0, 0.25, 0.7, 1.0}) {
            const double v = r * std::sqrt(q) + std::sqrt((1.0 - q) * (1.0 - r * r));
            CHECK(std::abs(lagrangian_boundary_oracle(d1, d2, q) - v * v) <= 1e-8);
        }
    }
}

TEST_CASE("Grid power oracle") {
    const SystemConfig c;
    const auto ch = channels(9);
    const CVec w_r = receive_combiner(ch, 0.5);
    const auto geo = make_transmit_geometry(ch, w_r);
    const CVec w_t = 0.5 * geo.null_basis.col(0);
    SUBCASE("nested grids never lose") {
        const auto coarse = grid_power_oracle(ch, w_t, w_r, c, PowerObjective::p2, 0.0, 21);
        const auto fine = grid_power_oracle(ch, w_t, w_r, c, PowerObjective::p2, 0.0, 41);
        CHECK(fine.best_value >= coarse.best_value);
        CHECK(coarse.samples == 21 * 21);
        CHECK(fine.resolution == doctest::Approx(coarse.resolution / 2));
    }
    SUBCASE("unreachable target reports nothing found") {
        const auto rep = grid_power_oracle(ch, w_t, w_r, c, PowerObjective::p1, 1e12, 11);
        CHECK_FALSE(rep.found());
        CHECK(std::isinf(rep.best_value));
        CHECK(rep.best_value < 0.0);
    }
    SUBCASE("best point is consistent with the reported value") {
        const auto rep = grid_power_oracle(ch, w_t, w_r, c, PowerObjective::p2, 0.0, 31);
        REQUIRE(rep.best_point.size() == 2);
        const auto s = sinr_pair(ch, w_t, w_r, rep.best_point[0], rep.best_point[1]);
        CHECK(rate_of(s.gamma_a) + rate_of(s.gamma_b) == doctest::Approx(rep.best_value).epsilon(1e-14));
    }
}

TEST_CASE("Sampled beamformer oracle") {
    const SystemConfig c;
    const auto ch = channels(12);
    const CVec w_r = receive_combiner(ch, 0.5);
    const BeamformerTask task{c.power_a, c.power_b, c.power_relay, PowerObjective::p2, 0.0};
    SUBCASE("reproducible and blind to the combiner's global phase") {
        const auto a = sampled_beamformer_oracle(ch, w_r, task, 2000, 1);
        const auto b = sampled_beamformer_oracle(ch, w_r, task, 2000, 1);
        CHECK(a.best_value == b.best_value);
        const auto rotated = sampled_beamformer_oracle(ch, std::polar(1.0, 0.9) * w_r, task, 2000, 1);
        CHECK(rotated.best_value == doctest::Approx(a.best_value).epsilon(1e-6));
    }
    SUBCASE("best point is a feasible ZF beamformer at the full budget") {
        const auto rep = sampled_beamformer_oracle(ch, w_r, task, 2000, 2);
        REQUIRE(rep.found());
        CVec w_t(ch.tx_antennas());
        for (int i = 0; i < w_t.size(); ++i) {
            w_t(i) = cdouble(rep.best_point[2 * i], rep.best_point[2 * i + 1]);
        }
        CHECK(zf_residual(ch, w_t, w_r) <= 1e-9);
        CHECK(relay_output_power(ch, w_t, w_r, c.power_a, c.power_b) ==
              doctest::Approx(c.power_relay).epsilon(1e-10));
        const auto s = sinr_pair(ch, w_t, w_r, c.power_a, c.power_b);
        CHECK(rate_of(s.gamma_a) + rate_of(s.gamma_b) == doctest::Approx(rep.best_value).epsilon(1e-12));
    }
    SUBCASE("p1 results satisfy B's target") {
        BeamformerTask p1 = task;
        p1.objective = PowerObjective::p1;
        p1.gamma_b = 1.0;
        const auto rep = sampled_beamformer_oracle(ch, w_r, p1, 2000, 3);
        REQUIRE(rep.found());
        CVec w_t(ch.tx_antennas());
        for (int i = 0; i < w_t.size(); ++i) {
            w_t(i) = cdouble(rep.best_point[2 * i], rep.best_point[2 * i + 1]);
        }
        CHECK(sinr_pair(ch, w_t, w_r, c.power_a, c.power_b).gamma_b >= 1.0);
    }
}

TEST_CASE("DC grid oracle") {
    const auto ch = channels(15);
    const CVec w_r = receive_combiner(ch, 0.5);
    CHECK_THROWS_AS(dc_grid_oracle(ch, w_r, {10.0, 10.0, 1.0, 0.0, 0.0}, 1), Error);
    const auto coarse = dc_grid_oracle(ch, w_r, {10.0, 10.0, 1.0, 0.5, 0.5}, 20);
    const auto fine = dc_grid_oracle(ch, w_r, {10.0, 10.0, 1.0, 0.5, 0.5}, 80);
    REQUIRE(coarse.found());
    CHECK(coarse.best_point.size() == 2);
    CHECK(fine.best_value >= coarse.best_value - 1e-9);
    CHECK(fine.samples > coarse.samples);
}

TEST_CASE("Grid trailing bound") {
    const SystemConfig c;
    const auto ch = channels(18);
    const CVec w_r = receive_combiner(ch, 0.5);
    const CVec w_t = 0.3 * make_transmit_geometry(ch, w_r).null_basis.col(0);
    // On a feasible node the grid cannot trail at all.
    CHECK(grid_trailing_bound(ch, w_t, w_r, c, PowerObjective::p2, 0.0, 11, 0.0, 0.0) <= 1e-12);
    const double off = grid_trailing_bound(ch, w_t, w_r, c, PowerObjective::p2, 0.0, 11, 0.3, 0.4);
    CHECK(off > 0.0);
    CHECK(grid_trailing_bound(ch, w_t, w_r, c, PowerObjective::p2, 0.0, 101, 0.3, 0.4) < off);
    CHECK(std::isinf(grid_trailing_bound(ch, w_t, w_r, c, PowerObjective::p1, 1e12, 11, 1.0, 1.0)));
}
