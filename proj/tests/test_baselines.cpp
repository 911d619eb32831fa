#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fdtwr/baselines.hpp"
#include "fdtwr/p2_solver.hpp"
#include "support.hpp"

using namespace fdtwr;
using namespace fdtwr::baselines;
using fdtwr::testing::channels;
using fdtwr::testing::rel_diff;
using fdtwr::testing::uniform;

namespace {

CMat complement(const CVec& v) {
    const auto n = v.size();
    return CMat::Identity(n, n) - v * v.adjoint() / v.squaredNorm();
}

// B -> A one-way SINR from the rank-one model with A silent.
double model_sinr_to_a(const ChannelRealization& ch, const CVec& w_r_dir, const CVec& w_t_dir,
                       const SystemConfig& c) {
    const CVec w_r = w_r_dir.normalized();
    const double c_rb = std::norm(w_r.dot(ch.h_br));
    const CVec w_t = w_t_dir.normalized() * std::sqrt(c.power_relay / (c.power_b * c_rb + 1.0));
    REQUIRE(zf_residual(ch, w_t, w_r) <= 1e-9);
    REQUIRE(relay_output_power(ch, w_t, w_r, 0.0, c.power_b) == doctest::Approx(c.power_relay));
    return sinr_pair(ch, w_t, w_r, 0.0, c.power_b).gamma_a;
}

} // namespace

TEST_CASE("Scheme names round-trip") {
    for (auto id : {SchemeId::proposed_fd, SchemeId::hd_anc, SchemeId::fd_oneway, SchemeId::fd_upper_bound,
                    SchemeId::local_csi}) {
        CHECK(scheme_from_string(to_string(id)) == id);
    }
    CHECK(to_string(SchemeId::fd_oneway) == "fd2");
    CHECK_THROWS_AS(scheme_from_string("nope"), ConfigError);
}

TEST_CASE("One-way FD SINR formulas") {
    SUBCASE("unit link gains without relay loop give 1/3") {
        SystemConfig c;
        c.power_b = 1.0;
        c.power_relay = 1.0;
        auto ch = channels(1, c);
        ch.h_rr.setZero();
        ch.h_br = ch.h_br.normalized();
        ch.h_ra = ch.h_ra.normalized();
        const auto s = fd_oneway_sinrs(ch, Direction::b_to_a, c);
        CHECK(s.receive_zf == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
        CHECK(s.transmit_zf == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }
    SUBCASE("no relay loop: both ZF variants coincide") {
        auto ch = channels(2);
        ch.h_rr.setZero();
        const SystemConfig c;
        const auto s = fd_oneway_sinrs(ch, Direction::a_to_b, c);
        const double a = c.power_a * ch.h_ar.squaredNorm();
        const double b = c.power_relay * ch.h_rb.squaredNorm();
        CHECK(s.receive_zf == doctest::Approx(a * b / (a + b + 1.0)).epsilon(1e-14));
        CHECK(s.transmit_zf == doctest::Approx(s.receive_zf).epsilon(1e-14));
    }
    SUBCASE("closed forms agree with the rank-one model") {
        const SystemConfig c;
        for (std::uint64_t seed = 10; seed < 40; ++seed) {
            const auto ch = channels(seed);
            const auto s = fd_oneway_sinrs(ch, Direction::b_to_a, c);
            const CVec d_h = complement(ch.h_rr * ch.h_ra) * ch.h_br;
            const CVec b_h = complement(ch.h_rr.adjoint() * ch.h_br) * ch.h_ra;
            CHECK(rel_diff(s.receive_zf, model_sinr_to_a(ch, d_h, ch.h_ra, c)) <= 1e-10);
            CHECK(rel_diff(s.transmit_zf, model_sinr_to_a(ch, ch.h_br, b_h, c)) <= 1e-10);
        }
    }
    SUBCASE("invariant to per-channel phase rotations") {
        const SystemConfig c;
        std::mt19937_64 rng(7);
        for (std::uint64_t seed = 40; seed < 50; ++seed) {
            const auto ch = channels(seed);
            auto rot = ch;
            auto ph = [&] { return std::polar(1.0, uniform(rng, 0.0, 2.0 * std::numbers::pi)); };
            rot.h_ar *= ph();
            rot.h_br *= ph();
            rot.h_ra *= ph();
            rot.h_rb *= ph();
            rot.h_rr *= ph();
            rot.h_aa *= ph();
            rot.h_bb *= ph();
            for (auto dir : {Direction::b_to_a, Direction::a_to_b}) {
                const auto s0 = fd_oneway_sinrs(ch, dir, c);
                const auto s1 = fd_oneway_sinrs(rot, dir, c);
                CHECK(rel_diff(s0.receive_zf, s1.receive_zf) <= 1e-12);
                CHECK(rel_diff(s0.transmit_zf, s1.transmit_zf) <= 1e-12);
            }
        }
    }
}

TEST_CASE("One-way FD time sharing") {
    const SystemConfig c;
    const auto ch = channels(60);
    const auto ends = fd_oneway_rates(ch, c);
    const auto seg = fd_oneway_region(ch, 5, c);
    REQUIRE(seg.size() == 5);
    CHECK(seg.front().r_a == ends.r_a);
    CHECK(seg.front().r_b == 0.0);
    CHECK(seg.back().r_a == 0.0);
    CHECK(seg.back().r_b == ends.r_b);
    CHECK(seg[2].r_a == doctest::Approx(ends.r_a / 2));
    CHECK(seg[2].r_b == doctest::Approx(ends.r_b / 2));
    CHECK(fd_oneway_sum_rate(ch, c) == doctest::Approx((ends.r_a + ends.r_b) / 2));
    CHECK_THROWS_AS(fd_oneway_region(ch, 1, c), Error);
}

TEST_CASE("Half-duplex ANC") {
    const SystemConfig c;
    SUBCASE("equals the interference-free solver with fixed powers and halved rates") {
        for (std::uint64_t seed = 70; seed < 75; ++seed) {
            const auto ch = channels(seed);
            const auto hd = hd_anc_sum_rate(ch, c);
            const auto ref = p2::max_sum_rate(strip_self_interference(ch), c, {false, 1.0});
            CHECK(hd.sum_rate() == doctest::Approx(0.5 * ref.sum_rate()).epsilon(1e-12));
            CHECK(hd.powers.p_a == c.power_a);
            CHECK(hd.powers.p_b == c.power_b);
        }
    }
    SUBCASE("rates carry exactly the 1/2 pre-log") {
        const auto hd = hd_anc_sum_rate(channels(76), c);
        CHECK(hd.prelog == 0.5);
        CHECK(std::exp2(2.0 * hd.rate_a) - 1.0 == doctest::Approx(hd.gamma_a).epsilon(1e-12));
        CHECK(std::exp2(2.0 * hd.rate_b) - 1.0 == doctest::Approx(hd.gamma_b).epsilon(1e-12));
    }
    SUBCASE("r_B = 0 endpoint") {
        const auto ch = channels(77);
        const auto pt = hd_anc_region_point(ch, 0.0, c);
        REQUIRE(pt.feasible());
        const auto s = sinr_pair(strip_self_interference(ch), pt->beamformer.w_t, pt->beamformer.w_r,
                                 c.power_a, c.power_b);
        CHECK(pt->rate_a == doctest::Approx(0.5 * std::log2(1.0 + s.gamma_a)).epsilon(1e-12));
    }
    SUBCASE("region targets are met in the halved rate domain") {
        const auto ch = channels(78);
        const auto region = hd_anc_region(ch, 5, c);
        for (const auto& pt : region) {
            if (pt.point.feasible()) {
                CHECK(pt.point->rate_b >= pt.r_b_target - 1e-6);
            }
        }
    }
}

TEST_CASE("Upper bound and local CSI ordering") {
    const SystemConfig c;
    SUBCASE("upper bound equals the proposed scheme when the loop is already zero") {
        auto ch = channels(80);
        ch.h_rr.setZero();
        CHECK(upper_bound_sum_rate(ch, c).sum_rate() == p2::max_sum_rate(ch, c).sum_rate());
    }
    SUBCASE("per trial: upper bound >= proposed >= local CSI") {
        for (std::uint64_t seed = 81; seed < 111; ++seed) {
            const auto ch = channels(seed);
            const double ub = upper_bound_sum_rate(ch, c).sum_rate();
            const double prop = p2::max_sum_rate(ch, c).sum_rate();
            const auto local = local_csi_sum_rate(ch, c, seed);
            CHECK(ub >= prop - 1e-6);
            CHECK(prop >= local.sum_rate() - 1e-6);
            CHECK(zf_residual(ch, local.beamformer.w_t, local.beamformer.w_r) <= 1e-9);
            CHECK(local.powers.p_r == doctest::Approx(c.power_relay).epsilon(1e-8));
            CHECK(local.powers.p_a == c.power_a);
            CHECK(local.powers.p_b == c.power_b);
        }
    }
    SUBCASE("a proposed point is kept when the relaxed search does worse") {
        const auto ch = channels(112);
        auto incumbent = p2::max_sum_rate(ch, c);
        incumbent.rate_a += 100.0;
        const auto ub = upper_bound_sum_rate(ch, c, &incumbent);
        CHECK(ub.sum_rate() == incumbent.sum_rate());
        CHECK(upper_bound_sum_rate(ch, c).sum_rate() >= p2::max_sum_rate(ch, c).sum_rate());
    }
    SUBCASE("local CSI is reproducible in its seed") {
        const auto ch = channels(120);
        CHECK(local_csi_sum_rate(ch, c, 5).sum_rate() == local_csi_sum_rate(ch, c, 5).sum_rate());
        CHECK(local_csi_sum_rate(ch, c, 5).sum_rate() != local_csi_sum_rate(ch, c, 6).sum_rate());
    }
}
