#include "fdtwr/model.hpp"

#include <random>
#include <string>

#include "fdtwr/errors.hpp"

namespace fdtwr {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

void SystemConfig::validate() const {
    if (tx_antennas < 2) {
        throw ConfigError("tx_antennas must be >= 2 so the relay can zero-force its own loop");
    }
    if (rx_antennas < 1) {
        throw ConfigError("rx_antennas must be >= 1");
    }
    for (double v : {power_a, power_b, power_relay, si_a, si_b, si_relay, gain_br}) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ConfigError("powers, SI variances and gains must be finite and >= 0");
        }
    }
    if (alpha_grid < 2) {
        throw ConfigError("alpha_grid must be >= 2");
    }
    if (grid_points < 3) {
        throw ConfigError("grid_points must be >= 3");
    }
    if (iter_max < 1) {
        throw ConfigError("iter_max must be >= 1");
    }
    if (!(conv_tol > 0.0) || !(alpha_tol > 0.0)) {
        throw ConfigError("conv_tol and alpha_tol must be > 0");
    }
}

void to_json(nlohmann::json& j, const SystemConfig& c) {
    j = nlohmann::json{
        {"tx_antennas", c.tx_antennas}, {"rx_antennas", c.rx_antennas},
        {"power_a", c.power_a},         {"power_b", c.power_b},
        {"power_relay", c.power_relay}, {"si_a", c.si_a},
        {"si_b", c.si_b},               {"si_relay", c.si_relay},
        {"gain_br", c.gain_br},         {"alpha_grid", c.alpha_grid},
        {"alpha_tol", c.alpha_tol},     {"iter_max", c.iter_max},
        {"conv_tol", c.conv_tol},       {"grid_points", c.grid_points},
    };
}

void from_json(const nlohmann::json& j, SystemConfig& c) {
    auto take = [&j](const char* key, auto& field) {
        if (j.contains(key)) {
            j.at(key).get_to(field);
        }
    };
    take("tx_antennas", c.tx_antennas);
    take("rx_antennas", c.rx_antennas);
    take("power_a", c.power_a);
    take("power_b", c.power_b);
    take("power_relay", c.power_relay);
    take("si_a", c.si_a);
    take("si_b", c.si_b);
    take("si_relay", c.si_relay);
    take("gain_br", c.gain_br);
    take("alpha_grid", c.alpha_grid);
    take("alpha_tol", c.alpha_tol);
    take("iter_max", c.iter_max);
    take("conv_tol", c.conv_tol);
    take("grid_points", c.grid_points);
}

ChannelRealization sample_channels(const SystemConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    auto draw = [&](double variance) {
        const double re = normal(rng);
        const double im = normal(rng);
        return std::sqrt(variance) * cdouble(re, im);
    };
    auto draw_vec = [&](int n, double variance) {
        CVec v(n);
        for (int i = 0; i < n; ++i) {
            v(i) = draw(variance);
        }
        return v;
    };

    const int mt = config.tx_antennas;
    const int mr = config.rx_antennas;
    ChannelRealization ch;
    // Fixed draw order so that variances only rescale the same underlying stream.
    ch.h_ar = draw_vec(mr, 1.0);
    ch.h_br = draw_vec(mr, config.gain_br);
    ch.h_ra = draw_vec(mt, 1.0);
    ch.h_rb = draw_vec(mt, config.gain_br);
    ch.h_aa = draw(config.si_a);
    ch.h_bb = draw(config.si_b);
    ch.h_rr.resize(mr, mt);
    for (int i = 0; i < mr; ++i) {
        for (int k = 0; k < mt; ++k) {
            ch.h_rr(i, k) = draw(config.si_relay);
        }
    }
    return ch;
}

namespace {

nlohmann::json complex_json(cdouble z) { return nlohmann::json::array({z.real(), z.imag()}); }

cdouble complex_from(const nlohmann::json& j) {
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json vec_json(const CVec& v) {
    auto out = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(complex_json(v(i)));
    }
    return out;
}

CVec vec_from(const nlohmann::json& j) {
    CVec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = complex_from(j.at(i));
    }
    return v;
}

} // namespace

void to_json(nlohmann::json& j, const ChannelRealization& ch) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < ch.h_rr.rows(); ++i) {
        rows.push_back(vec_json(ch.h_rr.row(i).transpose()));
    }
    j = nlohmann::json{
        {"h_ar", vec_json(ch.h_ar)},     {"h_br", vec_json(ch.h_br)},
        {"h_ra", vec_json(ch.h_ra)},     {"h_rb", vec_json(ch.h_rb)},
        {"h_aa", complex_json(ch.h_aa)}, {"h_bb", complex_json(ch.h_bb)},
        {"h_rr", rows},
    };
}

void from_json(const nlohmann::json& j, ChannelRealization& ch) {
    ch.h_ar = vec_from(j.at("h_ar"));
    ch.h_br = vec_from(j.at("h_br"));
    ch.h_ra = vec_from(j.at("h_ra"));
    ch.h_rb = vec_from(j.at("h_rb"));
    ch.h_aa = complex_from(j.at("h_aa"));
    ch.h_bb = complex_from(j.at("h_bb"));
    const auto& rows = j.at("h_rr");
    const auto mr = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index mt = ch.h_ra.size();
    if (mr != ch.h_ar.size() || ch.h_br.size() != mr || ch.h_rb.size() != mt) {
        throw DimensionError("channel JSON: inconsistent antenna dimensions");
    }
    ch.h_rr.resize(mr, mt);
    for (Eigen::Index i = 0; i < mr; ++i) {
        const CVec row = vec_from(rows.at(static_cast<std::size_t>(i)));
        if (row.size() != mt) {
            throw DimensionError("channel JSON: h_rr row length != M_T");
        }
        ch.h_rr.row(i) = row.transpose();
    }
}

namespace {

struct CombinerParts {
    CVec along; // unit(P h_AR), along h_BR
    CVec perp;  // unit(P_perp h_AR), empty if h_AR is parallel to h_BR
};

CombinerParts combiner_parts(const ChannelRealization& ch) {
    const double br2 = ch.h_br.squaredNorm();
    if (br2 == 0.0 || ch.h_ar.squaredNorm() == 0.0) {
        throw DegenerateGeometryError("receive_combiner: zero receive channel");
    }
    const CVec proj = ch.h_br * (ch.h_br.dot(ch.h_ar) / br2);
    const CVec perp = ch.h_ar - proj;
    CombinerParts parts;
    // h_AR orthogonal to h_BR: the projection vanishes, its limiting direction is h_BR.
    parts.along = proj.norm() > 1e-12 * ch.h_ar.norm() ? CVec(proj / proj.norm())
                                                       : CVec(ch.h_br / std::sqrt(br2));
    if (perp.norm() >= 1e-10 * ch.h_ar.norm()) {
        parts.perp = perp / perp.norm();
    }
    return parts;
}

} // namespace

CVec receive_combiner_unnormalized(const ChannelRealization& ch, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw Error("receive_combiner: alpha must lie in [0, 1]");
    }
    const auto parts = combiner_parts(ch);
    if (alpha == 1.0) {
        return parts.along;
    }
    if (parts.perp.size() == 0) {
        throw DegenerateGeometryError("receive_combiner: h_AR parallel to h_BR");
    }
    return alpha * parts.along + std::sqrt(1.0 - alpha) * parts.perp;
}

CVec receive_combiner(const ChannelRealization& ch, double alpha) {
    const CVec w = receive_combiner_unnormalized(ch, alpha);
    return w / w.norm();
}

CMat assemble_relay_matrix(const CVec& w_t, const CVec& w_r) {
    if (w_t.size() == 0 || w_r.size() == 0) {
        throw DimensionError("assemble_relay_matrix: empty beamformer");
    }
    return w_t * w_r.adjoint();
}

EffectiveGains effective_gains(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r) {
    if (w_t.size() != ch.h_ra.size() || w_r.size() != ch.h_ar.size()) {
        throw DimensionError("effective_gains: beamformer dimensions do not match channels");
    }
    return {std::norm(ch.h_ra.dot(w_t)), std::norm(w_r.dot(ch.h_br)), std::norm(ch.h_rb.dot(w_t)),
            std::norm(w_r.dot(ch.h_ar))};
}

SinrPair sinr_pair(const ChannelRealization& ch, const EffectiveGains& g, double p_a, double p_b) {
    const double si_a = std::norm(ch.h_aa);
    const double si_b = std::norm(ch.h_bb);
    return {p_b * g.c_at * g.c_rb / (g.c_at + p_a * si_a + 1.0),
            p_a * g.c_bt * g.c_ra / (g.c_bt + p_b * si_b + 1.0)};
}

SinrPair sinr_pair(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r, double p_a,
                   double p_b) {
    return sinr_pair(ch, effective_gains(ch, w_t, w_r), p_a, p_b);
}

SinrPair sinr_pair_general(const ChannelRealization& ch, const CMat& w, double p_a, double p_b) {
    const Eigen::RowVectorXcd ra_w = ch.h_ra.adjoint() * w;
    const Eigen::RowVectorXcd rb_w = ch.h_rb.adjoint() * w;
    const double gamma_a = p_b * std::norm((ra_w * ch.h_br).value()) /
                           (ra_w.squaredNorm() + p_a * std::norm(ch.h_aa) + 1.0);
    const double gamma_b = p_a * std::norm((rb_w * ch.h_ar).value()) /
                           (rb_w.squaredNorm() + p_b * std::norm(ch.h_bb) + 1.0);
    return {gamma_a, gamma_b};
}

double relay_output_power(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r,
                          double p_a, double p_b) {
    const double wt2 = w_t.squaredNorm();
    return p_a * wt2 * std::norm(w_r.dot(ch.h_ar)) + p_b * wt2 * std::norm(w_r.dot(ch.h_br)) + wt2;
}

double relay_output_power_general(const ChannelRealization& ch, const CMat& w, double p_a,
                                  double p_b) {
    return p_a * (w * ch.h_ar).squaredNorm() + p_b * (w * ch.h_br).squaredNorm() +
           (w * w.adjoint()).trace().real();
}

double zf_residual(const ChannelRealization& ch, const CVec& w_t, const CVec& w_r) {
    if (w_t.size() != ch.h_rr.cols() || w_r.size() != ch.h_rr.rows()) {
        throw DimensionError("zf_residual: beamformer dimensions do not match H_RR");
    }
    return std::abs(w_r.dot(ch.h_rr * w_t));
}

OperatingPoint evaluate_point(const ChannelRealization& ch, const RelayBeamformer& bf, double p_a,
                              double p_b, double prelog) {
    OperatingPoint op;
    op.beamformer = bf;
    const auto gains = effective_gains(ch, bf.w_t, bf.w_r);
    const auto sinr = sinr_pair(ch, gains, p_a, p_b);
    op.powers = {p_a, p_b, relay_output_power(ch, bf.w_t, bf.w_r, p_a, p_b)};
    op.gamma_a = sinr.gamma_a;
    op.gamma_b = sinr.gamma_b;
    op.prelog = prelog;
    op.rate_a = rate_of(sinr.gamma_a, prelog);
    op.rate_b = rate_of(sinr.gamma_b, prelog);
    return op;
}

TransmitGeometry make_transmit_geometry(const ChannelRealization& ch, const CVec& w_r) {
    TransmitGeometry geo;
    const CVec loop = ch.h_rr.adjoint() * w_r; // (w_r^H H_RR)^H
    const auto mt = ch.h_ra.size();
    geo.null_basis = loop.isZero(0.0) ? CMat(CMat::Identity(mt, mt)) : numerics::null_space_basis(loop);
    geo.a_proj = geo.null_basis.adjoint() * ch.h_ra;
    geo.b_proj = geo.null_basis.adjoint() * ch.h_rb;
    geo.a_norm2 = geo.a_proj.squaredNorm();
    geo.b_norm2 = geo.b_proj.squaredNorm();
    if (geo.a_norm2 > 0.0) {
        geo.d2 = geo.a_proj / std::sqrt(geo.a_norm2);
    }
    if (geo.b_norm2 > 0.0) {
        geo.d1 = geo.b_proj / std::sqrt(geo.b_norm2);
    }
    if (geo.d1.size() != 0 && geo.d2.size() != 0) {
        const cdouble inner = geo.d2.dot(geo.d1);
        geo.r = std::min(1.0, std::abs(inner));
        geo.phi = std::arg(inner);
    }
    geo.c_ra = std::norm(w_r.dot(ch.h_ar));
    geo.c_rb = std::norm(w_r.dot(ch.h_br));
    return geo;
}

} // namespace fdtwr
