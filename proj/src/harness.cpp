#include "fdtwr/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "fdtwr/p1_solver.hpp"
#include "fdtwr/p2_solver.hpp"

#ifndef FDTWR_VERSION
#define FDTWR_VERSION "unknown"
#endif

namespace fdtwr::harness {

namespace {

using baselines::RatePair;

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 8> kKindNames{{
    {ExperimentKind::rate_region, "region"},
    {ExperimentKind::sumrate_vs_source_snr, "source_snr"},
    {ExperimentKind::sumrate_vs_relay_snr, "relay_snr"},
    {ExperimentKind::sumrate_vs_si, "si"},
    {ExperimentKind::sumrate_vs_antennas, "antennas"},
    {ExperimentKind::asymmetric_region, "asym_region"},
    {ExperimentKind::asymmetric_sumrate, "asym_sumrate"},
    {ExperimentKind::local_csi_sweep, "local_csi"},
}};

constexpr std::string_view kCsvHeader =
    "sweep_value,scheme,mean_RA,se_RA,mean_RB,se_RB,mean_sum,se_sum,gain_vs_hd";

constexpr std::uint64_t kLocalCsiStream = 0x6a09e667f3bcc909ULL;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string format6(double x) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6g", x);
    return buf.data();
}

// Running mean and variance (Welford), folded in trial order.
struct Accumulator {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double delta = x - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (x - mean);
    }
    double standard_error() const {
        return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    }
};

std::vector<RatePair> polyline_from(const std::vector<p1::RegionPoint>& region) {
    std::vector<RatePair> pts;
    for (const auto& rp : region) {
        if (rp.point) {
            pts.push_back({rp.point->rate_a, rp.point->rate_b});
        }
    }
    if (pts.empty()) {
        return {{0.0, 0.0}};
    }
    double max_a = 0.0;
    double max_b = 0.0;
    for (const auto& p : pts) {
        max_a = std::max(max_a, p.r_a);
        max_b = std::max(max_b, p.r_b);
    }
    std::vector<RatePair> out{{max_a, 0.0}};
    out.insert(out.end(), pts.begin(), pts.end());
    out.push_back({0.0, max_b});
    return out;
}

// Exact axes at 0 and 90 degrees.
std::array<double, 2> ray_direction(double angle_deg) {
    if (angle_deg == 0.0) {
        return {1.0, 0.0};
    }
    if (angle_deg == 90.0) {
        return {0.0, 1.0};
    }
    const double theta = angle_deg * std::numbers::pi / 180.0;
    return {std::cos(theta), std::sin(theta)};
}

std::vector<SchemeId> evaluated_schemes(const ExperimentSpec& spec) {
    std::vector<SchemeId> out = spec.schemes;
    if (std::find(out.begin(), out.end(), SchemeId::hd_anc) == out.end()) {
        out.push_back(SchemeId::hd_anc);
    }
    return out;
}

} // namespace

std::string_view to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

ExperimentKind kind_from_string(std::string_view name) {
    for (const auto& [k, label] : kKindNames) {
        if (label == name) {
            return k;
        }
    }
    throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

bool is_region(ExperimentKind kind) {
    return kind == ExperimentKind::rate_region || kind == ExperimentKind::asymmetric_region;
}

void ExperimentSpec::validate() const {
    base.validate();
    if (sweep.empty()) {
        throw ConfigError("experiment: sweep must not be empty");
    }
    if (schemes.empty()) {
        throw ConfigError("experiment: no schemes selected");
    }
    if (trials < 1) {
        throw ConfigError("experiment: trials must be >= 1");
    }
    if (region_points < 2) {
        throw ConfigError("experiment: region_points must be >= 2");
    }
    for (double v : sweep) {
        if (!std::isfinite(v)) {
            throw ConfigError("experiment: non-finite sweep value");
        }
        if (is_region(kind) && (v < 0.0 || v > 90.0)) {
            throw ConfigError("experiment: region ray angles must lie in [0, 90] degrees");
        }
        if (kind == ExperimentKind::sumrate_vs_antennas && (v < 2.0 || v != std::floor(v))) {
            throw ConfigError("experiment: antenna counts must be integers >= 2");
        }
    }
}

ExperimentSpec default_spec(ExperimentKind kind) {
    using enum SchemeId;
    ExperimentSpec spec;
    spec.kind = kind;
    spec.schemes = {proposed_fd, hd_anc, fd_oneway, fd_upper_bound};
    switch (kind) {
    case ExperimentKind::rate_region:
    case ExperimentKind::asymmetric_region:
        spec.sweep = {0, 15, 30, 45, 60, 75, 90};
        break;
    case ExperimentKind::sumrate_vs_source_snr:
    case ExperimentKind::asymmetric_sumrate:
        spec.sweep = {0, 5, 10, 15, 20, 25};
        break;
    case ExperimentKind::local_csi_sweep:
        spec.sweep = {0, 5, 10, 15, 20, 25, 30};
        spec.schemes = {proposed_fd, hd_anc, local_csi};
        break;
    case ExperimentKind::sumrate_vs_relay_snr:
        spec.sweep = {0, 5, 10, 15, 20};
        break;
    case ExperimentKind::sumrate_vs_si:
        spec.sweep = {-20, -15, -10, -5, 0, 5};
        break;
    case ExperimentKind::sumrate_vs_antennas:
        spec.sweep = {2, 3, 4, 5, 6};
        break;
    }
    if (kind == ExperimentKind::asymmetric_region || kind == ExperimentKind::asymmetric_sumrate) {
        spec.base.gain_br = db_to_linear(-10.0);
    }
    return spec;
}

SystemConfig config_for(const ExperimentSpec& spec, double value) {
    SystemConfig c = spec.base;
    switch (spec.kind) {
    case ExperimentKind::sumrate_vs_source_snr:
    case ExperimentKind::asymmetric_sumrate:
    case ExperimentKind::local_csi_sweep:
        c.power_a = c.power_b = db_to_linear(value);
        break;
    case ExperimentKind::sumrate_vs_relay_snr:
        c.power_relay = db_to_linear(value);
        break;
    case ExperimentKind::sumrate_vs_si:
        c.si_a = c.si_b = db_to_linear(value);
        break;
    case ExperimentKind::sumrate_vs_antennas:
        c.tx_antennas = c.rx_antennas = static_cast<int>(value);
        break;
    case ExperimentKind::rate_region:
    case ExperimentKind::asymmetric_region:
        break;
    }
    return c;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
    return splitmix64(splitmix64(master) ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
}

const Row& ResultTable::at(double sweep_value, SchemeId scheme) const {
    for (const auto& row : rows) {
        if (row.scheme == scheme && std::abs(row.sweep_value - sweep_value) <= 1e-9 * (1.0 + std::abs(sweep_value))) {
            return row;
        }
    }
    throw Error("result table has no row for scheme '" + std::string(baselines::to_string(scheme)) +
                "' at " + format6(sweep_value));
}

SchemeRates evaluate_sum_rate(SchemeId scheme, const ChannelRealization& ch,
                              const SystemConfig& config, std::uint64_t seed,
                              const OperatingPoint* proposed) {
    auto from = [](const OperatingPoint& op) { return SchemeRates{op.rate_a, op.rate_b}; };
    switch (scheme) {
    case SchemeId::proposed_fd:
        return from(proposed ? *proposed : p2::max_sum_rate(ch, config));
    case SchemeId::hd_anc:
        return from(baselines::hd_anc_sum_rate(ch, config));
    case SchemeId::fd_oneway: {
        const auto r = baselines::fd_oneway_rates(ch, config);
        return {0.5 * r.r_a, 0.5 * r.r_b};
    }
    case SchemeId::fd_upper_bound:
        return from(baselines::upper_bound_sum_rate(ch, config, proposed));
    case SchemeId::local_csi:
        return from(baselines::local_csi_sum_rate(ch, config, seed));
    }
    throw Error("evaluate_sum_rate: unknown scheme");
}

std::vector<RatePair> region_boundary(SchemeId scheme, const ChannelRealization& ch,
                                      const SystemConfig& config, int n_points,
                                      std::uint64_t seed) {
    switch (scheme) {
    case SchemeId::proposed_fd:
        return polyline_from(p1::rate_region(ch, n_points, config));
    case SchemeId::hd_anc:
        return polyline_from(baselines::hd_anc_region(ch, n_points, config));
    case SchemeId::fd_upper_bound:
        return polyline_from(baselines::upper_bound_region(ch, n_points, config));
    case SchemeId::fd_oneway: {
        const auto r = baselines::fd_oneway_rates(ch, config);
        return {{r.r_a, 0.0}, {0.0, r.r_b}};
    }
    case SchemeId::local_csi: {
        const auto op = baselines::local_csi_sum_rate(ch, config, seed);
        return {{op.rate_a, 0.0}, {op.rate_a, op.rate_b}, {0.0, op.rate_b}};
    }
    }
    throw Error("region_boundary: unknown scheme");
}

double ray_distance(const std::vector<RatePair>& boundary, double angle_deg) {
    const auto [c, s] = ray_direction(angle_deg);
    auto cross = [](double ax, double ay, double bx, double by) { return ax * by - ay * bx; };
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < boundary.size(); ++i) {
        const auto& p = boundary[i];
        const double ex = boundary[i + 1].r_a - p.r_a;
        const double ey = boundary[i + 1].r_b - p.r_b;
        const double denom = cross(c, s, ex, ey);
        if (std::abs(denom) <= 1e-15 * (std::abs(ex) + std::abs(ey))) {
            continue;
        }
        const double rho = cross(p.r_a, p.r_b, ex, ey) / denom;
        const double u = cross(p.r_a, p.r_b, c, s) / denom;
        if (u >= -1e-12 && u <= 1.0 + 1e-12 && rho >= 0.0) {
            best = std::max(best, rho);
        }
    }
    return best;
}

ResultTable run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto schemes = evaluated_schemes(spec);
    const std::size_t n_values = spec.sweep.size();
    const std::size_t n_schemes = schemes.size();
    const auto trials = static_cast<std::size_t>(spec.trials);

    // samples[t][v][s]
    std::vector<std::vector<std::vector<SchemeRates>>> samples(
        trials, std::vector<std::vector<SchemeRates>>(n_values, std::vector<SchemeRates>(n_schemes)));

    auto run_trial = [&](std::size_t t) {
        const std::uint64_t channel_seed = trial_seed(spec.seed, t);
        const std::uint64_t local_seed = trial_seed(spec.seed ^ kLocalCsiStream, t);
        if (is_region(spec.kind)) {
            const auto ch = sample_channels(spec.base, channel_seed);
            for (std::size_t s = 0; s < n_schemes; ++s) {
                const auto boundary = region_boundary(schemes[s], ch, spec.base, spec.region_points, local_seed);
                for (std::size_t v = 0; v < n_values; ++v) {
                    const double rho = ray_distance(boundary, spec.sweep[v]);
                    const auto dir = ray_direction(spec.sweep[v]);
                    samples[t][v][s] = {rho * dir[0], rho * dir[1]};
                }
            }
            return;
        }
        for (std::size_t v = 0; v < n_values; ++v) {
            const auto config = config_for(spec, spec.sweep[v]);
            const auto ch = sample_channels(config, channel_seed);
            std::optional<OperatingPoint> proposed;
            if (std::ranges::any_of(schemes, [](SchemeId s) {
                    return s == SchemeId::proposed_fd || s == SchemeId::fd_upper_bound;
                })) {
                proposed = p2::max_sum_rate(ch, config);
            }
            for (std::size_t s = 0; s < n_schemes; ++s) {
                samples[t][v][s] =
                    evaluate_sum_rate(schemes[s], ch, config, local_seed, proposed ? &*proposed : nullptr);
            }
        }
    };

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const auto jobs = static_cast<std::size_t>(spec.jobs > 0 ? spec.jobs : static_cast<int>(hw));
    spdlog::info("running {} ({} trials, {} sweep values, {} workers)", to_string(spec.kind),
                 spec.trials, n_values, std::min(jobs, trials));

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < trials; t = next++) {
            try {
                run_trial(t);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = trials;
                return;
            }
            const std::size_t finished = ++done;
            if (finished % std::max<std::size_t>(1, trials / 10) == 0) {
                spdlog::debug("{}/{} trials", finished, trials);
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t i = 1; i < std::min(jobs, trials); ++i) {
            pool.emplace_back(worker);
        }
        worker();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    ResultTable table;
    const std::size_t hd_index = static_cast<std::size_t>(
        std::find(schemes.begin(), schemes.end(), SchemeId::hd_anc) - schemes.begin());
    for (std::size_t v = 0; v < n_values; ++v) {
        std::vector<std::array<Accumulator, 3>> acc(n_schemes);
        for (std::size_t t = 0; t < trials; ++t) {
            for (std::size_t s = 0; s < n_schemes; ++s) {
                const auto& x = samples[t][v][s];
                acc[s][0].add(x.r_a);
                acc[s][1].add(x.r_b);
                acc[s][2].add(x.r_a + x.r_b);
            }
        }
        const double hd_sum = acc[hd_index][2].mean;
        for (std::size_t s = 0; s < spec.schemes.size(); ++s) {
            const auto& a = acc[s];
            table.rows.push_back({spec.sweep[v], schemes[s], a[0].mean, a[0].standard_error(), a[1].mean,
                                  a[1].standard_error(), a[2].mean, a[2].standard_error(),
                                  hd_sum > 0.0 ? a[2].mean / hd_sum : 0.0});
        }
    }

    table.metadata = {
        {"spec", spec_to_json(spec)},
        {"seed", spec.seed},
        {"code_version", FDTWR_VERSION},
        {"gain_definition", "ratio of mean sum rates, scheme / hd"},
        {"sweep_unit", is_region(spec.kind) ? "ray angle in degrees; rates are mean ray intersections"
                       : spec.kind == ExperimentKind::sumrate_vs_antennas ? "antennas (M_T = M_R)"
                                                                          : "dB"},
    };
    return table;
}

Format format_from_string(std::string_view name) {
    if (name == "csv") {
        return Format::csv;
    }
    if (name == "json") {
        return Format::json;
    }
    throw ConfigError("unknown output format '" + std::string(name) + "'");
}

std::string to_csv(const ResultTable& table) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : table.rows) {
        out << format6(r.sweep_value) << ',' << baselines::to_string(r.scheme) << ',' << format6(r.mean_ra)
            << ',' << format6(r.se_ra) << ',' << format6(r.mean_rb) << ',' << format6(r.se_rb) << ','
            << format6(r.mean_sum) << ',' << format6(r.se_sum) << ',' << format6(r.gain_vs_hd) << '\n';
    }
    return out.str();
}

nlohmann::json to_json(const ResultTable& table) {
    auto rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({
            {"sweep_value", r.sweep_value},
            {"scheme", baselines::to_string(r.scheme)},
            {"mean_RA", r.mean_ra},
            {"se_RA", r.se_ra},
            {"mean_RB", r.mean_rb},
            {"se_RB", r.se_rb},
            {"mean_sum", r.mean_sum},
            {"se_sum", r.se_sum},
            {"gain_vs_hd", r.gain_vs_hd},
        });
    }
    return {{"metadata", table.metadata}, {"rows", rows}};
}

void emit(const ResultTable& table, Format format, const std::filesystem::path& path) {
    if (table.rows.empty()) {
        throw Error("emit: refusing to write an empty table to " + path.string());
    }
    const std::string text = format == Format::csv ? to_csv(table) : to_json(table).dump(2) + "\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("emit: cannot open " + path.string() + " for writing");
    }
    out << text;
    out.close();
    if (!out) {
        throw Error("emit: write failed for " + path.string());
    }
}

ResultTable parse_csv(std::string_view text) {
    ResultTable table;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw Error("parse_csv: unexpected header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) {
            cells.push_back(cell);
        }
        if (cells.size() != 9) {
            throw Error("parse_csv: expected 9 columns in '" + line + "'");
        }
        table.rows.push_back({std::stod(cells[0]), baselines::scheme_from_string(cells[1]), std::stod(cells[2]),
                              std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5]),
                              std::stod(cells[6]), std::stod(cells[7]), std::stod(cells[8])});
    }
    return table;
}

ResultTable parse_json(const nlohmann::json& j) {
    ResultTable table;
    table.metadata = j.value("metadata", nlohmann::json::object());
    for (const auto& r : j.at("rows")) {
        table.rows.push_back({r.at("sweep_value").get<double>(),
                              baselines::scheme_from_string(r.at("scheme").get<std::string>()),
                              r.at("mean_RA").get<double>(), r.at("se_RA").get<double>(),
                              r.at("mean_RB").get<double>(), r.at("se_RB").get<double>(),
                              r.at("mean_sum").get<double>(), r.at("se_sum").get<double>(),
                              r.at("gain_vs_hd").get<double>()});
    }
    return table;
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
    auto schemes = nlohmann::json::array();
    for (auto s : spec.schemes) {
        schemes.push_back(baselines::to_string(s));
    }
    return {
        {"kind", to_string(spec.kind)},
        {"schemes", schemes},
        {"sweep", spec.sweep},
        {"trials", spec.trials},
        {"seed", spec.seed},
        {"region_points", spec.region_points},
        {"config", spec.base},
    };
}

void apply_json(const nlohmann::json& j, ExperimentSpec& spec) {
    if (!j.is_object()) {
        throw ConfigError("experiment config must be a JSON object");
    }
    try {
        if (j.contains("kind")) {
            spec.kind = kind_from_string(j.at("kind").get<std::string>());
        }
        if (j.contains("schemes")) {
            spec.schemes.clear();
            for (const auto& s : j.at("schemes")) {
                spec.schemes.push_back(baselines::scheme_from_string(s.get<std::string>()));
            }
        }
        if (j.contains("sweep")) {
            spec.sweep = j.at("sweep").get<std::vector<double>>();
        }
        if (j.contains("trials")) {
            spec.trials = j.at("trials").get<int>();
        }
        if (j.contains("seed")) {
            spec.seed = j.at("seed").get<std::uint64_t>();
        }
        if (j.contains("region_points")) {
            spec.region_points = j.at("region_points").get<int>();
        }
        if (j.contains("jobs")) {
            spec.jobs = j.at("jobs").get<int>();
        }
        if (j.contains("config")) {
            from_json(j.at("config"), spec.base);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
}

} // namespace fdtwr::harness
