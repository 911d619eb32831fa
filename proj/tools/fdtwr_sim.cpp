// Monte Carlo front end: rate regions, sum rates and parameter sweeps.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fdtwr/harness.hpp"

namespace {

using namespace fdtwr;

struct Options {
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> schemes;
    std::optional<double> snr_source;
    std::optional<double> snr_relay;
    std::optional<double> si;
    std::optional<int> antennas;
    std::optional<double> gain_br;
    std::optional<int> points;
    std::optional<int> jobs;
    std::string out;
    std::string format = "csv";
    std::string config;
    std::string kind;
    std::vector<double> values;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("fdtwr");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("FDTWR_LOG_LEVEL")) {
        spdlog::set_level(spdlog::level::from_str(env));
    }
}

void add_common(CLI::App& cmd, Options& o) {
    cmd.add_option("--trials", o.trials, "Channel realizations per sweep value")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", o.seed, "Master seed");
    cmd.add_option("--schemes,--scheme", o.schemes, "Comma list of proposed, hd, fd2, ub, localcsi")->delimiter(',');
    cmd.add_option("--snr-source", o.snr_source, "Source transmit SNR P_A = P_B [dB]");
    cmd.add_option("--snr-relay", o.snr_relay, "Relay transmit SNR P_R [dB]");
    cmd.add_option("--si", o.si, "Residual SI gain at all nodes [dB]");
    cmd.add_option("--antennas", o.antennas, "Relay antennas M_T = M_R")->check(CLI::Range(2, 64));
    cmd.add_option("--gain-br", o.gain_br, "Average gain of the B-R links [dB]");
    cmd.add_option("--points", o.points, "Rate-region boundary points")->check(CLI::Range(2, 1000));
    cmd.add_option("--jobs", o.jobs, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    cmd.add_option("--out", o.out, "Output file (default: stdout)");
    cmd.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd.add_option("--config", o.config, "JSON experiment/config file applied before flags")
        ->check(CLI::ExistingFile);
}

harness::ExperimentSpec build_spec(harness::ExperimentKind kind, const Options& o) {
    auto spec = harness::default_spec(kind);
    if (!o.config.empty()) {
        std::ifstream in(o.config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(o.config + ": " + e.what());
        }
        // A bare SystemConfig object is accepted as well as a full experiment.
        if (j.contains("config") || j.contains("kind") || j.contains("sweep")) {
            harness::apply_json(j, spec);
        } else {
            from_json(j, spec.base);
        }
    }
    auto& c = spec.base;
    if (o.trials) spec.trials = *o.trials;
    if (o.seed) spec.seed = *o.seed;
    if (o.points) spec.region_points = *o.points;
    if (o.jobs) spec.jobs = *o.jobs;
    if (o.snr_source) c.power_a = c.power_b = db_to_linear(*o.snr_source);
    if (o.snr_relay) c.power_relay = db_to_linear(*o.snr_relay);
    if (o.si) c.si_a = c.si_b = c.si_relay = db_to_linear(*o.si);
    if (o.antennas) c.tx_antennas = c.rx_antennas = *o.antennas;
    if (o.gain_br) c.gain_br = db_to_linear(*o.gain_br);
    if (!o.schemes.empty()) {
        spec.schemes.clear();
        for (const auto& s : o.schemes) {
            spec.schemes.push_back(baselines::scheme_from_string(s));
        }
    }
    if (!o.values.empty()) {
        spec.sweep = o.values;
    }
    return spec;
}

void write(const harness::ResultTable& table, const Options& o) {
    const auto format = harness::format_from_string(o.format);
    if (!o.out.empty()) {
        harness::emit(table, format, o.out);
        spdlog::info("wrote {} rows to {}", table.rows.size(), o.out);
        return;
    }
    std::cout << (format == harness::Format::csv ? harness::to_csv(table) : harness::to_json(table).dump(2) + "\n");
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Full-duplex MIMO two-way relay simulator"};
    app.require_subcommand(1);

    Options o;
    auto* region = app.add_subcommand("region", "Average rate-region boundary along rays");
    add_common(*region, o);
    region->add_option("--values", o.values, "Ray angles in degrees")->delimiter(',');

    auto* sumrate = app.add_subcommand("sumrate", "Mean sum rate at one operating point");
    add_common(*sumrate, o);

    auto* sweep = app.add_subcommand("sweep", "Sum rate over a parameter sweep");
    add_common(*sweep, o);
    sweep->add_option("--kind", o.kind,
                      "source_snr, relay_snr, si, antennas, asym_sumrate, asym_region or local_csi")
        ->required();
    sweep->add_option("--values", o.values, "Sweep values (dB, or antenna counts)")->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        harness::ExperimentSpec spec;
        if (region->parsed()) {
            spec = build_spec(harness::ExperimentKind::rate_region, o);
        } else if (sumrate->parsed()) {
            spec = build_spec(harness::ExperimentKind::sumrate_vs_source_snr, o);
            spec.sweep = {linear_to_db(spec.base.power_a)};
        } else {
            spec = build_spec(harness::kind_from_string(o.kind), o);
        }
        write(harness::run_experiment(spec), o);
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
