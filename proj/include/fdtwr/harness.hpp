#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fdtwr/baselines.hpp"
#include "fdtwr/model.hpp"

namespace fdtwr::harness {

using baselines::SchemeId;

enum class ExperimentKind {
    rate_region,
    sumrate_vs_source_snr,
    sumrate_vs_relay_snr,
    sumrate_vs_si,
    sumrate_vs_antennas,
    asymmetric_region,
    asymmetric_sumrate,
    local_csi_sweep,
};

/// Short names: region, source_snr, relay_snr, si, antennas, asym_region,
/// asym_sumrate, local_csi.
std::string_view to_string(ExperimentKind kind);
ExperimentKind kind_from_string(std::string_view name);

bool is_region(ExperimentKind kind);

/// Sweep values are ray angles in degrees for region kinds, dB for the SNR and
/// SI sweeps (SI applies to both sources) and antenna counts M_T = M_R otherwise.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::sumrate_vs_source_snr;
    std::vector<SchemeId> schemes;
    std::vector<double> sweep;
    int trials = 1000;
    std::uint64_t seed = 1;
    SystemConfig base;
    int region_points = 11; // r_B targets per region boundary
    int jobs = 0;           // 0: hardware concurrency

    /// Throws ConfigError on an empty sweep or scheme list, trials < 1, bad
    /// angles or antenna counts below 2.
    void validate() const;
};

/// The standard defaults for `kind`: sweep values, schemes and, for the
/// asymmetric kinds, gain_BR = -10 dB.
ExperimentSpec default_spec(ExperimentKind kind);

/// `base` with the sweep variable set to `value`.
SystemConfig config_for(const ExperimentSpec& spec, double value);

/// Counter-based seed split; independent of the sweep value and scheme set.
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

struct Row {
    double sweep_value = 0.0;
    SchemeId scheme = SchemeId::proposed_fd;
    double mean_ra = 0.0;
    double se_ra = 0.0;
    double mean_rb = 0.0;
    double se_rb = 0.0;
    double mean_sum = 0.0;
    double se_sum = 0.0;
    double gain_vs_hd = 0.0; // ratio of mean sum rates
};

struct ResultTable {
    std::vector<Row> rows;
    nlohmann::json metadata;

    /// First row matching (value, scheme); throws Error when absent.
    const Row& at(double sweep_value, SchemeId scheme) const;
};

/// One (R_A, R_B) pair per scheme for a single realization.
struct SchemeRates {
    double r_a = 0.0;
    double r_b = 0.0;
};

/// Sum-rate evaluation of one scheme on one realization. `proposed` lets the
/// upper bound reuse an already solved proposed point.
SchemeRates evaluate_sum_rate(SchemeId scheme, const ChannelRealization& ch,
                              const SystemConfig& config, std::uint64_t seed,
                              const OperatingPoint* proposed = nullptr);

/// Boundary polyline of one scheme's rate region, from (R_A max, 0) to (0, R_B max).
std::vector<baselines::RatePair> region_boundary(SchemeId scheme, const ChannelRealization& ch,
                                                 const SystemConfig& config, int n_points,
                                                 std::uint64_t seed);

/// Distance from the origin to the farthest crossing of the ray at `angle_deg`
/// with the polyline; zero when the ray misses it.
double ray_distance(const std::vector<baselines::RatePair>& boundary, double angle_deg);

/// Deterministic in the spec, whatever the worker count.
ResultTable run_experiment(const ExperimentSpec& spec);

enum class Format { csv, json };
Format format_from_string(std::string_view name);

void emit(const ResultTable& table, Format format, const std::filesystem::path& path);
std::string to_csv(const ResultTable& table);
nlohmann::json to_json(const ResultTable& table);

ResultTable parse_csv(std::string_view text);
ResultTable parse_json(const nlohmann::json& j);

nlohmann::json spec_to_json(const ExperimentSpec& spec);
/// Keys absent from `j` keep the values already in `spec`.
void apply_json(const nlohmann::json& j, ExperimentSpec& spec);

} // namespace fdtwr::harness
