#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crashbench/cohort.hpp"
#include "crashbench/ingest.hpp"
#include "crashbench/power.hpp"
#include "crashbench/rates.hpp"

namespace crashbench {

inline constexpr std::string_view kToolVersion = "crashbench 1.0.0";

struct DistributionRow {
    std::string geo;
    RoadClass road = RoadClass::SurfaceStreet;
    OutcomeLevel outcome = OutcomeLevel::PoliceReported;
    CrashType crash_type = CrashType::UnknownOther;
    double count = 0.0;
    double fraction = 0.0;
};

struct PowerGridRow {
    std::string geo;
    RoadClass road = RoadClass::SurfaceStreet;
    OutcomeLevel outcome = OutcomeLevel::PoliceReported;
    double benchmark_ipmm = 0.0;
    double effect_ratio = 0.0;
    std::optional<PowerResult> result;
    std::string error;
    std::optional<double> mc_power;  // filled when a Monte Carlo check ran
};

struct Diagnostics {
    std::vector<IngestReport> ingest;
    GeocodeSummary geocode;
    std::map<std::string, std::size_t> road_provenance;
    std::map<std::string, std::size_t> violations;  // kind -> records
    std::size_t records_total = 0;
    std::size_t records_invalid = 0;       // excluded for validation errors
    std::size_t records_out_of_scope = 0;  // outside every geo area or the study year
    std::size_t records_used = 0;
    std::map<std::string, ImputationSummary> imputation;
    std::vector<ExposureKey> missing_exposure;
    std::vector<std::string> empty_strata;  // "geo|road|outcome" without crashes
};

struct ReportMetadata {
    std::string tool_version{kToolVersion};
    int year = 0;
    std::string config_digest;
    std::map<std::string, std::string> input_digests;  // file name -> sha256
    std::map<std::string, std::string> parameters;     // name -> text value
};

struct BenchmarkReport {
    ReportMetadata metadata;
    std::vector<std::string> geo_order;  // column order of the benchmark tables
    std::vector<RateCell> rates;
    std::vector<DistributionRow> distributions;
    std::vector<PowerGridRow> power_grid;
    Diagnostics diagnostics;
};

/// Crash-type fractions for every (geo, road, outcome) with typed cells.
/// Strata whose total is zero are skipped and listed in `empty`.
std::vector<DistributionRow> build_distributions(const std::vector<RateCell>& cells,
                                                 std::vector<std::string>* empty = nullptr);

struct PowerGridOptions {
    std::vector<double> effects = kDefaultEffectRatios;
    double alpha = 0.05;
    double power = 0.8;
    QuantileSign sign = QuantileSign::Magnitude;
    std::size_t mc_trials = 0;  // 0 skips the Monte Carlo column
    std::uint64_t seed = 20240101;
    unsigned workers = 1;
};

/// One row per all-type cell with a positive rate and per effect ratio.
std::vector<PowerGridRow> build_power_grid(const std::vector<RateCell>& cells, const PowerGridOptions& options = {});

// ---------------------------------------------------------------------------
// Text forms. All number formatting is locale-independent.

/// Long format, one row per cell, doubles in shortest round-trip form.
std::string rate_table_csv(const std::vector<RateCell>& cells);
/// Inverse of rate_table_csv. Throws std::runtime_error on malformed input.
std::vector<RateCell> parse_rate_table_csv(std::istream& in);

/// "57103 (5.609)" cells, outcome rows by geo columns, for one road class.
std::string benchmark_table_csv(const std::vector<RateCell>& cells, RoadClass road,
                                const std::vector<std::string>& geo_order);
std::string format_count(double count);

std::string distribution_csv(const std::vector<DistributionRow>& rows);
std::string power_grid_csv(const std::vector<PowerGridRow>& rows);
std::string report_json(const BenchmarkReport& report);
std::string diagnostics_json(const Diagnostics& diagnostics);
std::string methodology_notes(const BenchmarkReport& report);

struct EmittedFile {
    std::string name;
    std::string sha256;
};

/// Writes every report file into `dir` (created if needed). File names carry
/// the study year. Throws std::runtime_error on I/O failure.
std::vector<EmittedFile> emit_report(const BenchmarkReport& report, const std::filesystem::path& dir);

std::string sha256_hex(std::string_view data);
/// Throws std::runtime_error when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace crashbench
