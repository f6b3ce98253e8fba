#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "crashbench/cohort.hpp"
#include "crashbench/ingest.hpp"
#include "crashbench/power.hpp"
#include "crashbench/rates.hpp"
#include "crashbench/report.hpp"
#include "crashbench/roadclass.hpp"

namespace crashbench {

/// A referenced input file is absent. Counts as a configuration error.
class MissingInput : public ConfigError {
public:
    explicit MissingInput(std::filesystem::path path)
        : ConfigError("input file not found: " + path.string()), path_(std::move(path)) {}
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

struct CrashSourceSpec {
    std::string name;
    std::filesystem::path mapping;
    std::filesystem::path crashes;
    std::optional<std::filesystem::path> units;
    std::optional<std::filesystem::path> persons;
};

struct VmtSourceSpec {
    std::filesystem::path mapping;
    std::filesystem::path file;
};

struct RunParameters {
    double threshold_m = 400.0;
    double underreport_fraction = kDefaultUnderreportFraction;
    double alpha = 0.05;
    double power = 0.8;
    double confidence = 0.95;
    std::vector<double> effects = kDefaultEffectRatios;
    std::uint64_t seed = 20240101;
    unsigned workers = 1;
    std::size_t mc_trials = 0;
    ProximityScope proximity_scope = ProximityScope::NameMatchedRoute;
    ImputationScope imputation_scope = ImputationScope::PerGeoArea;
    QuantileSign quantile_sign = QuantileSign::Magnitude;
    TaxonomyOptions taxonomy;

    /// Throws ConfigError for values outside their documented ranges.
    void validate() const;
};

struct RunConfig {
    std::filesystem::path base_dir;  // relative paths resolve against this
    std::filesystem::path config_file;
    int year = 0;
    std::vector<GeoArea> geo_areas = default_geo_areas();
    std::vector<CrashSourceSpec> sources;
    std::vector<VmtSourceSpec> vmt;
    std::filesystem::path segments;
    std::optional<std::filesystem::path> aliases;
    std::optional<std::filesystem::path> name_patterns;
    std::filesystem::path shares;
    std::optional<std::filesystem::path> geocode_cache;
    std::filesystem::path output_dir;
    RunParameters params;

    /// Every input file, in a fixed order.
    std::vector<std::filesystem::path> input_files() const;
};

/// JSON run configuration. Throws ConfigError on malformed content and
/// MissingInput when the file itself is absent.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir);

/// Throws MissingInput for the first referenced file that does not exist,
/// ConfigError for invalid parameters.
void check_run_config(const RunConfig& config);

struct IngestStage {
    std::vector<CrashRecord> records;
    std::vector<IngestReport> reports;
    GeocodeSummary geocode;
    std::vector<VmtRecord> vmt;
};

IngestStage run_ingest(const RunConfig& config);

FreewaySegmentIndex load_segment_index(const RunConfig& config);

/// Parallel over records; output order matches input order.
std::vector<RoadClassification> classify_roads(const std::vector<CrashRecord>& records,
                                               const FreewaySegmentIndex& index, const RoadClassOptions& options,
                                               unsigned workers = 1);

/// Passenger miles per (geo, road class) for the study year.
std::map<ExposureKey, double> passenger_exposure(const std::vector<VmtRecord>& vmt, const std::vector<GeoArea>& areas,
                                                 int year, const PassengerShareTable& shares);

/// Full pipeline. `with_power` false skips the power grid.
BenchmarkReport run_pipeline(const RunConfig& config, bool with_power = true);

// ---------------------------------------------------------------------------
// ADS comparison

struct AdsObservation {
    std::string geo;
    RoadClass road = RoadClass::Freeway;
    OutcomeLevel outcome = OutcomeLevel::PoliceReported;
    double crashes = 0.0;
    double miles = 0.0;
};

/// CSV with columns geo, road, outcome, ads_crashes, ads_miles.
std::vector<AdsObservation> load_ads_observations(std::istream& in);

struct ComparisonRow {
    AdsObservation ads;
    double ads_rate_ipmm = 0.0;
    Interval ads_ci95;
    std::optional<RateCell> benchmark;
    std::optional<SafetyImpactResult> impact;
    std::string note;
};

std::vector<ComparisonRow> compare_to_benchmark(const std::vector<AdsObservation>& ads,
                                                const std::vector<RateCell>& benchmark, double level = 0.95);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

}  // namespace crashbench
