#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashbench/cohort.hpp"
#include "crashbench/model.hpp"
#include "crashbench/stats.hpp"
#include "crashbench/taxonomy.hpp"

namespace crashbench {

using stats::Interval;

class InvalidExposure : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class InvalidFraction : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class UndefinedBaseline : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};
class EmptyStratum : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultUnderreportFraction = 0.32;

/// Incidents per million miles.
double compute_rate(double count, double vmt_miles);

/// Non-fatal part scaled by 1 / (1 - u); fatal part untouched.
double adjust_underreporting(double nonfatal_count, double fatal_count, double u);

/// Exact interval for the rate, in IPMM.
Interval poisson_ci(double count, double vmt_miles, double level = 0.95);

struct SafetyImpactResult {
    double ads_rate = 0.0;
    double baseline_rate = 0.0;
    double percent_difference = 0.0;
};

/// Percent difference of the ADS rate against the baseline; negative means
/// the ADS rate is lower.
SafetyImpactResult safety_impact(double ads_rate, double baseline_rate);

struct RateCell {
    std::string geo;
    RoadClass road = RoadClass::SurfaceStreet;
    OutcomeLevel outcome = OutcomeLevel::PoliceReported;
    std::optional<CrashType> crash_type;
    double count = 0.0;
    double vmt_miles = 0.0;
    double rate_ipmm = 0.0;
    Interval ci95;

    friend bool operator==(const RateCell& a, const RateCell& b) {
        return a.geo == b.geo && a.road == b.road && a.outcome == b.outcome && a.crash_type == b.crash_type &&
               a.count == b.count && a.vmt_miles == b.vmt_miles && a.rate_ipmm == b.rate_ipmm &&
               a.ci95.low == b.ci95.low && a.ci95.high == b.ci95.high;
    }
};

RateCell make_rate_cell(std::string geo, RoadClass road, OutcomeLevel outcome, std::optional<CrashType> crash_type,
                        double count, double vmt_miles, double level = 0.95);

/// Fractions per crash type over cells sharing one (geo, road, outcome).
/// Throws EmptyStratum on a zero total and std::invalid_argument when the
/// cells mix strata or carry no crash type.
std::map<CrashType, double> crash_type_distribution(const std::vector<RateCell>& cells);

struct RateOptions {
    double underreport_fraction = kDefaultUnderreportFraction;
    double confidence = 0.95;
};

using ExposureKey = std::pair<std::string, RoadClass>;

/// One cell per stratum of the cohort table that has exposure. Any-injury
/// cells get the underreporting adjustment using the fatal cell of the same
/// stratum. Strata without exposure are reported in `missing_exposure`.
struct RateTable {
    std::vector<RateCell> cells;
    std::vector<ExposureKey> missing_exposure;
};

RateTable build_rate_cells(const CohortTable& cohort, const std::map<ExposureKey, double>& passenger_vmt,
                           const RateOptions& options = {});

/// Display form: 3 decimals, scientific below 0.001.
std::string format_ipmm(double rate);
/// Fatal cells are also quoted per billion miles.
double to_ipbm(double ipmm);

}  // namespace crashbench
