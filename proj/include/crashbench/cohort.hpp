#pragma once

#include <compare>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashbench/model.hpp"
#include "crashbench/taxonomy.hpp"

namespace crashbench {

struct UnitSelection {
    std::vector<int> passenger_units;  // in transport, class Passenger
    std::vector<int> unknown_units;    // in transport, class Unknown
};

UnitSelection filter_in_transport_passenger(const CrashRecord& record);
std::vector<UnitSelection> filter_in_transport_passenger(const std::vector<CrashRecord>& records);

/// In-transport units of known class, counted per class.
using ClassHistogram = std::map<VehicleClass, double>;

void add_known_classes(ClassHistogram& histogram, const CrashRecord& record);

class ImputationBasisMissing : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Passenger share of `unknown_count` under the known-class distribution.
double impute_unknown_vehicles(const ClassHistogram& known, double unknown_count);

/// Splits `unknown_count` over every class of the histogram; sums back to
/// unknown_count.
ClassHistogram impute_by_class(const ClassHistogram& known, double unknown_count);

/// Throws MissingShare when the (state, class, urban) key is absent.
double passenger_vmt(const VmtRecord& vmt, const PassengerShareTable& shares, bool urban = true);

/// CSV with columns state, functional_class, urban, share.
PassengerShareTable load_share_table(std::istream& in);

// ---------------------------------------------------------------------------
// Stratum counting

struct StratumKey {
    std::string geo;
    RoadClass road = RoadClass::SurfaceStreet;
    OutcomeLevel outcome = OutcomeLevel::PoliceReported;
    std::optional<CrashType> crash_type;  // nullopt = all crash types

    friend auto operator<=>(const StratumKey&, const StratumKey&) = default;
};

struct CohortCounts {
    long long known_passenger = 0;
    long long unknown = 0;
    double imputed_passenger = 0.0;

    double total() const { return static_cast<double>(known_passenger) + imputed_passenger; }
};

enum class ImputationScope { PerGeoArea, PerGeoAreaAndRoad };

struct CohortOptions {
    ImputationScope scope = ImputationScope::PerGeoArea;
    TaxonomyOptions taxonomy;
};

/// One crash already placed in a geo area and road class.
struct CohortInput {
    const CrashRecord* record = nullptr;
    std::string geo;
    RoadClass road = RoadClass::SurfaceStreet;
};

struct ImputationSummary {
    ClassHistogram known_classes;
    long long unknown_units = 0;
    double passenger_fraction = 0.0;
    double imputed_passenger = 0.0;
};

struct CohortTable {
    std::map<StratumKey, CohortCounts> cells;
    // Keyed by geo, or "geo|road" under PerGeoAreaAndRoad.
    std::map<std::string, ImputationSummary> imputation;
};

/// Per-crash contribution: the crash type of every selected unit.
struct CrashContribution {
    OutcomeSet outcomes;
    std::vector<CrashType> passenger_types;
    std::vector<CrashType> unknown_types;
};

CrashContribution classify_contribution(const CrashRecord& record, RoadClass road, const TaxonomyOptions& options);

/// Sums contributions in input order and imputes unknown units per scope.
/// `contributions` must be parallel to `inputs`. Throws
/// ImputationBasisMissing when a scope has unknown units but no known ones.
CohortTable tabulate_cohort(const std::vector<CohortInput>& inputs, const std::vector<CrashContribution>& contributions,
                            const CohortOptions& options = {});

/// Convenience overload that classifies sequentially.
CohortTable tabulate_cohort(const std::vector<CohortInput>& inputs, const CohortOptions& options = {});

std::string_view to_string(ImputationScope s);

}  // namespace crashbench
