#pragma once

// Canonical crash/exposure schema. Every state-specific source is normalized
// into these types by the ingest layer; nothing downstream looks at raw
// state columns.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace crashbench {

// KABCO police injury scale. Unknown never takes part in ordering.
enum class KabcoLevel { O, C, B, A, K, Unknown };

enum class VehicleClass { Passenger, Motorcycle, HeavyVehicle, Cyclist, Pedestrian, Other, Unknown };

enum class Tristate { No, Yes, Unknown };

enum class Maneuver {
    Straight,
    TurningLeft,
    TurningRight,
    UTurn,
    Backing,
    LaneChange,
    Slowing,
    Stopped,
    Parked,
    Other,
    Unknown
};

enum class Direction { N, NE, E, SE, S, SW, W, NW, Unknown };

enum class JunctionRelation { Intersection, NonJunction, RampRelated, Unknown };

enum class MannerOfCollision {
    FrontToRear,
    SideswipeSameDirection,
    Angle,
    OppositeDirection,  // head-on and opposite-direction sideswipe
    SingleVehicle,      // fixed object, rollover, road departure, non-collision
    Other,
    Unknown
};

enum class FunctionalClass { Freeway, SurfaceStreet, AllRoads };

enum class RoadClass { Freeway, SurfaceStreet };

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct GeoArea {
    std::string name;
    std::string state;
    std::set<std::string> counties;

    bool contains(std::string_view state_code, std::string_view county) const;
};

/// Geographic areas of the reference freeway benchmarks (Atlanta, Austin,
/// Los Angeles, Phoenix, San Francisco to San Jose).
std::vector<GeoArea> default_geo_areas();

/// Throws std::invalid_argument when an area has no counties or when a
/// (state, county) pair appears twice within one area.
void validate_geo_areas(const std::vector<GeoArea>& areas);

struct VehicleUnit {
    int unit_id = 0;
    VehicleClass vehicle_class = VehicleClass::Unknown;
    bool in_transport = true;
    Tristate airbag_deployed = Tristate::Unknown;
    Maneuver maneuver = Maneuver::Unknown;
    std::optional<Direction> travel_direction;
    // 0-based index into CrashRecord::event_sequence.
    std::optional<std::size_t> first_contact_event_index;

    friend bool operator==(const VehicleUnit&, const VehicleUnit&) = default;
};

// Units touching in one contact event. May be empty for events that only
// involve non-unit objects.
struct ContactEvent {
    std::vector<int> unit_ids;

    friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

struct CrashRecord {
    std::string crash_id;
    std::string state;
    std::string county;
    int year = 0;
    std::optional<LatLon> location;
    std::string locator;  // city / county locator used for geocoding
    std::string primary_road_name;
    std::optional<std::string> secondary_road_name;
    KabcoLevel worst_injury = KabcoLevel::Unknown;
    std::vector<KabcoLevel> person_injuries;  // empty when no person table was joined
    std::vector<VehicleUnit> units;
    std::vector<ContactEvent> event_sequence;
    JunctionRelation junction_relation = JunctionRelation::Unknown;
    MannerOfCollision manner_of_collision = MannerOfCollision::Unknown;
    // False when the source has no crash-typology variables mapped; such
    // crashes always land in the unknown/other crash type.
    bool typology_available = true;

    const VehicleUnit* find_unit(int unit_id) const;

    friend bool operator==(const CrashRecord&, const CrashRecord&) = default;
};

struct VmtRecord {
    std::string state;
    std::string county;
    FunctionalClass functional_class = FunctionalClass::AllRoads;
    int year = 0;
    double vmt_miles = 0.0;

    friend bool operator==(const VmtRecord&, const VmtRecord&) = default;
};

class MissingShare : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Passenger-vehicle fraction of VMT keyed by (state, functional class,
/// urban flag).
class PassengerShareTable {
public:
    /// Throws std::invalid_argument unless 0 < fraction <= 1.
    void set(const std::string& state, FunctionalClass fc, bool urban, double fraction);
    std::optional<double> find(const std::string& state, FunctionalClass fc, bool urban) const;
    /// Throws MissingShare.
    double at(const std::string& state, FunctionalClass fc, bool urban) const;
    std::size_t size() const { return shares_.size(); }

private:
    std::map<std::tuple<std::string, FunctionalClass, bool>, double> shares_;
};

// ---------------------------------------------------------------------------
// Severity helpers

/// Severity rank O=0 .. K=4; nullopt for Unknown.
std::optional<int> severity_rank(KabcoLevel level);

/// Worst of two levels; Unknown yields the other operand.
KabcoLevel worse_of(KabcoLevel a, KabcoLevel b);

/// Crash-level worst injury over person-level injuries. Unknown entries are
/// ignored; an empty or all-Unknown list reduces to Unknown.
KabcoLevel worst_injury(const std::vector<KabcoLevel>& persons);

// ---------------------------------------------------------------------------
// Record validation

enum class ViolationKind {
    EmptyCrashId,
    NoUnits,
    DuplicateUnitId,
    LatitudeOutOfRange,
    LongitudeOutOfRange,
    WorstInjuryMismatch,
    UnknownUnitInEvent,
    FirstContactMismatch,
    VulnerableUnitInTransport,
};

struct Violation {
    ViolationKind kind;
    std::string field;
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate_record(const CrashRecord& record);

// ---------------------------------------------------------------------------
// Names. Parsing never fails: unrecognised text maps to the Unknown member.

std::string_view to_string(KabcoLevel v);
std::string_view to_string(VehicleClass v);
std::string_view to_string(Tristate v);
std::string_view to_string(Maneuver v);
std::string_view to_string(Direction v);
std::string_view to_string(JunctionRelation v);
std::string_view to_string(MannerOfCollision v);
std::string_view to_string(FunctionalClass v);
std::string_view to_string(RoadClass v);
std::string_view to_string(ViolationKind v);

KabcoLevel parse_kabco(std::string_view s);
VehicleClass parse_vehicle_class(std::string_view s);
Tristate parse_tristate(std::string_view s);
Maneuver parse_maneuver(std::string_view s);
Direction parse_direction(std::string_view s);
JunctionRelation parse_junction_relation(std::string_view s);
MannerOfCollision parse_manner(std::string_view s);
/// Functional class has no Unknown member, so this one returns nullopt.
std::optional<FunctionalClass> parse_functional_class(std::string_view s);
std::optional<RoadClass> parse_road_class(std::string_view s);

}  // namespace crashbench
