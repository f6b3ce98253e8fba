#include "crashbench/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <utility>

#include "crashbench/text.hpp"

namespace crashbench {

namespace {

template <typename Enum, std::size_t N>
Enum parse_named(std::string_view s, const std::array<std::pair<std::string_view, Enum>, N>& names,
                 Enum fallback) {
    const std::string key = text::upper(text::trim(s));
    for (const auto& [name, value] : names) {
        if (key == text::upper(name)) return value;
    }
    return fallback;
}

constexpr std::array<std::pair<std::string_view, KabcoLevel>, 11> kKabcoNames{{
    {"K", KabcoLevel::K},
    {"A", KabcoLevel::A},
    {"B", KabcoLevel::B},
    {"C", KabcoLevel::C},
    {"O", KabcoLevel::O},
    {"Fatal", KabcoLevel::K},
    {"SuspectedSerious", KabcoLevel::A},
    {"SuspectedMinor", KabcoLevel::B},
    {"Possible", KabcoLevel::C},
    {"NoInjury", KabcoLevel::O},
    {"Unknown", KabcoLevel::Unknown},
}};

constexpr std::array<std::pair<std::string_view, VehicleClass>, 7> kVehicleClassNames{{
    {"Passenger", VehicleClass::Passenger},
    {"Motorcycle", VehicleClass::Motorcycle},
    {"HeavyVehicle", VehicleClass::HeavyVehicle},
    {"Cyclist", VehicleClass::Cyclist},
    {"Pedestrian", VehicleClass::Pedestrian},
    {"Other", VehicleClass::Other},
    {"Unknown", VehicleClass::Unknown},
}};

constexpr std::array<std::pair<std::string_view, Tristate>, 7> kTristateNames{{
    {"Yes", Tristate::Yes},
    {"true", Tristate::Yes},
    {"Y", Tristate::Yes},
    {"No", Tristate::No},
    {"false", Tristate::No},
    {"N", Tristate::No},
    {"Unknown", Tristate::Unknown},
}};

constexpr std::array<std::pair<std::string_view, Maneuver>, 11> kManeuverNames{{
    {"Straight", Maneuver::Straight},
    {"TurningLeft", Maneuver::TurningLeft},
    {"TurningRight", Maneuver::TurningRight},
    {"UTurn", Maneuver::UTurn},
    {"Backing", Maneuver::Backing},
    {"LaneChange", Maneuver::LaneChange},
    {"Slowing", Maneuver::Slowing},
    {"Stopped", Maneuver::Stopped},
    {"Parked", Maneuver::Parked},
    {"Other", Maneuver::Other},
    {"Unknown", Maneuver::Unknown},
}};

constexpr std::array<std::pair<std::string_view, Direction>, 9> kDirectionNames{{
    {"N", Direction::N},
    {"NE", Direction::NE},
    {"E", Direction::E},
    {"SE", Direction::SE},
    {"S", Direction::S},
    {"SW", Direction::SW},
    {"W", Direction::W},
    {"NW", Direction::NW},
    {"Unknown", Direction::Unknown},
}};

constexpr std::array<std::pair<std::string_view, JunctionRelation>, 4> kJunctionNames{{
    {"Intersection", JunctionRelation::Intersection},
    {"NonJunction", JunctionRelation::NonJunction},
    {"RampRelated", JunctionRelation::RampRelated},
    {"Unknown", JunctionRelation::Unknown},
}};

constexpr std::array<std::pair<std::string_view, MannerOfCollision>, 7> kMannerNames{{
    {"FrontToRear", MannerOfCollision::FrontToRear},
    {"SideswipeSameDirection", MannerOfCollision::SideswipeSameDirection},
    {"Angle", MannerOfCollision::Angle},
    {"OppositeDirection", MannerOfCollision::OppositeDirection},
    {"SingleVehicle", MannerOfCollision::SingleVehicle},
    {"Other", MannerOfCollision::Other},
    {"Unknown", MannerOfCollision::Unknown},
}};

constexpr std::array<std::pair<std::string_view, FunctionalClass>, 3> kFunctionalClassNames{{
    {"Freeway", FunctionalClass::Freeway},
    {"SurfaceStreet", FunctionalClass::SurfaceStreet},
    {"AllRoads", FunctionalClass::AllRoads},
}};

constexpr std::array<std::pair<std::string_view, RoadClass>, 2> kRoadClassNames{{
    {"Freeway", RoadClass::Freeway},
    {"SurfaceStreet", RoadClass::SurfaceStreet},
}};

template <typename Enum, std::size_t N>
std::string_view name_of(Enum v, const std::array<std::pair<std::string_view, Enum>, N>& names) {
    for (const auto& [name, value] : names) {
        if (value == v) return name;
    }
    return "Unknown";
}

bool is_vulnerable(VehicleClass c) { return c == VehicleClass::Pedestrian || c == VehicleClass::Cyclist; }

}  // namespace

bool GeoArea::contains(std::string_view state_code, std::string_view county) const {
    if (text::upper(state_code) != text::upper(state)) return false;
    const auto key = text::upper(text::trim(county));
    for (const auto& c : counties) {
        if (text::upper(c) == key) return true;
    }
    return false;
}

std::vector<GeoArea> default_geo_areas() {
    return {
        {"Atlanta", "GA", {"Fulton", "DeKalb", "Clayton"}},
        {"Austin", "TX", {"Travis"}},
        {"Los Angeles", "CA", {"Los Angeles"}},
        {"Phoenix", "AZ", {"Maricopa"}},
        {"San Francisco to San Jose", "CA", {"San Francisco", "San Mateo", "Santa Clara"}},
    };
}

void validate_geo_areas(const std::vector<GeoArea>& areas) {
    std::set<std::string> names;
    for (const auto& area : areas) {
        if (area.name.empty()) throw std::invalid_argument("geo area with empty name");
        if (!names.insert(area.name).second) throw std::invalid_argument("duplicate geo area: " + area.name);
        if (area.counties.empty()) throw std::invalid_argument("geo area '" + area.name + "' has no counties");
        if (area.state.size() != 2) throw std::invalid_argument("geo area '" + area.name + "' state must be a two-letter code");
    }
}

const VehicleUnit* CrashRecord::find_unit(int id) const {
    auto it = std::find_if(units.begin(), units.end(), [id](const VehicleUnit& u) { return u.unit_id == id; });
    return it == units.end() ? nullptr : &*it;
}

void PassengerShareTable::set(const std::string& state, FunctionalClass fc, bool urban, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0)) {
        throw std::invalid_argument("passenger share for " + state + "/" + std::string(to_string(fc)) +
                                    " must be in (0, 1]");
    }
    shares_[{state, fc, urban}] = fraction;
}

std::optional<double> PassengerShareTable::find(const std::string& state, FunctionalClass fc, bool urban) const {
    auto it = shares_.find({state, fc, urban});
    if (it == shares_.end()) return std::nullopt;
    return it->second;
}

double PassengerShareTable::at(const std::string& state, FunctionalClass fc, bool urban) const {
    if (auto share = find(state, fc, urban)) return *share;
    throw MissingShare("no passenger share for (" + state + ", " + std::string(to_string(fc)) + ", " +
                       (urban ? "urban" : "rural") + ")");
}

std::optional<int> severity_rank(KabcoLevel level) {
    switch (level) {
        case KabcoLevel::O: return 0;
        case KabcoLevel::C: return 1;
        case KabcoLevel::B: return 2;
        case KabcoLevel::A: return 3;
        case KabcoLevel::K: return 4;
        case KabcoLevel::Unknown: return std::nullopt;
    }
    return std::nullopt;
}

KabcoLevel worse_of(KabcoLevel a, KabcoLevel b) {
    const auto ra = severity_rank(a);
    const auto rb = severity_rank(b);
    if (!ra) return b;
    if (!rb) return a;
    return *ra >= *rb ? a : b;
}

KabcoLevel worst_injury(const std::vector<KabcoLevel>& persons) {
    KabcoLevel worst = KabcoLevel::Unknown;
    for (auto level : persons) worst = worse_of(worst, level);
    return worst;
}

std::vector<Violation> validate_record(const CrashRecord& record) {
    std::vector<Violation> out;
    auto add = [&out](ViolationKind kind, std::string field, std::string rule) {
        out.push_back({kind, std::move(field), std::move(rule)});
    };

    if (record.crash_id.empty()) add(ViolationKind::EmptyCrashId, "crash_id", "must be non-empty");
    if (record.units.empty()) add(ViolationKind::NoUnits, "units", "at least one unit required");

    std::set<int> ids;
    for (const auto& unit : record.units) {
        if (!ids.insert(unit.unit_id).second) {
            add(ViolationKind::DuplicateUnitId, "units.unit_id", "duplicate unit id " + std::to_string(unit.unit_id));
        }
        if (is_vulnerable(unit.vehicle_class) && unit.in_transport) {
            add(ViolationKind::VulnerableUnitInTransport, "units.in_transport",
                "pedestrian/cyclist unit " + std::to_string(unit.unit_id) + " cannot be an in-transport vehicle");
        }
    }

    if (record.location) {
        const auto& loc = *record.location;
        if (!(loc.lat >= -90.0 && loc.lat <= 90.0)) add(ViolationKind::LatitudeOutOfRange, "location.lat", "must be in [-90, 90]");
        if (!(loc.lon >= -180.0 && loc.lon <= 180.0)) add(ViolationKind::LongitudeOutOfRange, "location.lon", "must be in [-180, 180]");
    }

    if (!record.person_injuries.empty() && worst_injury(record.person_injuries) != KabcoLevel::Unknown &&
        worst_injury(record.person_injuries) != record.worst_injury) {
        add(ViolationKind::WorstInjuryMismatch, "worst_injury", "must equal the worst person-level injury");
    }

    for (std::size_t i = 0; i < record.event_sequence.size(); ++i) {
        const auto& ev = record.event_sequence[i];
        for (int id : ev.unit_ids) {
            if (!ids.count(id)) {
                add(ViolationKind::UnknownUnitInEvent, "event_sequence",
                    "event " + std::to_string(i) + " references unknown unit " + std::to_string(id));
            }
        }
    }
    for (const auto& unit : record.units) {
        if (!unit.first_contact_event_index || record.event_sequence.empty()) continue;
        const std::size_t idx = *unit.first_contact_event_index;
        bool ok = idx < record.event_sequence.size();
        if (ok) {
            const auto& ids_at = record.event_sequence[idx].unit_ids;
            ok = std::find(ids_at.begin(), ids_at.end(), unit.unit_id) != ids_at.end();
            for (std::size_t j = 0; ok && j < idx; ++j) {
                const auto& earlier = record.event_sequence[j].unit_ids;
                ok = std::find(earlier.begin(), earlier.end(), unit.unit_id) == earlier.end();
            }
        }
        if (!ok) {
            add(ViolationKind::FirstContactMismatch, "units.first_contact_event_index",
                "unit " + std::to_string(unit.unit_id) + " does not first appear at the stated event");
        }
    }
    return out;
}

std::string_view to_string(KabcoLevel v) {
    switch (v) {
        case KabcoLevel::K: return "K";
        case KabcoLevel::A: return "A";
        case KabcoLevel::B: return "B";
        case KabcoLevel::C: return "C";
        case KabcoLevel::O: return "O";
        case KabcoLevel::Unknown: return "Unknown";
    }
    return "Unknown";
}
std::string_view to_string(VehicleClass v) { return name_of(v, kVehicleClassNames); }
std::string_view to_string(Tristate v) { return v == Tristate::Yes ? "Yes" : v == Tristate::No ? "No" : "Unknown"; }
std::string_view to_string(Maneuver v) { return name_of(v, kManeuverNames); }
std::string_view to_string(Direction v) { return name_of(v, kDirectionNames); }
std::string_view to_string(JunctionRelation v) { return name_of(v, kJunctionNames); }
std::string_view to_string(MannerOfCollision v) { return name_of(v, kMannerNames); }
std::string_view to_string(FunctionalClass v) { return name_of(v, kFunctionalClassNames); }
std::string_view to_string(RoadClass v) { return name_of(v, kRoadClassNames); }

std::string_view to_string(ViolationKind v) {
    switch (v) {
        case ViolationKind::EmptyCrashId: return "EmptyCrashId";
        case ViolationKind::NoUnits: return "NoUnits";
        case ViolationKind::DuplicateUnitId: return "DuplicateUnitId";
        case ViolationKind::LatitudeOutOfRange: return "LatitudeOutOfRange";
        case ViolationKind::LongitudeOutOfRange: return "LongitudeOutOfRange";
        case ViolationKind::WorstInjuryMismatch: return "WorstInjuryMismatch";
        case ViolationKind::UnknownUnitInEvent: return "UnknownUnitInEvent";
        case ViolationKind::FirstContactMismatch: return "FirstContactMismatch";
        case ViolationKind::VulnerableUnitInTransport: return "VulnerableUnitInTransport";
    }
    return "Unknown";
}

KabcoLevel parse_kabco(std::string_view s) { return parse_named(s, kKabcoNames, KabcoLevel::Unknown); }
VehicleClass parse_vehicle_class(std::string_view s) { return parse_named(s, kVehicleClassNames, VehicleClass::Unknown); }
Tristate parse_tristate(std::string_view s) { return parse_named(s, kTristateNames, Tristate::Unknown); }
Maneuver parse_maneuver(std::string_view s) { return parse_named(s, kManeuverNames, Maneuver::Unknown); }
Direction parse_direction(std::string_view s) { return parse_named(s, kDirectionNames, Direction::Unknown); }
JunctionRelation parse_junction_relation(std::string_view s) {
    return parse_named(s, kJunctionNames, JunctionRelation::Unknown);
}
MannerOfCollision parse_manner(std::string_view s) { return parse_named(s, kMannerNames, MannerOfCollision::Unknown); }

std::optional<FunctionalClass> parse_functional_class(std::string_view s) {
    const std::string key = text::upper(text::trim(s));
    for (const auto& [name, value] : kFunctionalClassNames) {
        if (key == text::upper(name)) return value;
    }
    return std::nullopt;
}

std::optional<RoadClass> parse_road_class(std::string_view s) {
    const std::string key = text::upper(text::trim(s));
    for (const auto& [name, value] : kRoadClassNames) {
        if (key == text::upper(name)) return value;
    }
    return std::nullopt;
}

}  // namespace crashbench
