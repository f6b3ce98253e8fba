#include "crashbench/taxonomy.hpp"

#include <algorithm>
#include <bit>
#include <optional>

#include "crashbench/text.hpp"

namespace crashbench {

namespace {

bool is_vehicle(const VehicleUnit& u) {
    return u.vehicle_class != VehicleClass::Pedestrian && u.vehicle_class != VehicleClass::Cyclist;
}

bool is_turning_across(Maneuver m) { return m == Maneuver::TurningLeft || m == Maneuver::UTurn; }

int octant(Direction d) { return static_cast<int>(d); }

struct CrashView {
    const CrashRecord& record;
    const VehicleUnit& ego;
    std::optional<std::size_t> ego_first_event;
    std::vector<const VehicleUnit*> partners;
    std::size_t vehicles_in_transport = 0;
};

std::optional<std::size_t> first_event_of(const CrashRecord& record, const VehicleUnit& unit) {
    if (unit.first_contact_event_index && *unit.first_contact_event_index < record.event_sequence.size()) {
        return unit.first_contact_event_index;
    }
    for (std::size_t i = 0; i < record.event_sequence.size(); ++i) {
        const auto& ids = record.event_sequence[i].unit_ids;
        if (std::find(ids.begin(), ids.end(), unit.unit_id) != ids.end()) return i;
    }
    return std::nullopt;
}

CrashView make_view(const CrashRecord& record, const VehicleUnit& ego) {
    CrashView view{record, ego, first_event_of(record, ego), {}, 0};
    for (const auto& u : record.units) {
        if (u.in_transport && is_vehicle(u)) ++view.vehicles_in_transport;
    }
    // Partners: units sharing the ego's first contact, or every other unit
    // when there is no sequence to go by.
    const std::vector<int>* first_ids = nullptr;
    if (view.ego_first_event) first_ids = &record.event_sequence[*view.ego_first_event].unit_ids;
    for (const auto& u : record.units) {
        if (u.unit_id == ego.unit_id) continue;
        if (first_ids && std::find(first_ids->begin(), first_ids->end(), u.unit_id) == first_ids->end()) continue;
        view.partners.push_back(&u);
    }
    return view;
}

bool partner_of_class(const CrashView& v, VehicleClass c) {
    return std::any_of(v.partners.begin(), v.partners.end(), [c](const VehicleUnit* u) { return u->vehicle_class == c; });
}

bool crossing_path(const CrashView& v) {
    const auto manner = v.record.manner_of_collision;
    if (manner == MannerOfCollision::Angle) return true;
    if (manner != MannerOfCollision::OppositeDirection) return false;
    if (is_turning_across(v.ego.maneuver)) return true;
    return std::any_of(v.partners.begin(), v.partners.end(),
                       [](const VehicleUnit* u) { return is_turning_across(u->maneuver); });
}

std::optional<CrashType> apply_gate(TaxonomyGate gate, const CrashView& v, RoadClass road) {
    switch (gate) {
        case TaxonomyGate::Secondary:
            if (v.record.event_sequence.empty()) return std::nullopt;  // nothing to go by
            if (!v.ego_first_event) return CrashType::UnknownOther;
            if (*v.ego_first_event > 0) return CrashType::SecondaryCrash;
            return std::nullopt;
        case TaxonomyGate::VulnerablePartner:
            if (partner_of_class(v, VehicleClass::Pedestrian)) return CrashType::Pedestrian;
            if (partner_of_class(v, VehicleClass::Cyclist)) return CrashType::Cyclist;
            if (partner_of_class(v, VehicleClass::Motorcycle)) return CrashType::Motorcyclist;
            return std::nullopt;
        case TaxonomyGate::Intersection:
            if (road == RoadClass::SurfaceStreet && v.record.junction_relation == JunctionRelation::Intersection &&
                v.vehicles_in_transport >= 2 && crossing_path(v)) {
                return CrashType::Intersection;
            }
            return std::nullopt;
        case TaxonomyGate::SingleVehicle:
            if (v.ego.in_transport && v.vehicles_in_transport == 1) return CrashType::SingleVehicle;
            return std::nullopt;
        case TaxonomyGate::VehicleGeometry: {
            if (v.vehicles_in_transport < 2) return std::nullopt;
            switch (v.record.manner_of_collision) {
                case MannerOfCollision::FrontToRear: return CrashType::V2VFrontToRear;
                case MannerOfCollision::SideswipeSameDirection:
                case MannerOfCollision::Angle: return CrashType::V2VLateral;
                case MannerOfCollision::OppositeDirection: return CrashType::V2VOppositeDirection;
                default: break;
            }
            // Manner missing: opposing travel directions still identify a
            // head-on geometry.
            if (v.ego.travel_direction && *v.ego.travel_direction != Direction::Unknown) {
                for (const auto* p : v.partners) {
                    if (!p->travel_direction || *p->travel_direction == Direction::Unknown) continue;
                    const int diff = (octant(*v.ego.travel_direction) - octant(*p->travel_direction) + 8) % 8;
                    if (diff == 4) return CrashType::V2VOppositeDirection;
                }
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::size_t OutcomeSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

OutcomeSet classify_outcome(const CrashRecord& record) {
    OutcomeSet out;
    out.insert(OutcomeLevel::PoliceReported);
    switch (record.worst_injury) {
        case KabcoLevel::K:
            out.insert(OutcomeLevel::Fatal);
            [[fallthrough]];
        case KabcoLevel::A:
            out.insert(OutcomeLevel::SuspectedSeriousInjuryPlus);
            [[fallthrough]];
        case KabcoLevel::B:
        case KabcoLevel::C:
            out.insert(OutcomeLevel::AnyInjuryReported);
            break;
        case KabcoLevel::O:
        case KabcoLevel::Unknown:
            break;
    }
    const bool airbag = std::any_of(record.units.begin(), record.units.end(),
                                    [](const VehicleUnit& u) { return u.airbag_deployed == Tristate::Yes; });
    if (airbag) out.insert(OutcomeLevel::AnyAirbagDeployment);
    return out;
}

CrashType classify_crash_type(const CrashRecord& record, int ego_unit_id, RoadClass road,
                              const TaxonomyOptions& options) {
    const VehicleUnit* ego = record.find_unit(ego_unit_id);
    if (!ego) {
        throw UnknownEgo("unit " + std::to_string(ego_unit_id) + " is not part of crash " + record.crash_id);
    }
    if (!record.typology_available) return CrashType::UnknownOther;
    const CrashView view = make_view(record, *ego);
    for (auto gate : options.order) {
        if (auto type = apply_gate(gate, view, road)) return *type;
    }
    return CrashType::UnknownOther;
}

std::string_view to_string(OutcomeLevel level) {
    switch (level) {
        case OutcomeLevel::PoliceReported: return "PoliceReported";
        case OutcomeLevel::AnyInjuryReported: return "AnyInjuryReported";
        case OutcomeLevel::AnyAirbagDeployment: return "AnyAirbagDeployment";
        case OutcomeLevel::SuspectedSeriousInjuryPlus: return "SuspectedSeriousInjuryPlus";
        case OutcomeLevel::Fatal: return "Fatal";
    }
    return "PoliceReported";
}

std::string_view to_string(CrashType type) {
    switch (type) {
        case CrashType::V2VFrontToRear: return "V2VFrontToRear";
        case CrashType::V2VLateral: return "V2VLateral";
        case CrashType::V2VOppositeDirection: return "V2VOppositeDirection";
        case CrashType::Intersection: return "Intersection";
        case CrashType::SingleVehicle: return "SingleVehicle";
        case CrashType::Pedestrian: return "Pedestrian";
        case CrashType::Cyclist: return "Cyclist";
        case CrashType::Motorcyclist: return "Motorcyclist";
        case CrashType::SecondaryCrash: return "SecondaryCrash";
        case CrashType::UnknownOther: return "UnknownOther";
    }
    return "UnknownOther";
}

std::string_view to_string(TaxonomyGate gate) {
    switch (gate) {
        case TaxonomyGate::Secondary: return "Secondary";
        case TaxonomyGate::VulnerablePartner: return "VulnerablePartner";
        case TaxonomyGate::Intersection: return "Intersection";
        case TaxonomyGate::SingleVehicle: return "SingleVehicle";
        case TaxonomyGate::VehicleGeometry: return "VehicleGeometry";
    }
    return "Secondary";
}

std::optional<OutcomeLevel> parse_outcome_level(std::string_view s) {
    const auto key = text::upper(text::trim(s));
    for (auto level : kOutcomeLevels) {
        if (key == text::upper(to_string(level))) return level;
    }
    return std::nullopt;
}

std::optional<CrashType> parse_crash_type(std::string_view s) {
    const auto key = text::upper(text::trim(s));
    for (auto type : kCrashTypes) {
        if (key == text::upper(to_string(type))) return type;
    }
    return std::nullopt;
}

std::optional<TaxonomyGate> parse_taxonomy_gate(std::string_view s) {
    const auto key = text::upper(text::trim(s));
    for (auto gate : {TaxonomyGate::Secondary, TaxonomyGate::VulnerablePartner, TaxonomyGate::Intersection,
                      TaxonomyGate::SingleVehicle, TaxonomyGate::VehicleGeometry}) {
        if (key == text::upper(to_string(gate))) return gate;
    }
    return std::nullopt;
}

}  // namespace crashbench
