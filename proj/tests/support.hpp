#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include "crashbench/model.hpp"

namespace testsupport {

inline std::filesystem::path source_dir() { return CRASHBENCH_SOURCE_DIR; }
inline std::filesystem::path fixture_dir() { return source_dir() / "data" / "fixture"; }

inline crashbench::VehicleUnit unit(int id, crashbench::VehicleClass cls = crashbench::VehicleClass::Passenger,
                                    crashbench::Maneuver maneuver = crashbench::Maneuver::Straight) {
    crashbench::VehicleUnit u;
    u.unit_id = id;
    u.vehicle_class = cls;
    u.maneuver = maneuver;
    u.in_transport = cls != crashbench::VehicleClass::Pedestrian && cls != crashbench::VehicleClass::Cyclist;
    return u;
}

// Crash with the given units, all of them in one first contact event.
inline crashbench::CrashRecord crash(std::vector<crashbench::VehicleUnit> units,
                                     crashbench::MannerOfCollision manner = crashbench::MannerOfCollision::Other,
                                     crashbench::JunctionRelation junction = crashbench::JunctionRelation::NonJunction) {
    crashbench::CrashRecord r;
    r.crash_id = "C1";
    r.state = "AZ";
    r.county = "Maricopa";
    r.year = 2023;
    r.worst_injury = crashbench::KabcoLevel::O;
    r.manner_of_collision = manner;
    r.junction_relation = junction;
    crashbench::ContactEvent ev;
    for (auto& u : units) {
        u.first_contact_event_index = 0;
        ev.unit_ids.push_back(u.unit_id);
    }
    r.units = std::move(units);
    r.event_sequence = {ev};
    return r;
}

}  // namespace testsupport
