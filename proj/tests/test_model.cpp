#include "doctest.h"

#include "crashbench/model.hpp"
#include "support.hpp"

using namespace crashbench;
using testsupport::crash;
using testsupport::unit;

TEST_SUITE("model") {

TEST_CASE("severity ranks and worst injury") {
    CHECK(severity_rank(KabcoLevel::O) == 0);
    CHECK(severity_rank(KabcoLevel::K) == 4);
    CHECK_FALSE(severity_rank(KabcoLevel::Unknown).has_value());
    CHECK(worse_of(KabcoLevel::B, KabcoLevel::A) == KabcoLevel::A);
    CHECK(worse_of(KabcoLevel::Unknown, KabcoLevel::C) == KabcoLevel::C);
    CHECK(worse_of(KabcoLevel::C, KabcoLevel::Unknown) == KabcoLevel::C);
    CHECK(worst_injury({KabcoLevel::O, KabcoLevel::C, KabcoLevel::Unknown}) == KabcoLevel::C);
    CHECK(worst_injury({}) == KabcoLevel::Unknown);
    CHECK(worst_injury({KabcoLevel::Unknown, KabcoLevel::Unknown}) == KabcoLevel::Unknown);
    CHECK(worst_injury({KabcoLevel::B, KabcoLevel::K, KabcoLevel::A}) == KabcoLevel::K);
}

TEST_CASE("name parsing is case-insensitive and falls back to Unknown") {
    CHECK(parse_kabco("k") == KabcoLevel::K);
    CHECK(parse_kabco(" SuspectedSerious ") == KabcoLevel::A);
    CHECK(parse_kabco("garbage") == KabcoLevel::Unknown);
    CHECK(parse_vehicle_class("heavyvehicle") == VehicleClass::HeavyVehicle);
    CHECK(parse_vehicle_class("truck") == VehicleClass::Unknown);
    CHECK(parse_tristate("Y") == Tristate::Yes);
    CHECK(parse_tristate("false") == Tristate::No);
    CHECK(parse_tristate("") == Tristate::Unknown);
    CHECK(parse_maneuver("UTurn") == Maneuver::UTurn);
    CHECK(parse_direction("sw") == Direction::SW);
    CHECK(parse_manner("FrontToRear") == MannerOfCollision::FrontToRear);
    CHECK(parse_junction_relation("RampRelated") == JunctionRelation::RampRelated);
    CHECK(parse_functional_class("allroads") == FunctionalClass::AllRoads);
    CHECK_FALSE(parse_functional_class("Collector").has_value());
    CHECK(parse_road_class("Freeway") == RoadClass::Freeway);
    CHECK_FALSE(parse_road_class("Highway").has_value());
}

TEST_CASE("to_string round-trips through parse") {
    for (auto v : {KabcoLevel::O, KabcoLevel::C, KabcoLevel::B, KabcoLevel::A, KabcoLevel::K}) {
        CHECK(parse_kabco(to_string(v)) == v);
    }
    for (auto v : {VehicleClass::Passenger, VehicleClass::Motorcycle, VehicleClass::HeavyVehicle, VehicleClass::Cyclist,
                   VehicleClass::Pedestrian, VehicleClass::Other}) {
        CHECK(parse_vehicle_class(to_string(v)) == v);
    }
    for (auto v : {MannerOfCollision::FrontToRear, MannerOfCollision::SideswipeSameDirection, MannerOfCollision::Angle,
                   MannerOfCollision::OppositeDirection, MannerOfCollision::SingleVehicle, MannerOfCollision::Other}) {
        CHECK(parse_manner(to_string(v)) == v);
    }
}

TEST_CASE("geo areas") {
    const auto areas = default_geo_areas();
    REQUIRE(areas.size() == 5);
    CHECK_NOTHROW(validate_geo_areas(areas));
    CHECK(areas[0].contains("GA", "DeKalb"));
    CHECK(areas[0].contains("ga", " dekalb "));
    CHECK_FALSE(areas[0].contains("GA", "Cobb"));
    CHECK_FALSE(areas[2].contains("AZ", "Los Angeles"));
    CHECK(areas[4].contains("CA", "Santa Clara"));

    auto bad = areas;
    bad[1].counties.clear();
    CHECK_THROWS_AS(validate_geo_areas(bad), std::invalid_argument);
    bad = areas;
    bad.push_back(bad[0]);
    CHECK_THROWS_AS(validate_geo_areas(bad), std::invalid_argument);
}

TEST_CASE("share table") {
    PassengerShareTable t;
    t.set("AZ", FunctionalClass::Freeway, true, 0.9);
    CHECK(t.at("AZ", FunctionalClass::Freeway, true) == 0.9);
    CHECK_FALSE(t.find("AZ", FunctionalClass::Freeway, false).has_value());
    CHECK_THROWS_AS(t.at("TX", FunctionalClass::Freeway, true), MissingShare);
    CHECK_THROWS_AS(t.set("AZ", FunctionalClass::Freeway, true, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(t.set("AZ", FunctionalClass::Freeway, true, 1.2), std::invalid_argument);
    CHECK_NOTHROW(t.set("AZ", FunctionalClass::SurfaceStreet, true, 1.0));
}

TEST_CASE("record validation") {
    auto ok = crash({unit(1), unit(2)});
    CHECK(validate_record(ok).empty());

    auto kinds = [](const CrashRecord& r) {
        std::vector<ViolationKind> out;
        for (const auto& v : validate_record(r)) out.push_back(v.kind);
        return out;
    };

    auto r = ok;
    r.crash_id.clear();
    CHECK(kinds(r) == std::vector{ViolationKind::EmptyCrashId});

    r = ok;
    r.units.clear();
    r.event_sequence.clear();
    CHECK(kinds(r) == std::vector{ViolationKind::NoUnits});

    r = ok;
    r.units[1].unit_id = 1;
    r.event_sequence[0].unit_ids = {1};
    CHECK(kinds(r) == std::vector{ViolationKind::DuplicateUnitId});

    r = ok;
    r.location = LatLon{95.0, 10.0};
    CHECK(kinds(r) == std::vector{ViolationKind::LatitudeOutOfRange});
    r.location = LatLon{10.0, -181.0};
    CHECK(kinds(r) == std::vector{ViolationKind::LongitudeOutOfRange});

    r = ok;
    r.person_injuries = {KabcoLevel::O, KabcoLevel::B};
    r.worst_injury = KabcoLevel::C;
    CHECK(kinds(r) == std::vector{ViolationKind::WorstInjuryMismatch});
    r.worst_injury = KabcoLevel::B;
    CHECK(kinds(r).empty());

    r = ok;
    r.event_sequence[0].unit_ids.push_back(7);
    CHECK(kinds(r) == std::vector{ViolationKind::UnknownUnitInEvent});

    r = ok;
    r.event_sequence.push_back(ContactEvent{{2}});
    r.units[1].first_contact_event_index = 1;  // but unit 2 already appears in event 0
    CHECK(kinds(r) == std::vector{ViolationKind::FirstContactMismatch});

    r = ok;
    r.units[1].vehicle_class = VehicleClass::Pedestrian;
    r.units[1].in_transport = true;
    CHECK(kinds(r) == std::vector{ViolationKind::VulnerableUnitInTransport});
}

}  // TEST_SUITE
