#include "doctest.h"

#include <algorithm>
#include <map>

#include "crashbench/cohort.hpp"
#include "crashbench/taxonomy.hpp"
#include "fuzz_corpus.hpp"
#include "support.hpp"

using namespace crashbench;
using testsupport::crash;
using testsupport::unit;

namespace {

bool nested(const OutcomeSet& s) {
    if (!s.contains(OutcomeLevel::PoliceReported)) return false;
    if (s.contains(OutcomeLevel::Fatal) && !s.contains(OutcomeLevel::SuspectedSeriousInjuryPlus)) return false;
    if (s.contains(OutcomeLevel::SuspectedSeriousInjuryPlus) && !s.contains(OutcomeLevel::AnyInjuryReported)) {
        return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("taxonomy") {

TEST_CASE("outcome levels nest by KABCO") {
    auto r = crash({unit(1)});
    const std::map<KabcoLevel, std::size_t> expected{{KabcoLevel::K, 4}, {KabcoLevel::A, 3}, {KabcoLevel::B, 2},
                                                     {KabcoLevel::C, 2}, {KabcoLevel::O, 1}, {KabcoLevel::Unknown, 1}};
    for (auto [level, size] : expected) {
        r.worst_injury = level;
        const auto s = classify_outcome(r);
        CHECK(s.size() == size);
        CHECK(nested(s));
        CHECK_FALSE(s.contains(OutcomeLevel::AnyAirbagDeployment));
    }
    r.units[0].airbag_deployed = Tristate::Yes;
    r.worst_injury = KabcoLevel::O;
    CHECK(classify_outcome(r).contains(OutcomeLevel::AnyAirbagDeployment));
}

TEST_CASE("vehicle geometry") {
    auto r = crash({unit(1), unit(2)}, MannerOfCollision::FrontToRear);
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::V2VFrontToRear);
    r.manner_of_collision = MannerOfCollision::SideswipeSameDirection;
    CHECK(classify_crash_type(r, 2, RoadClass::Freeway) == CrashType::V2VLateral);
    r.manner_of_collision = MannerOfCollision::Angle;
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::V2VLateral);
    r.manner_of_collision = MannerOfCollision::OppositeDirection;
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::V2VOppositeDirection);

    // no manner: travel directions four octants apart
    r.manner_of_collision = MannerOfCollision::Unknown;
    r.units[0].travel_direction = Direction::NE;
    r.units[1].travel_direction = Direction::SW;
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::V2VOppositeDirection);
    r.units[1].travel_direction = Direction::S;
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::UnknownOther);
}

TEST_CASE("single vehicle and parked partners") {
    auto r = crash({unit(1)}, MannerOfCollision::SingleVehicle);
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::SingleVehicle);

    auto parked = unit(2);
    parked.in_transport = false;
    parked.maneuver = Maneuver::Parked;
    r = crash({unit(1), parked}, MannerOfCollision::FrontToRear);
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::SingleVehicle);
}

TEST_CASE("vulnerable partners in priority order") {
    auto r = crash({unit(1), unit(2, VehicleClass::Motorcycle), unit(3, VehicleClass::Cyclist)},
                   MannerOfCollision::FrontToRear);
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::Cyclist);
    r.units.push_back(unit(4, VehicleClass::Pedestrian));
    r.event_sequence[0].unit_ids.push_back(4);
    r.units.back().first_contact_event_index = 0;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::Pedestrian);

    r = crash({unit(1), unit(2, VehicleClass::Motorcycle)}, MannerOfCollision::FrontToRear);
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::Motorcyclist);
    // the motorcyclist itself sees a passenger car partner
    CHECK(classify_crash_type(r, 2, RoadClass::Freeway) == CrashType::V2VFrontToRear);
}

TEST_CASE("partners come from the first contact event only") {
    auto r = crash({unit(1), unit(2)}, MannerOfCollision::FrontToRear);
    r.units.push_back(unit(3, VehicleClass::Pedestrian));
    r.units.back().first_contact_event_index = 1;
    r.event_sequence.push_back(ContactEvent{{2, 3}});
    r.units[1].first_contact_event_index = 0;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::V2VFrontToRear);

    // without any sequence every other unit is a partner
    r.event_sequence.clear();
    for (auto& u : r.units) u.first_contact_event_index.reset();
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::Pedestrian);
}

TEST_CASE("secondary crash and egos outside the sequence") {
    auto r = crash({unit(1), unit(2)}, MannerOfCollision::FrontToRear);
    r.units.push_back(unit(3));
    r.units.back().first_contact_event_index = 1;
    r.event_sequence.push_back(ContactEvent{{3}});
    CHECK(classify_crash_type(r, 3, RoadClass::Freeway) == CrashType::SecondaryCrash);
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::V2VFrontToRear);

    r.event_sequence[1].unit_ids.clear();
    r.units.back().first_contact_event_index.reset();
    CHECK(classify_crash_type(r, 3, RoadClass::Freeway) == CrashType::UnknownOther);
    CHECK_THROWS_AS(classify_crash_type(r, 99, RoadClass::Freeway), UnknownEgo);
}

TEST_CASE("intersection needs a surface street junction and crossing paths") {
    auto r = crash({unit(1), unit(2)}, MannerOfCollision::Angle, JunctionRelation::Intersection);
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::Intersection);
    CHECK(classify_crash_type(r, 1, RoadClass::Freeway) == CrashType::V2VLateral);

    r.manner_of_collision = MannerOfCollision::OppositeDirection;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::V2VOppositeDirection);
    r.units[1].maneuver = Maneuver::TurningLeft;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::Intersection);
    r.units[1].maneuver = Maneuver::UTurn;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::Intersection);

    r.manner_of_collision = MannerOfCollision::FrontToRear;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::V2VFrontToRear);

    r.manner_of_collision = MannerOfCollision::Angle;
    r.junction_relation = JunctionRelation::RampRelated;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::V2VLateral);
}

TEST_CASE("missing typology and configurable gate order") {
    auto r = crash({unit(1), unit(2, VehicleClass::Pedestrian)}, MannerOfCollision::FrontToRear);
    r.typology_available = false;
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::UnknownOther);

    r = crash({unit(1), unit(2, VehicleClass::Motorcycle)}, MannerOfCollision::Angle, JunctionRelation::Intersection);
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet) == CrashType::Motorcyclist);
    TaxonomyOptions order;
    order.order = {TaxonomyGate::Intersection, TaxonomyGate::VulnerablePartner};
    CHECK(classify_crash_type(r, 1, RoadClass::SurfaceStreet, order) == CrashType::Intersection);
}

TEST_CASE("names round-trip") {
    for (auto t : kCrashTypes) CHECK(parse_crash_type(to_string(t)) == t);
    for (auto o : kOutcomeLevels) CHECK(parse_outcome_level(to_string(o)) == o);
    CHECK(parse_taxonomy_gate("VehicleGeometry") == TaxonomyGate::VehicleGeometry);
    CHECK_FALSE(parse_crash_type("Rollover").has_value());
}

TEST_CASE("fuzz corpus: nesting, totality, stratum sums") {
    const auto corpus = testsupport::fuzz_corpus(2000, 99);
    std::vector<CohortInput> inputs;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& r = corpus[i];
        CHECK(nested(classify_outcome(r)));
        for (const auto& u : r.units) {
            for (auto road : {RoadClass::Freeway, RoadClass::SurfaceStreet}) {
                const auto t = classify_crash_type(r, u.unit_id, road);
                CHECK(std::find(kCrashTypes.begin(), kCrashTypes.end(), t) != kCrashTypes.end());
                if (road == RoadClass::Freeway) CHECK(t != CrashType::Intersection);
            }
        }
        inputs.push_back({&r, i % 3 ? "A" : "B", i % 2 ? RoadClass::Freeway : RoadClass::SurfaceStreet});
    }
    const auto table = tabulate_cohort(inputs);
    std::map<StratumKey, CohortCounts> sums;
    for (const auto& [key, counts] : table.cells) {
        if (!key.crash_type) continue;
        auto all = key;
        all.crash_type.reset();
        auto& s = sums[all];
        s.known_passenger += counts.known_passenger;
        s.unknown += counts.unknown;
        s.imputed_passenger += counts.imputed_passenger;
    }
    for (const auto& [key, counts] : table.cells) {
        if (key.crash_type) continue;
        CAPTURE(key.geo);
        CHECK(sums[key].known_passenger == counts.known_passenger);
        CHECK(sums[key].unknown == counts.unknown);
        CHECK(sums[key].imputed_passenger == doctest::Approx(counts.imputed_passenger));
    }
}

}  // TEST_SUITE
