#include "doctest.h"

#include <sstream>

#include "crashbench/cohort.hpp"
#include "support.hpp"

using namespace crashbench;
using testsupport::crash;
using testsupport::unit;

TEST_SUITE("cohort") {

TEST_CASE("passenger filter keeps in-transport passenger and unknown units") {
    auto parked = unit(3);
    parked.in_transport = false;
    auto r = crash({unit(1), unit(2, VehicleClass::Unknown), parked, unit(4, VehicleClass::Pedestrian),
                    unit(5, VehicleClass::HeavyVehicle)});
    const auto sel = filter_in_transport_passenger(r);
    CHECK(sel.passenger_units == std::vector<int>{1});
    CHECK(sel.unknown_units == std::vector<int>{2});

    ClassHistogram h;
    add_known_classes(h, r);
    CHECK(h.size() == 2);
    CHECK(h[VehicleClass::Passenger] == 1.0);
    CHECK(h[VehicleClass::HeavyVehicle] == 1.0);
}

TEST_CASE("imputation follows the known class distribution") {
    const ClassHistogram known{{VehicleClass::Passenger, 90}, {VehicleClass::HeavyVehicle, 6},
                               {VehicleClass::Motorcycle, 4}};
    CHECK(impute_unknown_vehicles(known, 50) == doctest::Approx(45.0));
    CHECK(impute_unknown_vehicles(known, 0) == 0.0);
    CHECK(impute_unknown_vehicles({}, 0) == 0.0);
    CHECK_THROWS_AS(impute_unknown_vehicles({}, 3), ImputationBasisMissing);
    CHECK_THROWS_AS(impute_unknown_vehicles(known, -1), std::invalid_argument);

    const auto split = impute_by_class(known, 50);
    double sum = 0;
    for (const auto& [cls, n] : split) sum += n;
    CHECK(sum == doctest::Approx(50.0));
    CHECK(split.at(VehicleClass::Motorcycle) == doctest::Approx(2.0));
}

TEST_CASE("share table file and passenger miles") {
    std::istringstream in("state,functional_class,urban,share\nAZ,Freeway,urban,0.88\naz,Freeway,rural,0.8\n");
    const auto t = load_share_table(in);
    CHECK(t.at("AZ", FunctionalClass::Freeway, true) == 0.88);
    CHECK(t.at("AZ", FunctionalClass::Freeway, false) == 0.8);
    const VmtRecord v{"AZ", "Maricopa", FunctionalClass::Freeway, 2023, 1e9};
    CHECK(passenger_vmt(v, t) == doctest::Approx(0.88e9));
    CHECK(passenger_vmt(v, t, false) == doctest::Approx(0.8e9));
    CHECK_THROWS_AS(passenger_vmt({"TX", "Travis", FunctionalClass::Freeway, 2023, 1e9}, t), MissingShare);

    std::istringstream bad_class("state,functional_class,urban,share\nAZ,Arterial,urban,0.9\n");
    CHECK_THROWS_AS(load_share_table(bad_class), std::invalid_argument);
    std::istringstream bad_flag("state,functional_class,urban,share\nAZ,Freeway,maybe,0.9\n");
    CHECK_THROWS_AS(load_share_table(bad_flag), std::invalid_argument);
    std::istringstream no_column("state,functional_class,share\n");
    CHECK_THROWS_AS(load_share_table(no_column), std::invalid_argument);
    std::istringstream out_of_range("state,functional_class,urban,share\nAZ,Freeway,1,1.5\n");
    CHECK_THROWS_AS(load_share_table(out_of_range), std::invalid_argument);
}

TEST_CASE("tabulation counts units per outcome and type") {
    auto injury = crash({unit(1), unit(2, VehicleClass::Unknown)}, MannerOfCollision::FrontToRear);
    injury.worst_injury = KabcoLevel::B;
    auto heavy = crash({unit(1, VehicleClass::HeavyVehicle)}, MannerOfCollision::SingleVehicle);
    auto single = crash({unit(1)}, MannerOfCollision::SingleVehicle);

    const std::vector<CohortInput> inputs{{&injury, "Phoenix", RoadClass::Freeway},
                                          {&heavy, "Phoenix", RoadClass::Freeway},
                                          {&single, "Phoenix", RoadClass::SurfaceStreet}};
    const auto t = tabulate_cohort(inputs);

    // known: 2 passenger, 1 heavy -> 2/3 of the one unknown unit
    const auto& s = t.imputation.at("Phoenix");
    CHECK(s.unknown_units == 1);
    CHECK(s.passenger_fraction == doctest::Approx(2.0 / 3.0));

    const auto& pr = t.cells.at({"Phoenix", RoadClass::Freeway, OutcomeLevel::PoliceReported, std::nullopt});
    CHECK(pr.known_passenger == 1);
    CHECK(pr.unknown == 1);
    CHECK(pr.total() == doctest::Approx(1 + 2.0 / 3.0));
    const auto& inj = t.cells.at({"Phoenix", RoadClass::Freeway, OutcomeLevel::AnyInjuryReported, std::nullopt});
    CHECK(inj.known_passenger == 1);
    CHECK_FALSE(t.cells.count({"Phoenix", RoadClass::Freeway, OutcomeLevel::Fatal, std::nullopt}));
    const auto& ftr =
        t.cells.at({"Phoenix", RoadClass::Freeway, OutcomeLevel::PoliceReported, CrashType::V2VFrontToRear});
    CHECK(ftr.known_passenger == 1);
    CHECK(ftr.unknown == 1);
    CHECK(t.cells.at({"Phoenix", RoadClass::SurfaceStreet, OutcomeLevel::PoliceReported, CrashType::SingleVehicle})
              .known_passenger == 1);

    // per road scope: freeway has 1 passenger and 1 heavy known
    CohortOptions by_road;
    by_road.scope = ImputationScope::PerGeoAreaAndRoad;
    const auto t2 = tabulate_cohort(inputs, by_road);
    CHECK(t2.imputation.at("Phoenix|Freeway").passenger_fraction == doctest::Approx(0.5));
    CHECK(t2.imputation.at("Phoenix|SurfaceStreet").passenger_fraction == 1.0);
}

TEST_CASE("unknown units without any known basis") {
    auto r = crash({unit(1, VehicleClass::Unknown)});
    CHECK_THROWS_AS(tabulate_cohort({{&r, "Austin", RoadClass::Freeway}}), ImputationBasisMissing);
    CHECK_THROWS_AS(tabulate_cohort({{&r, "Austin", RoadClass::Freeway}}, std::vector<CrashContribution>{}),
                    std::invalid_argument);
}

}  // TEST_SUITE
