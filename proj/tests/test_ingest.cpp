#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "crashbench/ingest.hpp"
#include "crashbench/text.hpp"
#include "support.hpp"

using namespace crashbench;

namespace {

MappingConfig mapping(const std::string& text) {
    std::istringstream in(text);
    return MappingConfig::parse(in, "test.map");
}

const char* kUnitMapping = R"(
source = test
[columns]
crash_id = CID
year = YR
county = CTY
latitude = LAT
longitude = LON
primary_road = ROAD
worst_injury = SEV
manner_of_collision = MANNER
unit_id = UNIT
maneuver = MOVE
first_contact_event = SEQ
person_injury = INJ
[constants]
state = TX
[dictionary.worst_injury]
4 = K
1 = A
5 = O
[dictionary.person_injury]
4 = K
1 = A
2 = B
5 = O
[dictionary.manner_of_collision]
20 = FrontToRear
* = Other
[derive.vehicle_class]
Pedestrian = DESC = 4
HeavyVehicle = GVWR > 10000
Passenger = BODY in {PC, PK} && GVWR empty
Passenger = BODY in {PC, PK} && GVWR <= 10000
[derive.in_transport]
false = PARKED = Y
true = DESC present
)";

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("csv reader handles quotes, BOM and delimiter detection") {
    std::istringstream in("\xEF\xBB\xBF" "a,b,c\n1,\"x, y\",\"say \"\"hi\"\"\"\n\n2,\"multi\nline\",z\n");
    text::CsvReader r(in);
    CHECK(r.header() == std::vector<std::string>{"a", "b", "c"});
    std::vector<std::string> row;
    REQUIRE(r.next(row));
    CHECK(row == std::vector<std::string>{"1", "x, y", "say \"hi\""});
    REQUIRE(r.next(row));
    CHECK(row[1] == "multi\nline");
    CHECK(r.line() == 4);
    CHECK_FALSE(r.next(row));

    std::istringstream tabs("a\tb\n1\t2\n");
    text::CsvReader t(tabs);
    t.header();
    CHECK(t.delimiter() == '\t');

    std::istringstream dup("a,a\n");
    text::CsvReader d(dup);
    CHECK_THROWS_AS(d.header(), text::CsvError);
}

TEST_CASE("mapping config parse errors name the line") {
    CHECK_THROWS_WITH_AS(mapping("[bogus]\n"), doctest::Contains("test.map:1"), ConfigError);
    CHECK_THROWS_AS(mapping("[columns]\ncrash_id\n"), ConfigError);
    CHECK_THROWS_AS(mapping("delimiter = pipe\n"), ConfigError);
    CHECK_THROWS_AS(mapping("[derive.vehicle_class]\nPassenger = BODY ~ PC\n"), ConfigError);
    CHECK_THROWS_AS(mapping("[derive.vehicle_class]\nPassenger = BODY in PC\n"), ConfigError);
    CHECK_THROWS_AS(mapping("[derive.vehicle_class]\nPassenger = GVWR > heavy\n"), ConfigError);

    auto m = mapping("[columns]\ncrash_id = ID\n");
    CHECK_THROWS_AS(m.validate(TableKind::Crash), ConfigError);
    CHECK_NOTHROW(mapping(kUnitMapping).validate(TableKind::Crash));
    CHECK_NOTHROW(mapping(kUnitMapping).validate(TableKind::Unit));
}

TEST_CASE("separate unit and person tables") {
    const auto cfg = mapping(kUnitMapping);
    std::istringstream crashes(
        "CID,YR,CTY,LAT,LON,ROAD,SEV,MANNER\n"
        "A1,2023,Travis,30.1,-97.7,IH 35,5,20\n"
        "A2,2023,Travis,0,0,LAMAR BLVD,1,99\n"
        "A2,2023,Travis,0,0,LAMAR BLVD,1,99\n"
        "A3,20x3,Travis,1,1,X,5,20\n"
        "A4,2023,Travis,1,1\n");
    std::istringstream units(
        "CID,UNIT,DESC,BODY,GVWR,PARKED,MOVE,SEQ\n"
        "A1,1,1,PC,,N,Straight,1\n"
        "A1,2,1,PK,12000,N,Stopped,1\n"
        "A1,3,1,PC,,N,Stopped,2\n"
        "A2,1,1,PC,9000,N,TurningLeft,\n"
        "A2,2,4,,,N,,\n"
        "A2,3,1,PC,,Y,Parked,\n"
        "ZZ,1,1,PC,,N,Straight,1\n"
        "A1,1,1,PC,,N,Straight,1\n");
    std::istringstream persons("CID,INJ\nA1,2\nA1,5\nA2,4\nQQ,4\n");

    const auto load = load_crash_table({&crashes, &units, &persons}, cfg);
    const auto& rep = load.report;
    REQUIRE(load.records.size() == 2);
    CHECK(rep.crashes.rows_read == 5);
    CHECK(rep.crashes.rows_used == 2);
    CHECK(rep.crashes.rows_skipped == 3);
    CHECK(rep.units.rows_used == 6);
    CHECK(rep.units.rows_skipped == 2);
    CHECK(rep.persons.rows_used == 3);
    CHECK(rep.persons.rows_skipped == 1);
    CHECK(rep.missing_location == 1);

    const auto& a1 = load.records[0];
    CHECK(a1.crash_id == "A1");
    CHECK(a1.state == "TX");
    REQUIRE(a1.location.has_value());
    CHECK(a1.location->lat == doctest::Approx(30.1));
    CHECK(a1.manner_of_collision == MannerOfCollision::FrontToRear);
    CHECK(a1.worst_injury == KabcoLevel::B);  // person level overrides the crash level O
    REQUIRE(a1.units.size() == 3);
    CHECK(a1.units[0].vehicle_class == VehicleClass::Passenger);
    CHECK(a1.units[1].vehicle_class == VehicleClass::HeavyVehicle);
    REQUIRE(a1.event_sequence.size() == 2);
    CHECK(a1.event_sequence[0].unit_ids == std::vector<int>{1, 2});
    CHECK(a1.event_sequence[1].unit_ids == std::vector<int>{3});
    CHECK(a1.units[2].first_contact_event_index == 1u);
    CHECK(validate_record(a1).empty());

    const auto& a2 = load.records[1];
    CHECK_FALSE(a2.location.has_value());  // (0, 0) placeholder
    CHECK(a2.manner_of_collision == MannerOfCollision::Other);
    CHECK(a2.worst_injury == KabcoLevel::K);
    CHECK(a2.units[0].vehicle_class == VehicleClass::Passenger);
    CHECK(a2.units[0].maneuver == Maneuver::TurningLeft);
    CHECK(a2.units[1].vehicle_class == VehicleClass::Pedestrian);
    CHECK_FALSE(a2.units[1].in_transport);
    CHECK_FALSE(a2.units[2].in_transport);
    CHECK(a2.event_sequence.empty());
}

TEST_CASE("combined crash-unit rows and explicit sequences") {
    const auto cfg = mapping(R"(
[columns]
crash_id = id
year = y
county = c
primary_road = r
unit_id = u
vehicle_class = cls
in_transport = moving
event_sequence = seq
airbag_deployed = bag
travel_direction = dir
worst_injury = sev
[constants]
state = GA
[unmapped]
crash_type
)");
    std::istringstream rows(
        "id,y,c,r,u,cls,moving,seq,bag,dir,sev\n"
        "G1,2023,Fulton,I-75,1,Passenger,Y,1+2;3,Y,N,B\n"
        "G1,2023,Fulton,I-75,2,Passenger,Y,1+2;3,,S,B\n"
        "G1,2023,Fulton,I-75,3,Motorcycle,Y,1+2;3,N,,B\n"
        "G2,2023,Fulton,MAIN ST,1,Pedestrian,Y,,,,O\n");
    const auto load = load_crash_table({&rows, nullptr, nullptr}, cfg);
    REQUIRE(load.records.size() == 2);
    const auto& g1 = load.records[0];
    REQUIRE(g1.units.size() == 3);
    CHECK_FALSE(g1.typology_available);
    CHECK(g1.event_sequence.size() == 2);
    CHECK(g1.units[2].first_contact_event_index == 1u);
    CHECK(g1.units[0].airbag_deployed == Tristate::Yes);
    CHECK(g1.units[1].airbag_deployed == Tristate::Unknown);
    CHECK(g1.units[1].travel_direction == Direction::S);
    CHECK_FALSE(g1.units[2].travel_direction.has_value());
    CHECK(load.report.unknowns.at("airbag_deployed") == 2);
    // pedestrians are never in transport, whatever the source says
    CHECK_FALSE(load.records[1].units[0].in_transport);
    CHECK(g1.worst_injury == KabcoLevel::B);
}

TEST_CASE("missing bound column is a hard error") {
    const auto cfg = mapping(kUnitMapping);
    std::istringstream crashes("CID,YR,CTY,LAT,LON,SEV,MANNER\nA1,2023,Travis,1,1,5,20\n");
    std::istringstream units("CID,UNIT,DESC,BODY,GVWR,PARKED,MOVE,SEQ\n");
    CHECK_THROWS_WITH_AS(load_crash_table({&crashes, &units, nullptr}, cfg), doctest::Contains("ROAD"), IngestError);
}

TEST_CASE("vmt tables: scale, summing and derived surface") {
    const auto cfg = mapping(R"(
[columns]
county = County
functional_class = Cat
year = Year
vmt = Miles
[constants]
state = AZ
vmt_scale = 1000
[dictionary.functional_class]
FWY = Freeway
ALL = AllRoads
)");
    std::istringstream in(
        "County,Cat,Year,Miles\n"
        "Maricopa,FWY,2023,100\n"
        "Maricopa,FWY,2023,50.5\n"
        "Maricopa,ALL,2023,400\n"
        "Maricopa,XYZ,2023,1\n"
        "Maricopa,ALL,2023,-3\n");
    const auto load = load_vmt_table(in, cfg);
    REQUIRE(load.records.size() == 2);
    CHECK(load.records[0].vmt_miles == doctest::Approx(150500.0));
    CHECK(load.report.vmt.rows_skipped == 2);

    const auto all = derive_surface_vmt(load.records);
    REQUIRE(all.size() == 3);
    CHECK(all[2].functional_class == FunctionalClass::SurfaceStreet);
    CHECK(all[2].vmt_miles == doctest::Approx(249500.0));

    std::vector<VmtRecord> bad{{"AZ", "Maricopa", FunctionalClass::AllRoads, 2023, 10.0},
                               {"AZ", "Maricopa", FunctionalClass::Freeway, 2023, 20.0}};
    CHECK_THROWS_AS(derive_surface_vmt(bad), InconsistentVmt);
    bad[1].vmt_miles = 10.0;
    CHECK_THROWS_AS(derive_surface_vmt(bad), InconsistentVmt);
}

TEST_CASE("geocode cache key and replay") {
    GeocodeRequest a{"ca", " Los  Angeles", "wilshire\tblvd", "LA|BREA"};
    CHECK(a.key() == "CA|LOS ANGELES|WILSHIRE BLVD|LA BREA");

    const auto path = std::filesystem::temp_directory_path() / "crashbench_geocode_test.tsv";
    {
        std::ofstream out(path);
        out << "# comment\n" << a.key() << "\t34.06\t-118.35\nbroken line\n";
    }
    CachedGeocoder cache(path);
    CHECK(cache.size() == 1);
    auto p = cache.geocode({"CA", "los angeles", "WILSHIRE BLVD", "la brea"});
    REQUIRE(p.has_value());
    CHECK(p->lat == 34.06);

    StubGeocoder upstream;
    GeocodeRequest b{"CA", "SAN JOSE", "MISSION ST", ""};
    upstream.add(b, {37.3, -121.9});
    CachedGeocoder forwarding(path, &upstream);
    CHECK(forwarding.geocode(b).has_value());
    CachedGeocoder reread(path);
    CHECK(reread.size() == 2);
    std::filesystem::remove(path);

    CrashRecord r1, r2;
    r1.state = "CA";
    r1.locator = "SAN JOSE";
    r1.primary_road_name = "MISSION ST";
    r2 = r1;
    r2.primary_road_name = "NOWHERE";
    const auto res = geocode_missing({r1, r2}, upstream);
    CHECK(res.summary.attempted == 2);
    CHECK(res.summary.resolved == 1);
    CHECK(res.summary.unresolved == 1);
    CHECK(res.records[0].location.has_value());
}

TEST_CASE("transport failures are counted, not thrown") {
    struct Flaky : GeocoderClient {
        std::optional<LatLon> geocode(const GeocodeRequest&) override { throw GeocoderTransportError("timeout"); }
    } flaky;
    CrashRecord r;
    r.crash_id = "X";
    const auto res = geocode_missing({r}, flaky);
    CHECK(res.summary.unresolved == 1);
    REQUIRE(res.summary.failures.size() == 1);
    CHECK(res.summary.failures[0].retryable);
}

TEST_CASE("bundled state mappings load the fixture") {
    const auto dir = testsupport::fixture_dir();
    const auto maps = testsupport::source_dir() / "data" / "mappings";
    for (const char* name : {"az_adot.map", "ca_switrs.map", "ga_gears.map", "tx_cris.map"}) {
        CAPTURE(name);
        const auto cfg = MappingConfig::load(maps / name);
        CHECK_NOTHROW(cfg.validate(TableKind::Crash));
    }

    const auto tx = MappingConfig::load(maps / "tx_cris.map");
    std::ifstream c(dir / "tx_crash.csv"), u(dir / "tx_unit.csv"), p(dir / "tx_person.csv");
    const auto load = load_crash_table({&c, &u, &p}, tx);
    CHECK(load.records.size() > 400);
    CHECK(load.report.units.rows_skipped == 1);  // the orphan unit row
    std::size_t heavy = 0;
    for (const auto& r : load.records) {
        for (const auto& unit : r.units) heavy += unit.vehicle_class == VehicleClass::HeavyVehicle;
    }
    CHECK(heavy > 0);
}

}  // TEST_SUITE
