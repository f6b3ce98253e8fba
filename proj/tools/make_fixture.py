#!/usr/bin/env python3
"""Regenerates the synthetic fixture under data/fixture and the labeled
road-classification cases under tests/data. Output is deterministic.

    python3 tools/make_fixture.py [--root DIR]
"""

import argparse
import csv
import json
import math
import random
from pathlib import Path

EARTH_R = 6371008.8
YEAR = 2023

# route_id -> (geo, names, always_freeway, [(lat, lon), ...])
SEGMENTS = [
    ("I-75", "Atlanta", ["Interstate 75"], True,
     [(33.700, -84.400), (33.750, -84.390), (33.800, -84.395), (33.850, -84.420)]),
    ("I-85", "Atlanta", ["Interstate 85"], True,
     [(33.650, -84.440), (33.720, -84.405), (33.800, -84.370), (33.860, -84.330)]),
    ("SR-400", "Atlanta", ["Georgia 400"], False,
     [(33.820, -84.368), (33.880, -84.360), (33.950, -84.358)]),
    ("I-35", "Austin", ["Interstate 35"], True,
     [(30.200, -97.750), (30.270, -97.735), (30.330, -97.710), (30.400, -97.690)]),
    ("LOOP-1", "Austin", ["Loop 1"], True,
     [(30.220, -97.800), (30.280, -97.775), (30.350, -97.755), (30.420, -97.740)]),
    ("US-183", "Austin", ["Research Blvd Expressway"], False,
     [(30.330, -97.740), (30.360, -97.700), (30.380, -97.660)]),
    ("I-405", "Los Angeles", ["San Diego Freeway"], True,
     [(33.900, -118.370), (33.980, -118.400), (34.050, -118.440), (34.120, -118.470)]),
    ("I-10", "Los Angeles", ["Santa Monica Freeway"], True,
     [(34.020, -118.480), (34.030, -118.380), (34.035, -118.280), (34.040, -118.200)]),
    ("SR-1", "Los Angeles", [], False,
     [(34.010, -118.495), (34.020, -118.505), (34.030, -118.515)]),
    ("US-101", "Los Angeles", ["Hollywood Freeway"], False,
     [(34.050, -118.240), (34.100, -118.330), (34.150, -118.450)]),
    ("I-10", "Phoenix", ["Papago Freeway"], True,
     [(33.300, -111.970), (33.400, -112.000), (33.460, -112.070), (33.460, -112.200)]),
    ("SR-51", "Phoenix", ["Piestewa Freeway"], True,
     [(33.460, -112.040), (33.520, -112.030), (33.600, -112.020), (33.660, -112.000)]),
    ("US-60", "Phoenix", ["Superstition Freeway"], False,
     [(33.400, -111.950), (33.390, -111.850), (33.400, -111.700)]),
    ("I-280", "San Francisco to San Jose", ["Junipero Serra Freeway"], True,
     [(37.770, -122.400), (37.700, -122.460), (37.550, -122.350), (37.400, -122.150), (37.330, -121.900)]),
    ("US-101", "San Francisco to San Jose", ["Bayshore Freeway"], False,
     [(37.340, -121.880), (37.450, -122.130), (37.600, -122.380), (37.760, -122.405)]),
]

ALIASES = {
    "LOOP-1": ["MOPAC", "MO PAC", "MOPAC EXPRESSWAY", "MOPAC EXPY"],
    "I-85": ["I-75/85 CONNECTOR"],
}

# How each route shows up in police reports (before junk suffixes).
ROUTE_SPELLINGS = {
    "I-75": ["I-75", "I 75", "IH-75", "INTERSTATE 75"],
    "I-85": ["I-85", "I 85", "INTERSTATE 85"],
    "SR-400": ["SR 400", "GA-400", "GEORGIA 400"],
    "I-35": ["IH 35", "IH0035", "I-35", "INTERSTATE HWY 35"],
    "LOOP-1": ["LOOP 1", "MOPAC", "MOPAC EXPY", "Mo-Pac Blvd"],
    "US-183": ["US 183", "US HWY 183", "RESEARCH BLVD EXPRESSWAY"],
    "I-405": ["I-405", "RT 405", "SAN DIEGO FREEWAY"],
    "I-10": ["I-10", "I 10", "INTERSTATE 10"],
    "SR-1": ["SR-1", "CA-1", "PACIFIC COAST HWY RT 1"],
    "US-101": ["US-101", "HWY 101", "US 101"],
    "SR-51": ["SR 51", "SR-51", "STATE ROUTE 51"],
    "US-60": ["US 60", "US-60", "US HWY 60"],
    "I-280": ["I-280", "RT 280", "INTERSTATE 280"],
}
JUNK = ["", "", "", " NB", " SB", " EB", " WB", " N/B", " S/B", " NORTHBOUND", " SOUTHBOUND"]

GEOS = {
    "Atlanta": {
        "state": "GA", "counties": {"Fulton": 0.5, "DeKalb": 0.3, "Clayton": 0.2}, "out": "Cobb",
        "box": (33.60, 33.95, -84.50, -84.25), "n": 700,
        "surface": ["PEACHTREE ST NE", "PONCE DE LEON AVE", "MORELAND AVE", "CAMPBELLTON RD", "MEMORIAL DR",
                    "TARA BLVD", "NORTHSIDE DR"],
        "cities": ["ATLANTA", "DECATUR", "JONESBORO"],
        "vmt": {"Freeway": 120e6, "SurfaceStreet": 150e6},
    },
    "Austin": {
        "state": "TX", "counties": {"Travis": 1.0}, "out": "Williamson",
        "box": (30.15, 30.45, -97.85, -97.60), "n": 500,
        "surface": ["CONGRESS AVE", "LAMAR BLVD", "GUADALUPE ST", "RIVERSIDE DR", "BURNET RD", "OLTORF ST"],
        "cities": ["AUSTIN"],
        "vmt": {"Freeway": 110e6, "SurfaceStreet": 90e6},
    },
    "Los Angeles": {
        "state": "CA", "counties": {"Los Angeles": 1.0}, "out": "San Diego",
        "box": (33.85, 34.20, -118.55, -118.15), "n": 900,
        "surface": ["WILSHIRE BLVD", "SEPULVEDA BLVD", "VENICE BLVD", "FIGUEROA ST", "SUNSET BLVD", "LA BREA AVE"],
        "cities": ["LOS ANGELES", "SANTA MONICA", "CULVER CITY"],
        "vmt": {"Freeway": 260e6, "SurfaceStreet": 210e6},
    },
    "Phoenix": {
        "state": "AZ", "counties": {"Maricopa": 1.0}, "out": "Pima",
        "box": (33.30, 33.70, -112.25, -111.70), "n": 800,
        "surface": ["CAMELBACK RD", "INDIAN SCHOOL RD", "CENTRAL AVE", "MCDOWELL RD", "GRAND AVE", "BELL RD"],
        "cities": ["PHOENIX", "TEMPE", "MESA"],
        "vmt": {"Freeway": 300e6, "SurfaceStreet": 200e6},
    },
    "San Francisco to San Jose": {
        "state": "CA", "counties": {"San Francisco": 0.3, "San Mateo": 0.3, "Santa Clara": 0.4}, "out": "San Diego",
        "box": (37.30, 37.80, -122.50, -121.85), "n": 600,
        "surface": ["VAN NESS AVE", "EL CAMINO REAL", "MISSION ST", "STEVENS CREEK BLVD", "GENEVA AVE"],
        "cities": ["SAN FRANCISCO", "SAN MATEO", "SAN JOSE"],
        "vmt": {"Freeway": 150e6, "SurfaceStreet": 110e6},
    },
}

SHARES = [
    ("AZ", "Freeway", 0.88, 0.83), ("AZ", "SurfaceStreet", 0.94, 0.90),
    ("CA", "Freeway", 0.90, 0.84), ("CA", "SurfaceStreet", 0.95, 0.91),
    ("GA", "Freeway", 0.87, 0.80), ("GA", "SurfaceStreet", 0.94, 0.90),
    ("TX", "Freeway", 0.86, 0.79), ("TX", "SurfaceStreet", 0.93, 0.89),
]

SEVERITY = ["K", "A", "B", "C", "O"]
AIRBAG_P = {"K": 0.85, "A": 0.6, "B": 0.35, "C": 0.2, "O": 0.06}
DIRS = ["N", "NE", "E", "SE", "S", "SW", "W", "NW"]


# ---------------------------------------------------------------------------
# sphere helpers, same radius as the library

def haversine(a, b):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    dp, dl = p2 - p1, math.radians(b[1] - a[1])
    h = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * EARTH_R * math.asin(min(1.0, math.sqrt(h)))


def bearing(a, b):
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    dl = math.radians(b[1] - a[1])
    y = math.sin(dl) * math.cos(p2)
    x = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl)
    return math.atan2(y, x)


def destination(a, theta, d):
    p1, l1 = math.radians(a[0]), math.radians(a[1])
    delta = d / EARTH_R
    p2 = math.asin(math.sin(p1) * math.cos(delta) + math.cos(p1) * math.sin(delta) * math.cos(theta))
    l2 = l1 + math.atan2(math.sin(theta) * math.sin(delta) * math.cos(p1),
                         math.cos(delta) - math.sin(p1) * math.sin(p2))
    return (math.degrees(p2), math.degrees(l2))


def beyond_endpoint(poly, d):
    """Point `d` meters past the first vertex, continuing away from the line.
    Its nearest point on the polyline is that vertex."""
    return destination(poly[0], bearing(poly[0], poly[1]) + math.pi, d)


def near_polyline(rng, poly, max_offset):
    i = rng.randrange(len(poly) - 1)
    a, b = poly[i], poly[i + 1]
    t = rng.uniform(0.05, 0.95)
    foot = (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
    side = rng.choice([-1, 1]) * math.pi / 2
    return destination(foot, bearing(a, b) + side, rng.uniform(0.0, max_offset))


def min_distance(poly, p):
    return min(haversine(p, v) for v in poly)


# ---------------------------------------------------------------------------
# abstract crashes

class Unit:
    def __init__(self, cls, maneuver="Straight", direction="N", parked=False, gvwr=None):
        self.cls = cls            # Passenger, Unknown, HeavyVehicle, Motorcycle, Pedestrian, Cyclist, Other
        self.maneuver = maneuver
        self.direction = direction
        self.parked = parked
        self.gvwr = gvwr
        self.airbag = None        # True/False/None
        self.first = 1            # ordinal of first contact event
        self.injuries = []


class Crash:
    def __init__(self, cid):
        self.id = cid
        self.units = []
        self.manner = "Other"
        self.junction = "NonJunction"
        self.severity = "O"


def opposite(d):
    return DIRS[(DIRS.index(d) + 4) % 8]


def perpendicular(d):
    return DIRS[(DIRS.index(d) + 2) % 8]


def car(rng, **kw):
    return Unit("Unknown" if rng.random() < 0.05 else "Passenger", **kw)


def build_units(rng, scenario, crash):
    d = rng.choice(DIRS[::2])
    u = []
    if scenario == "rear_end":
        lead_cls = rng.random()
        u.append(car(rng, maneuver=rng.choice(["Straight", "Slowing"]), direction=d))
        if lead_cls < 0.08:
            u.append(Unit("HeavyVehicle", maneuver="Slowing", direction=d, gvwr=rng.choice([26000, 80000])))
        elif lead_cls < 0.12:
            u.append(Unit("Passenger", maneuver="Stopped", direction=d, gvwr=12000))  # heavy pickup
        else:
            u.append(car(rng, maneuver=rng.choice(["Slowing", "Stopped"]), direction=d))
        crash.manner = "FrontToRear"
    elif scenario == "chain":
        u = [car(rng, direction=d), car(rng, maneuver="Slowing", direction=d), car(rng, maneuver="Stopped", direction=d)]
        u[2].first = 2
        crash.manner = "FrontToRear"
    elif scenario == "sideswipe":
        u = [car(rng, maneuver="LaneChange", direction=d), car(rng, direction=d)]
        crash.manner = "SideswipeSameDirection"
    elif scenario == "angle":
        u = [car(rng, direction=d), car(rng, direction=perpendicular(d))]
        crash.manner = "Angle"
        crash.junction = "Intersection"
    elif scenario == "left_turn":
        u = [car(rng, maneuver=rng.choice(["TurningLeft", "TurningLeft", "UTurn"]), direction=d),
             car(rng, direction=opposite(d))]
        crash.manner = "OppositeDirection"
        crash.junction = "Intersection"
    elif scenario == "head_on":
        u = [car(rng, direction=d), car(rng, direction=opposite(d))]
        crash.manner = "OppositeDirection"
    elif scenario == "single":
        u = [car(rng, direction=d)]
        crash.manner = "SingleVehicle"
    elif scenario == "parked":
        u = [car(rng, direction=d), Unit("Passenger", maneuver="Parked", direction=d, parked=True)]
        crash.manner = "FrontToRear"
    elif scenario == "ped":
        u = [car(rng, maneuver=rng.choice(["Straight", "TurningRight", "TurningLeft"]), direction=d),
             Unit("Pedestrian", maneuver="Other", direction=d)]
        crash.manner = "Other"
    elif scenario == "cyclist":
        u = [car(rng, direction=d), Unit("Cyclist", direction=perpendicular(d))]
        crash.manner = "Angle"
    elif scenario == "moto":
        u = [car(rng, direction=d), Unit("Motorcycle", direction=d)]
        crash.manner = rng.choice(["FrontToRear", "SideswipeSameDirection"])
    crash.units = u


FREEWAY_MIX = [("rear_end", 44), ("chain", 8), ("sideswipe", 20), ("single", 15), ("moto", 5), ("head_on", 2),
               ("ped", 2), ("parked", 4)]
SURFACE_MIX = [("rear_end", 24), ("angle", 20), ("left_turn", 10), ("sideswipe", 7), ("single", 11), ("ped", 8),
               ("cyclist", 6), ("moto", 4), ("head_on", 3), ("parked", 7)]


def pick(rng, mix):
    total = sum(w for _, w in mix)
    x = rng.uniform(0, total)
    for name, w in mix:
        x -= w
        if x <= 0:
            return name
    return mix[-1][0]


def assign_injuries(rng, crash, scenario):
    weights = [0.6, 3.0, 9.0, 18.0, 69.4] if scenario not in ("ped", "cyclist", "moto") else [4, 14, 30, 30, 22]
    sev = rng.choices(SEVERITY, weights=weights)[0]
    unknown = rng.random() < 0.03
    crash.severity = "U" if unknown else sev
    rank = SEVERITY.index(sev)
    occupied = [u for u in crash.units if not u.parked]
    for u in occupied:
        n = 1 if u.cls in ("Pedestrian", "Cyclist", "Motorcycle") else rng.choice([1, 1, 2])
        u.injuries = ["U" if unknown else SEVERITY[rng.randint(rank, 4)] for _ in range(n)]
    if not unknown:
        rng.choice(occupied).injuries[0] = sev
    for u in crash.units:
        if u.cls in ("Passenger", "Unknown", "HeavyVehicle") and not u.parked:
            p = AIRBAG_P.get(sev, 0.1)
            r = rng.random()
            u.airbag = None if r < 0.05 else (rng.random() < p)


def make_crashes(rng, geo, cfg, routes):
    freeway_routes = [r for r in routes]
    out = []
    lat0, lat1, lon0, lon1 = cfg["box"]
    counties = list(cfg["counties"].items())
    for i in range(cfg["n"]):
        c = Crash(None)
        c.county = rng.choices([k for k, _ in counties], weights=[w for _, w in counties])[0]
        c.city = rng.choice(cfg["cities"])
        c.year = YEAR
        on_freeway = rng.random() < 0.42
        if on_freeway:
            route, always, poly = rng.choice(freeway_routes)
            c.location = near_polyline(rng, poly, 180.0 if always else 300.0)
            c.road = rng.choice(ROUTE_SPELLINGS[route]) + rng.choice(JUNK)
            c.cross = rng.choice(cfg["surface"]) if rng.random() < 0.3 else ""
            scenario = pick(rng, FREEWAY_MIX)
        else:
            ambiguous = [r for r in freeway_routes if not r[1]]
            if ambiguous and rng.random() < 0.15:
                route, _, poly = rng.choice(ambiguous)
                while True:
                    p = (rng.uniform(lat0, lat1), rng.uniform(lon0, lon1))
                    if min_distance(poly, p) > 2500.0:
                        break
                c.location = p
                c.road = rng.choice(ROUTE_SPELLINGS[route])
            else:
                c.location = (rng.uniform(lat0, lat1), rng.uniform(lon0, lon1))
                c.road = rng.choice(cfg["surface"])
            c.cross = rng.choice(cfg["surface"])
            scenario = pick(rng, SURFACE_MIX)
        build_units(rng, scenario, c)
        if on_freeway and c.junction == "Intersection":
            c.junction = "NonJunction"
        if on_freeway and rng.random() < 0.1:
            c.junction = "RampRelated"
        if not on_freeway and c.junction == "NonJunction" and rng.random() < 0.3:
            c.junction = "Intersection"
        if rng.random() < 0.02:
            c.manner = "Unknown"
        assign_injuries(rng, c, scenario)
        out.append(c)
    return out


def out_of_scope(rng, cfg, template, n):
    """Copies of real crashes moved to a neighbouring county or the prior year."""
    extra = []
    for k in range(n):
        src = rng.choice(template)
        c = Crash(None)
        c.__dict__.update({key: val for key, val in src.__dict__.items()})
        c.units = src.units
        if k % 2 == 0:
            c.county = cfg["out"]
        else:
            c.year = YEAR - 1
        extra.append(c)
    return extra


# ---------------------------------------------------------------------------
# state encodings

def write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def fmt_coord(x):
    return f"{x:.6f}"


AZ_SEV = {"K": "Fatal", "A": "Suspected Serious Injury", "B": "Suspected Minor Injury", "C": "Possible Injury",
          "O": "No Injury", "U": "Unknown"}
AZ_MANNER = {"FrontToRear": "Rear End", "SideswipeSameDirection": "Sideswipe Same Direction", "Angle": "Angle",
             "SingleVehicle": "Single Vehicle", "Other": "Other", "Unknown": "Unknown"}
AZ_JUNCTION = {"Intersection": "Intersection", "NonJunction": "Non Junction", "RampRelated": "Entrance/Exit Ramp"}
AZ_ACTION = {"Straight": "Going Straight Ahead", "TurningLeft": "Making Left Turn",
             "TurningRight": "Making Right Turn", "UTurn": "Making U-Turn", "LaneChange": "Changing Lanes",
             "Slowing": "Slowing In Traffic", "Stopped": "Stopped In Traffic", "Parked": "Parked", "Other": "Other"}
AZ_DIR = {"N": "North", "NE": "Northeast", "E": "East", "SE": "Southeast", "S": "South", "SW": "Southwest",
          "W": "West", "NW": "Northwest"}


def az_body(rng, u):
    return {"Passenger": rng.choice(["Passenger Car", "Sport Utility Vehicle", "Pickup", "Van"]),
            "Unknown": "Unknown", "HeavyVehicle": rng.choice(["Truck Tractor", "Single Unit Truck", "Bus"]),
            "Motorcycle": "Motorcycle", "Pedestrian": "", "Cyclist": "", "Other": "Farm Equipment"}[u.cls]


def write_az(rng, crashes, d):
    crash_rows, unit_rows, person_rows = [], [], []
    for c in crashes:
        manner = AZ_MANNER.get(c.manner)
        if c.manner == "OppositeDirection":
            manner = "Left Turn" if any(u.maneuver in ("TurningLeft", "UTurn") for u in c.units) else "Head On"
        lat, lon = c.location
        crash_rows.append([c.id, c.year, c.county, fmt_coord(lat), fmt_coord(lon), c.city, c.road, c.cross,
                           AZ_SEV[c.severity], manner, AZ_JUNCTION[c.junction]])
        for n, u in enumerate(c.units, 1):
            utype = {"Pedestrian": "Pedestrian", "Cyclist": "Pedalcyclist"}.get(u.cls, "Parked Unit" if u.parked else "Driver")
            airbag = "" if u.airbag is None else ("Deployed" if u.airbag else "Not Deployed")
            unit_rows.append([c.id, n, utype, az_body(rng, u), AZ_ACTION.get(u.maneuver, "Unknown"),
                              AZ_DIR.get(u.direction, "Unknown"), airbag, u.first])
            for k, inj in enumerate(u.injuries, 1):
                person_rows.append([c.id, n, k, AZ_SEV[inj]])
    write_csv(d / "az_incidents.csv", ["IncidentId", "Year", "CountyName", "Latitude", "Longitude", "City", "OnRoad",
                                       "CrossingFeature", "InjurySeverity", "CollisionManner", "JunctionRelation"],
              crash_rows)
    write_csv(d / "az_units.csv", ["IncidentId", "UnitNumber", "UnitType", "BodyStyle", "UnitAction",
                                   "TravelDirection", "AirbagStatus", "EventSequence1"], unit_rows)
    write_csv(d / "az_persons.csv", ["IncidentId", "UnitNumber", "PersonNumber", "Injury"], person_rows)


CA_COUNTY = {"Los Angeles": "19", "San Francisco": "38", "San Mateo": "41", "Santa Clara": "43", "San Diego": "37"}
CA_SEV = {"K": "1", "A": "2", "B": "3", "C": "4", "O": "0", "U": ""}
CA_TYPE = {"OppositeDirection": "A", "SideswipeSameDirection": "B", "FrontToRear": "C", "Angle": "D",
           "Other": "H", "Unknown": "-"}
CA_MOVE = {"Stopped": "A", "Straight": "B", "TurningRight": "D", "TurningLeft": "E", "UTurn": "F", "Backing": "G",
           "Slowing": "H", "LaneChange": "J", "Parked": "K", "Other": "M"}


def ca_vehicle(rng, u):
    return {"Passenger": rng.choice(["A", "A", "D"]), "Unknown": "-", "HeavyVehicle": rng.choice(["F", "G", "I"]),
            "Motorcycle": "C", "Pedestrian": "N", "Cyclist": "L", "Other": "M"}[u.cls]


def geocode_key(state, locator, primary, secondary):
    def norm(s):
        return " ".join(s.upper().replace("|", " ").replace("\t", " ").split())
    return "|".join(norm(x) for x in (state, locator, primary, secondary))


def write_ca(rng, crashes, d, cache_lines):
    crash_rows, party_rows, victim_rows = [], [], []
    for c in crashes:
        lat, lon = c.location
        slat, slon = fmt_coord(lat), fmt_coord(lon)
        if rng.random() < 0.08:
            slat, slon = ("", "") if rng.random() < 0.5 else ("0", "0")
            if rng.random() < 0.85:
                cache_lines.append(f"{geocode_key('CA', c.city, c.road, c.cross)}\t{fmt_coord(lat)}\t{fmt_coord(lon)}")
        kind = CA_TYPE.get(c.manner, "H")
        if c.manner == "SingleVehicle":
            kind = rng.choice(["E", "E", "F"])
        if any(u.cls == "Pedestrian" for u in c.units):
            kind = "G"
        crash_rows.append([c.id, c.year, CA_COUNTY[c.county], c.city, slat, slon, c.road, c.cross, CA_SEV[c.severity],
                           kind, "Y" if c.junction == "Intersection" else "N"])
        for n, u in enumerate(c.units, 1):
            ptype = {"Pedestrian": "2", "Cyclist": "4"}.get(u.cls, "3" if u.parked else "1")
            airbag = "-" if u.airbag is None else ("L" if u.airbag else "M")
            if u.cls in ("Pedestrian", "Cyclist"):
                airbag = "-"
            direction = u.direction if u.direction in ("N", "S", "E", "W") else "-"
            party_rows.append([c.id, n, ptype, ca_vehicle(rng, u), CA_MOVE.get(u.maneuver, "-"), direction, airbag])
            for k, inj in enumerate(u.injuries, 1):
                victim_rows.append([c.id, n, k, CA_SEV[inj]])
    write_csv(d / "ca_collisions.csv", ["CASE_ID", "ACCIDENT_YEAR", "COUNTY_CODE", "CITY", "LATITUDE", "LONGITUDE",
                                        "PRIMARY_RD", "SECONDARY_RD", "COLLISION_SEVERITY", "TYPE_OF_COLLISION",
                                        "INTERSECTION"], crash_rows)
    write_csv(d / "ca_parties.csv", ["CASE_ID", "PARTY_NUMBER", "PARTY_TYPE", "STWD_VEHICLE_TYPE", "MOVE_PRE_ACC",
                                     "DIR_OF_TRAVEL", "AIRBAG"], party_rows)
    write_csv(d / "ca_victims.csv", ["CASE_ID", "PARTY_NUMBER", "VICTIM_NUMBER", "VICTIM_DEGREE_OF_INJURY"],
              victim_rows)


GA_SEV = {"K": "Fatal Injury", "A": "Suspected Serious Injury", "B": "Suspected Minor Injury",
          "C": "Possible Injury", "O": "No Apparent Injury", "U": "Unknown"}
GA_MOVE = {"Straight": "Straight Ahead", "TurningLeft": "Turning Left", "TurningRight": "Turning Right",
           "UTurn": "Making U-Turn", "LaneChange": "Changing Lanes", "Slowing": "Slowing", "Stopped": "Stopped",
           "Parked": "Parked", "Other": "Other"}


def ga_type(rng, u):
    return {"Passenger": rng.choice(["Passenger Car", "SUV", "Pickup"]), "Unknown": "Unknown",
            "HeavyVehicle": rng.choice(["Tractor/Trailer", "Bus"]), "Motorcycle": "Motorcycle",
            "Pedestrian": "Pedestrian", "Cyclist": "Bicycle", "Other": "Other"}[u.cls]


def write_ga(rng, crashes, d):
    rows = []
    for c in crashes:
        lat, lon = c.location
        slat, slon = fmt_coord(lat), fmt_coord(lon)
        if rng.random() < 0.03:
            slat, slon = "0", "0"  # unresolved placeholder, no cache entry
        for n, u in enumerate(c.units, 1):
            airbag = "" if u.airbag is None else ("Deployed - Front" if u.airbag else "Not Deployed")
            rows.append([c.id, c.year, c.county, c.city, slat, slon, c.road, c.cross, GA_SEV[c.severity], n,
                         ga_type(rng, u), GA_MOVE.get(u.maneuver, "Unknown"), u.direction + "B",
                         "Y" if u.parked else "N", airbag])
    write_csv(d / "ga_gears.csv", ["report_number", "crash_year", "county_name", "city", "latitude", "longitude",
                                   "road_name", "intersecting_road", "crash_severity", "vehicle_number", "vehetype",
                                   "mnmrvveh", "direction", "parked", "airbag"], rows)


TX_COUNTY = {"Travis": "227", "Williamson": "246"}
TX_SEV = {"A": "1", "B": "2", "C": "3", "K": "4", "O": "5", "U": "0"}
TX_MANNER = {"FrontToRear": "20", "SideswipeSameDirection": "21", "Angle": "10", "SingleVehicle": "1",
             "Other": "40", "Unknown": "99"}
TX_JUNCTION = {"Intersection": "1", "NonJunction": "4", "RampRelated": "6"}
TX_MOVE = {"Straight": "1", "TurningLeft": "2", "TurningRight": "3", "UTurn": "4", "Backing": "5",
           "LaneChange": "6", "Slowing": "7", "Stopped": "8", "Parked": "9", "Other": "10"}
TX_DIR = {d: str(i) for i, d in enumerate(DIRS, 1)}


def write_tx(rng, crashes, d, orphan_id):
    crash_rows, unit_rows, person_rows = [], [], []
    for c in crashes:
        lat, lon = c.location
        manner = TX_MANNER.get(c.manner)
        if c.manner == "OppositeDirection":
            manner = "34" if any(u.maneuver in ("TurningLeft", "UTurn") for u in c.units) else "30"
        firsts = {}
        for n, u in enumerate(c.units, 1):
            firsts.setdefault(u.first, []).append(str(n))
        seq = ";".join("+".join(firsts[k]) for k in sorted(firsts))
        crash_rows.append([c.id, c.year, TX_COUNTY[c.county], c.city, fmt_coord(lat), fmt_coord(lon), c.road, c.cross,
                           TX_SEV[c.severity], manner, TX_JUNCTION[c.junction], seq])
        for n, u in enumerate(c.units, 1):
            desc = {"Pedestrian": "4", "Cyclist": "3"}.get(u.cls, "1")
            body = {"Passenger": rng.choice(["PC", "SV", "PK", "VN"]), "Unknown": "98",
                    "HeavyVehicle": rng.choice(["TR", "BU"]), "Motorcycle": "MC", "Pedestrian": "",
                    "Cyclist": "", "Other": "FE"}[u.cls]
            if u.gvwr is not None and u.cls == "Passenger":
                body = "PK"
            gvwr = "" if u.gvwr is None else str(u.gvwr)
            airbag = "" if u.airbag is None else ("Y" if u.airbag else "N")
            unit_rows.append([c.id, n, desc, body, "Y" if u.parked else "N", gvwr, TX_MOVE.get(u.maneuver, "11"),
                              TX_DIR.get(u.direction, "11"), airbag])
            for k, inj in enumerate(u.injuries, 1):
                person_rows.append([c.id, n, k, TX_SEV[inj]])
    unit_rows.append([orphan_id, 1, "1", "PC", "N", "", "1", "1", "N"])
    write_csv(d / "tx_crash.csv", ["Crash_ID", "Crash_Year", "Cnty_ID", "City_Name", "Latitude", "Longitude",
                                   "Rpt_Street_Name", "Rpt_Sec_Street_Name", "Crash_Sev_ID", "FHE_Collsn_ID",
                                   "Intrsct_Relat_ID", "Harm_Evnt_Seq"], crash_rows)
    write_csv(d / "tx_unit.csv", ["Crash_ID", "Unit_Nbr", "Unit_Desc_ID", "Veh_Body_Styl_ID", "Veh_Parked_Fl",
                                  "Cmv_GVWR", "Veh_Mvmt_ID", "Veh_Trvl_Dir_ID", "Veh_Airbag_Fl"], unit_rows)
    write_csv(d / "tx_person.csv", ["Crash_ID", "Unit_Nbr", "Prsn_Nbr", "Prsn_Injry_Sev_ID"], person_rows)


# ---------------------------------------------------------------------------
# exposure, geometry, config

def write_vmt(rng, d):
    hpms_rows, ca_all_rows, ca_fwy_rows, az_rows = [], [], [], []
    for geo, cfg in GEOS.items():
        state = cfg["state"]
        counties = dict(cfg["counties"])
        counties[cfg["out"]] = 0.4
        for county, weight in counties.items():
            if county == "San Diego" and geo == "San Francisco to San Jose":
                continue
            fwy = round(cfg["vmt"]["Freeway"] * weight * rng.uniform(0.95, 1.05))
            srf = round(cfg["vmt"]["SurfaceStreet"] * weight * rng.uniform(0.95, 1.05))
            if state == "AZ":
                az_rows.append([YEAR, county, "Interstate & Freeways", fwy / 1000])
                az_rows.append([YEAR, county, "Other Roads", srf / 1000])
            elif state == "CA":
                ca_all_rows.append([state, county, "ALL", YEAR, fwy + srf])
                # HPMS freeway sidecar comes in two functional systems per county
                ca_fwy_rows.append([state, county, "1", YEAR, round(fwy * 0.7)])
                ca_fwy_rows.append([state, county, "2", YEAR, fwy - round(fwy * 0.7)])
            else:
                hpms_rows.append([state, county, "1", YEAR, round(fwy * 0.6)])
                hpms_rows.append([state, county, "2", YEAR, fwy - round(fwy * 0.6)])
                for fs, frac in (("3", 0.45), ("4", 0.3), ("5", 0.25)):
                    hpms_rows.append([state, county, fs, YEAR, round(srf * frac)])
    header = ["STATE_CODE", "COUNTY_NAME", "F_SYSTEM", "DATA_YEAR", "ANNUAL_VMT"]
    write_csv(d / "hpms_vmt.csv", header, hpms_rows)
    write_csv(d / "ca_vmt_allroads.csv", header, ca_all_rows)
    write_csv(d / "ca_hpms_freeway.csv", header, ca_fwy_rows)
    write_csv(d / "az_vmt.csv", ["Year", "County", "RoadCategory", "VMT_Thousands"], az_rows)


def write_segments(d):
    by_route = {}
    for route, geo, names, always, poly in SEGMENTS:
        by_route.setdefault(route, []).append((names, always, poly))
    features = []
    for route, parts in by_route.items():
        names = sorted({n for p in parts for n in p[0]})
        coords = [[[lon, lat] for lat, lon in p[2]] for p in parts]
        always = all(p[1] for p in parts)
        geometry = ({"type": "LineString", "coordinates": coords[0]} if len(coords) == 1
                    else {"type": "MultiLineString", "coordinates": coords})
        features.append({"type": "Feature",
                         "properties": {"route_id": route, "names": names, "always_freeway": always},
                         "geometry": geometry})
    with open(d / "segments.geojson", "w") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f, indent=1)
        f.write("\n")
    with open(d / "aliases.txt", "w") as f:
        f.write("# route id = alias, alias\n")
        for route, names in ALIASES.items():
            f.write(f"{route} = {', '.join(names)}\n")


def write_shares(d):
    rows = []
    for state, fc, urban, rural in SHARES:
        rows.append([state, fc, "urban", urban])
        rows.append([state, fc, "rural", rural])
    write_csv(d / "shares.csv", ["state", "functional_class", "urban", "share"], rows)


def write_run_config(d):
    cfg = {
        "year": YEAR,
        "sources": [
            {"name": "AZ", "mapping": "../mappings/az_adot.map", "crashes": "az_incidents.csv",
             "units": "az_units.csv", "persons": "az_persons.csv"},
            {"name": "CA", "mapping": "../mappings/ca_switrs.map", "crashes": "ca_collisions.csv",
             "units": "ca_parties.csv", "persons": "ca_victims.csv"},
            {"name": "GA", "mapping": "../mappings/ga_gears.map", "crashes": "ga_gears.csv"},
            {"name": "TX", "mapping": "../mappings/tx_cris.map", "crashes": "tx_crash.csv",
             "units": "tx_unit.csv", "persons": "tx_person.csv"},
        ],
        "vmt": [
            {"mapping": "../mappings/vmt_hpms.map", "file": "hpms_vmt.csv"},
            {"mapping": "../mappings/vmt_hpms.map", "file": "ca_vmt_allroads.csv"},
            {"mapping": "../mappings/vmt_hpms.map", "file": "ca_hpms_freeway.csv"},
            {"mapping": "../mappings/vmt_az.map", "file": "az_vmt.csv"},
        ],
        "segments": "segments.geojson",
        "aliases": "aliases.txt",
        "shares": "shares.csv",
        "geocode_cache": "geocode_cache.tsv",
        "output_dir": "out",
        "parameters": {"mc_trials": 2000, "seed": 20240101, "workers": 1},
    }
    with open(d / "run.json", "w") as f:
        json.dump(cfg, f, indent=2)
        f.write("\n")


def write_ads_sample(d):
    rows = [
        ["Phoenix", "Freeway", "Fatal", 3, 200e6],
        ["Phoenix", "Freeway", "PoliceReported", 120, 200e6],
        ["San Francisco to San Jose", "SurfaceStreet", "AnyInjuryReported", 20, 7.1e6],
        ["Los Angeles", "SurfaceStreet", "AnyAirbagDeployment", 2, 1.3e6],
        ["Austin", "Freeway", "SuspectedSeriousInjuryPlus", 0, 0.8e6],
    ]
    write_csv(d / "ads_sample.csv", ["geo", "road", "outcome", "ads_crashes", "ads_miles"],
              [[g, r, o, c, f"{m:.0f}"] for g, r, o, c, m in rows])


# ---------------------------------------------------------------------------
# labeled road-classification cases

def roadclass_cases():
    poly = {}
    for route, _, _, always, p in SEGMENTS:
        poly.setdefault(route, p)
    rows = []

    def add(name, point, road, prov, note):
        lat, lon = ("", "") if point is None else (repr(point[0]), repr(point[1]))
        rows.append([f"rc{len(rows) + 1:02d}", name, lat, lon, road, prov, note])

    far = (33.20, -111.50)
    add("I-75 NB", None, "Freeway", "ByNameAlways", "junk suffix, no location")
    add("IH 35 S/B", (30.10, -97.95), "Freeway", "ByNameAlways", "slash direction, far from line")
    add("INTERSTATE 10 EASTBOUND", far, "Freeway", "ByNameAlways", "spelled out")
    add("I-280 SOUTHBOUND", None, "Freeway", "ByNameAlways", "junk suffix")
    add("i-405 n", (33.95, -118.30), "Freeway", "ByNameAlways", "lower case")
    add("SR 51 NB", None, "Freeway", "ByNameAlways", "state route")
    add("Interstate Hwy 85", None, "Freeway", "ByNameAlways", "interstate hwy form")
    add("IH0035 SB", None, "Freeway", "ByNameAlways", "zero-padded route number")
    add("MOPAC", None, "Freeway", "ByNameAlways", "alias")
    add("Mo-Pac Blvd", (30.30, -97.70), "Freeway", "ByNameAlways", "alias with hyphen")
    add("S MOPAC EXPY NB", None, "Freeway", "ByNameAlways", "alias inside longer name")
    add("Loop 1", None, "Freeway", "ByNameAlways", "loop pattern")

    for route, name in (("US-101", "US 101"), ("US-183", "US HWY 183"), ("US-60", "US-60 WB"),
                        ("SR-400", "GA 400")):
        for d, road in ((0.0, "Freeway"), (399.0, "Freeway"), (400.0, "Freeway"), (401.0, "SurfaceStreet"),
                        (1200.0, "SurfaceStreet")):
            p = poly[route][0] if d == 0.0 else beyond_endpoint(poly[route], d)
            add(name, p, road, "ByProximity", f"{route} at {d:.0f} m")

    for name in ("US 101", "HWY 183", "US-60", "SR-400", "CA-1", "US 101 NB"):
        add(name, None, "SurfaceStreet", "Unresolvable", "ambiguous route without location")

    add("PEACHTREE ST NE", poly["I-75"][1], "SurfaceStreet", "ByNameNonFreeway", "surface name on top of freeway")
    add("MAIN ST", None, "SurfaceStreet", "ByNameNonFreeway", "no location needed")
    add("W CAMELBACK RD", (33.509, -112.08), "SurfaceStreet", "ByNameNonFreeway", "")
    add("US 999", (34.0, -118.3), "SurfaceStreet", "ByNameNonFreeway", "pattern without indexed route")
    add("VAN NESS AVE", (37.79, -122.4235), "SurfaceStreet", "ByNameNonFreeway", "")
    add("", (37.79, -122.4235), "SurfaceStreet", "ByNameNonFreeway", "empty name")

    mid = lambda a, b: ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    add("HWY 101", near_polyline(random.Random(5), poly["US-101"], 50.0), "Freeway", "ByProximity",
        "generic highway form within 50 m")
    add("ROUTE 1", beyond_endpoint(poly["SR-1"], 2000.0), "SurfaceStreet", "ByProximity", "generic route, far")
    add("STATE ROUTE 51", None, "Freeway", "ByNameAlways", "")
    add("I-10 W", mid(*poly["I-10"][:2]), "Freeway", "ByNameAlways", "")
    add("Interstate Highway 405", None, "Freeway", "ByNameAlways", "")
    add("CA-1", beyond_endpoint(poly["SR-1"], 100.0), "Freeway", "ByProximity", "state prefix form")
    assert len(rows) == 50, len(rows)
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--root", default=str(Path(__file__).resolve().parent.parent))
    root = Path(ap.parse_args().root)
    d = root / "data" / "fixture"
    d.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240101)

    by_geo = {}
    for route, geo, _, always, poly in SEGMENTS:
        by_geo.setdefault(geo, []).append((route, always, poly))

    per_state = {"AZ": [], "CA": [], "GA": [], "TX": []}
    for geo, cfg in GEOS.items():
        crashes = make_crashes(rng, geo, cfg, by_geo[geo])
        crashes += out_of_scope(rng, cfg, crashes, 12)
        per_state[cfg["state"]].extend(crashes)

    prefixes = {"AZ": "AZ23", "CA": "9", "GA": "GA23-", "TX": "19"}
    for state, crashes in per_state.items():
        for i, c in enumerate(crashes, 1):
            c.id = f"{prefixes[state]}{i:06d}"

    bad = per_state["AZ"][5]
    bad.location = (95.0, bad.location[1])

    cache_lines = ["# key\tlat\tlon"]
    write_az(rng, per_state["AZ"], d)
    write_ca(rng, per_state["CA"], d, cache_lines)
    write_ga(rng, per_state["GA"], d)
    write_tx(rng, per_state["TX"], d, "19999999")
    with open(d / "geocode_cache.tsv", "w") as f:
        f.write("\n".join(cache_lines) + "\n")

    write_vmt(rng, d)
    write_segments(d)
    write_shares(d)
    write_run_config(d)
    write_ads_sample(d)

    write_csv(root / "tests" / "data" / "roadclass_cases.csv",
              ["case_id", "primary_road", "lat", "lon", "expected_road", "expected_provenance", "note"],
              roadclass_cases())


if __name__ == "__main__":
    main()
