#pragma once

#include "crashbench/model.hpp"

namespace crashbench::geo {

/// Mean Earth radius (IUGG), meters.
inline constexpr double kEarthRadiusM = 6371008.8;

/// Great-circle distance in meters.
double haversine_m(LatLon a, LatLon b);

struct SegmentProjection {
    LatLon foot;         // nearest point on the segment
    double t = 0.0;      // position along a->b in [0, 1]
    double distance_m = 0.0;
};

/// Nearest point on segment a-b to p. The foot parameter comes from a local
/// equirectangular projection centred on p; the reported distance is the
/// haversine distance from p to that foot, so vertex hits are exact.
SegmentProjection project_to_segment(LatLon p, LatLon a, LatLon b);

inline double point_segment_distance_m(LatLon p, LatLon a, LatLon b) { return project_to_segment(p, a, b).distance_m; }

/// Longitude difference wrapped into [-180, 180).
double wrap_lon_delta(double dlon);

/// Half-widths (degrees) of a lat/lon box around `center` that contains every
/// point within `radius_m` great-circle distance. dlon is >= 180 when the box
/// must span all longitudes.
struct DegreeBox {
    double dlat;
    double dlon;
};
DegreeBox bounding_degrees(LatLon center, double radius_m);

}  // namespace crashbench::geo
