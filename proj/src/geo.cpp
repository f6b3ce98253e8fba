#include "crashbench/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crashbench::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

double wrap_lon_delta(double dlon) {
    dlon = std::fmod(dlon + 180.0, 360.0);
    if (dlon < 0.0) dlon += 360.0;
    return dlon - 180.0;
}

double haversine_m(LatLon a, LatLon b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = wrap_lon_delta(b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

SegmentProjection project_to_segment(LatLon p, LatLon a, LatLon b) {
    const double k = kEarthRadiusM * kDegToRad;
    const double cos_lat = std::cos(p.lat * kDegToRad);
    const double ax = wrap_lon_delta(a.lon - p.lon) * cos_lat * k;
    const double ay = (a.lat - p.lat) * k;
    const double bx = wrap_lon_delta(b.lon - p.lon) * cos_lat * k;
    const double by = (b.lat - p.lat) * k;
    const double dx = bx - ax;
    const double dy = by - ay;
    const double len2 = dx * dx + dy * dy;

    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(-(ax * dx + ay * dy) / len2, 0.0, 1.0);

    SegmentProjection out;
    out.t = t;
    if (t == 0.0) {
        out.foot = a;
    } else if (t == 1.0) {
        out.foot = b;
    } else {
        const double dlon = wrap_lon_delta(b.lon - a.lon);
        out.foot = {a.lat + t * (b.lat - a.lat), a.lon + t * dlon};
    }
    out.distance_m = haversine_m(p, out.foot);
    return out;
}

DegreeBox bounding_degrees(LatLon center, double radius_m) {
    const double angle = radius_m / kEarthRadiusM;  // radians
    // Latitude difference is a lower bound on angular distance.
    const double dlat = angle * kRadToDeg * (1.0 + 1e-9) + 1e-12;
    const double lat_max = std::min(90.0, std::abs(center.lat) + dlat);
    if (lat_max >= 89.999999 || angle >= std::numbers::pi / 2.0) return {dlat, 360.0};
    // hav(d) >= cos(phi1) cos(phi2) hav(dlambda) bounds dlambda given d.
    const double hav_d = std::sin(angle / 2.0) * std::sin(angle / 2.0);
    const double denom = std::cos(center.lat * kDegToRad) * std::cos(lat_max * kDegToRad);
    const double ratio = hav_d / denom;
    if (ratio >= 1.0) return {dlat, 360.0};
    const double dlon = 2.0 * std::asin(std::sqrt(ratio)) * kRadToDeg * (1.0 + 1e-9) + 1e-12;
    return {dlat, dlon};
}

}  // namespace crashbench::geo
