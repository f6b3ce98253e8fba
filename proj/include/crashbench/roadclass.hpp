#pragma once

// Freeway / surface-street classification of crash locations.
//
// Step one recognises the road name (alias table, then route-number patterns
// such as I-#, US-#, SR-#). Names of routes that are freeway along their whole
// extent decide the class directly. Names of routes that change class along
// the way are resolved by distance from the crash to that route's freeway
// polylines.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crashbench/model.hpp"

namespace crashbench {

struct FreewaySegment {
    std::string route_id;
    std::vector<std::string> display_names;
    std::vector<LatLon> polyline;
    bool always_freeway = false;
};

struct NamePattern {
    std::string expression;      // ECMAScript regex searched in the normalized name
    std::string route_template;  // "$1" expands to the first capture
};

/// Interstate, US route, state route and Texas loop forms.
std::vector<NamePattern> default_name_patterns();

/// Upper-cases, drops "N/B"-style direction markers and trailing direction
/// tokens (NB, SB, N, NORTHBOUND, ...), turns punctuation into spaces and
/// collapses whitespace.
std::string normalize_road_name(std::string_view name);

enum class NameMatchKind { NonFreeway, AlwaysFreeway, Ambiguous };

struct NameMatch {
    NameMatchKind kind = NameMatchKind::NonFreeway;
    std::string route_id;

    friend bool operator==(const NameMatch&, const NameMatch&) = default;
};

class NoSegments : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using AliasTable = std::map<std::string, std::vector<std::string>>;  // route_id -> aliases

/// Build-once, read-only index: safe for concurrent queries.
class FreewaySegmentIndex {
public:
    /// Throws std::invalid_argument on a segment with fewer than two vertices,
    /// repeated consecutive vertices, an empty route id, an invalid pattern,
    /// or an alias that would resolve to two different routes.
    explicit FreewaySegmentIndex(std::vector<FreewaySegment> segments, const AliasTable& aliases = {},
                                 std::vector<NamePattern> patterns = default_name_patterns(),
                                 double cell_degrees = 0.01);

    NameMatch match_road_name(std::string_view name) const;

    /// Minimum great-circle distance (m) from `point` to any freeway polyline,
    /// optionally restricted to one route. Throws NoSegments when nothing is
    /// left after filtering.
    double distance_to_nearest_freeway(LatLon point, const std::optional<std::string>& route = std::nullopt) const;

    /// Exhaustive scan over all edges; reference for the grid query.
    double brute_force_distance(LatLon point, const std::optional<std::string>& route = std::nullopt) const;

    /// Edge ids whose bounding box lies within `radius_m` of `point`: a
    /// superset of the edges truly within that distance.
    std::vector<std::size_t> candidate_edges(LatLon point, double radius_m) const;

    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<FreewaySegment>& segments() const { return segments_; }
    bool has_route(const std::string& route_id) const { return route_always_.count(route_id) > 0; }

private:
    struct Edge {
        std::size_t segment;
        LatLon a, b;
        double min_lat, max_lat, min_lon, max_lon;
    };
    struct CompiledPattern {
        std::regex re;
        std::string route_template;
    };

    NameMatch classify_route(const std::string& route_id) const;
    const std::vector<std::size_t>& edges_for(const std::optional<std::string>& route) const;
    std::int64_t cell_key(long long lat_cell, long long lon_cell) const;

    std::vector<FreewaySegment> segments_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> all_edges_;
    std::map<std::string, std::vector<std::size_t>> route_edges_;
    std::map<std::string, bool> route_always_;
    std::vector<std::pair<std::vector<std::string>, std::string>> alias_tokens_;  // longest first
    std::vector<CompiledPattern> patterns_;
    double cell_deg_;
    std::unordered_map<std::int64_t, std::vector<std::size_t>> grid_;
};

enum class RoadProvenance { ByNameAlways, ByProximity, ByNameNonFreeway, Unresolvable };

enum class ProximityScope { NameMatchedRoute, AnyFreeway };

struct RoadClassOptions {
    double threshold_m = 400.0;  // inclusive
    ProximityScope scope = ProximityScope::NameMatchedRoute;
};

struct RoadClassification {
    RoadClass road = RoadClass::SurfaceStreet;
    RoadProvenance provenance = RoadProvenance::ByNameNonFreeway;
    std::string route_id;
    std::optional<double> distance_m;
};

RoadClassification classify_road(const CrashRecord& record, const FreewaySegmentIndex& index,
                                 const RoadClassOptions& options = {});

std::string_view to_string(RoadProvenance p);
std::string_view to_string(NameMatchKind k);

/// LineString / MultiLineString features with properties route_id, names[],
/// always_freeway. Coordinates are [lon, lat]. Repeated consecutive vertices
/// are collapsed.
std::vector<FreewaySegment> load_freeway_segments(std::istream& in);
std::vector<FreewaySegment> load_freeway_segments(const std::filesystem::path& path);

/// Lines of `ROUTE_ID = alias one, alias two`; '#' comments.
AliasTable load_alias_table(std::istream& in);

/// Lines of `REGEX => TEMPLATE`; '#' comments.
std::vector<NamePattern> load_name_patterns(std::istream& in);

}  // namespace crashbench
