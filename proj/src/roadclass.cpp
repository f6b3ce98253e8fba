#include "crashbench/roadclass.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>

#include "json.hpp"

#include "crashbench/geo.hpp"
#include "crashbench/text.hpp"

namespace crashbench {

namespace {

// Boundary slack for the inclusive threshold: absorbs haversine rounding for a
// point placed exactly at the threshold distance.
constexpr double kThresholdSlackM = 1e-6;

const std::set<std::string> kDirectionTokens{"N",  "S",  "E",  "W",  "NB", "SB", "EB", "WB", "NORTHBOUND",
                                             "SOUTHBOUND", "EASTBOUND", "WESTBOUND"};

std::vector<std::string> tokens_of(std::string_view normalized) {
    std::vector<std::string> out;
    for (auto& t : text::split(normalized, ' ')) {
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

bool contains_run(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
    if (needle.empty() || needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

std::string expand_template(const std::string& tmpl, const std::smatch& m) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '$' && i + 1 < tmpl.size() && std::isdigit(static_cast<unsigned char>(tmpl[i + 1]))) {
            const auto group = static_cast<std::size_t>(tmpl[i + 1] - '0');
            if (group < m.size()) out += m[group].str();
            ++i;
        } else {
            out += tmpl[i];
        }
    }
    return out;
}

}  // namespace

std::vector<NamePattern> default_name_patterns() {
    const std::string generic = R"(\b(?:HIGHWAY|HWY|ROUTE|RTE|RT)\s?0*(\d{1,3})\b)";
    return {
        {R"(\b(?:INTERSTATE HIGHWAY|INTERSTATE HWY|INTERSTATE|IH|I)\s?0*(\d{1,3})\b)", "I-$1"},
        {R"(\b(?:US HIGHWAY|US HWY|US ROUTE|US RTE|U S|US)\s?0*(\d{1,3})\b)", "US-$1"},
        {R"(\b(?:STATE ROUTE|STATE RTE|STATE HIGHWAY|STATE HWY|SR|SH|CA|AZ|GA|TX)\s?0*(\d{1,3})\b)", "SR-$1"},
        {R"(\b(?:STATE LOOP|LOOP|SL)\s?0*(\d{1,3})\b)", "LOOP-$1"},
        // Bare "HWY 101" style names: first indexed route family wins.
        {generic, "US-$1"},
        {generic, "SR-$1"},
        {generic, "I-$1"},
    };
}

std::string normalize_road_name(std::string_view name) {
    static const std::regex slash_dir(R"(\b[NSEW]\s*/\s*B\b)");
    std::string s = std::regex_replace(text::upper(name), slash_dir, " ");
    for (auto& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c))) c = ' ';
    }
    auto tokens = tokens_of(s);
    while (!tokens.empty() && kDirectionTokens.count(tokens.back())) tokens.pop_back();
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

FreewaySegmentIndex::FreewaySegmentIndex(std::vector<FreewaySegment> segments, const AliasTable& aliases,
                                         std::vector<NamePattern> patterns, double cell_degrees)
    : segments_(std::move(segments)), cell_deg_(cell_degrees) {
    if (!(cell_deg_ > 0.0)) throw std::invalid_argument("grid cell size must be positive");

    std::map<std::string, std::string> alias_route;
    auto add_alias = [&](const std::string& alias, const std::string& route) {
        const std::string norm = normalize_road_name(alias);
        if (norm.empty()) return;
        auto [it, inserted] = alias_route.try_emplace(norm, route);
        if (!inserted && it->second != route) {
            throw std::invalid_argument("alias '" + norm + "' resolves to both " + it->second + " and " + route);
        }
    };

    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const auto& seg = segments_[s];
        if (seg.route_id.empty()) throw std::invalid_argument("freeway segment " + std::to_string(s) + " has no route id");
        if (seg.polyline.size() < 2) {
            throw std::invalid_argument("freeway segment " + std::to_string(s) + " (" + seg.route_id +
                                        ") needs at least two vertices");
        }
        for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
            if (seg.polyline[i] == seg.polyline[i - 1]) {
                throw std::invalid_argument("freeway segment " + std::to_string(s) + " (" + seg.route_id +
                                            ") repeats vertex " + std::to_string(i));
            }
        }
        auto [rit, inserted] = route_always_.try_emplace(seg.route_id, seg.always_freeway);
        if (!inserted) rit->second = rit->second && seg.always_freeway;
        for (const auto& name : seg.display_names) add_alias(name, seg.route_id);

        for (std::size_t i = 1; i < seg.polyline.size(); ++i) {
            const LatLon a = seg.polyline[i - 1];
            const LatLon b = seg.polyline[i];
            const std::size_t id = edges_.size();
            edges_.push_back({s, a, b, std::min(a.lat, b.lat), std::max(a.lat, b.lat), std::min(a.lon, b.lon),
                              std::max(a.lon, b.lon)});
            all_edges_.push_back(id);
            route_edges_[seg.route_id].push_back(id);
        }
    }
    for (const auto& [route, names] : aliases) {
        for (const auto& name : names) add_alias(name, route);
    }
    for (const auto& [alias, route] : alias_route) alias_tokens_.emplace_back(tokens_of(alias), route);
    std::stable_sort(alias_tokens_.begin(), alias_tokens_.end(),
                     [](const auto& x, const auto& y) { return x.first.size() > y.first.size(); });

    for (auto& p : patterns) {
        try {
            patterns_.push_back({std::regex(p.expression, std::regex::ECMAScript), p.route_template});
        } catch (const std::regex_error& e) {
            throw std::invalid_argument("invalid road name pattern '" + p.expression + "': " + e.what());
        }
    }

    for (std::size_t id = 0; id < edges_.size(); ++id) {
        const auto& e = edges_[id];
        const auto lat0 = static_cast<long long>(std::floor(e.min_lat / cell_deg_));
        const auto lat1 = static_cast<long long>(std::floor(e.max_lat / cell_deg_));
        const auto lon0 = static_cast<long long>(std::floor(e.min_lon / cell_deg_));
        const auto lon1 = static_cast<long long>(std::floor(e.max_lon / cell_deg_));
        for (auto i = lat0; i <= lat1; ++i) {
            for (auto j = lon0; j <= lon1; ++j) grid_[cell_key(i, j)].push_back(id);
        }
    }
}

std::int64_t FreewaySegmentIndex::cell_key(long long lat_cell, long long lon_cell) const {
    constexpr long long kOffset = 1LL << 30;
    return ((lat_cell + kOffset) << 32) ^ (lon_cell + kOffset);
}

NameMatch FreewaySegmentIndex::classify_route(const std::string& route_id) const {
    auto it = route_always_.find(route_id);
    if (it == route_always_.end()) return {};
    return {it->second ? NameMatchKind::AlwaysFreeway : NameMatchKind::Ambiguous, route_id};
}

NameMatch FreewaySegmentIndex::match_road_name(std::string_view name) const {
    const std::string norm = normalize_road_name(name);
    if (norm.empty()) return {};
    const auto tokens = tokens_of(norm);
    for (const auto& [alias, route] : alias_tokens_) {
        if (contains_run(tokens, alias)) return classify_route(route);
    }
    for (const auto& p : patterns_) {
        std::smatch m;
        if (std::regex_search(norm, m, p.re)) {
            const std::string route = expand_template(p.route_template, m);
            if (has_route(route)) return classify_route(route);
        }
    }
    return {};
}

const std::vector<std::size_t>& FreewaySegmentIndex::edges_for(const std::optional<std::string>& route) const {
    if (!route) {
        if (all_edges_.empty()) throw NoSegments("freeway index is empty");
        return all_edges_;
    }
    auto it = route_edges_.find(*route);
    if (it == route_edges_.end() || it->second.empty()) throw NoSegments("no freeway segments for route " + *route);
    return it->second;
}

std::vector<std::size_t> FreewaySegmentIndex::candidate_edges(LatLon point, double radius_m) const {
    const auto box = geo::bounding_degrees(point, radius_m);
    const double lat_lo = point.lat - box.dlat, lat_hi = point.lat + box.dlat;
    const double lon_lo = point.lon - box.dlon, lon_hi = point.lon + box.dlon;
    auto overlaps = [&](const Edge& e) {
        if (e.max_lat < lat_lo || e.min_lat > lat_hi) return false;
        if (box.dlon >= 180.0) return true;
        return !(e.max_lon < lon_lo || e.min_lon > lon_hi);
    };

    std::vector<std::size_t> out;
    const auto lat0 = static_cast<long long>(std::floor(lat_lo / cell_deg_));
    const auto lat1 = static_cast<long long>(std::floor(lat_hi / cell_deg_));
    const auto lon0 = static_cast<long long>(std::floor(lon_lo / cell_deg_));
    const auto lon1 = static_cast<long long>(std::floor(lon_hi / cell_deg_));
    const double cells = static_cast<double>(lat1 - lat0 + 1) * static_cast<double>(lon1 - lon0 + 1);
    if (box.dlon >= 180.0 || cells > static_cast<double>(grid_.size())) {
        for (std::size_t id = 0; id < edges_.size(); ++id) {
            if (overlaps(edges_[id])) out.push_back(id);
        }
        return out;
    }
    for (auto i = lat0; i <= lat1; ++i) {
        for (auto j = lon0; j <= lon1; ++j) {
            auto it = grid_.find(cell_key(i, j));
            if (it == grid_.end()) continue;
            for (auto id : it->second) {
                if (overlaps(edges_[id])) out.push_back(id);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double FreewaySegmentIndex::distance_to_nearest_freeway(LatLon point, const std::optional<std::string>& route) const {
    edges_for(route);  // NoSegments check
    double radius = std::max(500.0, cell_deg_ * geo::kEarthRadiusM * std::numbers::pi / 180.0);
    while (radius < std::numbers::pi * geo::kEarthRadiusM) {
        double best = std::numeric_limits<double>::infinity();
        for (auto id : candidate_edges(point, radius)) {
            const auto& e = edges_[id];
            if (route && segments_[e.segment].route_id != *route) continue;
            best = std::min(best, geo::point_segment_distance_m(point, e.a, e.b));
        }
        // Every edge closer than `radius` is among the candidates, so a hit
        // within the radius is the global minimum.
        if (best <= radius) return best;
        radius *= 4.0;
    }
    return brute_force_distance(point, route);
}

double FreewaySegmentIndex::brute_force_distance(LatLon point, const std::optional<std::string>& route) const {
    double best = std::numeric_limits<double>::infinity();
    for (auto id : edges_for(route)) {
        const auto& e = edges_[id];
        best = std::min(best, geo::point_segment_distance_m(point, e.a, e.b));
    }
    return best;
}

RoadClassification classify_road(const CrashRecord& record, const FreewaySegmentIndex& index,
                                 const RoadClassOptions& options) {
    const NameMatch match = index.match_road_name(record.primary_road_name);
    RoadClassification out;
    out.route_id = match.route_id;
    switch (match.kind) {
        case NameMatchKind::NonFreeway:
            out.road = RoadClass::SurfaceStreet;
            out.provenance = RoadProvenance::ByNameNonFreeway;
            return out;
        case NameMatchKind::AlwaysFreeway:
            out.road = RoadClass::Freeway;
            out.provenance = RoadProvenance::ByNameAlways;
            return out;
        case NameMatchKind::Ambiguous:
            break;
    }
    const auto& loc = record.location;
    const bool usable = loc && loc->lat >= -90.0 && loc->lat <= 90.0 && loc->lon >= -180.0 && loc->lon <= 180.0;
    if (!usable) {
        out.road = RoadClass::SurfaceStreet;
        out.provenance = RoadProvenance::Unresolvable;
        return out;
    }
    const std::optional<std::string> filter =
        options.scope == ProximityScope::NameMatchedRoute ? std::optional<std::string>(match.route_id) : std::nullopt;
    const double d = index.distance_to_nearest_freeway(*loc, filter);
    out.distance_m = d;
    out.provenance = RoadProvenance::ByProximity;
    out.road = d <= options.threshold_m + kThresholdSlackM ? RoadClass::Freeway : RoadClass::SurfaceStreet;
    return out;
}

std::string_view to_string(RoadProvenance p) {
    switch (p) {
        case RoadProvenance::ByNameAlways: return "ByNameAlways";
        case RoadProvenance::ByProximity: return "ByProximity";
        case RoadProvenance::ByNameNonFreeway: return "ByNameNonFreeway";
        case RoadProvenance::Unresolvable: return "Unresolvable";
    }
    return "Unresolvable";
}

std::string_view to_string(NameMatchKind k) {
    switch (k) {
        case NameMatchKind::NonFreeway: return "NonFreeway";
        case NameMatchKind::AlwaysFreeway: return "AlwaysFreeway";
        case NameMatchKind::Ambiguous: return "Ambiguous";
    }
    return "NonFreeway";
}

// ---------------------------------------------------------------------------
// Loaders

std::vector<FreewaySegment> load_freeway_segments(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("freeway segment file is not valid JSON: ") + e.what());
    }
    const auto& features = doc.contains("features") ? doc.at("features") : doc;
    if (!features.is_array()) throw std::invalid_argument("freeway segment file has no feature array");

    std::vector<FreewaySegment> out;
    for (std::size_t f = 0; f < features.size(); ++f) {
        const auto& feature = features[f];
        const std::string where = "feature " + std::to_string(f);
        try {
            const auto& props = feature.at("properties");
            const auto& geom = feature.at("geometry");
            const std::string type = geom.at("type").get<std::string>();
            std::vector<nlohmann::json> lines;
            if (type == "LineString") {
                lines.push_back(geom.at("coordinates"));
            } else if (type == "MultiLineString") {
                for (const auto& l : geom.at("coordinates")) lines.push_back(l);
            } else {
                throw std::invalid_argument(where + ": unsupported geometry " + type);
            }
            for (const auto& line : lines) {
                FreewaySegment seg;
                seg.route_id = props.at("route_id").get<std::string>();
                if (props.contains("names")) seg.display_names = props.at("names").get<std::vector<std::string>>();
                seg.always_freeway = props.value("always_freeway", false);
                for (const auto& c : line) {
                    LatLon p{c.at(1).get<double>(), c.at(0).get<double>()};
                    if (!seg.polyline.empty() && seg.polyline.back() == p) continue;
                    seg.polyline.push_back(p);
                }
                if (seg.polyline.size() < 2) throw std::invalid_argument(where + ": line needs two distinct vertices");
                out.push_back(std::move(seg));
            }
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(where + ": " + e.what());
        }
    }
    return out;
}

std::vector<FreewaySegment> load_freeway_segments(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open freeway segment file " + path.string());
    return load_freeway_segments(in);
}

AliasTable load_alias_table(std::istream& in) {
    AliasTable out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = text::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument("alias table line " + std::to_string(lineno) + ": expected ROUTE = aliases");
        const std::string route(text::trim(body.substr(0, eq)));
        for (const auto& alias : text::split(body.substr(eq + 1), ',')) {
            const auto a = text::trim(alias);
            if (!a.empty()) out[route].emplace_back(a);
        }
    }
    return out;
}

std::vector<NamePattern> load_name_patterns(std::istream& in) {
    std::vector<NamePattern> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto arrow = body.rfind("=>");
        if (arrow == std::string_view::npos) {
            throw std::invalid_argument("name pattern line " + std::to_string(lineno) + ": expected REGEX => TEMPLATE");
        }
        out.push_back({std::string(text::trim(body.substr(0, arrow))), std::string(text::trim(body.substr(arrow + 2)))});
    }
    return out;
}

}  // namespace crashbench
