#pragma once

// Source ingestion: delimited state tables -> canonical records, driven by
// declarative per-source mapping configs.
//
// Mapping config format (UTF-8 text, '#' starts a comment):
//
//   source = TX CRIS
//   delimiter = comma            # comma | tab | auto
//
//   [columns]                    # canonical field = source column
//   crash_id = Crash_ID
//   vehicle_class = Veh_Body_Styl_ID
//
//   [constants]                  # canonical field = fixed value
//   state = TX
//
//   [dictionary.vehicle_class]   # source code = canonical member
//   PC = Passenger
//   * = Unknown                  # explicit fallback (default: Unknown)
//
//   [derive.vehicle_class]       # ordered; first matching rule wins
//   HeavyVehicle = Cmv_GVWR > 10000
//   Passenger = Veh_Body_Styl_ID in {PC, SV} && Cmv_GVWR <= 10000
//
//   [unmapped]                   # fields deliberately left without a source
//   crash_type
//
// Derive conditions: `COL in {a, b}`, `COL not in {..}`, `COL = v`,
// `COL != v`, `COL < n` (also <=, >, >=; numeric), `COL empty`,
// `COL present`, joined with `&&`.

#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "crashbench/model.hpp"

namespace crashbench {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Hard data error: malformed header, bound column missing from a table.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InconsistentVmt : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DeriveCondition {
    enum class Op { In, NotIn, Eq, Ne, Lt, Le, Gt, Ge, Empty, Present };
    std::string column;
    Op op = Op::Eq;
    std::vector<std::string> values;
    double number = 0.0;
};

struct DeriveRule {
    std::string member;
    std::vector<DeriveCondition> all_of;
};

struct ValueDictionary {
    std::map<std::string, std::string> entries;
    std::optional<std::string> fallback;
};

enum class TableKind { Crash, Unit, Person, Vmt };

class MappingConfig {
public:
    static MappingConfig parse(std::istream& in, const std::string& origin = "<config>");
    static MappingConfig load(const std::filesystem::path& path);

    /// Throws ConfigError when a required canonical field for `kind` has
    /// neither a binding, a derivation nor a constant.
    void validate(TableKind kind) const;

    bool binds(const std::string& field) const;
    bool is_unmapped(const std::string& field) const { return unmapped.count(field) > 0; }

    std::string source;
    char delimiter = 0;  // 0 = detect
    std::map<std::string, std::string> columns;
    std::map<std::string, std::string> constants;
    std::map<std::string, ValueDictionary> dictionaries;
    std::map<std::string, std::vector<DeriveRule>> derivations;
    std::set<std::string> unmapped;
};

struct SkippedRow {
    std::string table;
    std::size_t line = 0;
    std::string reason;
};

struct TableCounts {
    std::size_t rows_read = 0;
    std::size_t rows_used = 0;
    std::size_t rows_skipped = 0;
};

struct IngestReport {
    std::string source;
    TableCounts crashes;
    TableCounts units;
    TableCounts persons;
    TableCounts vmt;
    std::size_t records_emitted = 0;
    std::size_t missing_location = 0;
    std::vector<SkippedRow> skipped;
    std::map<std::string, std::size_t> unknowns;  // canonical field -> Unknown count
};

struct CrashTableSources {
    std::istream* crashes = nullptr;
    std::istream* units = nullptr;    // null: unit fields are read from the crash rows
    std::istream* persons = nullptr;  // optional
};

struct CrashLoad {
    std::vector<CrashRecord> records;
    IngestReport report;
};

/// Records come out in first-appearance order of their crash id.
CrashLoad load_crash_table(const CrashTableSources& sources, const MappingConfig& config);

struct VmtLoad {
    std::vector<VmtRecord> records;
    IngestReport report;
};

/// Rows sharing (state, county, functional class, year) are summed.
VmtLoad load_vmt_table(std::istream& source, const MappingConfig& config);

/// Adds SurfaceStreet = AllRoads - Freeway for every county-year that has
/// both but no direct SurfaceStreet record. Throws InconsistentVmt when the
/// difference is not positive or Freeway exceeds AllRoads.
std::vector<VmtRecord> derive_surface_vmt(std::vector<VmtRecord> records);

// ---------------------------------------------------------------------------
// Geocoding

struct GeocodeRequest {
    std::string state;
    std::string locator;
    std::string primary_road;
    std::string secondary_road;

    /// Normalized cache key: upper-cased, whitespace-collapsed fields joined
    /// with '|'.
    std::string key() const;
};

/// Retryable transport failure raised by a GeocoderClient.
class GeocoderTransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeocoderClient {
public:
    virtual ~GeocoderClient() = default;
    virtual std::optional<LatLon> geocode(const GeocodeRequest& request) = 0;
};

/// Fixed request -> point table.
class StubGeocoder : public GeocoderClient {
public:
    void add(const GeocodeRequest& request, LatLon point);
    std::optional<LatLon> geocode(const GeocodeRequest& request) override;

private:
    std::map<std::string, LatLon> points_;
};

/// Append-only file cache (`key<TAB>lat<TAB>lon` lines; later lines win).
/// Without an upstream client it replays the cache and misses resolve to
/// nothing; with one, misses are forwarded and resolved points appended.
class CachedGeocoder : public GeocoderClient {
public:
    explicit CachedGeocoder(std::filesystem::path cache_file, GeocoderClient* upstream = nullptr);
    std::optional<LatLon> geocode(const GeocodeRequest& request) override;
    std::size_t size() const { return cache_.size(); }

private:
    std::filesystem::path path_;
    GeocoderClient* upstream_;
    std::map<std::string, LatLon> cache_;
};

struct GeocodeFailure {
    std::string crash_id;
    std::string message;
    bool retryable = true;
};

struct GeocodeSummary {
    std::size_t attempted = 0;
    std::size_t resolved = 0;
    std::size_t unresolved = 0;  // includes failures
    std::vector<GeocodeFailure> failures;
};

struct GeocodeResult {
    std::vector<CrashRecord> records;
    GeocodeSummary summary;
};

GeocodeRequest geocode_request_for(const CrashRecord& record);

/// Records that already have a location are returned untouched.
GeocodeResult geocode_missing(std::vector<CrashRecord> records, GeocoderClient& client);

}  // namespace crashbench
