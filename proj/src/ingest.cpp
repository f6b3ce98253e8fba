#include "crashbench/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "crashbench/text.hpp"

namespace crashbench {

namespace {

using text::trim;

const std::set<std::string> kCrashFields{
    "crash_id", "state", "county", "year", "latitude", "longitude", "locator", "primary_road", "secondary_road",
    "worst_injury", "junction_relation", "manner_of_collision", "event_sequence"};
const std::set<std::string> kUnitFields{"unit_crash_id", "unit_id", "vehicle_class", "in_transport",
                                        "airbag_deployed", "maneuver", "travel_direction", "first_contact_event"};
const std::set<std::string> kPersonFields{"person_crash_id", "person_injury"};
const std::set<std::string> kVmtFields{"state", "county", "functional_class", "year", "vmt"};
// Fields that may appear in [unmapped] without having a table of their own.
const std::set<std::string> kMarkerFields{"crash_type"};

std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

DeriveCondition parse_condition(std::string_view raw, const std::string& where) {
    static const std::regex re(R"(^\s*([^\s=<>!]+)\s*(not\s+in|in|<=|>=|!=|<|>|=|empty|present)\s*(.*?)\s*$)");
    std::cmatch m;
    const std::string s(raw);
    if (!std::regex_match(s.c_str(), m, re)) throw ConfigError(where + ": cannot parse condition '" + s + "'");
    DeriveCondition c;
    c.column = m[1].str();
    std::string op = m[2].str();
    const std::string rest = m[3].str();
    if (op.rfind("not", 0) == 0) op = "not in";

    auto parse_set = [&](const std::string& body) {
        std::string_view b = trim(body);
        if (b.size() < 2 || b.front() != '{' || b.back() != '}') {
            throw ConfigError(where + ": expected {a, b, ...} in '" + s + "'");
        }
        std::vector<std::string> values;
        for (auto& v : text::split(b.substr(1, b.size() - 2), ',')) {
            auto t = trim(v);
            if (!t.empty()) values.emplace_back(t);
        }
        return values;
    };

    if (op == "in" || op == "not in") {
        c.op = op == "in" ? DeriveCondition::Op::In : DeriveCondition::Op::NotIn;
        c.values = parse_set(rest);
    } else if (op == "empty" || op == "present") {
        if (!rest.empty()) throw ConfigError(where + ": unexpected text after '" + op + "' in '" + s + "'");
        c.op = op == "empty" ? DeriveCondition::Op::Empty : DeriveCondition::Op::Present;
    } else if (op == "=" || op == "!=") {
        c.op = op == "=" ? DeriveCondition::Op::Eq : DeriveCondition::Op::Ne;
        c.values = {std::string(trim(rest))};
    } else {
        auto n = text::parse_double(rest);
        if (!n) throw ConfigError(where + ": numeric comparison needs a number in '" + s + "'");
        c.number = *n;
        c.op = op == "<" ? DeriveCondition::Op::Lt
             : op == "<=" ? DeriveCondition::Op::Le
             : op == ">" ? DeriveCondition::Op::Gt
                         : DeriveCondition::Op::Ge;
    }
    return c;
}

bool holds(const DeriveCondition& c, std::string_view value) {
    value = trim(value);
    auto contains = [&] { return std::find(c.values.begin(), c.values.end(), value) != c.values.end(); };
    switch (c.op) {
        case DeriveCondition::Op::In: return contains();
        case DeriveCondition::Op::NotIn: return !contains();
        case DeriveCondition::Op::Eq: return value == c.values.front();
        case DeriveCondition::Op::Ne: return value != c.values.front();
        case DeriveCondition::Op::Empty: return value.empty();
        case DeriveCondition::Op::Present: return !value.empty();
        default: break;
    }
    auto n = text::parse_double(value);
    if (!n) return false;
    switch (c.op) {
        case DeriveCondition::Op::Lt: return *n < c.number;
        case DeriveCondition::Op::Le: return *n <= c.number;
        case DeriveCondition::Op::Gt: return *n > c.number;
        case DeriveCondition::Op::Ge: return *n >= c.number;
        default: return false;
    }
}

// Resolves canonical fields against one table's rows.
class FieldResolver {
public:
    FieldResolver(const MappingConfig& config, const std::vector<std::string>& header,
                  const std::set<std::string>& fields, const std::string& table)
        : config_(config) {
        for (std::size_t i = 0; i < header.size(); ++i) index_[header[i]] = i;
        auto require = [&](const std::string& column, const std::string& field) {
            if (!index_.count(column)) {
                throw IngestError(table + " table: column '" + column + "' bound to '" + field +
                                  "' is missing from the header");
            }
        };
        for (const auto& field : fields) {
            if (config.is_unmapped(field)) continue;
            if (auto it = config.columns.find(field); it != config.columns.end()) require(it->second, field);
            if (auto it = config.derivations.find(field); it != config.derivations.end()) {
                for (const auto& rule : it->second) {
                    for (const auto& cond : rule.all_of) require(cond.column, field);
                }
            }
        }
    }

    std::optional<std::string> resolve(const std::string& field, const std::vector<std::string>& row) const {
        if (config_.is_unmapped(field)) return std::nullopt;
        if (auto it = config_.derivations.find(field); it != config_.derivations.end()) {
            for (const auto& rule : it->second) {
                const bool match = std::all_of(rule.all_of.begin(), rule.all_of.end(),
                                               [&](const DeriveCondition& c) { return holds(c, cell(c.column, row)); });
                if (match) return rule.member;
            }
        }
        if (auto it = config_.columns.find(field); it != config_.columns.end()) {
            const std::string raw(trim(cell(it->second, row)));
            if (auto dict = config_.dictionaries.find(field); dict != config_.dictionaries.end()) {
                if (auto e = dict->second.entries.find(raw); e != dict->second.entries.end()) return e->second;
                return dict->second.fallback.value_or("Unknown");
            }
            if (!raw.empty()) return raw;
        }
        if (auto it = config_.constants.find(field); it != config_.constants.end()) return it->second;
        return std::nullopt;
    }

    std::string raw(const std::string& column, const std::vector<std::string>& row) const {
        return std::string(trim(cell(column, row)));
    }

private:
    std::string_view cell(const std::string& column, const std::vector<std::string>& row) const {
        auto it = index_.find(column);
        if (it == index_.end() || it->second >= row.size()) return {};
        return row[it->second];
    }

    const MappingConfig& config_;
    std::unordered_map<std::string, std::size_t> index_;
};

std::vector<std::string> read_header(text::CsvReader& reader, const std::string& table) {
    try {
        return reader.header();
    } catch (const text::CsvError& e) {
        throw IngestError(table + " table: malformed header: " + e.what());
    }
}

std::optional<bool> parse_bool(std::string_view s) {
    const std::string u = text::upper(trim(s));
    if (u == "TRUE" || u == "YES" || u == "Y" || u == "1") return true;
    if (u == "FALSE" || u == "NO" || u == "N" || u == "0") return false;
    return std::nullopt;
}

std::optional<std::vector<ContactEvent>> parse_event_sequence(std::string_view s) {
    std::vector<ContactEvent> events;
    s = trim(s);
    if (s.empty()) return std::nullopt;
    for (const auto& part : text::split(s, ';')) {
        ContactEvent ev;
        if (!trim(part).empty()) {
            for (const auto& id : text::split(part, '+')) {
                auto v = text::parse_int(id);
                if (!v) return std::nullopt;
                ev.unit_ids.push_back(static_cast<int>(*v));
            }
        }
        events.push_back(std::move(ev));
    }
    return events;
}

std::string crash_key_column(const MappingConfig& config, const std::string& field) {
    if (auto it = config.columns.find(field); it != config.columns.end()) return it->second;
    return config.columns.at("crash_id");
}

struct RowReader {
    text::CsvReader reader;
    std::vector<std::string> header;
    RowReader(std::istream& in, char delimiter, const std::string& table)
        : reader(in, delimiter), header(read_header(reader, table)) {}
};

// Reads the next row, recording structural failures as skipped rows.
bool next_row(RowReader& rr, std::vector<std::string>& row, TableCounts& counts, IngestReport& report,
              const std::string& table) {
    while (true) {
        try {
            if (!rr.reader.next(row)) return false;
        } catch (const text::CsvError& e) {
            ++counts.rows_read;
            ++counts.rows_skipped;
            report.skipped.push_back({table, rr.reader.line(), e.what()});
            return false;
        }
        ++counts.rows_read;
        if (row.size() != rr.header.size()) {
            ++counts.rows_skipped;
            report.skipped.push_back({table, rr.reader.line(),
                                      "expected " + std::to_string(rr.header.size()) + " fields, got " +
                                          std::to_string(row.size())});
            continue;
        }
        return true;
    }
}

class CrashBuilder {
public:
    CrashBuilder(const MappingConfig& config, IngestReport& report) : config_(config), report_(report) {}

    void count_unknown(const std::string& field) { ++report_.unknowns[field]; }

    // Returns an error message when the row cannot produce a crash.
    std::optional<std::string> fill_crash(const FieldResolver& r, const std::vector<std::string>& row,
                                          CrashRecord& rec) {
        rec.crash_id = r.resolve("crash_id", row).value_or("");
        if (rec.crash_id.empty()) return "empty crash id";
        auto year = text::parse_int(r.resolve("year", row).value_or(""));
        if (!year) return "invalid year";
        rec.year = static_cast<int>(*year);
        rec.state = r.resolve("state", row).value_or("");
        rec.county = r.resolve("county", row).value_or("");
        if (rec.state.empty() || rec.county.empty()) return "missing state or county";

        auto lat = text::parse_double(r.resolve("latitude", row).value_or(""));
        auto lon = text::parse_double(r.resolve("longitude", row).value_or(""));
        // (0, 0) is the usual placeholder for "not recorded".
        if (lat && lon && !(*lat == 0.0 && *lon == 0.0)) rec.location = LatLon{*lat, *lon};

        rec.locator = r.resolve("locator", row).value_or("");
        rec.primary_road_name = r.resolve("primary_road", row).value_or("");
        if (auto s = r.resolve("secondary_road", row)) rec.secondary_road_name = *s;
        rec.worst_injury = parse_kabco(r.resolve("worst_injury", row).value_or(""));
        rec.junction_relation = parse_junction_relation(r.resolve("junction_relation", row).value_or(""));
        rec.manner_of_collision = parse_manner(r.resolve("manner_of_collision", row).value_or(""));
        if (auto seq = parse_event_sequence(r.resolve("event_sequence", row).value_or(""))) {
            rec.event_sequence = std::move(*seq);
            crash_has_sequence_.insert(rec.crash_id);
        }
        rec.typology_available = !config_.is_unmapped("crash_type");
        return std::nullopt;
    }

    std::optional<std::string> fill_unit(const FieldResolver& r, const std::vector<std::string>& row,
                                         VehicleUnit& unit, std::optional<int>& first_contact) {
        auto id = text::parse_int(r.resolve("unit_id", row).value_or(""));
        if (!id) return "invalid unit id";
        unit.unit_id = static_cast<int>(*id);
        unit.vehicle_class = parse_vehicle_class(r.resolve("vehicle_class", row).value_or(""));
        if (unit.vehicle_class == VehicleClass::Unknown) count_unknown("vehicle_class");

        auto in_transport = parse_bool(r.resolve("in_transport", row).value_or(""));
        if (!in_transport) count_unknown("in_transport");
        unit.in_transport = in_transport.value_or(true);
        if (unit.vehicle_class == VehicleClass::Pedestrian || unit.vehicle_class == VehicleClass::Cyclist) {
            unit.in_transport = false;
        }

        unit.airbag_deployed = parse_tristate(r.resolve("airbag_deployed", row).value_or(""));
        if (unit.airbag_deployed == Tristate::Unknown) count_unknown("airbag_deployed");
        unit.maneuver = parse_maneuver(r.resolve("maneuver", row).value_or(""));
        if (unit.maneuver == Maneuver::Unknown) count_unknown("maneuver");
        if (auto d = r.resolve("travel_direction", row)) {
            auto dir = parse_direction(*d);
            if (dir != Direction::Unknown) unit.travel_direction = dir;
        }
        if (auto fc = text::parse_int(r.resolve("first_contact_event", row).value_or("")); fc && *fc >= 1) {
            first_contact = static_cast<int>(*fc);
        }
        return std::nullopt;
    }

    bool has_sequence(const std::string& crash_id) const { return crash_has_sequence_.count(crash_id) > 0; }

private:
    const MappingConfig& config_;
    IngestReport& report_;
    std::set<std::string> crash_has_sequence_;
};

// Fills first-contact indices from an explicit sequence, or builds the
// sequence from per-unit first-contact ordinals.
void link_event_sequence(CrashRecord& rec, const std::map<int, int>& ordinals, bool explicit_sequence) {
    if (explicit_sequence) {
        for (auto& unit : rec.units) {
            for (std::size_t i = 0; i < rec.event_sequence.size(); ++i) {
                const auto& ids = rec.event_sequence[i].unit_ids;
                if (std::find(ids.begin(), ids.end(), unit.unit_id) != ids.end()) {
                    unit.first_contact_event_index = i;
                    break;
                }
            }
        }
        return;
    }
    if (ordinals.empty()) return;
    int max_ordinal = 0;
    for (const auto& [id, ord] : ordinals) max_ordinal = std::max(max_ordinal, ord);
    rec.event_sequence.assign(static_cast<std::size_t>(max_ordinal), ContactEvent{});
    for (auto& unit : rec.units) {
        auto it = ordinals.find(unit.unit_id);
        if (it == ordinals.end()) continue;
        const auto idx = static_cast<std::size_t>(it->second - 1);
        rec.event_sequence[idx].unit_ids.push_back(unit.unit_id);
        unit.first_contact_event_index = idx;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// MappingConfig

MappingConfig MappingConfig::parse(std::istream& in, const std::string& origin) {
    MappingConfig cfg;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno);
        const std::string body(trim(strip_comment(line)));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = std::string(trim(std::string_view(body).substr(1, body.size() - 2)));
            const bool known = section == "columns" || section == "constants" || section == "unmapped" ||
                               section.rfind("dictionary.", 0) == 0 || section.rfind("derive.", 0) == 0;
            if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
            continue;
        }
        if (section == "unmapped") {
            cfg.unmapped.insert(body);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key(trim(std::string_view(body).substr(0, eq)));
        const std::string value(trim(std::string_view(body).substr(eq + 1)));
        if (key.empty()) throw ConfigError(where + ": empty key");

        if (section.empty()) {
            if (key == "source") {
                cfg.source = value;
            } else if (key == "delimiter") {
                if (value == "comma" || value == ",") cfg.delimiter = ',';
                else if (value == "tab" || value == "\\t") cfg.delimiter = '\t';
                else if (value == "auto") cfg.delimiter = 0;
                else throw ConfigError(where + ": delimiter must be comma, tab or auto");
            } else {
                throw ConfigError(where + ": unknown top-level key '" + key + "'");
            }
        } else if (section == "columns") {
            if (value.empty()) throw ConfigError(where + ": empty column name for '" + key + "'");
            cfg.columns[key] = value;
        } else if (section == "constants") {
            cfg.constants[key] = value;
        } else if (section.rfind("dictionary.", 0) == 0) {
            auto& dict = cfg.dictionaries[section.substr(11)];
            if (key == "*") dict.fallback = value;
            else dict.entries[key] = value;
        } else {
            DeriveRule rule;
            rule.member = key;
            for (const auto& part : text::split(value, '&')) {
                if (trim(part).empty()) continue;  // "&&" splits into an empty middle piece
                rule.all_of.push_back(parse_condition(part, where));
            }
            if (rule.all_of.empty()) throw ConfigError(where + ": derive rule without conditions");
            cfg.derivations[section.substr(7)].push_back(std::move(rule));
        }
    }
    return cfg;
}

MappingConfig MappingConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mapping config " + path.string());
    return parse(in, path.string());
}

bool MappingConfig::binds(const std::string& field) const {
    return columns.count(field) || constants.count(field) || derivations.count(field);
}

void MappingConfig::validate(TableKind kind) const {
    std::vector<std::string> required;
    switch (kind) {
        case TableKind::Crash:
            required = {"crash_id", "state", "county", "year", "primary_road"};
            if (!binds("worst_injury") && !binds("person_injury")) {
                throw ConfigError(source + ": neither worst_injury nor person_injury is bound");
            }
            break;
        case TableKind::Unit:
            required = {"unit_id", "vehicle_class", "in_transport"};
            break;
        case TableKind::Person:
            required = {"person_injury"};
            break;
        case TableKind::Vmt:
            required = {"state", "county", "functional_class", "year", "vmt"};
            break;
    }
    for (const auto& field : required) {
        if (!binds(field)) throw ConfigError(source + ": required field '" + field + "' has no binding or constant");
    }
    for (const auto& [field, dict] : dictionaries) {
        if (dict.entries.empty() && !dict.fallback) {
            throw ConfigError(source + ": dictionary for '" + field + "' is empty");
        }
    }
    for (const auto& field : unmapped) {
        if (!kCrashFields.count(field) && !kUnitFields.count(field) && !kPersonFields.count(field) &&
            !kMarkerFields.count(field)) {
            throw ConfigError(source + ": unknown field '" + field + "' in [unmapped]");
        }
    }
}

// ---------------------------------------------------------------------------
// Crash tables

CrashLoad load_crash_table(const CrashTableSources& sources, const MappingConfig& config) {
    if (!sources.crashes) throw IngestError("no crash table stream");
    config.validate(TableKind::Crash);
    const bool combined = sources.units == nullptr && config.binds("unit_id");
    if (sources.units || combined) config.validate(TableKind::Unit);

    CrashLoad out;
    auto& report = out.report;
    report.source = config.source;
    CrashBuilder builder(config, report);

    std::unordered_map<std::string, std::size_t> by_id;
    std::vector<std::map<int, int>> ordinals;  // per record: unit id -> first-contact ordinal

    auto add_unit = [&](std::size_t rec_idx, const VehicleUnit& unit, std::optional<int> first_contact,
                        const std::string& table, std::size_t line) -> bool {
        auto& rec = out.records[rec_idx];
        if (rec.find_unit(unit.unit_id)) {
            report.skipped.push_back({table, line, "duplicate unit " + std::to_string(unit.unit_id) + " in crash " +
                                                       rec.crash_id});
            return false;
        }
        rec.units.push_back(unit);
        if (first_contact) ordinals[rec_idx][unit.unit_id] = *first_contact;
        return true;
    };

    {
        std::set<std::string> fields = kCrashFields;
        if (combined) fields.insert(kUnitFields.begin(), kUnitFields.end());
        RowReader rr(*sources.crashes, config.delimiter, "crash");
        FieldResolver resolver(config, rr.header, fields, "crash");
        std::vector<std::string> row;
        while (next_row(rr, row, report.crashes, report, "crash")) {
            CrashRecord rec;
            auto error = builder.fill_crash(resolver, row, rec);
            if (!error && !combined && by_id.count(rec.crash_id)) error = "duplicate crash id " + rec.crash_id;
            VehicleUnit unit;
            std::optional<int> first_contact;
            if (!error && combined) error = builder.fill_unit(resolver, row, unit, first_contact);
            if (error) {
                ++report.crashes.rows_skipped;
                report.skipped.push_back({"crash", rr.reader.line(), *error});
                continue;
            }
            auto [it, inserted] = by_id.try_emplace(rec.crash_id, out.records.size());
            if (inserted) {
                out.records.push_back(std::move(rec));
                ordinals.emplace_back();
            }
            if (combined && !add_unit(it->second, unit, first_contact, "crash", rr.reader.line())) {
                ++report.crashes.rows_skipped;
                continue;
            }
            ++report.crashes.rows_used;
        }
    }

    if (sources.units) {
        RowReader rr(*sources.units, config.delimiter, "unit");
        std::set<std::string> fields = kUnitFields;
        FieldResolver resolver(config, rr.header, fields, "unit");
        const std::string key_col = crash_key_column(config, "unit_crash_id");
        if (std::find(rr.header.begin(), rr.header.end(), key_col) == rr.header.end()) {
            throw IngestError("unit table: crash key column '" + key_col + "' is missing from the header");
        }
        std::vector<std::string> row;
        while (next_row(rr, row, report.units, report, "unit")) {
            auto it = by_id.find(resolver.raw(key_col, row));
            std::optional<std::string> error;
            VehicleUnit unit;
            std::optional<int> first_contact;
            if (it == by_id.end()) error = "unit row references unknown crash";
            if (!error) error = builder.fill_unit(resolver, row, unit, first_contact);
            if (!error && !add_unit(it->second, unit, first_contact, "unit", rr.reader.line())) {
                ++report.units.rows_skipped;
                continue;
            }
            if (error) {
                ++report.units.rows_skipped;
                report.skipped.push_back({"unit", rr.reader.line(), *error});
                continue;
            }
            ++report.units.rows_used;
        }
    }

    if (sources.persons) {
        config.validate(TableKind::Person);
        RowReader rr(*sources.persons, config.delimiter, "person");
        FieldResolver resolver(config, rr.header, kPersonFields, "person");
        const std::string key_col = crash_key_column(config, "person_crash_id");
        if (std::find(rr.header.begin(), rr.header.end(), key_col) == rr.header.end()) {
            throw IngestError("person table: crash key column '" + key_col + "' is missing from the header");
        }
        std::vector<std::string> row;
        while (next_row(rr, row, report.persons, report, "person")) {
            auto it = by_id.find(resolver.raw(key_col, row));
            if (it == by_id.end()) {
                ++report.persons.rows_skipped;
                report.skipped.push_back({"person", rr.reader.line(), "person row references unknown crash"});
                continue;
            }
            out.records[it->second].person_injuries.push_back(
                parse_kabco(resolver.resolve("person_injury", row).value_or("")));
            ++report.persons.rows_used;
        }
    }

    for (std::size_t i = 0; i < out.records.size(); ++i) {
        auto& rec = out.records[i];
        const KabcoLevel person_worst = worst_injury(rec.person_injuries);
        if (person_worst != KabcoLevel::Unknown) rec.worst_injury = person_worst;
        if (rec.worst_injury == KabcoLevel::Unknown) builder.count_unknown("worst_injury");
        if (rec.junction_relation == JunctionRelation::Unknown) builder.count_unknown("junction_relation");
        if (rec.manner_of_collision == MannerOfCollision::Unknown) builder.count_unknown("manner_of_collision");
        if (!rec.location) ++report.missing_location;
        link_event_sequence(rec, ordinals[i], builder.has_sequence(rec.crash_id));
    }
    report.records_emitted = out.records.size();
    return out;
}

// ---------------------------------------------------------------------------
// VMT

VmtLoad load_vmt_table(std::istream& source, const MappingConfig& config) {
    config.validate(TableKind::Vmt);
    VmtLoad out;
    out.report.source = config.source;
    double scale = 1.0;
    if (auto it = config.constants.find("vmt_scale"); it != config.constants.end()) {
        auto s = text::parse_double(it->second);
        if (!s || *s <= 0.0) throw ConfigError(config.source + ": vmt_scale must be a positive number");
        scale = *s;
    }

    RowReader rr(source, config.delimiter, "vmt");
    FieldResolver resolver(config, rr.header, kVmtFields, "vmt");
    std::map<std::tuple<std::string, std::string, FunctionalClass, int>, std::size_t> index;
    std::vector<std::string> row;
    auto& counts = out.report.vmt;
    while (next_row(rr, row, counts, out.report, "vmt")) {
        std::optional<std::string> error;
        const std::string state = resolver.resolve("state", row).value_or("");
        const std::string county = resolver.resolve("county", row).value_or("");
        auto fc = parse_functional_class(resolver.resolve("functional_class", row).value_or(""));
        auto year = text::parse_int(resolver.resolve("year", row).value_or(""));
        auto miles = text::parse_double(resolver.resolve("vmt", row).value_or(""));
        if (state.empty() || county.empty()) error = "missing state or county";
        else if (!fc) error = "unrecognised functional class";
        else if (!year) error = "invalid year";
        else if (!miles || !(*miles > 0.0)) error = "vmt must be a positive number";
        if (error) {
            ++counts.rows_skipped;
            out.report.skipped.push_back({"vmt", rr.reader.line(), *error});
            continue;
        }
        ++counts.rows_used;
        const auto key = std::make_tuple(state, county, *fc, static_cast<int>(*year));
        auto [it, inserted] = index.try_emplace(key, out.records.size());
        if (inserted) out.records.push_back({state, county, *fc, static_cast<int>(*year), 0.0});
        out.records[it->second].vmt_miles += *miles * scale;
    }
    out.report.records_emitted = out.records.size();
    return out;
}

std::vector<VmtRecord> derive_surface_vmt(std::vector<VmtRecord> records) {
    struct Slots {
        std::optional<double> all, freeway, surface;
    };
    std::map<std::tuple<std::string, std::string, int>, Slots> by_key;
    std::vector<std::tuple<std::string, std::string, int>> order;
    for (const auto& r : records) {
        const auto key = std::make_tuple(r.state, r.county, r.year);
        auto [it, inserted] = by_key.try_emplace(key);
        if (inserted) order.push_back(key);
        auto& slot = r.functional_class == FunctionalClass::AllRoads ? it->second.all
                   : r.functional_class == FunctionalClass::Freeway  ? it->second.freeway
                                                                     : it->second.surface;
        slot = slot.value_or(0.0) + r.vmt_miles;
    }
    for (const auto& key : order) {
        const auto& s = by_key.at(key);
        const auto& [state, county, year] = key;
        if (!s.all || !s.freeway) continue;
        const std::string where = state + "/" + county + "/" + std::to_string(year);
        if (*s.freeway > *s.all) {
            throw InconsistentVmt(where + ": freeway VMT " + text::format_roundtrip(*s.freeway) +
                                  " exceeds all-roads VMT " + text::format_roundtrip(*s.all));
        }
        if (s.surface) continue;
        const double surface = *s.all - *s.freeway;
        if (!(surface > 0.0)) throw InconsistentVmt(where + ": all-roads minus freeway VMT is not positive");
        records.push_back({state, county, FunctionalClass::SurfaceStreet, year, surface});
    }
    return records;
}

// ---------------------------------------------------------------------------
// Geocoding

std::string GeocodeRequest::key() const {
    auto norm = [](std::string_view s) {
        std::string out;
        bool space = false;
        for (char c : text::upper(trim(s))) {
            if (c == ' ' || c == '\t' || c == '|') {
                space = true;
                continue;
            }
            if (space && !out.empty()) out += ' ';
            space = false;
            out += c;
        }
        return out;
    };
    return norm(state) + "|" + norm(locator) + "|" + norm(primary_road) + "|" + norm(secondary_road);
}

void StubGeocoder::add(const GeocodeRequest& request, LatLon point) { points_[request.key()] = point; }

std::optional<LatLon> StubGeocoder::geocode(const GeocodeRequest& request) {
    auto it = points_.find(request.key());
    if (it == points_.end()) return std::nullopt;
    return it->second;
}

CachedGeocoder::CachedGeocoder(std::filesystem::path cache_file, GeocoderClient* upstream)
    : path_(std::move(cache_file)), upstream_(upstream) {
    std::ifstream in(path_);
    std::string line;
    while (std::getline(in, line)) {
        auto parts = text::split(line, '\t');
        if (parts.size() != 3) continue;
        auto lat = text::parse_double(parts[1]);
        auto lon = text::parse_double(parts[2]);
        if (lat && lon) cache_[parts[0]] = LatLon{*lat, *lon};
    }
}

std::optional<LatLon> CachedGeocoder::geocode(const GeocodeRequest& request) {
    const std::string key = request.key();
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (!upstream_) return std::nullopt;
    auto point = upstream_->geocode(request);
    if (point) {
        cache_[key] = *point;
        std::ofstream out(path_, std::ios::app);
        out << key << '\t' << text::format_roundtrip(point->lat) << '\t' << text::format_roundtrip(point->lon) << '\n';
    }
    return point;
}

GeocodeRequest geocode_request_for(const CrashRecord& record) {
    return {record.state, record.locator, record.primary_road_name, record.secondary_road_name.value_or("")};
}

GeocodeResult geocode_missing(std::vector<CrashRecord> records, GeocoderClient& client) {
    GeocodeResult out;
    for (auto& rec : records) {
        if (rec.location) continue;
        ++out.summary.attempted;
        try {
            auto point = client.geocode(geocode_request_for(rec));
            if (point && point->lat >= -90.0 && point->lat <= 90.0 && point->lon >= -180.0 && point->lon <= 180.0) {
                rec.location = *point;
                ++out.summary.resolved;
            } else {
                ++out.summary.unresolved;
            }
        } catch (const GeocoderTransportError& e) {
            ++out.summary.unresolved;
            out.summary.failures.push_back({rec.crash_id, e.what(), true});
        }
    }
    out.records = std::move(records);
    return out;
}

}  // namespace crashbench
