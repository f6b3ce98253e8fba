#include "crashbench/cohort.hpp"

#include "crashbench/text.hpp"

namespace crashbench {

namespace {

bool is_imputation_class(VehicleClass c) {
    return c != VehicleClass::Unknown && c != VehicleClass::Pedestrian && c != VehicleClass::Cyclist;
}

double histogram_total(const ClassHistogram& h) {
    double total = 0.0;
    for (const auto& [cls, n] : h) total += n;
    return total;
}

std::string scope_key(const CohortInput& in, ImputationScope scope) {
    if (scope == ImputationScope::PerGeoArea) return in.geo;
    return in.geo + "|" + std::string(to_string(in.road));
}

bool parse_bool_flag(std::string_view s) {
    const auto v = text::upper(text::trim(s));
    if (v == "1" || v == "TRUE" || v == "YES" || v == "Y" || v == "URBAN") return true;
    if (v == "0" || v == "FALSE" || v == "NO" || v == "N" || v == "RURAL") return false;
    throw std::invalid_argument("not a boolean: '" + std::string(s) + "'");
}

}  // namespace

UnitSelection filter_in_transport_passenger(const CrashRecord& record) {
    UnitSelection out;
    for (const auto& u : record.units) {
        if (!u.in_transport) continue;
        if (u.vehicle_class == VehicleClass::Passenger) out.passenger_units.push_back(u.unit_id);
        else if (u.vehicle_class == VehicleClass::Unknown) out.unknown_units.push_back(u.unit_id);
    }
    return out;
}

std::vector<UnitSelection> filter_in_transport_passenger(const std::vector<CrashRecord>& records) {
    std::vector<UnitSelection> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(filter_in_transport_passenger(r));
    return out;
}

void add_known_classes(ClassHistogram& histogram, const CrashRecord& record) {
    for (const auto& u : record.units) {
        if (u.in_transport && is_imputation_class(u.vehicle_class)) histogram[u.vehicle_class] += 1.0;
    }
}

double impute_unknown_vehicles(const ClassHistogram& known, double unknown_count) {
    if (unknown_count < 0.0) throw std::invalid_argument("unknown count must be non-negative");
    if (unknown_count == 0.0) return 0.0;
    const double total = histogram_total(known);
    if (!(total > 0.0)) throw ImputationBasisMissing("no known vehicle types to impute from");
    auto it = known.find(VehicleClass::Passenger);
    const double passenger = it == known.end() ? 0.0 : it->second;
    return unknown_count * (passenger / total);
}

ClassHistogram impute_by_class(const ClassHistogram& known, double unknown_count) {
    ClassHistogram out;
    if (unknown_count == 0.0) return out;
    const double total = histogram_total(known);
    if (!(total > 0.0)) throw ImputationBasisMissing("no known vehicle types to impute from");
    for (const auto& [cls, n] : known) out[cls] = unknown_count * (n / total);
    return out;
}

double passenger_vmt(const VmtRecord& vmt, const PassengerShareTable& shares, bool urban) {
    return vmt.vmt_miles * shares.at(vmt.state, vmt.functional_class, urban);
}

PassengerShareTable load_share_table(std::istream& in) {
    text::CsvReader reader(in, ',');
    const auto header = reader.header();
    auto column = [&](std::string_view name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (text::upper(header[i]) == text::upper(name)) return i;
        }
        throw std::invalid_argument("share table lacks column '" + std::string(name) + "'");
    };
    const auto c_state = column("state");
    const auto c_class = column("functional_class");
    const auto c_urban = column("urban");
    const auto c_share = column("share");

    PassengerShareTable table;
    std::vector<std::string> row;
    while (reader.next(row)) {
        auto where = [&] { return "share table line " + std::to_string(reader.line()); };
        if (row.size() != header.size()) throw std::invalid_argument(where() + ": wrong number of fields");
        const auto fc = parse_functional_class(row[c_class]);
        if (!fc) throw std::invalid_argument(where() + ": unknown functional class '" + row[c_class] + "'");
        const auto share = text::parse_double(row[c_share]);
        if (!share) throw std::invalid_argument(where() + ": share is not a number");
        table.set(text::upper(text::trim(row[c_state])), *fc, parse_bool_flag(row[c_urban]), *share);
    }
    return table;
}

CrashContribution classify_contribution(const CrashRecord& record, RoadClass road, const TaxonomyOptions& options) {
    CrashContribution out;
    out.outcomes = classify_outcome(record);
    const auto sel = filter_in_transport_passenger(record);
    for (int id : sel.passenger_units) out.passenger_types.push_back(classify_crash_type(record, id, road, options));
    for (int id : sel.unknown_units) out.unknown_types.push_back(classify_crash_type(record, id, road, options));
    return out;
}

CohortTable tabulate_cohort(const std::vector<CohortInput>& inputs, const std::vector<CrashContribution>& contributions,
                            const CohortOptions& options) {
    if (inputs.size() != contributions.size()) throw std::invalid_argument("contributions do not match inputs");
    CohortTable table;

    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& in = inputs[i];
        const auto& c = contributions[i];
        auto& summary = table.imputation[scope_key(in, options.scope)];
        add_known_classes(summary.known_classes, *in.record);
        summary.unknown_units += static_cast<long long>(c.unknown_types.size());

        for (auto level : kOutcomeLevels) {
            if (!c.outcomes.contains(level)) continue;
            auto& all = table.cells[{in.geo, in.road, level, std::nullopt}];
            all.known_passenger += static_cast<long long>(c.passenger_types.size());
            all.unknown += static_cast<long long>(c.unknown_types.size());
            for (auto t : c.passenger_types) ++table.cells[{in.geo, in.road, level, t}].known_passenger;
            for (auto t : c.unknown_types) ++table.cells[{in.geo, in.road, level, t}].unknown;
        }
    }

    for (auto& [key, s] : table.imputation) {
        const double total = histogram_total(s.known_classes);
        if (total > 0.0) {
            auto it = s.known_classes.find(VehicleClass::Passenger);
            s.passenger_fraction = (it == s.known_classes.end() ? 0.0 : it->second) / total;
        } else if (s.unknown_units > 0) {
            throw ImputationBasisMissing("no known vehicle types in '" + key + "' to impute " +
                                         std::to_string(s.unknown_units) + " unknown units");
        }
        s.imputed_passenger = static_cast<double>(s.unknown_units) * s.passenger_fraction;
    }

    // Each cell's unknowns are scaled by the fraction of its own scope. The
    // geo/road of a cell is in its key, so look the scope up from there.
    for (auto& [key, counts] : table.cells) {
        const std::string skey = options.scope == ImputationScope::PerGeoArea
                                     ? key.geo
                                     : key.geo + "|" + std::string(to_string(key.road));
        counts.imputed_passenger = static_cast<double>(counts.unknown) * table.imputation.at(skey).passenger_fraction;
    }
    return table;
}

CohortTable tabulate_cohort(const std::vector<CohortInput>& inputs, const CohortOptions& options) {
    std::vector<CrashContribution> contributions;
    contributions.reserve(inputs.size());
    for (const auto& in : inputs) contributions.push_back(classify_contribution(*in.record, in.road, options.taxonomy));
    return tabulate_cohort(inputs, contributions, options);
}

std::string_view to_string(ImputationScope s) {
    return s == ImputationScope::PerGeoArea ? "PerGeoArea" : "PerGeoAreaAndRoad";
}

}  // namespace crashbench
