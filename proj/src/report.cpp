#include "crashbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"

#include "crashbench/text.hpp"

namespace crashbench {

using ordered_json = nlohmann::ordered_json;

namespace {

const char* const kRateColumns[] = {"geo",        "road",      "outcome",   "crash_type", "count",
                                    "vmt_miles",  "rate_ipmm", "ci95_low",  "ci95_high"};

std::string road_slug(RoadClass road) { return road == RoadClass::Freeway ? "freeway" : "surface_street"; }

std::string outcome_label(OutcomeLevel level) {
    switch (level) {
        case OutcomeLevel::PoliceReported: return "Police-Reported";
        case OutcomeLevel::AnyInjuryReported: return "Any-Injury-Reported";
        case OutcomeLevel::AnyAirbagDeployment: return "Any Airbag Deployment";
        case OutcomeLevel::SuspectedSeriousInjuryPlus: return "Suspected Serious Injury+";
        case OutcomeLevel::Fatal: return "Any Fatality";
    }
    return "";
}

std::string join_row(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ',';
        out += text::csv_escape(fields[i]);
    }
    out += '\n';
    return out;
}

double parse_number(const std::string& s, std::size_t line, const char* column) {
    auto v = text::parse_double(s);
    if (!v) throw std::runtime_error("rate table line " + std::to_string(line) + ": bad " + column + " '" + s + "'");
    return *v;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

ordered_json ingest_json(const IngestReport& r) {
    auto counts = [](const TableCounts& c) {
        return ordered_json{{"rows_read", c.rows_read}, {"rows_used", c.rows_used}, {"rows_skipped", c.rows_skipped}};
    };
    ordered_json skipped = ordered_json::array();
    for (const auto& s : r.skipped) skipped.push_back({{"table", s.table}, {"line", s.line}, {"reason", s.reason}});
    ordered_json unknowns = ordered_json::object();
    for (const auto& [field, n] : r.unknowns) unknowns[field] = n;
    return {{"source", r.source},
            {"crashes", counts(r.crashes)},
            {"units", counts(r.units)},
            {"persons", counts(r.persons)},
            {"vmt", counts(r.vmt)},
            {"records_emitted", r.records_emitted},
            {"missing_location", r.missing_location},
            {"unknowns", unknowns},
            {"skipped", skipped}};
}

ordered_json diagnostics_object(const Diagnostics& d) {
    ordered_json ingest = ordered_json::array();
    for (const auto& r : d.ingest) ingest.push_back(ingest_json(r));

    ordered_json failures = ordered_json::array();
    for (const auto& f : d.geocode.failures) {
        failures.push_back({{"crash_id", f.crash_id}, {"message", f.message}, {"retryable", f.retryable}});
    }
    ordered_json provenance = ordered_json::object();
    for (const auto& [k, n] : d.road_provenance) provenance[k] = n;
    ordered_json violations = ordered_json::object();
    for (const auto& [k, n] : d.violations) violations[k] = n;

    ordered_json imputation = ordered_json::object();
    for (const auto& [scope, s] : d.imputation) {
        ordered_json classes = ordered_json::object();
        double known_total = 0.0;
        for (const auto& [cls, n] : s.known_classes) {
            classes[std::string(to_string(cls))] = n;
            known_total += n;
        }
        auto pit = s.known_classes.find(VehicleClass::Passenger);
        const double passenger = pit == s.known_classes.end() ? 0.0 : pit->second;
        imputation[scope] = {{"known_in_transport", classes},
                             {"unknown_units", s.unknown_units},
                             {"passenger_fraction", s.passenger_fraction},
                             {"imputed_passenger", s.imputed_passenger},
                             {"non_passenger_share", known_total > 0.0 ? 1.0 - passenger / known_total : 0.0}};
    }
    ordered_json missing = ordered_json::array();
    for (const auto& [geo, road] : d.missing_exposure) missing.push_back(geo + "|" + std::string(to_string(road)));

    return {{"records",
             {{"total", d.records_total},
              {"invalid", d.records_invalid},
              {"out_of_scope", d.records_out_of_scope},
              {"used", d.records_used}}},
            {"violations", violations},
            {"ingest", ingest},
            {"geocode",
             {{"attempted", d.geocode.attempted},
              {"resolved", d.geocode.resolved},
              {"unresolved", d.geocode.unresolved},
              {"failures", failures}}},
            {"road_provenance", provenance},
            {"imputation", imputation},
            {"missing_exposure", missing},
            {"empty_strata", d.empty_strata}};
}

std::string phoenix_note(const BenchmarkReport& report) {
    std::string out =
        "## Phoenix freeway fatal rate\n\n"
        "The reference Phoenix freeway benchmark lists 169 fatal-crash vehicles over 31,285 million miles. "
        "That is 0.0054 IPMM, or 5.4 incidents per billion miles (IPBM), which rounds to 5. The accompanying "
        "discussion quotes the same rate as 4 IPBM. This tool treats the counts as normative and reports 5.\n";
    for (const auto& c : report.rates) {
        if (c.geo == "Phoenix" && c.road == RoadClass::Freeway && c.outcome == OutcomeLevel::Fatal && !c.crash_type) {
            out += "\nThis run: Phoenix freeway fatal = " + format_count(c.count) + " vehicles, " +
                   format_ipmm(c.rate_ipmm) + " IPMM (" + text::format_fixed(to_ipbm(c.rate_ipmm), 1) + " IPBM).\n";
        }
    }
    return out;
}

std::string parameter_or(const BenchmarkReport& r, const std::string& key, const std::string& fallback) {
    auto it = r.metadata.parameters.find(key);
    return it == r.metadata.parameters.end() ? fallback : it->second;
}

std::string mileage_note(const BenchmarkReport& report) {
    const double alpha = text::parse_double(parameter_or(report, "alpha", "0.05")).value_or(0.05);
    const double power = text::parse_double(parameter_or(report, "power", "0.8")).value_or(0.8);
    const PowerQuery q{5.609e-6, 0.75, alpha, power};
    const double magnitude = required_mileage(q, QuantileSign::Magnitude).required_miles;
    const double displayed = required_mileage(q, QuantileSign::AsDisplayed).required_miles;

    std::string out =
        "## Required mileage scale\n\n"
        "Required mileage is m = (sqrt(lambda_ads) z(1 - beta) + sqrt(lambda_human) z(1 - alpha/2))^2 / "
        "(lambda_ads - lambda_human)^2, with the magnitude of the alpha quantile. The formula is often typeset "
        "with z(alpha/2), which is negative; read literally, the two terms partly cancel and every mileage "
        "shrinks by a near-constant factor of about 4.8.\n\n"
        "At lambda_human = 5.609e-6 per mile, r = 0.75, alpha = " + text::format_roundtrip(alpha) +
        ", power = " + text::format_roundtrip(power) + ": magnitude form " + text::format_scientific(magnitude, 4) +
        " miles, literal form " + text::format_scientific(displayed, 4) + " miles, ratio " +
        text::format_fixed(magnitude / displayed, 2) +
        ". A seeded Monte Carlo test at the literal mileage rejects in about 20% of trials, far short of the "
        "target power, while the magnitude form reaches it. The magnitude form also reproduces the published "
        "freeway ranges at a 25% reduction: 21-75 million miles for police-reported and 8.4-21.4 billion miles "
        "for fatal crashes. The power grid uses the magnitude form";
    out += parameter_or(report, "quantile_sign", "magnitude") == "magnitude"
               ? ".\n"
               : "; this run was configured with the literal form instead.\n";
    return out;
}

}  // namespace

std::vector<DistributionRow> build_distributions(const std::vector<RateCell>& cells, std::vector<std::string>* empty) {
    std::map<std::tuple<std::string, RoadClass, OutcomeLevel>, std::vector<RateCell>> strata;
    for (const auto& c : cells) {
        if (c.crash_type) strata[{c.geo, c.road, c.outcome}].push_back(c);
    }
    std::vector<DistributionRow> rows;
    for (const auto& [key, group] : strata) {
        const auto& [geo, road, outcome] = key;
        std::map<CrashType, double> fractions;
        try {
            fractions = crash_type_distribution(group);
        } catch (const EmptyStratum&) {
            if (empty) empty->push_back(geo + "|" + std::string(to_string(road)) + "|" + std::string(to_string(outcome)));
            continue;
        }
        std::map<CrashType, double> counts;
        for (const auto& c : group) counts[*c.crash_type] += c.count;
        for (auto type : kCrashTypes) {
            DistributionRow row{geo, road, outcome, type, 0.0, 0.0};
            if (auto it = counts.find(type); it != counts.end()) row.count = it->second;
            if (auto it = fractions.find(type); it != fractions.end()) row.fraction = it->second;
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<PowerGridRow> build_power_grid(const std::vector<RateCell>& cells, const PowerGridOptions& options) {
    std::vector<PowerGridRow> rows;
    for (const auto& c : cells) {
        if (c.crash_type || !(c.rate_ipmm > 0.0)) continue;
        const double lambda = c.rate_ipmm / 1e6;
        for (const auto& pr : power_curve(lambda, options.effects, options.alpha, options.power, options.sign)) {
            PowerGridRow row{c.geo, c.road, c.outcome, c.rate_ipmm, pr.effect_ratio, pr.result, pr.error, std::nullopt};
            if (options.mc_trials > 0 && pr.result) {
                row.mc_power = monte_carlo_power(lambda, pr.effect_ratio, pr.result->required_miles, options.alpha,
                                                 {options.mc_trials, options.seed, options.workers});
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string rate_table_csv(const std::vector<RateCell>& cells) {
    std::string out = join_row({std::begin(kRateColumns), std::end(kRateColumns)});
    for (const auto& c : cells) {
        out += join_row({c.geo, std::string(to_string(c.road)), std::string(to_string(c.outcome)),
                         c.crash_type ? std::string(to_string(*c.crash_type)) : "All",
                         text::format_roundtrip(c.count), text::format_roundtrip(c.vmt_miles),
                         text::format_roundtrip(c.rate_ipmm), text::format_roundtrip(c.ci95.low),
                         text::format_roundtrip(c.ci95.high)});
    }
    return out;
}

std::vector<RateCell> parse_rate_table_csv(std::istream& in) {
    text::CsvReader reader(in, ',');
    const auto& header = reader.header();
    if (header != std::vector<std::string>(std::begin(kRateColumns), std::end(kRateColumns))) {
        throw std::runtime_error("rate table header does not match the expected columns");
    }
    std::vector<RateCell> cells;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const auto line = reader.line();
        if (row.size() != header.size()) throw std::runtime_error("rate table line " + std::to_string(line) + ": wrong field count");
        RateCell c;
        c.geo = row[0];
        const auto road = parse_road_class(row[1]);
        const auto outcome = parse_outcome_level(row[2]);
        if (!road || !outcome) throw std::runtime_error("rate table line " + std::to_string(line) + ": bad stratum");
        c.road = *road;
        c.outcome = *outcome;
        if (row[3] != "All") {
            c.crash_type = parse_crash_type(row[3]);
            if (!c.crash_type) throw std::runtime_error("rate table line " + std::to_string(line) + ": bad crash type");
        }
        c.count = parse_number(row[4], line, "count");
        c.vmt_miles = parse_number(row[5], line, "vmt_miles");
        c.rate_ipmm = parse_number(row[6], line, "rate_ipmm");
        c.ci95.low = parse_number(row[7], line, "ci95_low");
        c.ci95.high = parse_number(row[8], line, "ci95_high");
        cells.push_back(std::move(c));
    }
    return cells;
}

std::string format_count(double count) {
    const double rounded = std::round(count);
    if (std::fabs(count - rounded) < 1e-9) return text::format_fixed(rounded, 0);
    return text::format_fixed(count, 1);
}

std::string benchmark_table_csv(const std::vector<RateCell>& cells, RoadClass road,
                                const std::vector<std::string>& geo_order) {
    std::map<std::pair<std::string, OutcomeLevel>, const RateCell*> index;
    std::set<std::string> present;
    for (const auto& c : cells) {
        if (c.road != road || c.crash_type) continue;
        index[{c.geo, c.outcome}] = &c;
        present.insert(c.geo);
    }
    std::vector<std::string> geos;
    for (const auto& g : geo_order) {
        if (present.count(g)) geos.push_back(g);
    }
    for (const auto& g : present) {
        if (std::find(geos.begin(), geos.end(), g) == geos.end()) geos.push_back(g);
    }

    std::vector<std::string> header{"measure"};
    header.insert(header.end(), geos.begin(), geos.end());
    std::string out = join_row(header);
    if (geos.empty()) return out;

    std::vector<std::string> mileage{"Mileage (Mmi)"};
    for (const auto& g : geos) {
        const RateCell* any = nullptr;
        for (auto level : kOutcomeLevels) {
            if (auto it = index.find({g, level}); it != index.end()) {
                any = it->second;
                break;
            }
        }
        mileage.push_back(any ? text::format_fixed(any->vmt_miles / 1e6, 3) : "");
    }
    out += join_row(mileage);
    for (auto level : kOutcomeLevels) {
        std::vector<std::string> row{outcome_label(level)};
        for (const auto& g : geos) {
            auto it = index.find({g, level});
            row.push_back(it == index.end() ? "" : format_count(it->second->count) + " (" +
                                                       format_ipmm(it->second->rate_ipmm) + ")");
        }
        out += join_row(row);
    }
    return out;
}

std::string distribution_csv(const std::vector<DistributionRow>& rows) {
    std::string out = join_row({"geo", "road", "outcome", "crash_type", "count", "fraction"});
    for (const auto& r : rows) {
        out += join_row({r.geo, std::string(to_string(r.road)), std::string(to_string(r.outcome)),
                         std::string(to_string(r.crash_type)), text::format_roundtrip(r.count),
                         text::format_fixed(r.fraction, 6)});
    }
    return out;
}

std::string power_grid_csv(const std::vector<PowerGridRow>& rows) {
    std::string out = join_row({"geo", "road", "outcome", "benchmark_ipmm", "effect_ratio", "required_miles",
                                "expected_ads_crashes", "mc_power", "error"});
    for (const auto& r : rows) {
        out += join_row({r.geo, std::string(to_string(r.road)), std::string(to_string(r.outcome)),
                         text::format_roundtrip(r.benchmark_ipmm), text::format_roundtrip(r.effect_ratio),
                         r.result ? text::format_roundtrip(r.result->required_miles) : "",
                         r.result ? text::format_roundtrip(r.result->expected_ads_crashes) : "",
                         r.mc_power ? text::format_fixed(*r.mc_power, 4) : "", r.error});
    }
    return out;
}

std::string report_json(const BenchmarkReport& report) {
    ordered_json meta{{"tool_version", report.metadata.tool_version},
                      {"year", report.metadata.year},
                      {"config_digest", report.metadata.config_digest}};
    ordered_json inputs = ordered_json::object();
    for (const auto& [name, digest] : report.metadata.input_digests) inputs[name] = digest;
    meta["input_digests"] = inputs;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : report.metadata.parameters) params[k] = v;
    meta["parameters"] = params;

    ordered_json rates = ordered_json::array();
    for (const auto& c : report.rates) {
        rates.push_back({{"geo", c.geo},
                         {"road", to_string(c.road)},
                         {"outcome", to_string(c.outcome)},
                         {"crash_type", c.crash_type ? ordered_json(to_string(*c.crash_type)) : ordered_json(nullptr)},
                         {"count", c.count},
                         {"vmt_miles", c.vmt_miles},
                         {"rate_ipmm", c.rate_ipmm},
                         {"ci95", {c.ci95.low, c.ci95.high}}});
    }
    ordered_json dist = ordered_json::array();
    for (const auto& r : report.distributions) {
        dist.push_back({{"geo", r.geo},
                        {"road", to_string(r.road)},
                        {"outcome", to_string(r.outcome)},
                        {"crash_type", to_string(r.crash_type)},
                        {"count", r.count},
                        {"fraction", r.fraction}});
    }
    ordered_json grid = ordered_json::array();
    for (const auto& r : report.power_grid) {
        ordered_json row{{"geo", r.geo},
                         {"road", to_string(r.road)},
                         {"outcome", to_string(r.outcome)},
                         {"benchmark_ipmm", r.benchmark_ipmm},
                         {"effect_ratio", r.effect_ratio}};
        if (r.result) {
            row["required_miles"] = r.result->required_miles;
            row["expected_ads_crashes"] = r.result->expected_ads_crashes;
        } else {
            row["error"] = r.error;
        }
        if (r.mc_power) row["mc_power"] = *r.mc_power;
        grid.push_back(std::move(row));
    }
    ordered_json root{{"metadata", meta},
                      {"geo_order", report.geo_order},
                      {"rates", rates},
                      {"crash_type_distribution", dist},
                      {"power_grid", grid},
                      {"diagnostics", diagnostics_object(report.diagnostics)}};
    return root.dump(2) + "\n";
}

std::string diagnostics_json(const Diagnostics& diagnostics) { return diagnostics_object(diagnostics).dump(2) + "\n"; }

std::string methodology_notes(const BenchmarkReport& report) {
    std::string out = "# Methodology notes\n\n";
    out += "Rates count crashed in-transport passenger vehicles per passenger-vehicle mile, reported as incidents "
           "per million miles (IPMM). Outcome levels nest: fatal within suspected serious injury or worse, within "
           "any injury, within police-reported. Airbag deployment is counted separately. Only the non-fatal part of "
           "any-injury counts is scaled for underreporting (u = " +
           parameter_or(report, "underreport_fraction", "0.32") +
           "). Vehicles of unknown type are split by the known type mix of their geographic area. Intervals are "
           "exact Poisson intervals on the adjusted count.\n\n";
    out += mileage_note(report) + "\n";
    out += phoenix_note(report);
    return out;
}

std::vector<EmittedFile> emit_report(const BenchmarkReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

    const std::string year = std::to_string(report.metadata.year);
    std::vector<std::pair<std::string, std::string>> files{
        {"rates_" + year + ".csv", rate_table_csv(report.rates)},
        {"benchmark_" + year + "_" + road_slug(RoadClass::Freeway) + ".csv",
         benchmark_table_csv(report.rates, RoadClass::Freeway, report.geo_order)},
        {"benchmark_" + year + "_" + road_slug(RoadClass::SurfaceStreet) + ".csv",
         benchmark_table_csv(report.rates, RoadClass::SurfaceStreet, report.geo_order)},
        {"crash_types_" + year + ".csv", distribution_csv(report.distributions)},
        {"power_grid_" + year + ".csv", power_grid_csv(report.power_grid)},
        {"report_" + year + ".json", report_json(report)},
        {"methodology_notes.md", methodology_notes(report)},
    };
    std::vector<EmittedFile> emitted;
    for (const auto& [name, content] : files) {
        write_file(dir / name, content);
        emitted.push_back({name, sha256_hex(content)});
    }
    return emitted;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

}  // namespace crashbench
