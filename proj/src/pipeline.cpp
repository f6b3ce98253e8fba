#include "crashbench/pipeline.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "crashbench/parallel.hpp"
#include "crashbench/text.hpp"

namespace crashbench {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput(path);
    return in;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: bad value for '") + key + "': " + e.what());
    }
}

std::string required_string(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj.at(key).is_string()) {
        throw ConfigError("run config: " + where + " needs a string '" + key + "'");
    }
    return obj.at(key).get<std::string>();
}

void parse_parameters(const json& j, RunParameters& p) {
    if (!j.is_object()) throw ConfigError("run config: 'parameters' must be an object");
    static const std::set<std::string> known{"threshold_m",     "underreport_fraction", "alpha",   "power",
                                             "confidence",      "effects",              "seed",    "workers",
                                             "mc_trials",       "proximity_scope",      "imputation_scope",
                                             "quantile_sign",   "taxonomy_order"};
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("run config: unknown parameter '" + key + "'");
    }
    p.threshold_m = get_or(j, "threshold_m", p.threshold_m);
    p.underreport_fraction = get_or(j, "underreport_fraction", p.underreport_fraction);
    p.alpha = get_or(j, "alpha", p.alpha);
    p.power = get_or(j, "power", p.power);
    p.confidence = get_or(j, "confidence", p.confidence);
    p.effects = get_or(j, "effects", p.effects);
    p.seed = get_or(j, "seed", p.seed);
    p.workers = get_or(j, "workers", p.workers);
    p.mc_trials = get_or(j, "mc_trials", p.mc_trials);

    const auto scope = get_or<std::string>(j, "proximity_scope", "name_matched_route");
    if (scope == "name_matched_route") p.proximity_scope = ProximityScope::NameMatchedRoute;
    else if (scope == "any_freeway") p.proximity_scope = ProximityScope::AnyFreeway;
    else throw ConfigError("run config: proximity_scope must be name_matched_route or any_freeway");

    const auto imputation = get_or<std::string>(j, "imputation_scope", "geo");
    if (imputation == "geo") p.imputation_scope = ImputationScope::PerGeoArea;
    else if (imputation == "geo_road") p.imputation_scope = ImputationScope::PerGeoAreaAndRoad;
    else throw ConfigError("run config: imputation_scope must be geo or geo_road");

    const auto sign = get_or<std::string>(j, "quantile_sign", "magnitude");
    if (sign == "magnitude") p.quantile_sign = QuantileSign::Magnitude;
    else if (sign == "as-displayed") p.quantile_sign = QuantileSign::AsDisplayed;
    else throw ConfigError("run config: quantile_sign must be magnitude or as-displayed");

    if (j.contains("taxonomy_order")) {
        p.taxonomy.order.clear();
        for (const auto& name : get_or<std::vector<std::string>>(j, "taxonomy_order", {})) {
            auto gate = parse_taxonomy_gate(name);
            if (!gate) throw ConfigError("run config: unknown taxonomy gate '" + name + "'");
            p.taxonomy.order.push_back(*gate);
        }
    }
}

std::string param_text(double v) { return text::format_roundtrip(v); }

std::map<std::string, std::string> parameter_map(const RunParameters& p) {
    std::string effects;
    for (double r : p.effects) {
        if (!effects.empty()) effects += ' ';
        effects += param_text(r);
    }
    std::string order;
    for (auto g : p.taxonomy.order) {
        if (!order.empty()) order += ' ';
        order += to_string(g);
    }
    // workers is left out on purpose: output must not depend on it.
    return {{"alpha", param_text(p.alpha)},
            {"confidence", param_text(p.confidence)},
            {"effects", effects},
            {"imputation_scope", std::string(to_string(p.imputation_scope))},
            {"mc_trials", std::to_string(p.mc_trials)},
            {"power", param_text(p.power)},
            {"proximity_scope", p.proximity_scope == ProximityScope::AnyFreeway ? "any_freeway" : "name_matched_route"},
            {"quantile_sign", std::string(to_string(p.quantile_sign))},
            {"seed", std::to_string(p.seed)},
            {"taxonomy_order", order},
            {"threshold_m", param_text(p.threshold_m)},
            {"underreport_fraction", param_text(p.underreport_fraction)}};
}

std::string relative_name(const std::filesystem::path& p, const std::filesystem::path& base) {
    auto rel = p.lexically_relative(base);
    return (rel.empty() ? p : rel).generic_string();
}

}  // namespace

void RunParameters::validate() const {
    if (!(threshold_m >= 0.0)) throw ConfigError("threshold_m must be non-negative");
    if (!(underreport_fraction >= 0.0 && underreport_fraction < 1.0)) {
        throw ConfigError("underreport_fraction must be in [0, 1)");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
    if (!(power > 0.0 && power < 1.0)) throw ConfigError("power must be in (0, 1)");
    if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("confidence must be in (0, 1)");
    if (effects.empty()) throw ConfigError("effects list is empty");
    for (double r : effects) {
        if (!(r > 0.0)) throw ConfigError("effect ratios must be positive");
    }
    if (workers == 0) throw ConfigError("workers must be at least 1");
    if (mc_trials != 0 && mc_trials < 1000) throw ConfigError("mc_trials must be 0 or at least 1000");
    if (taxonomy.order.empty()) throw ConfigError("taxonomy_order is empty");
}

std::vector<std::filesystem::path> RunConfig::input_files() const {
    std::vector<std::filesystem::path> out;
    for (const auto& s : sources) {
        out.push_back(s.mapping);
        out.push_back(s.crashes);
        if (s.units) out.push_back(*s.units);
        if (s.persons) out.push_back(*s.persons);
    }
    for (const auto& v : vmt) {
        out.push_back(v.mapping);
        out.push_back(v.file);
    }
    out.push_back(segments);
    if (aliases) out.push_back(*aliases);
    if (name_patterns) out.push_back(*name_patterns);
    out.push_back(shares);
    return out;
}

RunConfig parse_run_config(std::istream& in, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("run config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("run config must be a JSON object");

    RunConfig cfg;
    cfg.base_dir = base_dir;
    if (!j.contains("year") || !j.at("year").is_number_integer()) throw ConfigError("run config: 'year' is required");
    cfg.year = j.at("year").get<int>();

    if (j.contains("geo_areas")) {
        cfg.geo_areas.clear();
        for (const auto& g : j.at("geo_areas")) {
            GeoArea area;
            area.name = required_string(g, "name", "geo area");
            area.state = text::upper(required_string(g, "state", "geo area " + area.name));
            for (const auto& c : get_or<std::vector<std::string>>(g, "counties", {})) area.counties.insert(c);
            cfg.geo_areas.push_back(std::move(area));
        }
    }
    try {
        validate_geo_areas(cfg.geo_areas);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }

    if (!j.contains("sources") || !j.at("sources").is_array() || j.at("sources").empty()) {
        throw ConfigError("run config: 'sources' must list at least one crash source");
    }
    for (const auto& s : j.at("sources")) {
        CrashSourceSpec spec;
        spec.name = get_or<std::string>(s, "name", "");
        spec.mapping = resolve(base_dir, required_string(s, "mapping", "source " + spec.name));
        spec.crashes = resolve(base_dir, required_string(s, "crashes", "source " + spec.name));
        if (s.contains("units")) spec.units = resolve(base_dir, required_string(s, "units", "source " + spec.name));
        if (s.contains("persons")) spec.persons = resolve(base_dir, required_string(s, "persons", "source " + spec.name));
        cfg.sources.push_back(std::move(spec));
    }
    if (!j.contains("vmt") || !j.at("vmt").is_array() || j.at("vmt").empty()) {
        throw ConfigError("run config: 'vmt' must list at least one VMT table");
    }
    for (const auto& v : j.at("vmt")) {
        cfg.vmt.push_back({resolve(base_dir, required_string(v, "mapping", "vmt entry")),
                           resolve(base_dir, required_string(v, "file", "vmt entry"))});
    }
    cfg.segments = resolve(base_dir, required_string(j, "segments", "run config"));
    cfg.shares = resolve(base_dir, required_string(j, "shares", "run config"));
    if (j.contains("aliases")) cfg.aliases = resolve(base_dir, required_string(j, "aliases", "run config"));
    if (j.contains("name_patterns")) {
        cfg.name_patterns = resolve(base_dir, required_string(j, "name_patterns", "run config"));
    }
    if (j.contains("geocode_cache")) {
        cfg.geocode_cache = resolve(base_dir, required_string(j, "geocode_cache", "run config"));
    }
    cfg.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "out"));
    if (j.contains("parameters")) parse_parameters(j.at("parameters"), cfg.params);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    auto in = open_input(path);
    auto cfg = parse_run_config(in, path.parent_path());
    cfg.config_file = path;
    return cfg;
}

void check_run_config(const RunConfig& config) {
    config.params.validate();
    for (const auto& p : config.input_files()) {
        if (!std::filesystem::is_regular_file(p)) throw MissingInput(p);
    }
}

IngestStage run_ingest(const RunConfig& config) {
    IngestStage stage;
    for (const auto& spec : config.sources) {
        auto mapping = MappingConfig::load(spec.mapping);
        if (!spec.name.empty()) mapping.source = spec.name;
        mapping.validate(TableKind::Crash);
        auto crashes = open_input(spec.crashes);
        std::ifstream units, persons;
        CrashTableSources sources{&crashes, nullptr, nullptr};
        if (spec.units) {
            units = open_input(*spec.units);
            sources.units = &units;
        }
        if (spec.persons) {
            persons = open_input(*spec.persons);
            sources.persons = &persons;
        }
        auto load = load_crash_table(sources, mapping);
        for (auto& r : load.records) stage.records.push_back(std::move(r));
        stage.reports.push_back(std::move(load.report));
    }

    if (config.geocode_cache) {
        CachedGeocoder geocoder(*config.geocode_cache);
        auto result = geocode_missing(std::move(stage.records), geocoder);
        stage.records = std::move(result.records);
        stage.geocode = std::move(result.summary);
    } else {
        for (const auto& r : stage.records) {
            if (!r.location) {
                ++stage.geocode.attempted;
                ++stage.geocode.unresolved;
            }
        }
    }

    std::vector<VmtRecord> vmt;
    for (const auto& spec : config.vmt) {
        auto mapping = MappingConfig::load(spec.mapping);
        mapping.validate(TableKind::Vmt);
        auto in = open_input(spec.file);
        auto load = load_vmt_table(in, mapping);
        vmt.insert(vmt.end(), load.records.begin(), load.records.end());
        stage.reports.push_back(std::move(load.report));
    }
    stage.vmt = derive_surface_vmt(std::move(vmt));
    return stage;
}

FreewaySegmentIndex load_segment_index(const RunConfig& config) {
    auto segments = load_freeway_segments(config.segments);
    AliasTable aliases;
    if (config.aliases) {
        auto in = open_input(*config.aliases);
        aliases = load_alias_table(in);
    }
    auto patterns = default_name_patterns();
    if (config.name_patterns) {
        auto in = open_input(*config.name_patterns);
        patterns = load_name_patterns(in);
    }
    return FreewaySegmentIndex(std::move(segments), aliases, std::move(patterns));
}

std::vector<RoadClassification> classify_roads(const std::vector<CrashRecord>& records,
                                               const FreewaySegmentIndex& index, const RoadClassOptions& options,
                                               unsigned workers) {
    std::vector<RoadClassification> out(records.size());
    parallel_for(records.size(), workers, [&](std::size_t i) { out[i] = classify_road(records[i], index, options); });
    return out;
}

std::map<ExposureKey, double> passenger_exposure(const std::vector<VmtRecord>& vmt, const std::vector<GeoArea>& areas,
                                                 int year, const PassengerShareTable& shares) {
    std::map<ExposureKey, double> out;
    for (const auto& v : vmt) {
        if (v.year != year || v.functional_class == FunctionalClass::AllRoads) continue;
        const RoadClass road = v.functional_class == FunctionalClass::Freeway ? RoadClass::Freeway : RoadClass::SurfaceStreet;
        for (const auto& area : areas) {
            if (area.contains(v.state, v.county)) out[{area.name, road}] += passenger_vmt(v, shares);
        }
    }
    return out;
}

BenchmarkReport run_pipeline(const RunConfig& config, bool with_power) {
    check_run_config(config);
    const auto& p = config.params;

    BenchmarkReport report;
    report.metadata.year = config.year;
    report.metadata.parameters = parameter_map(p);
    if (!config.config_file.empty()) report.metadata.config_digest = sha256_file(config.config_file);
    for (const auto& f : config.input_files()) {
        report.metadata.input_digests[relative_name(f, config.base_dir)] = sha256_file(f);
    }
    if (config.geocode_cache && std::filesystem::is_regular_file(*config.geocode_cache)) {
        report.metadata.input_digests[relative_name(*config.geocode_cache, config.base_dir)] =
            sha256_file(*config.geocode_cache);
    }
    for (const auto& a : config.geo_areas) report.geo_order.push_back(a.name);

    auto ingest = run_ingest(config);
    auto& diag = report.diagnostics;
    diag.ingest = ingest.reports;
    diag.geocode = ingest.geocode;
    diag.records_total = ingest.records.size();

    // Scope: valid records of the study year inside a geo area.
    std::vector<std::size_t> kept;
    std::vector<std::string> geo_of(ingest.records.size());
    for (std::size_t i = 0; i < ingest.records.size(); ++i) {
        const auto& r = ingest.records[i];
        const auto violations = validate_record(r);
        if (!violations.empty()) {
            std::set<ViolationKind> kinds;
            for (const auto& v : violations) kinds.insert(v.kind);
            for (auto k : kinds) ++diag.violations[std::string(to_string(k))];
            ++diag.records_invalid;
            continue;
        }
        const GeoArea* area = nullptr;
        if (r.year == config.year) {
            for (const auto& a : config.geo_areas) {
                if (a.contains(r.state, r.county)) {
                    area = &a;
                    break;
                }
            }
        }
        if (!area) {
            ++diag.records_out_of_scope;
            continue;
        }
        geo_of[i] = area->name;
        kept.push_back(i);
    }
    diag.records_used = kept.size();

    std::vector<CrashRecord> scoped;
    scoped.reserve(kept.size());
    for (auto i : kept) scoped.push_back(ingest.records[i]);

    const auto index = load_segment_index(config);
    const auto roads = classify_roads(scoped, index, {p.threshold_m, p.proximity_scope}, p.workers);
    for (const auto& rc : roads) ++diag.road_provenance[std::string(to_string(rc.provenance))];

    std::vector<CohortInput> inputs(scoped.size());
    for (std::size_t i = 0; i < scoped.size(); ++i) inputs[i] = {&scoped[i], geo_of[kept[i]], roads[i].road};
    std::vector<CrashContribution> contributions(scoped.size());
    parallel_for(scoped.size(), p.workers, [&](std::size_t i) {
        contributions[i] = classify_contribution(scoped[i], roads[i].road, p.taxonomy);
    });
    const auto cohort = tabulate_cohort(inputs, contributions, {p.imputation_scope, p.taxonomy});
    diag.imputation = cohort.imputation;

    std::ifstream shares_in = open_input(config.shares);
    const auto shares = load_share_table(shares_in);
    const auto exposure = passenger_exposure(ingest.vmt, config.geo_areas, config.year, shares);

    auto table = build_rate_cells(cohort, exposure, {p.underreport_fraction, p.confidence});
    report.rates = std::move(table.cells);
    diag.missing_exposure = std::move(table.missing_exposure);
    report.distributions = build_distributions(report.rates, &diag.empty_strata);

    if (with_power) {
        PowerGridOptions grid;
        grid.effects = p.effects;
        grid.alpha = p.alpha;
        grid.power = p.power;
        grid.sign = p.quantile_sign;
        grid.mc_trials = p.mc_trials;
        grid.seed = p.seed;
        grid.workers = p.workers;
        report.power_grid = build_power_grid(report.rates, grid);
    }
    return report;
}

std::vector<AdsObservation> load_ads_observations(std::istream& in) {
    text::CsvReader reader(in, ',');
    const auto header = reader.header();
    const std::vector<std::string> expected{"geo", "road", "outcome", "ads_crashes", "ads_miles"};
    if (header != expected) throw IngestError("ADS input must have columns geo,road,outcome,ads_crashes,ads_miles");
    std::vector<AdsObservation> out;
    std::vector<std::string> row;
    while (reader.next(row)) {
        const std::string where = "ADS input line " + std::to_string(reader.line());
        if (row.size() != expected.size()) throw IngestError(where + ": wrong number of fields");
        AdsObservation obs;
        obs.geo = row[0];
        auto road = parse_road_class(row[1]);
        auto outcome = parse_outcome_level(row[2]);
        auto crashes = text::parse_double(row[3]);
        auto miles = text::parse_double(row[4]);
        if (!road || !outcome) throw IngestError(where + ": unknown road class or outcome");
        if (!crashes || *crashes < 0.0 || !miles || *miles <= 0.0) {
            throw IngestError(where + ": crashes must be >= 0 and miles > 0");
        }
        obs.road = *road;
        obs.outcome = *outcome;
        obs.crashes = *crashes;
        obs.miles = *miles;
        out.push_back(std::move(obs));
    }
    return out;
}

std::vector<ComparisonRow> compare_to_benchmark(const std::vector<AdsObservation>& ads,
                                                const std::vector<RateCell>& benchmark, double level) {
    std::vector<ComparisonRow> rows;
    for (const auto& obs : ads) {
        ComparisonRow row;
        row.ads = obs;
        row.ads_rate_ipmm = compute_rate(obs.crashes, obs.miles);
        row.ads_ci95 = poisson_ci(obs.crashes, obs.miles, level);
        for (const auto& c : benchmark) {
            if (!c.crash_type && c.geo == obs.geo && c.road == obs.road && c.outcome == obs.outcome) {
                row.benchmark = c;
                break;
            }
        }
        if (!row.benchmark) {
            row.note = "no benchmark cell";
        } else {
            try {
                row.impact = safety_impact(row.ads_rate_ipmm, row.benchmark->rate_ipmm);
            } catch (const UndefinedBaseline& e) {
                row.note = e.what();
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream out;
    out << "geo,road,outcome,ads_crashes,ads_miles,ads_ipmm,ads_ci95_low,ads_ci95_high,benchmark_ipmm,"
           "benchmark_ci95_low,benchmark_ci95_high,percent_difference,note\n";
    auto num = [](double v) { return text::format_roundtrip(v); };
    for (const auto& r : rows) {
        out << text::csv_escape(r.ads.geo) << ',' << to_string(r.ads.road) << ',' << to_string(r.ads.outcome) << ','
            << num(r.ads.crashes) << ',' << num(r.ads.miles) << ',' << num(r.ads_rate_ipmm) << ','
            << num(r.ads_ci95.low) << ',' << num(r.ads_ci95.high) << ',';
        if (r.benchmark) {
            out << num(r.benchmark->rate_ipmm) << ',' << num(r.benchmark->ci95.low) << ','
                << num(r.benchmark->ci95.high) << ',';
        } else {
            out << ",,,";
        }
        out << (r.impact ? num(r.impact->percent_difference) : "") << ',' << text::csv_escape(r.note) << '\n';
    }
    return out.str();
}

}  // namespace crashbench
