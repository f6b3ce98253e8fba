// crashbench: human-driven crash rate benchmarks from state crash records.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "crashbench/pipeline.hpp"
#include "crashbench/text.hpp"

namespace fs = std::filesystem;
using namespace crashbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Overrides {
    std::string config;
    std::string out;
    std::optional<unsigned> workers;
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold_m;
    std::optional<double> underreport;
    std::optional<double> alpha;
    std::optional<double> power;
};

int fail(int code, const std::string& kind, const std::string& message, const std::string& path = "") {
    nlohmann::ordered_json err{{"error", kind}, {"exit_code", code}, {"message", message}};
    if (!path.empty()) err["path"] = path;
    std::cerr << err.dump() << '\n';
    return code;
}

RunConfig load_config(const Overrides& o) {
    if (o.config.empty()) throw ConfigError("--config is required for this command");
    RunConfig cfg = load_run_config(o.config);
    auto& p = cfg.params;
    if (o.workers) p.workers = *o.workers;
    if (o.seed) p.seed = *o.seed;
    if (o.threshold_m) p.threshold_m = *o.threshold_m;
    if (o.underreport) p.underreport_fraction = *o.underreport;
    if (o.alpha) p.alpha = *o.alpha;
    if (o.power) p.power = *o.power;
    if (!o.out.empty()) cfg.output_dir = o.out;
    check_run_config(cfg);
    return cfg;
}

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    std::cout << path.generic_string() << '\t' << sha256_hex(content) << '\n';
}

int cmd_ingest(const Overrides& o) {
    const auto cfg = load_config(o);
    const auto stage = run_ingest(cfg);
    Diagnostics d;
    d.ingest = stage.reports;
    d.geocode = stage.geocode;
    d.records_total = stage.records.size();
    write_text(cfg.output_dir / ("ingest_" + std::to_string(cfg.year) + ".json"), diagnostics_json(d));
    return kExitOk;
}

int cmd_classify_roads(const Overrides& o) {
    const auto cfg = load_config(o);
    const auto stage = run_ingest(cfg);
    const auto index = load_segment_index(cfg);
    const auto roads =
        classify_roads(stage.records, index, {cfg.params.threshold_m, cfg.params.proximity_scope}, cfg.params.workers);
    std::string csv = "crash_id,state,county,road,provenance,route_id,distance_m\n";
    for (std::size_t i = 0; i < roads.size(); ++i) {
        const auto& r = stage.records[i];
        csv += text::csv_escape(r.crash_id) + ',' + text::csv_escape(r.state) + ',' + text::csv_escape(r.county) + ',' +
               std::string(to_string(roads[i].road)) + ',' + std::string(to_string(roads[i].provenance)) + ',' +
               text::csv_escape(roads[i].route_id) + ',' +
               (roads[i].distance_m ? text::format_fixed(*roads[i].distance_m, 3) : "") + '\n';
    }
    write_text(cfg.output_dir / ("roads_" + std::to_string(cfg.year) + ".csv"), csv);
    return kExitOk;
}

int cmd_rates(const Overrides& o) {
    const auto cfg = load_config(o);
    const auto report = run_pipeline(cfg, false);
    const std::string year = std::to_string(cfg.year);
    write_text(cfg.output_dir / ("rates_" + year + ".csv"), rate_table_csv(report.rates));
    write_text(cfg.output_dir / ("benchmark_" + year + "_freeway.csv"),
               benchmark_table_csv(report.rates, RoadClass::Freeway, report.geo_order));
    write_text(cfg.output_dir / ("benchmark_" + year + "_surface_street.csv"),
               benchmark_table_csv(report.rates, RoadClass::SurfaceStreet, report.geo_order));
    write_text(cfg.output_dir / ("crash_types_" + year + ".csv"), distribution_csv(report.distributions));
    return kExitOk;
}

struct PowerArgs {
    std::optional<double> lambda;
    std::optional<double> ipmm;
    std::vector<double> ratios;
    std::string sign = "magnitude";
    std::size_t mc_trials = 0;
};

int cmd_power(const Overrides& o, const PowerArgs& a) {
    if (a.lambda.has_value() == a.ipmm.has_value()) throw ConfigError("give exactly one of --lambda or --ipmm");
    const double lambda = a.lambda ? *a.lambda : *a.ipmm / 1e6;
    QuantileSign sign;
    if (a.sign == "magnitude") sign = QuantileSign::Magnitude;
    else if (a.sign == "as-displayed") sign = QuantileSign::AsDisplayed;
    else throw ConfigError("--sign must be magnitude or as-displayed");
    if (a.mc_trials != 0 && a.mc_trials < 1000) throw ConfigError("--mc-trials must be 0 or at least 1000");

    RunParameters p;
    if (o.alpha) p.alpha = *o.alpha;
    if (o.power) p.power = *o.power;
    if (o.seed) p.seed = *o.seed;
    if (o.workers) p.workers = *o.workers;
    if (!a.ratios.empty()) p.effects = a.ratios;
    p.validate();

    std::cout << "lambda_per_mile,effect_ratio,required_miles,expected_ads_crashes" << (a.mc_trials ? ",mc_power" : "")
              << ",error\n";
    for (const auto& row : power_curve(lambda, p.effects, p.alpha, p.power, sign)) {
        std::cout << text::format_roundtrip(lambda) << ',' << text::format_roundtrip(row.effect_ratio) << ',';
        if (row.result) {
            std::cout << text::format_roundtrip(row.result->required_miles) << ','
                      << text::format_roundtrip(row.result->expected_ads_crashes);
        } else {
            std::cout << ',';
        }
        if (a.mc_trials) {
            std::cout << ',';
            if (row.result) {
                std::cout << text::format_fixed(monte_carlo_power(lambda, row.effect_ratio, row.result->required_miles,
                                                                  p.alpha, {a.mc_trials, p.seed, p.workers}),
                                                4);
            }
        }
        std::cout << ',' << text::csv_escape(row.error) << '\n';
    }
    return kExitOk;
}

int cmd_compare(const Overrides& o, const std::string& ads_path) {
    const auto cfg = load_config(o);
    std::ifstream in(ads_path, std::ios::binary);
    if (!in) throw MissingInput(ads_path);
    const auto ads = load_ads_observations(in);
    const auto report = run_pipeline(cfg, false);
    const auto rows = compare_to_benchmark(ads, report.rates, cfg.params.confidence);
    write_text(cfg.output_dir / ("comparison_" + std::to_string(cfg.year) + ".csv"), comparison_csv(rows));
    return kExitOk;
}

int cmd_run(const Overrides& o) {
    const auto cfg = load_config(o);
    const auto report = run_pipeline(cfg, true);
    for (const auto& f : emit_report(report, cfg.output_dir)) {
        std::cout << (cfg.output_dir / f.name).generic_string() << '\t' << f.sha256 << '\n';
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human-driven crash rate benchmarks for automated driving comparisons"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(kToolVersion));

    Overrides o;
    app.add_option("--config", o.config, "Run configuration (JSON)")->envname("CRASHBENCH_CONFIG");
    app.add_option("--out", o.out, "Output directory (overrides the config)")->envname("CRASHBENCH_OUT");
    app.add_option("--workers", o.workers, "Worker threads")->envname("CRASHBENCH_WORKERS")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed, "Monte Carlo seed")->envname("CRASHBENCH_SEED");
    app.add_option("--threshold-m", o.threshold_m, "Freeway proximity threshold in meters")
        ->envname("CRASHBENCH_THRESHOLD_M");
    app.add_option("--underreport", o.underreport, "Non-fatal injury underreporting fraction")
        ->envname("CRASHBENCH_UNDERREPORT");
    app.add_option("--alpha", o.alpha, "Two-sided significance level")->envname("CRASHBENCH_ALPHA");
    app.add_option("--power", o.power, "Target power")->envname("CRASHBENCH_POWER");

    auto* ingest = app.add_subcommand("ingest", "Load crash and VMT tables and write ingest diagnostics");
    auto* roads = app.add_subcommand("classify-roads", "Classify every crash as freeway or surface street");
    auto* rates = app.add_subcommand("rates", "Compute benchmark rates and crash-type distributions");
    auto* power = app.add_subcommand("power", "Required mileage for a benchmark rate");
    auto* compare = app.add_subcommand("compare", "Percent difference of ADS rates against the benchmark");
    auto* run = app.add_subcommand("run", "Full pipeline and report");

    PowerArgs pa;
    power->add_option("--lambda", pa.lambda, "Benchmark rate in crashes per mile");
    power->add_option("--ipmm", pa.ipmm, "Benchmark rate in incidents per million miles");
    power->add_option("--ratio", pa.ratios, "Effect ratio lambda_ads / lambda_human (repeatable)");
    power->add_option("--sign", pa.sign, "Alpha quantile form: magnitude or as-displayed");
    power->add_option("--mc-trials", pa.mc_trials, "Monte Carlo trials per row (0 = skip)");

    std::string ads_path;
    compare->add_option("--ads", ads_path, "ADS crashes and miles (geo,road,outcome,ads_crashes,ads_miles)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kExitConfig, "config", e.what());
    }

    try {
        if (ingest->parsed()) return cmd_ingest(o);
        if (roads->parsed()) return cmd_classify_roads(o);
        if (rates->parsed()) return cmd_rates(o);
        if (power->parsed()) return cmd_power(o, pa);
        if (compare->parsed()) return cmd_compare(o, ads_path);
        if (run->parsed()) return cmd_run(o);
    } catch (const MissingInput& e) {
        return fail(kExitConfig, "config", e.what(), e.path().string());
    } catch (const ConfigError& e) {
        return fail(kExitConfig, "config", e.what());
    } catch (const std::exception& e) {
        return fail(kExitData, "data", e.what());
    }
    return kExitConfig;
}
