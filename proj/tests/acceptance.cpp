// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "crashbench/cohort.hpp"
#include "crashbench/pipeline.hpp"
#include "crashbench/power.hpp"
#include "crashbench/rates.hpp"
#include "crashbench/report.hpp"
#include "crashbench/roadclass.hpp"
#include "crashbench/stats.hpp"
#include "crashbench/taxonomy.hpp"
#include "crashbench/text.hpp"
#include "fuzz_corpus.hpp"
#include "oracles.hpp"
#include "reference_benchmark.hpp"
#include "support.hpp"

using namespace crashbench;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) { return text::format_roundtrip(v); }

Verdict reference_table() {
    Verdict v;
    const auto t0 = Clock::now();
    std::vector<RateCell> cells;
    std::vector<std::string> order;
    int matched = 0;
    for (const auto& col : testsupport::kReferenceFreeway) {
        order.push_back(col.geo);
        for (std::size_t i = 0; i < 5; ++i) {
            const auto cell = make_rate_cell(col.geo, RoadClass::Freeway, testsupport::kReferenceOutcomes[i],
                                             std::nullopt, col.counts[i], col.mileage_mmi * 1e6);
            if (std::abs(cell.rate_ipmm - col.rates[i]) <= 0.001) ++matched;
            else v.require(false, std::string(col.geo) + " outcome " + std::to_string(i) + " gave " + fmt(cell.rate_ipmm));
            cells.push_back(cell);
        }
    }
    // the printed table must carry the same counts, and rates within tolerance
    const auto csv = benchmark_table_csv(cells, RoadClass::Freeway, order);
    for (const auto& col : testsupport::kReferenceFreeway) {
        for (std::size_t i = 0; i < 5; ++i) {
            const auto head = format_count(col.counts[i]) + " (";
            const auto at = csv.find(head);
            if (at == std::string::npos) {
                v.require(false, "table lacks count " + format_count(col.counts[i]));
                continue;
            }
            const auto printed = text::parse_double(csv.substr(at + head.size(), csv.find(')', at) - at - head.size()));
            v.require(printed && std::abs(*printed - col.rates[i]) <= 0.001 + 1e-12,
                      "printed rate for " + format_count(col.counts[i]) + " off");
        }
    }
    const double elapsed = seconds_since(t0);
    v.require(elapsed < 1.0, "took " + fmt(elapsed) + " s");
    v.require(matched == 25, std::to_string(matched) + "/25 cells");
    if (v.pass) v.detail = "25/25 cells within 0.001 in " + text::format_fixed(elapsed * 1e3, 2) + " ms";
    return v;
}

Verdict percent_difference() {
    Verdict v;
    const double up = safety_impact(0.015, 0.005).percent_difference;
    const double down = safety_impact(0.004, 0.005).percent_difference;
    v.require(std::abs(up - 200.0) <= 1e-9, "0.015 vs 0.005 gave " + fmt(up));
    v.require(down < 0.0, "lower ADS rate gave " + fmt(down));
    if (v.pass) v.detail = "+" + text::format_fixed(up, 6) + "% and " + text::format_fixed(down, 1) + "%";
    return v;
}

Verdict power_formula() {
    Verdict v;
    const double ref = required_mileage({1e-7, 0.75}).required_miles * 1e-7;
    double worst = 0.0;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> exponent(-9.0, -5.0);
    for (int i = 0; i < 1000; ++i) {
        const double lambda = i == 0 ? 1e-9 : i == 1 ? 1e-5 : std::pow(10.0, exponent(rng));
        const double m = required_mileage({lambda, 0.75}).required_miles;
        worst = std::max(worst, std::abs(m * lambda / ref - 1.0));
    }
    v.require(worst <= 1e-9, "1/lambda scaling off by " + fmt(worst));

    bool monotone = true;
    for (const auto& side : {std::vector<double>{0.99, 0.9, 0.75, 0.5, 0.25, 0.1, 0.01},
                             std::vector<double>{1.01, 1.1, 1.25, 1.5, 2.0, 5.0}}) {
        double prev = INFINITY;
        for (double r : side) {
            const double m = required_mileage({5.609e-6, r}).required_miles;
            monotone = monotone && m < prev;
            prev = m;
        }
    }
    v.require(monotone, "mileage not decreasing in |r-1|");

    std::vector<double> miles;
    for (const auto& col : testsupport::kReferenceFreeway) {
        miles.push_back(required_mileage({col.rates[0] * 1e-6, 0.75}).required_miles);
    }
    const auto [lo, hi] = std::minmax_element(miles.begin(), miles.end());
    const double ratio = *hi / *lo;
    v.require(std::abs(ratio - 5.609 / 1.550) <= 0.01, "spread " + fmt(ratio));
    v.require(std::abs(ratio / (75.0 / 21.0) - 1.0) <= 0.05, "spread " + fmt(ratio) + " vs 75/21");
    if (v.pass) {
        v.detail = "scaling err " + text::format_scientific(worst, 1) + ", spread " + text::format_fixed(ratio, 4) +
                   " (" + text::format_fixed(*lo / 1e6, 1) + "-" + text::format_fixed(*hi / 1e6, 1) + " Mmi)";
    }
    return v;
}

Verdict monte_carlo() {
    Verdict v;
    const auto t0 = Clock::now();
    const double lambda = 5.609e-6;
    const double m = required_mileage({lambda, 0.75}).required_miles;
    MonteCarloOptions opt{10000, 20240101, 4};
    const double power = monte_carlo_power(lambda, 0.75, m, 0.05, opt);
    const double null = monte_carlo_power(lambda, 1.0, m, 0.05, opt);
    const double elapsed = seconds_since(t0);
    v.require(std::abs(power - 0.80) <= 0.02, "power " + fmt(power));
    v.require(std::abs(null - 0.05) <= 0.01, "null rejection " + fmt(null));
    v.require(elapsed < 60.0, "took " + fmt(elapsed) + " s");
    if (v.pass) {
        v.detail = "power " + text::format_fixed(power, 4) + ", null " + text::format_fixed(null, 4) + ", " +
                   text::format_fixed(elapsed, 2) + " s";
    }
    return v;
}

Verdict road_classification() {
    Verdict v;
    const auto fixture = testsupport::fixture_dir();
    std::ifstream aliases(fixture / "aliases.txt");
    const FreewaySegmentIndex index(load_freeway_segments(fixture / "segments.geojson"), load_alias_table(aliases));

    std::ifstream in(testsupport::source_dir() / "tests" / "data" / "roadclass_cases.csv");
    text::CsvReader reader(in);
    reader.header();
    std::vector<std::string> row;
    int total = 0, agree = 0;
    while (reader.next(row)) {
        ++total;
        CrashRecord r;
        r.crash_id = row[0];
        r.primary_road_name = row[1];
        if (!row[2].empty()) r.location = LatLon{*text::parse_double(row[2]), *text::parse_double(row[3])};
        const auto got = classify_road(r, index);
        if (to_string(got.road) == row[4] && to_string(got.provenance) == row[5]) ++agree;
        else v.require(false, "case " + row[0] + " gave " + std::string(to_string(got.road)));
    }
    v.require(total == 50, std::to_string(total) + " labeled cases");

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> lat(33.0, 34.0), lon(-113.0, -112.0), jitter(-0.03, 0.03);
    double worst = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        std::vector<FreewaySegment> segs;
        const int nseg = 1 + static_cast<int>(rng() % 6);
        for (int s = 0; s < nseg; ++s) {
            FreewaySegment seg;
            seg.route_id = "R" + std::to_string(s);
            LatLon p{lat(rng), lon(rng)};
            const int nv = 2 + static_cast<int>(rng() % 10);
            for (int k = 0; k < nv; ++k) {
                seg.polyline.push_back(p);
                p = {p.lat + jitter(rng), p.lon + jitter(rng)};
            }
            segs.push_back(std::move(seg));
        }
        const FreewaySegmentIndex grid(segs, {}, default_name_patterns(), inst % 2 ? 0.005 : 0.02);
        for (int q = 0; q < 10; ++q) {
            const LatLon p{lat(rng), lon(rng)};
            worst = std::max(worst, std::abs(grid.distance_to_nearest_freeway(p) - grid.brute_force_distance(p)));
        }
    }
    v.require(worst <= 1e-6, "grid differs from brute force by " + fmt(worst) + " m");
    if (v.pass) {
        v.detail = std::to_string(agree) + "/" + std::to_string(total) + " labeled, grid max diff " +
                   text::format_scientific(worst, 1) + " m over 200 instances";
    }
    return v;
}

Verdict taxonomy_properties() {
    Verdict v;
    const auto corpus = testsupport::fuzz_corpus(10000, 20240101);
    std::size_t nesting_bad = 0, not_total = 0, classified = 0;
    std::vector<CohortInput> inputs;
    const std::vector<std::string> geos{"Atlanta", "Austin", "Phoenix"};
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& r = corpus[i];
        const auto s = classify_outcome(r);
        const bool nested = s.contains(OutcomeLevel::PoliceReported) &&
                            (!s.contains(OutcomeLevel::Fatal) || s.contains(OutcomeLevel::SuspectedSeriousInjuryPlus)) &&
                            (!s.contains(OutcomeLevel::SuspectedSeriousInjuryPlus) ||
                             s.contains(OutcomeLevel::AnyInjuryReported));
        if (!nested) ++nesting_bad;
        for (const auto& u : r.units) {
            for (auto road : {RoadClass::Freeway, RoadClass::SurfaceStreet}) {
                try {
                    const auto t = classify_crash_type(r, u.unit_id, road);
                    const bool known = std::find(kCrashTypes.begin(), kCrashTypes.end(), t) != kCrashTypes.end();
                    if (!known || (road == RoadClass::Freeway && t == CrashType::Intersection)) ++not_total;
                    ++classified;
                } catch (const std::exception&) {
                    ++not_total;
                }
            }
        }
        inputs.push_back({&r, geos[i % geos.size()], i % 2 ? RoadClass::Freeway : RoadClass::SurfaceStreet});
    }
    v.require(nesting_bad == 0, std::to_string(nesting_bad) + " records break outcome nesting");
    v.require(not_total == 0, std::to_string(not_total) + " units without exactly one crash type");

    std::size_t mismatched = 0, strata = 0;
    try {
        const auto table = tabulate_cohort(inputs);
        std::map<StratumKey, CohortCounts> sums;
        for (const auto& [key, c] : table.cells) {
            if (!key.crash_type) continue;
            auto all = key;
            all.crash_type.reset();
            sums[all].known_passenger += c.known_passenger;
            sums[all].unknown += c.unknown;
            sums[all].imputed_passenger += c.imputed_passenger;
        }
        for (const auto& [key, c] : table.cells) {
            if (key.crash_type) continue;
            ++strata;
            const auto& s = sums[key];
            if (s.known_passenger != c.known_passenger || s.unknown != c.unknown ||
                std::abs(s.imputed_passenger - c.imputed_passenger) > 1e-9 * std::max(1.0, c.imputed_passenger)) {
                ++mismatched;
            }
        }
    } catch (const std::exception& e) {
        v.require(false, std::string("tabulation failed: ") + e.what());
    }
    v.require(mismatched == 0, std::to_string(mismatched) + " strata whose type counts do not sum");
    if (v.pass) {
        v.detail = "10000 records, " + std::to_string(classified) + " unit classifications, " + std::to_string(strata) +
                   " strata sum exactly";
    }
    return v;
}

Verdict underreporting() {
    Verdict v;
    const double a = adjust_underreporting(100, 0, 0.32);
    v.require(std::abs(a - 147.06) <= 0.01, "adjust(100, 0, 0.32) = " + fmt(a));
    bool fatal_ok = true, identity_ok = true;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> count(0.0, 1e5), frac(0.0, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const double n = count(rng), f = count(rng), u = frac(rng);
        fatal_ok = fatal_ok && std::abs((adjust_underreporting(n, f, u) - adjust_underreporting(n, 0, u)) - f) <=
                                   1e-9 * std::max(1.0, n + f);
        identity_ok = identity_ok && adjust_underreporting(n, f, 0.0) == n + f;
    }
    v.require(fatal_ok, "fatal part changed under adjustment");
    v.require(identity_ok, "u = 0 is not the identity");
    if (v.pass) v.detail = "adjust(100, 0, 0.32) = " + text::format_fixed(a, 4) + ", fatal invariant, u=0 identity";
    return v;
}

Verdict poisson_intervals() {
    Verdict v;
    const auto got = stats::poisson_mean_interval(100);
    const auto want = testsupport::poisson_interval_bruteforce(100);
    const double err = std::max(std::abs(got.low - want.low), std::abs(got.high - want.high));
    v.require(err <= 1e-6, "count 100 interval off the tail oracle by " + fmt(err));

    std::mt19937_64 rng(30);
    std::poisson_distribution<long> draw(30.0);
    int covered = 0;
    for (int i = 0; i < 5000; ++i) {
        const auto ci = stats::poisson_mean_interval(static_cast<double>(draw(rng)));
        if (ci.low <= 30.0 && 30.0 <= ci.high) ++covered;
    }
    const double coverage = covered / 5000.0;
    v.require(coverage >= 0.94, "coverage " + fmt(coverage));
    if (v.pass) {
        v.detail = "[" + text::format_fixed(got.low, 4) + ", " + text::format_fixed(got.high, 4) + "], oracle diff " +
                   text::format_scientific(err, 1) + ", coverage " + text::format_fixed(coverage, 4);
    }
    return v;
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> out;
    if (!fs::is_directory(dir)) return out;
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + CRASHBENCH_CLI + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

Verdict determinism() {
    Verdict v;
    const auto config = (testsupport::fixture_dir() / "run.json").string();
    const auto base = fs::temp_directory_path() / "crashbench_acceptance";
    fs::remove_all(base);
    const std::vector<std::pair<std::string, std::string>> runs{
        {"a", "--workers 1"}, {"b", "--workers 1"}, {"c", "--workers 8"}};
    std::vector<std::map<std::string, std::string>> outputs;
    for (const auto& [name, extra] : runs) {
        const int rc = run_cli("--config \"" + config + "\" --out \"" + (base / name).string() + "\" " + extra + " run");
        v.require(rc == 0, "run " + name + " exited " + std::to_string(rc));
        outputs.push_back(read_dir(base / name));
    }
    v.require(!outputs[0].empty(), "no output files");
    v.require(outputs[0] == outputs[1], "two identical runs differ");
    v.require(outputs[0] == outputs[2], "workers 1 and 8 differ");

    // round-trip of the emitted rate table
    std::size_t cells = 0, exact = 0;
    for (const auto& [name, content] : outputs[0]) {
        if (name.rfind("rates_", 0) != 0) continue;
        std::istringstream in(content);
        const auto parsed = parse_rate_table_csv(in);
        cells = parsed.size();
        v.require(rate_table_csv(parsed) == content, "rate table does not re-serialize byte-identically");
        const auto report = run_pipeline(load_run_config(config), false);
        if (report.rates.size() == parsed.size()) {
            for (std::size_t i = 0; i < parsed.size(); ++i) exact += parsed[i] == report.rates[i];
        }
    }
    v.require(cells > 0 && exact == cells, std::to_string(exact) + "/" + std::to_string(cells) + " cells recovered");
    fs::remove_all(base);
    if (v.pass) {
        v.detail = std::to_string(outputs[0].size()) + " files identical over 3 runs, " + std::to_string(cells) +
                   " rate cells recovered exactly";
    }
    return v;
}

Verdict methodology_docs() {
    Verdict v;
    auto cfg = load_run_config(testsupport::fixture_dir() / "run.json");
    const auto notes = methodology_notes(run_pipeline(cfg, false));
    v.require(notes.find("Required mileage scale") != std::string::npos, "absolute-scale note missing");
    v.require(notes.find("about 4.8") != std::string::npos, "scale factor not stated");
    v.require(notes.find("Phoenix freeway fatal rate") != std::string::npos, "Phoenix note missing");
    v.require(notes.find("4 IPBM") != std::string::npos && notes.find("reports 5") != std::string::npos,
              "Phoenix 4 vs 5 IPBM not explained");
    if (v.pass) v.detail = "scale and Phoenix notes present";
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"reference freeway table", reference_table},
        {"percent difference", percent_difference},
        {"required mileage formula", power_formula},
        {"Monte Carlo power", monte_carlo},
        {"road classification", road_classification},
        {"taxonomy invariants", taxonomy_properties},
        {"underreporting adjustment", underreporting},
        {"Poisson intervals", poisson_intervals},
        {"deterministic outputs", determinism},
        {"methodology notes", methodology_docs},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("threw: ") + e.what();
        }
        if (!v.pass) ++failed;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " - "
                  << v.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
