#include "crashbench/rates.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "crashbench/text.hpp"

namespace crashbench {

double compute_rate(double count, double vmt_miles) {
    if (!(vmt_miles > 0.0) || !std::isfinite(vmt_miles)) {
        throw InvalidExposure("exposure must be positive, got " + text::format_roundtrip(vmt_miles) + " miles");
    }
    if (!(count >= 0.0)) throw std::invalid_argument("count must be non-negative");
    return count / vmt_miles * 1e6;
}

double adjust_underreporting(double nonfatal_count, double fatal_count, double u) {
    if (!(u >= 0.0 && u < 1.0)) throw InvalidFraction("underreporting fraction must be in [0, 1), got " + text::format_roundtrip(u));
    return nonfatal_count / (1.0 - u) + fatal_count;
}

Interval poisson_ci(double count, double vmt_miles, double level) {
    if (!(vmt_miles > 0.0)) throw InvalidExposure("exposure must be positive");
    const auto mean = stats::poisson_mean_interval(count, level);
    return {mean.low / vmt_miles * 1e6, mean.high / vmt_miles * 1e6};
}

SafetyImpactResult safety_impact(double ads_rate, double baseline_rate) {
    if (!(baseline_rate > 0.0)) throw UndefinedBaseline("baseline rate must be positive");
    return {ads_rate, baseline_rate, (ads_rate / baseline_rate - 1.0) * 100.0};
}

RateCell make_rate_cell(std::string geo, RoadClass road, OutcomeLevel outcome, std::optional<CrashType> crash_type,
                        double count, double vmt_miles, double level) {
    RateCell cell;
    cell.geo = std::move(geo);
    cell.road = road;
    cell.outcome = outcome;
    cell.crash_type = crash_type;
    cell.count = count;
    cell.vmt_miles = vmt_miles;
    cell.rate_ipmm = compute_rate(count, vmt_miles);
    cell.ci95 = poisson_ci(count, vmt_miles, level);
    return cell;
}

std::map<CrashType, double> crash_type_distribution(const std::vector<RateCell>& cells) {
    std::map<CrashType, double> out;
    if (cells.empty()) throw EmptyStratum("no cells");
    double total = 0.0;
    for (const auto& c : cells) {
        if (!c.crash_type) throw std::invalid_argument("distribution cells need a crash type");
        if (c.geo != cells.front().geo || c.road != cells.front().road || c.outcome != cells.front().outcome) {
            throw std::invalid_argument("distribution cells span more than one stratum");
        }
        out[*c.crash_type] += c.count;
        total += c.count;
    }
    if (!(total > 0.0)) throw EmptyStratum("stratum " + cells.front().geo + " has no crashed vehicles");
    for (auto& [type, v] : out) v /= total;
    return out;
}

RateTable build_rate_cells(const CohortTable& cohort, const std::map<ExposureKey, double>& passenger_vmt,
                           const RateOptions& options) {
    if (!(options.underreport_fraction >= 0.0 && options.underreport_fraction < 1.0)) {
        throw InvalidFraction("underreporting fraction must be in [0, 1)");
    }
    // Every exposed stratum gets its all-type rows, even at zero crashes.
    auto cells = cohort.cells;
    for (const auto& [exposure, miles] : passenger_vmt) {
        for (auto level : kOutcomeLevels) cells.try_emplace({exposure.first, exposure.second, level, std::nullopt});
    }
    RateTable out;
    std::set<ExposureKey> missing;
    for (const auto& [key, counts] : cells) {
        auto vit = passenger_vmt.find({key.geo, key.road});
        if (vit == passenger_vmt.end()) {
            missing.insert({key.geo, key.road});
            continue;
        }
        double count = counts.total();
        if (key.outcome == OutcomeLevel::AnyInjuryReported) {
            StratumKey fatal_key = key;
            fatal_key.outcome = OutcomeLevel::Fatal;
            auto fit = cells.find(fatal_key);
            const double fatal = fit == cells.end() ? 0.0 : fit->second.total();
            count = adjust_underreporting(std::max(0.0, count - fatal), fatal, options.underreport_fraction);
        }
        out.cells.push_back(
            make_rate_cell(key.geo, key.road, key.outcome, key.crash_type, count, vit->second, options.confidence));
    }
    out.missing_exposure.assign(missing.begin(), missing.end());
    return out;
}

std::string format_ipmm(double rate) {
    if (rate != 0.0 && std::fabs(rate) < 0.001) return text::format_scientific(rate, 3);
    return text::format_fixed(rate, 3);
}

double to_ipbm(double ipmm) { return ipmm * 1e3; }

}  // namespace crashbench
