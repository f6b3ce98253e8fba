#include "crashbench/power.hpp"

#include <algorithm>
#include <cmath>

#include "crashbench/parallel.hpp"
#include "crashbench/stats.hpp"

namespace crashbench {

namespace {

void check_query(const PowerQuery& q) {
    if (!(q.lambda_human > 0.0) || !std::isfinite(q.lambda_human)) {
        throw std::invalid_argument("human crash rate must be positive");
    }
    if (!(q.effect_ratio > 0.0) || !std::isfinite(q.effect_ratio)) {
        throw std::invalid_argument("effect ratio must be positive");
    }
    if (q.effect_ratio == 1.0) throw ZeroEffect("effect ratio 1 has no detectable difference");
    if (!(q.alpha > 0.0 && q.alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");
    if (!(q.power > 0.0 && q.power < 1.0)) throw std::invalid_argument("power must be in (0, 1)");
}

}  // namespace

PowerResult required_mileage(const PowerQuery& q, QuantileSign sign) {
    check_query(q);
    const double lh = q.lambda_human;
    const double la = q.effect_ratio * lh;
    const double z_power = stats::normal_quantile(q.power);
    const double z_alpha = sign == QuantileSign::Magnitude ? stats::normal_quantile(1.0 - q.alpha / 2.0)
                                                           : stats::normal_quantile(q.alpha / 2.0);
    const double num = std::sqrt(la) * z_power + std::sqrt(lh) * z_alpha;
    const double diff = la - lh;
    const double miles = num * num / (diff * diff);
    return {miles, la * miles};
}

std::vector<PowerCurveRow> power_curve(double lambda_human, const std::vector<double>& effects, double alpha,
                                       double power, QuantileSign sign) {
    std::vector<PowerCurveRow> rows;
    rows.reserve(effects.size());
    for (double r : effects) {
        PowerCurveRow row;
        row.effect_ratio = r;
        try {
            row.result = required_mileage({lambda_human, r, alpha, power}, sign);
        } catch (const ZeroEffect& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

double monte_carlo_power(double lambda_human, double effect_ratio, double miles, double alpha,
                         const MonteCarloOptions& options) {
    if (options.trials < 1000) throw std::invalid_argument("Monte Carlo power needs at least 1000 trials");
    if (!(lambda_human > 0.0) || !(effect_ratio > 0.0) || !(miles > 0.0)) {
        throw std::invalid_argument("rate, ratio and mileage must be positive");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0, 1)");

    const double expected_null = lambda_human * miles;
    const double mean = effect_ratio * expected_null;
    const double sd = std::sqrt(expected_null);
    const double z = stats::normal_quantile(1.0 - alpha / 2.0);

    auto run_range = [&](std::size_t begin, std::size_t end) {
        std::size_t rejected = 0;
        for (std::size_t t = begin; t < end; ++t) {
            stats::SplitMix64 rng(stats::trial_seed(options.seed, t));
            const auto n = static_cast<double>(stats::sample_poisson(mean, rng));
            if (std::fabs((n - expected_null) / sd) > z) ++rejected;
        }
        return rejected;
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(options.workers, options.trials));
    const std::size_t chunk = (options.trials + workers - 1) / workers;
    std::vector<std::size_t> counts(workers, 0);
    parallel_for(workers, options.workers, [&](std::size_t w) {
        const std::size_t begin = std::min(options.trials, w * chunk);
        counts[w] = run_range(begin, std::min(options.trials, begin + chunk));
    });
    std::size_t rejected = 0;
    for (auto c : counts) rejected += c;
    return static_cast<double>(rejected) / static_cast<double>(options.trials);
}

std::string_view to_string(QuantileSign s) { return s == QuantileSign::Magnitude ? "magnitude" : "as-displayed"; }

}  // namespace crashbench
