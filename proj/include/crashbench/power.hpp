#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crashbench {

class ZeroEffect : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PowerQuery {
    double lambda_human = 0.0;  // crashes per mile
    double effect_ratio = 0.75;  // lambda_ads / lambda_human
    double alpha = 0.05;         // two-sided
    double power = 0.8;
};

struct PowerResult {
    double required_miles = 0.0;
    double expected_ads_crashes = 0.0;
};

/// How the alpha quantile enters the mileage formula. Magnitude uses
/// |z(alpha/2)| = z(1 - alpha/2), the usual two-sided sample size. AsDisplayed
/// keeps the negative z(alpha/2), which lets the two terms partly cancel and
/// gives mileages about 4.8 times smaller at 80% power.
enum class QuantileSign { Magnitude, AsDisplayed };

/// m = (sqrt(la) z(power) + sqrt(lh) z(1 - alpha/2))^2 / (la - lh)^2.
/// Throws ZeroEffect for r = 1, std::invalid_argument for other bad inputs.
PowerResult required_mileage(const PowerQuery& q, QuantileSign sign = QuantileSign::Magnitude);

inline const std::vector<double> kDefaultEffectRatios{0.75, 0.5, 0.25, 0.1, 1.25, 1.5};

struct PowerCurveRow {
    double effect_ratio = 0.0;
    std::optional<PowerResult> result;
    std::string error;  // set when result is empty
};

/// One row per ratio; a ratio of 1 yields a row carrying the ZeroEffect
/// message instead of a result.
std::vector<PowerCurveRow> power_curve(double lambda_human, const std::vector<double>& effects = kDefaultEffectRatios,
                                       double alpha = 0.05, double power = 0.8,
                                       QuantileSign sign = QuantileSign::Magnitude);

struct MonteCarloOptions {
    std::size_t trials = 10000;
    std::uint64_t seed = 20240101;
    unsigned workers = 1;
};

/// Fraction of simulated ADS counts ~ Poisson(r * lambda * miles) for which
/// |(n - lambda*miles) / sqrt(lambda*miles)| exceeds z(1 - alpha/2). Result
/// depends only on the seed, never on the worker count.
double monte_carlo_power(double lambda_human, double effect_ratio, double miles, double alpha,
                         const MonteCarloOptions& options = {});

std::string_view to_string(QuantileSign s);

}  // namespace crashbench
