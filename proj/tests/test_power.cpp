#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "crashbench/power.hpp"
#include "crashbench/stats.hpp"
#include "reference_benchmark.hpp"

using namespace crashbench;

namespace {

// Closed form written out with literal quantiles instead of the library's.
double miles_oracle(double lh, double r) {
    const double z_beta = 0.8416212335729143, z_alpha = 1.959963984540054;
    const double la = r * lh;
    const double num = std::sqrt(la) * z_beta + std::sqrt(lh) * z_alpha;
    return num * num / ((la - lh) * (la - lh));
}

}  // namespace

TEST_SUITE("power") {

TEST_CASE("required mileage matches the closed form") {
    for (double r : {0.1, 0.25, 0.5, 0.75, 1.25, 1.5, 3.0}) {
        CAPTURE(r);
        const auto got = required_mileage({5.609e-6, r});
        CHECK(got.required_miles == doctest::Approx(miles_oracle(5.609e-6, r)).epsilon(1e-12));
        CHECK(got.expected_ads_crashes == doctest::Approx(r * 5.609e-6 * got.required_miles));
    }
    CHECK(required_mileage({5.609e-6, 0.75}).required_miles == doctest::Approx(2.0623436e7).epsilon(1e-7));
}

TEST_CASE("literal quantile sign") {
    const PowerQuery q{5.609e-6, 0.75};
    const double literal = required_mileage(q, QuantileSign::AsDisplayed).required_miles;
    CHECK(literal == doctest::Approx(4.32335e6).epsilon(1e-5));
    CHECK(required_mileage(q).required_miles / literal == doctest::Approx(4.77).epsilon(0.01));
}

TEST_CASE("mileage scales as one over the rate") {
    const double base = required_mileage({1e-6, 0.75}).required_miles;
    for (double lambda = 1e-9; lambda <= 1e-5 * (1 + 1e-12); lambda *= 3.1622776601683795) {
        CAPTURE(lambda);
        const double m = required_mileage({lambda, 0.75}).required_miles;
        CHECK(std::abs(m * lambda / (base * 1e-6) - 1.0) <= 1e-9);
    }
}

TEST_CASE("mileage falls as the effect grows on either side") {
    for (const auto& side : {std::vector<double>{0.95, 0.9, 0.75, 0.5, 0.25, 0.1, 0.01},
                             std::vector<double>{1.05, 1.1, 1.25, 1.5, 2.0, 4.0}}) {
        double prev = INFINITY;
        for (double r : side) {
            const double m = required_mileage({2e-6, r}).required_miles;
            CHECK(m < prev);
            prev = m;
        }
    }
}

TEST_CASE("freeway spread follows the rate spread") {
    std::vector<double> miles;
    for (const auto& col : testsupport::kReferenceFreeway) {
        miles.push_back(required_mileage({col.rates[0] * 1e-6, 0.75}).required_miles);
    }
    const auto [lo, hi] = std::minmax_element(miles.begin(), miles.end());
    const double ratio = *hi / *lo;
    CHECK(std::abs(ratio - 5.609 / 1.550) <= 0.01);
    CHECK(std::abs(ratio / (75.0 / 21.0) - 1.0) <= 0.05);
    CHECK(*hi == doctest::Approx(74.6e6).epsilon(0.01));
}

TEST_CASE("input checks") {
    CHECK_THROWS_AS(required_mileage({1e-6, 1.0}), ZeroEffect);
    CHECK_THROWS_AS(required_mileage({0.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(required_mileage({1e-6, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(required_mileage({1e-6, 0.5, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(required_mileage({1e-6, 0.5, 0.05, 1.0}), std::invalid_argument);
}

TEST_CASE("power curve keeps going past a zero effect") {
    const auto rows = power_curve(1e-6, {0.5, 1.0, 1.5});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].result.has_value());
    CHECK_FALSE(rows[1].result.has_value());
    CHECK_FALSE(rows[1].error.empty());
    CHECK(rows[2].result.has_value());
}

TEST_CASE("Monte Carlo power at the analytic mileage") {
    const double lambda = 5.609e-6;
    const double m = required_mileage({lambda, 0.75}).required_miles;
    MonteCarloOptions opt;
    opt.trials = 4000;
    const double p = monte_carlo_power(lambda, 0.75, m, 0.05, opt);
    CHECK(std::abs(p - 0.80) <= 0.03);
    const double null = monte_carlo_power(lambda, 1.0, m, 0.05, opt);
    CHECK(std::abs(null - 0.05) <= 0.015);

    // the literal mileage is badly underpowered
    const double literal = required_mileage({lambda, 0.75}, QuantileSign::AsDisplayed).required_miles;
    CHECK(monte_carlo_power(lambda, 0.75, literal, 0.05, opt) < 0.4);
}

TEST_CASE("Monte Carlo result ignores the worker count") {
    MonteCarloOptions one{3001, 77, 1};
    MonteCarloOptions many{3001, 77, 8};
    const double a = monte_carlo_power(2e-6, 0.6, 3e6, 0.05, one);
    CHECK(a == monte_carlo_power(2e-6, 0.6, 3e6, 0.05, many));
    MonteCarloOptions other_seed{3001, 78, 8};
    CHECK(a != monte_carlo_power(2e-6, 0.6, 3e6, 0.05, other_seed));
    CHECK_THROWS_AS(monte_carlo_power(2e-6, 0.6, 3e6, 0.05, {10, 1, 1}), std::invalid_argument);
}

}  // TEST_SUITE
