#pragma once

#include <cstdint>

namespace crashbench::stats {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, absolute error below 1e-12 over (0, 1).
/// Throws std::domain_error outside the open interval.
double normal_quantile(double p);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Exact two-sided interval for a Poisson mean given an observed count.
/// Non-integer counts use the gamma-quantile form, which reduces to the
/// classical interval on integers.
Interval poisson_mean_interval(double count, double level = 0.95);

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next();
    /// Uniform on (0, 1).
    double uniform();

private:
    std::uint64_t state_;
};

/// Stream seed for trial `index` of a run seeded with `seed`; independent of
/// how trials are split across threads.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t index);

/// Poisson variate: inversion for small means, transformed rejection (PTRS)
/// above.
std::uint64_t sample_poisson(double mean, SplitMix64& rng);

}  // namespace crashbench::stats
