#pragma once

#include <cmath>

namespace testsupport {

// Poisson tails summed term by term in log space. Slow but obviously right.
inline double poisson_cdf_bruteforce(long k, double mean) {
    if (k < 0) return 0.0;
    double sum = 0.0;
    for (long i = 0; i <= k; ++i) sum += std::exp(-mean + i * std::log(mean) - std::lgamma(i + 1.0));
    return sum;
}

inline double poisson_upper_tail_bruteforce(long k, double mean) {
    // P(X >= k), summed upward until the terms vanish
    if (k <= 0) return 1.0;
    double sum = 0.0;
    for (long i = k; i < k + 2000 + static_cast<long>(20 * mean); ++i) {
        const double term = std::exp(-mean + i * std::log(mean) - std::lgamma(i + 1.0));
        sum += term;
        if (i > mean && term < 1e-300) break;
    }
    return sum;
}

// Garwood bounds found by bisection on the tails.
struct TailInterval {
    double low = 0.0;
    double high = 0.0;
};

inline TailInterval poisson_interval_bruteforce(long k, double level = 0.95) {
    const double tail = (1.0 - level) / 2.0;
    auto bisect = [](auto f, double lo, double hi) {
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) ? hi : lo) = mid;
        }
        return 0.5 * (lo + hi);
    };
    const double top = 10.0 * (k + 10);
    TailInterval out;
    // P(X >= k | low) grows with the mean
    out.low = k == 0 ? 0.0 : bisect([&](double m) { return poisson_upper_tail_bruteforce(k, m) >= tail; }, 0.0, top);
    // P(X <= k | high) shrinks with the mean
    out.high = bisect([&](double m) { return poisson_cdf_bruteforce(k, m) <= tail; }, 0.0, top);
    return out;
}

}  // namespace testsupport
