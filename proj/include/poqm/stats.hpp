#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "poqm/rng.hpp"

namespace poqm::games {

/**
 * Empirical acceptance probability with a two-sided 99% Clopper-Pearson
 * interval, optionally paired with the closed-form bound it is compared
 * against. Exact binomial coverage; no normal approximation, so extreme
 * p-hat values are handled correctly.
 */
struct Estimate {
    long trials = 0;
    long successes = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::optional<double> bound;
    bool bound_vacuous = false;

    double se() const {
        if (trials == 0) return 0.0;
        return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
    }

    bool operator==(const Estimate&) const = default;
};

inline constexpr double kCiAlpha = 0.01;  // 99% two-sided

inline Estimate make_estimate(long trials, long successes) {
    Estimate e;
    e.trials = trials;
    e.successes = successes;
    e.p_hat = trials > 0 ? static_cast<double>(successes) / trials : 0.0;
    const double a = kCiAlpha / 2.0;
    const double k = static_cast<double>(successes);
    const double n = static_cast<double>(trials);
    e.ci_low = successes == 0 ? 0.0
                              : boost::math::ibeta_inv(k, n - k + 1.0, a);
    e.ci_high = successes == trials
                    ? 1.0
                    : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - a);
    return e;
}

inline Estimate with_bound(Estimate e, double bound) {
    e.bound = bound;
    e.bound_vacuous = bound >= 1.0;
    return e;
}

/// Runs `trials` independent seeded rounds of a binary game and aggregates
/// them into an Estimate. Each round gets its own child rng stream, so the
/// result is bit-identical for a fixed seed regardless of the worker count.
inline Estimate estimate_acceptance(const std::function<bool(Rng&)>& game,
                                    long trials, std::uint64_t seed) {
    if (trials < 100)
        throw std::invalid_argument("estimate_acceptance needs >= 100 trials");
    const Rng root(seed);
    unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                          trials > 4000 ? 4u : 1u);
    if (workers <= 1) {
        long wins = 0;
        for (long i = 0; i < trials; ++i) {
            Rng r = root.child(static_cast<std::uint64_t>(i));
            if (game(r)) ++wins;
        }
        return make_estimate(trials, wins);
    }
    std::vector<long> partial(workers, 0);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            long wins = 0;
            for (long i = static_cast<long>(w); i < trials;
                 i += static_cast<long>(workers)) {
                Rng r = root.child(static_cast<std::uint64_t>(i));
                if (game(r)) ++wins;
            }
            partial[w] = wins;
        });
    }
    for (auto& t : pool) t.join();
    long wins = 0;
    for (long p : partial) wins += p;
    return make_estimate(trials, wins);
}

}  // namespace poqm::games
