// Tail approximation for the supremum of the process over a growing
// interval, with its validity flags and a Monte Carlo oracle.
#pragma once

#include <cmath>
#include <cstdint>

#include "lastexit/covariance.hpp"
#include "lastexit/errors.hpp"
#include "lastexit/scaling.hpp"
#include "lastexit/simulate.hpp"

namespace lastexit {

struct TailApprox {
    double p_hat = 0.0;
    bool small_rhs = false; ///< p_hat < 0.05: the asymptotic regime's "rhs -> 0"
    bool scale_ok = false;  ///< t x^(2/alpha) > 100: the "t x^(2/alpha) -> inf" side
};

/**
 * @brief Closed-form tail of the supremum:
 *   P(max over [0,t] >= x) ~ (Q^(1/alpha) H_alpha / sqrt(2 pi))
 *                            * t * (x/v)^(2/alpha-1) * exp(-x^2 / 2 v^2).
 *
 * Valid asymptotically when the value tends to zero and t x^(2/alpha) grows;
 * the two flags gate those side conditions at fixed thresholds.
 */
inline TailApprox tail_approx(const CovarianceModel& m, double t, double x,
                              double h_alpha) {
    if (!(t > 0.0) || !(x > 0.0))
        throw InvalidRange("tail_approx: need t > 0 and x > 0");
    const double coef = std::pow(m.q, 1.0 / m.alpha) * h_alpha / kSqrt2Pi *
                        std::pow(x / m.v, 2.0 / m.alpha - 1.0) *
                        std::exp(-x * x / (2.0 * m.v * m.v));
    TailApprox out;
    out.p_hat = coef * t;
    out.small_rhs = out.p_hat < 0.05;
    out.scale_ok = t * std::pow(x, 2.0 / m.alpha) > 100.0;
    return out;
}

struct TailMcResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    GridSpec grid;
};

/**
 * @brief Monte Carlo estimate of P(max over [0,t] of Y >= x) on a grid.
 *
 * The grid step must satisfy the exceedance step rule at level x (it may be
 * finer). The discrete maximum is biased low; the bias shrinks with the
 * step and is not corrected here.
 */
inline TailMcResult tail_mc(const CovarianceModel& m, double t, double x,
                            double grid_step, std::int64_t n_paths,
                            std::uint64_t master_seed) {
    if (n_paths <= 0) throw InvalidSampleSize("tail_mc: n_paths must be positive");
    if (!(t > 0.0) || !(grid_step > 0.0))
        throw InvalidRange("tail_mc: need t > 0 and grid_step > 0");
    if (x > 0.0) {
        const double max_step =
            0.5 * std::pow(m.q, -1.0 / m.alpha) * std::pow(x, -2.0 / m.alpha);
        if (grid_step > max_step * (1.0 + 1e-12))
            throw InvalidRange("tail_mc: grid_step too coarse for level x");
    }

    GridSpec grid;
    grid.n = static_cast<std::int64_t>(std::ceil(t / grid_step)) + 1;
    grid.step = t / static_cast<double>(grid.n - 1); // land exactly on t
    const EmbeddingSpectrum spectrum = build_embedding(m, grid);

    std::int64_t hits = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : hits)
    for (std::int64_t i = 0; i < n_paths; ++i) {
        const PathSample path = sample_path(spectrum, grid, master_seed, i);
        bool hit = false;
        for (double y : path.values) {
            if (y >= x) {
                hit = true;
                break;
            }
        }
        hits += hit ? 1 : 0;
    }

    TailMcResult res;
    res.n_paths = n_paths;
    res.grid = grid;
    res.estimate = static_cast<double>(hits) / static_cast<double>(n_paths);
    res.std_error =
        std::sqrt(res.estimate * (1.0 - res.estimate) / static_cast<double>(n_paths));
    return res;
}

} // namespace lastexit
