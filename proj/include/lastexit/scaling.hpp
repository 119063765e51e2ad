// Normalizing constants of the last-exit limit theorem and the
// closed-form diagnostics that justify them.
#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "lastexit/covariance.hpp"
#include "lastexit/errors.hpp"

namespace lastexit {

inline constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;

/**
 * @brief Pickands constant H_alpha.
 *
 * Exact values are known for alpha = 1 (H = 1) and alpha = 2
 * (H = 1/sqrt(pi)); any other exponent requires a user-supplied value.
 */
inline double pickands_constant(double alpha, std::optional<double> user_value = {}) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw InvalidRange("pickands_constant: alpha must lie in (0, 2]");
    if (alpha == 1.0) return 1.0;
    if (alpha == 2.0) return 0.56418958354775628694807945156077; // 1/sqrt(pi)
    if (user_value) {
        if (!(*user_value > 0.0))
            throw UnknownPickandsConstant("pickands_constant: user value must be > 0");
        return *user_value;
    }
    throw UnknownPickandsConstant(
        "pickands_constant: no exact value for this alpha; supply one (h_alpha)");
}

/**
 * @brief Scaling constants of the limit law for a model at trend eps.
 *
 * With eps_v = eps/v and u = sqrt(-2 ln eps_v):
 *   A = (u + (1/alpha - 1) ln(u^2)/u) / eps_v
 *   B = 1 / (eps_v u)
 *   c = Q^(1/alpha) H_alpha / sqrt(2 pi)
 * The normalized last exit (T - A)/B converges in law to the CDF
 * exp(-c exp(-r)) as eps -> 0.
 */
struct ScalingConstants {
    double eps = 0.0;
    double eps_v = 0.0;
    double A = 0.0;
    double B = 0.0;
    double c = 0.0;
    double alpha = 0.0;
    double h_alpha = 0.0;
};

/// Critical level u = sqrt(-2 ln eps_v) of the normalized process.
inline double critical_level(double eps_v) { return std::sqrt(-2.0 * std::log(eps_v)); }

inline ScalingConstants scaling_constants(const CovarianceModel& m, double eps,
                                          double h_alpha) {
    if (!(eps > 0.0)) throw InvalidRange("scaling_constants: eps must be > 0");
    const double eps_v = eps / m.v;
    if (!(eps_v < 1.0))
        throw InvalidRange("scaling_constants: eps/v must be < 1 (asymptotic regime)");
    if (!(h_alpha > 0.0)) throw InvalidRange("scaling_constants: H_alpha must be > 0");

    const double u = critical_level(eps_v);
    ScalingConstants sc;
    sc.eps = eps;
    sc.eps_v = eps_v;
    sc.alpha = m.alpha;
    sc.h_alpha = h_alpha;
    sc.A = (u + (1.0 / m.alpha - 1.0) * std::log(u * u) / u) / eps_v;
    sc.B = 1.0 / (eps_v * u);
    sc.c = std::pow(m.q, 1.0 / m.alpha) * h_alpha / kSqrt2Pi;
    return sc;
}

/// tau(r) = A + B r, the time at which the normalized exit variable equals r.
inline double tau_of(const ScalingConstants& sc, double r) { return sc.A + sc.B * r; }

/// Limit CDF exp(-c exp(-r)); a valid CDF, increasing from 0 to 1.
inline double gumbel_limit_cdf(double r, double c) { return std::exp(-c * std::exp(-r)); }

/// Median of the limit law: the r solving exp(-c exp(-r)) = 1/2.
inline double gumbel_limit_median(double c) { return std::log(c / std::log(2.0)); }

namespace detail {

/// (tau(r) * eps_v) in normalized units: u + (1/alpha - 1) ln(u^2)/u + r/u.
inline double normalized_tau_level(double eps_v, double alpha, double r) {
    const double u = critical_level(eps_v);
    return u + (1.0 / alpha - 1.0) * std::log(u * u) / u + r / u;
}

} // namespace detail

struct TauRelationRow {
    double eps = 0.0;
    double lhs = 0.0;   ///< (1/eps_v) (tau eps_v)^(2/alpha - 2) exp(-(tau eps_v)^2 / 2)
    double ratio = 0.0; ///< lhs / exp(-r); tends to 1 as eps -> 0
};

/**
 * @brief Checks the defining relation of the scaling constants.
 *
 * The constants A, B are chosen exactly so that
 *   (1/eps)(tau eps)^(2/alpha-2) exp(-(tau eps)^2/2) -> exp(-r)
 * in normalized (v = Q = 1) coordinates. For alpha = 1 and r = 0 the
 * cancellation is exact at every eps.
 */
inline std::vector<TauRelationRow> verify_tau_relation(const CovarianceModel& m,
                                                       std::span<const double> eps_grid,
                                                       double r, double /*h_alpha*/) {
    std::vector<TauRelationRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        const double eps_v = eps / m.v;
        if (!(eps_v > 0.0 && eps_v < 1.0))
            throw InvalidRange("verify_tau_relation: eps/v must lie in (0, 1)");
        const double xi = detail::normalized_tau_level(eps_v, m.alpha, r);
        TauRelationRow row;
        row.eps = eps;
        row.lhs = (1.0 / eps_v) * std::pow(xi, 2.0 / m.alpha - 2.0) * std::exp(-xi * xi / 2.0);
        row.ratio = row.lhs * std::exp(r);
        rows.push_back(row);
    }
    return rows;
}

/**
 * @brief Closed-form estimate of the probability of any exit after
 * sigma = A + B R (the windowing error of a finite horizon).
 *
 * Equals c (1/eps_v)(sigma eps_v)^(2/alpha-2) exp(-(sigma eps_v)^2/2),
 * which is asymptotically c exp(-R).
 */
inline double sigma_tail_estimate(const ScalingConstants& sc, double R) {
    const double xi = detail::normalized_tau_level(sc.eps_v, sc.alpha, R);
    return sc.c * (1.0 / sc.eps_v) * std::pow(xi, 2.0 / sc.alpha - 2.0) *
           std::exp(-xi * xi / 2.0);
}

} // namespace lastexit
