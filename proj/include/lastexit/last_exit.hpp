// Last-exit extraction over a linear boundary, and the horizon/step rules
// that keep the windowing and discretization errors controlled.
#pragma once

#include <cmath>
#include <cstdint>

#include "lastexit/covariance.hpp"
#include "lastexit/errors.hpp"
#include "lastexit/scaling.hpp"
#include "lastexit/simulate.hpp"

namespace lastexit {

enum class ExitKind { Crossed, NoCrossing, RightCensored };

/**
 * @brief Result of last-exit extraction for one path.
 *
 * Crossed carries the interpolated last exit time T; RightCensored carries
 * the last grid time at or above the boundary, which fell into the guard
 * zone near the window end so the true last exit may lie beyond it.
 */
struct ExitOutcome {
    ExitKind kind = ExitKind::NoCrossing;
    double value = 0.0;

    bool crossed() const { return kind == ExitKind::Crossed; }
};

/**
 * @brief Finds the last time the path sits on or above the boundary eps*t.
 *
 * Let g_i = Y(t_i) - eps t_i. The largest i with g_i >= 0 determines the
 * outcome: none -> NoCrossing; inside the guard zone near the window end ->
 * RightCensored; otherwise Crossed at the root of the linear interpolant of
 * g on [t_i, t_{i+1}] (g_{i+1} < 0 there by maximality of i).
 */
inline ExitOutcome last_exit_time(const PathSample& path, double eps, double guard) {
    if (!(eps > 0.0)) throw InvalidRange("last_exit_time: eps must be > 0");
    if (!(guard >= 0.0)) throw InvalidRange("last_exit_time: guard must be >= 0");

    const GridSpec& grid = path.grid;
    const double t_end = grid.t_max();

    std::int64_t last = -1;
    for (std::int64_t i = grid.n - 1; i >= 0; --i) {
        const double g = path.values[static_cast<std::size_t>(i)] - eps * grid.time(i);
        if (g >= 0.0) {
            last = i;
            break;
        }
    }
    if (last < 0) return {ExitKind::NoCrossing, 0.0};

    const double t_last = grid.time(last);
    // The final grid point can never be confirmed as a last exit.
    if (last == grid.n - 1 || t_last > t_end - guard)
        return {ExitKind::RightCensored, t_last};

    const double g_here = path.values[static_cast<std::size_t>(last)] - eps * t_last;
    if (g_here == 0.0) return {ExitKind::Crossed, t_last};
    const double g_next =
        path.values[static_cast<std::size_t>(last + 1)] - eps * grid.time(last + 1);
    return {ExitKind::Crossed, t_last + grid.step * g_here / (g_here - g_next)};
}

/**
 * @brief Simulation window for one trend level.
 *
 * t_max = A + B R_used truncates the line search; tail_bound estimates the
 * probability of any exit beyond it. The guard zone [t_max - guard, t_max]
 * turns late detections into RightCensored outcomes instead of exits.
 */
struct HorizonPlan {
    double t_max = 0.0;
    double guard = 0.0;
    double R_used = 0.0;
    double tail_bound = 0.0;
    double step = 0.0; ///< filled by plan_horizon; choose_horizon alone leaves it 0
};

/**
 * @brief Chooses the window end so the missed-exit probability is delta_tail.
 *
 * Inverts the closed-form tail estimate: R = ln(c/delta_tail) makes
 * sigma_tail_estimate approximately delta_tail; in the rare regime where the
 * finite-eps correction pushes the estimate above delta_tail, R is nudged up
 * until the bound holds. guard is one B unit.
 */
inline HorizonPlan choose_horizon(const ScalingConstants& sc, double delta_tail) {
    if (!(delta_tail > 0.0 && delta_tail <= 0.1))
        throw InvalidRange("choose_horizon: delta_tail must lie in (0, 0.1]");

    double R = std::log(sc.c / delta_tail);
    double bound = sigma_tail_estimate(sc, R);
    for (int i = 0; i < 16 && bound > delta_tail; ++i) {
        R += std::log(bound / delta_tail);
        bound = sigma_tail_estimate(sc, R);
    }

    HorizonPlan plan;
    plan.R_used = R;
    plan.t_max = sc.A + sc.B * R;
    plan.guard = sc.B;
    plan.tail_bound = bound;
    return plan;
}

/**
 * @brief Grid step resolving the correlation scale of boundary exceedances.
 *
 * Exceedances of the critical level u = sqrt(-2 ln eps_v) decorrelate over
 * times of order Q^(-1/alpha) u^(-2/alpha); eta grid points per such scale.
 */
inline double choose_step(const ScalingConstants& sc, const CovarianceModel& model,
                          double eta = 0.1) {
    if (!(eta > 0.0 && eta <= 0.5))
        throw InvalidRange("choose_step: eta must lie in (0, 0.5]");
    const double u = critical_level(sc.eps_v);
    return eta * std::pow(model.q, -1.0 / model.alpha) * std::pow(u, -2.0 / model.alpha);
}

/// choose_horizon + choose_step in one plan.
inline HorizonPlan plan_horizon(const ScalingConstants& sc, const CovarianceModel& model,
                                double delta_tail, double eta = 0.1) {
    HorizonPlan plan = choose_horizon(sc, delta_tail);
    plan.step = choose_step(sc, model, eta);
    return plan;
}

/// Smallest uniform grid covering [0, plan.t_max] at the planned step.
inline GridSpec grid_for_plan(const HorizonPlan& plan) {
    GridSpec grid;
    grid.step = plan.step;
    grid.n = static_cast<std::int64_t>(std::ceil(plan.t_max / plan.step)) + 1;
    grid.validate();
    return grid;
}

} // namespace lastexit
