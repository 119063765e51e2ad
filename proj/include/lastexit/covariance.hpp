// Stationary covariance families with prescribed local behaviour
// rho(t) = v^2 (1 - Q|t|^alpha + o(|t|^alpha)) and log-negligible decay.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lastexit/errors.hpp"

namespace lastexit {

enum class CovFamily {
    ExpPower,   ///< rho(t) = v^2 exp(-Q |t|^alpha)
    CauchyType, ///< rho(t) = v^2 (1 + (Q/beta) |t|^alpha)^(-beta)
};

/**
 * @brief A stationary covariance model with declared local parameters.
 *
 * Both families expand as v^2 (1 - Q|t|^alpha + o(|t|^alpha)) at zero with
 * the declared (v, Q, alpha), and decay faster than 1/ln(t) at infinity.
 * The CauchyType scale is (Q/beta) so that the first-order coefficient is
 * exactly Q for every beta.
 */
struct CovarianceModel {
    CovFamily family = CovFamily::ExpPower;
    double v = 1.0;     ///< process standard deviation, > 0
    double q = 1.0;     ///< local scale coefficient, > 0
    double alpha = 1.0; ///< local exponent, in (0, 2]
    double beta = 1.0;  ///< CauchyType decay exponent, > 0

    static CovarianceModel exp_power(double v, double q, double alpha) {
        CovarianceModel m{CovFamily::ExpPower, v, q, alpha, 1.0};
        m.validate();
        return m;
    }

    static CovarianceModel cauchy_type(double v, double q, double alpha, double beta) {
        CovarianceModel m{CovFamily::CauchyType, v, q, alpha, beta};
        m.validate();
        return m;
    }

    void validate() const {
        if (!(v > 0.0)) throw ConfigInvalid("covariance: v must be > 0");
        if (!(q > 0.0)) throw ConfigInvalid("covariance: q must be > 0");
        if (!(alpha > 0.0 && alpha <= 2.0))
            throw ConfigInvalid("covariance: alpha must lie in (0, 2]");
        if (family == CovFamily::CauchyType && !(beta > 0.0))
            throw ConfigInvalid("covariance: beta must be > 0");
    }
};

/// Evaluates rho(t). Total and even in t.
inline double evaluate(const CovarianceModel& m, double t) {
    const double a = std::pow(std::abs(t), m.alpha);
    switch (m.family) {
        case CovFamily::ExpPower:
            return m.v * m.v * std::exp(-m.q * a);
        case CovFamily::CauchyType:
            return m.v * m.v * std::pow(1.0 + (m.q / m.beta) * a, -m.beta);
    }
    return 0.0; // unreachable
}

struct LocalExpansionFit {
    double q_hat = 0.0;
    double alpha_hat = 0.0;
    double max_residual = 0.0; ///< max |log(1 - rho/v^2) - fit| over the grid
};

/**
 * @brief Least-squares fit of log(1 - rho(t)/v^2) against log(t).
 *
 * On a log-spaced grid in [t_min, t_max] the slope estimates alpha and the
 * intercept estimates log(Q); for a conforming model both must match the
 * declared values up to the o(|t|^alpha) remainder.
 */
inline LocalExpansionFit verify_local_expansion(const CovarianceModel& m, double t_min,
                                                double t_max, std::size_t n_points) {
    if (!(t_min > 0.0) || !(t_min < t_max) || n_points < 2)
        throw InvalidRange("verify_local_expansion: need 0 < t_min < t_max, n_points >= 2");

    const double v2 = m.v * m.v;
    std::vector<double> xs(n_points), ys(n_points);
    const double log_lo = std::log(t_min);
    const double log_hi = std::log(t_max);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double lt = log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                       static_cast<double>(n_points - 1);
        const double t = std::exp(lt);
        const double drop = 1.0 - evaluate(m, t) / v2;
        if (drop >= 0.5)
            throw RangeTooWide("verify_local_expansion: 1 - rho/v^2 >= 0.5 in range");
        xs[i] = lt;
        ys[i] = std::log(drop);
    }

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n_points);
    my /= static_cast<double>(n_points);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;

    LocalExpansionFit fit;
    fit.alpha_hat = slope;
    fit.q_hat = std::exp(intercept);
    for (std::size_t i = 0; i < n_points; ++i) {
        const double r = std::abs(ys[i] - (intercept + slope * xs[i]));
        fit.max_residual = std::max(fit.max_residual, r);
    }
    return fit;
}

struct DecayReport {
    std::vector<double> s;
    std::vector<double> d; ///< D(s) = sup_{t >= s} |rho(t)| * ln(s) = |rho(s)| ln(s)
    bool pass = false;     ///< true when D is strictly decreasing along the grid
};

/**
 * @brief Checks rho(t) = o(1/ln t) on a grid of horizons.
 *
 * Both shipped families are monotone decreasing in |t|, so the sup over
 * [s, inf) equals |rho(s)| for any s > 0; the grid is restricted to s > 1
 * where ln(s) > 0.
 */
inline DecayReport check_decay_condition(const CovarianceModel& m,
                                         std::span<const double> s_grid) {
    DecayReport rep;
    double prev_s = 1.0;
    for (double s : s_grid) {
        if (!(s > 1.0) || !(s > prev_s))
            throw InvalidRange("check_decay_condition: grid must be increasing with s > 1");
        prev_s = s;
        rep.s.push_back(s);
        rep.d.push_back(std::abs(evaluate(m, s)) * std::log(s));
    }
    rep.pass = rep.d.size() >= 2;
    for (std::size_t i = 0; i + 1 < rep.d.size(); ++i)
        if (!(rep.d[i + 1] < rep.d[i])) rep.pass = false;
    return rep;
}

// ---------------------------------------------------------------------------
// Flat key-value (de)serialization. Keys: family, v, q, alpha, beta.
// ---------------------------------------------------------------------------

inline std::string family_name(CovFamily f) {
    return f == CovFamily::ExpPower ? "exp_power" : "cauchy_type";
}

inline CovarianceModel model_from_kv(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ConfigInvalid("model config: missing key '" + key + "'");
        return it->second;
    };
    auto num = [&](const std::string& key) {
        const std::string& s = get(key);
        try {
            std::size_t pos = 0;
            double x = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return x;
        } catch (const std::exception&) {
            throw ConfigInvalid("model config: bad number for '" + key + "': " + s);
        }
    };

    const std::string fam = get("family");
    if (fam == "exp_power")
        return CovarianceModel::exp_power(num("v"), num("q"), num("alpha"));
    if (fam == "cauchy_type")
        return CovarianceModel::cauchy_type(num("v"), num("q"), num("alpha"), num("beta"));
    throw ConfigInvalid("model config: unknown family '" + fam + "'");
}

inline std::map<std::string, std::string> model_to_kv(const CovarianceModel& m) {
    auto fmt = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    std::map<std::string, std::string> kv;
    kv["family"] = family_name(m.family);
    kv["v"] = fmt(m.v);
    kv["q"] = fmt(m.q);
    kv["alpha"] = fmt(m.alpha);
    if (m.family == CovFamily::CauchyType) kv["beta"] = fmt(m.beta);
    return kv;
}

} // namespace lastexit
