// Lattice sums of Gaussian-type tail terms, their closed-form equivalent,
// and the integral brackets that pin the sum exactly.
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lastexit/errors.hpp"

namespace lastexit {

/**
 * @brief Query for the sum over {i : a i + b >= theta} of
 *        [(a i + b) eps]^(2/alpha - 1) exp(-[(a i + b) eps]^2 / 2).
 *
 * The closed-form equivalence holds in the regime theta*eps -> inf,
 * a = o(theta), theta*a*eps^2 -> 0; query_flags reports finite-scale
 * violations of those side conditions.
 */
struct SumQuery {
    double a = 1.0;
    double b = 0.0;
    double theta = 1.0;
    double eps = 1.0;
    double alpha = 1.0;

    void validate() const {
        if (!(a > 0.0) || !(theta > 0.0) || !(eps > 0.0))
            throw InvalidRange("SumQuery: a, theta, eps must be > 0");
        if (!(alpha > 0.0 && alpha <= 2.0))
            throw InvalidRange("SumQuery: alpha must lie in (0, 2]");
    }
};

struct SumQueryFlags {
    bool theta_eps_small = false;    ///< theta*eps < 3
    bool a_over_theta_large = false; ///< a/theta >= 0.1
    bool theta_a_eps2_large = false; ///< theta*a*eps^2 >= 0.5

    bool any() const { return theta_eps_small || a_over_theta_large || theta_a_eps2_large; }
};

inline SumQueryFlags query_flags(const SumQuery& q) {
    SumQueryFlags f;
    f.theta_eps_small = q.theta * q.eps < 3.0;
    f.a_over_theta_large = q.a / q.theta >= 0.1;
    f.theta_a_eps2_large = q.theta * q.a * q.eps * q.eps >= 0.5;
    return f;
}

namespace detail {

inline double tail_term(double x, double alpha) {
    return std::pow(x, 2.0 / alpha - 1.0) * std::exp(-x * x / 2.0);
}

/// Smallest integer i with a*i + b >= theta, robust to rounding.
inline long long first_index(const SumQuery& q) {
    long long i = static_cast<long long>(std::ceil((q.theta - q.b) / q.a));
    while (q.a * static_cast<double>(i) + q.b < q.theta) ++i;
    while (q.a * static_cast<double>(i - 1) + q.b >= q.theta) --i;
    return i;
}

} // namespace detail

/**
 * @brief Direct summation of the lattice tail terms.
 *
 * Truncates once a term falls below abs_floor or below rel_cut times the
 * running total; both defaults sit below double-precision relevance.
 */
inline double lattice_sum(const SumQuery& q, double rel_cut = 1e-16,
                          double abs_floor = 1e-300) {
    q.validate();
    long long i = detail::first_index(q);
    double total = 0.0;
    for (long long steps = 0; steps < 100000000LL; ++steps, ++i) {
        const double x = (q.a * static_cast<double>(i) + q.b) * q.eps;
        const double term = detail::tail_term(x, q.alpha);
        total += term;
        if (term < abs_floor || term < rel_cut * total) break;
    }
    return total;
}

/// Closed form (1/(a eps)) (theta eps)^(2/alpha - 2) exp(-(theta eps)^2 / 2).
inline double closed_form(const SumQuery& q) {
    q.validate();
    const double te = q.theta * q.eps;
    return (1.0 / (q.a * q.eps)) * std::pow(te, 2.0 / q.alpha - 2.0) *
           std::exp(-te * te / 2.0);
}

struct Brackets {
    double lower = 0.0; ///< (1/(a eps)) integral from (theta+a) eps
    double upper = 0.0; ///< (1/(a eps)) integral from (theta-a) eps
};

/**
 * @brief Integral bracketing of the lattice sum.
 *
 * Monotone decay of x^(2/alpha-1) exp(-x^2/2) beyond its mode turns each
 * term into upper/lower integral bounds, so
 *   lower <= lattice_sum(q) <= upper
 * holds exactly. Requires the integration range to start past the decay
 * onset sqrt(max(0, 2/alpha - 1)).
 */
inline Brackets integral_brackets(const SumQuery& q) {
    q.validate();
    if (q.a >= q.theta)
        throw MonotonicityViolated("integral_brackets: need a < theta");
    const double onset = std::sqrt(std::max(0.0, 2.0 / q.alpha - 1.0));
    if (q.theta * q.eps < 1.0 || (q.theta - q.a) * q.eps < onset)
        throw MonotonicityViolated(
            "integral_brackets: query below the monotone-decay onset");

    const double alpha = q.alpha;
    auto integrand = [alpha](double x) { return detail::tail_term(x, alpha); };
    auto upper_integral = [&](double lo) {
        // The integrand beyond lo + 20 is below 1e-80 of its value at lo.
        return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            integrand, lo, lo + 20.0, 12, 1e-12);
    };

    Brackets br;
    br.lower = upper_integral((q.theta + q.a) * q.eps) / (q.a * q.eps);
    br.upper = upper_integral((q.theta - q.a) * q.eps) / (q.a * q.eps);
    return br;
}

struct RatioRow {
    double eps = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    SumQueryFlags flags;
};

/**
 * @brief Sum/closed-form ratio along a decreasing eps grid.
 *
 * a_rule and theta_rule build the query per eps; for admissible rules the
 * ratios tend to 1 as eps decreases.
 */
inline std::vector<RatioRow> ratio_scan(double alpha,
                                        const std::function<double(double)>& a_rule,
                                        const std::function<double(double)>& theta_rule,
                                        std::span<const double> eps_grid, double b = 0.0) {
    std::vector<RatioRow> rows;
    rows.reserve(eps_grid.size());
    for (double eps : eps_grid) {
        SumQuery q;
        q.a = a_rule(eps);
        q.b = b;
        q.theta = theta_rule(eps);
        q.eps = eps;
        q.alpha = alpha;
        q.validate();

        RatioRow row;
        row.eps = eps;
        row.lhs = lattice_sum(q);
        row.rhs = closed_form(q);
        row.ratio = row.lhs / row.rhs;
        row.flags = query_flags(q);
        rows.push_back(row);
    }
    return rows;
}

inline std::string flag_string(const SumQueryFlags& f) {
    std::string s;
    auto add = [&s](const char* tok) {
        if (!s.empty()) s += ';';
        s += tok;
    };
    if (f.theta_eps_small) add("theta_eps_small");
    if (f.a_over_theta_large) add("a_over_theta_large");
    if (f.theta_a_eps2_large) add("theta_a_eps2_large");
    return s;
}

inline void write_ratio_csv(std::ostream& out, std::span<const RatioRow> rows) {
    out << "eps,lhs,rhs,ratio,flags\n";
    char buf[160];
    for (const RatioRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,", r.eps, r.lhs, r.rhs,
                      r.ratio);
        out << buf << flag_string(r.flags) << '\n';
    }
}

} // namespace lastexit
