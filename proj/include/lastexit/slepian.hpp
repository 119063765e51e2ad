// Monte Carlo verification of Gaussian comparison (Slepian) inequalities
// on finite-dimensional vectors.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "lastexit/errors.hpp"
#include "lastexit/rng.hpp"

namespace lastexit {

/**
 * @brief A centered Gaussian vector with exceedance thresholds.
 *
 * cov must be symmetric with strictly positive diagonal; eigenvalues down
 * to -1e-10 are tolerated as numerical slack and clipped to zero.
 */
struct GaussianVectorSpec {
    Eigen::MatrixXd cov;
    Eigen::VectorXd thresholds;

    Eigen::Index dim() const { return cov.rows(); }

    void validate() const {
        const Eigen::Index n = cov.rows();
        if (n < 1 || n > 16 || cov.cols() != n)
            throw PreconditionViolated("GaussianVectorSpec: need square cov, dim in [1, 16]");
        if (thresholds.size() != n)
            throw PreconditionViolated("GaussianVectorSpec: thresholds/cov size mismatch");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!(cov(i, i) > 0.0))
                throw PreconditionViolated("GaussianVectorSpec: diagonal must be > 0");
            if (!(thresholds(i) >= 0.0))
                throw PreconditionViolated("GaussianVectorSpec: thresholds must be >= 0");
            for (Eigen::Index j = 0; j < n; ++j)
                if (std::abs(cov(i, j) - cov(j, i)) > 1e-12)
                    throw PreconditionViolated("GaussianVectorSpec: cov not symmetric");
        }
    }
};

namespace detail {

/// Symmetric square root with small-negative-eigenvalue clipping.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
        throw NotPSD("psd_factor: eigendecomposition failed");
    Eigen::VectorXd vals = solver.eigenvalues();
    if (vals.minCoeff() < -1e-10)
        throw NotPSD("psd_factor: covariance eigenvalue below -1e-10");
    for (Eigen::Index i = 0; i < vals.size(); ++i) vals(i) = std::max(vals(i), 0.0);
    return solver.eigenvectors() * vals.cwiseSqrt().asDiagonal();
}

} // namespace detail

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t hits = 0;
    std::int64_t n_samples = 0;
};

/**
 * @brief Monte Carlo estimate of P(exists j : X_j >= r_j).
 *
 * Draws are generated from a single stream determined by master_seed and
 * depend only on the covariance factor, so two calls with the same seed and
 * covariance share their randomness exactly (common random numbers).
 */
inline McEstimate mc_union_prob(const GaussianVectorSpec& spec, std::int64_t n_samples,
                                std::uint64_t master_seed) {
    spec.validate();
    if (n_samples <= 0) throw InvalidSampleSize("mc_union_prob: n_samples must be positive");

    const Eigen::MatrixXd L = detail::psd_factor(spec.cov);
    const Eigen::Index n = spec.dim();
    NormalStream gauss(stream_seed(master_seed, 0));

    Eigen::VectorXd z(n);
    std::int64_t hits = 0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = gauss.next();
        const Eigen::VectorXd x = L * z;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (x(i) >= spec.thresholds(i)) {
                ++hits;
                break;
            }
        }
    }

    McEstimate est;
    est.hits = hits;
    est.n_samples = n_samples;
    est.estimate = static_cast<double>(hits) / static_cast<double>(n_samples);
    est.std_error = std::sqrt(est.estimate * (1.0 - est.estimate) /
                              static_cast<double>(n_samples));
    return est;
}

struct SlepianVerdict {
    bool pass = false;
    double margin_se = 0.0; ///< (est_U - est_V) in pooled standard-error units
    McEstimate u;
    McEstimate v;
};

/**
 * @brief Checks the comparison inequality P(exists j: U_j >= r_j) >=
 *        P(exists j: V_j >= r_j) for equal variances and ordered covariances.
 *
 * Preconditions (violations throw): equal diagonals, U's off-diagonal
 * entries <= V's entrywise, identical thresholds. Both probabilities are
 * estimated with common random numbers; the verdict allows a 3-SE deficit.
 */
inline SlepianVerdict slepian_check(const GaussianVectorSpec& spec_u,
                                    const GaussianVectorSpec& spec_v,
                                    std::int64_t n_samples, std::uint64_t master_seed) {
    spec_u.validate();
    spec_v.validate();
    const Eigen::Index n = spec_u.dim();
    if (spec_v.dim() != n)
        throw PreconditionViolated("slepian_check: dimension mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(spec_u.cov(i, i) - spec_v.cov(i, i)) > 1e-12)
            throw PreconditionViolated("slepian_check: diagonals differ");
        if (spec_u.thresholds(i) != spec_v.thresholds(i))
            throw PreconditionViolated("slepian_check: thresholds differ");
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && spec_u.cov(i, j) > spec_v.cov(i, j) + 1e-12)
                throw PreconditionViolated(
                    "slepian_check: U covariance exceeds V covariance");
    }

    SlepianVerdict verdict;
    verdict.u = mc_union_prob(spec_u, n_samples, master_seed);
    verdict.v = mc_union_prob(spec_v, n_samples, master_seed);
    const double pooled = std::sqrt(verdict.u.std_error * verdict.u.std_error +
                                    verdict.v.std_error * verdict.v.std_error);
    if (verdict.u.hits == verdict.v.hits || pooled == 0.0) {
        verdict.margin_se = 0.0;
    } else {
        verdict.margin_se = (verdict.u.estimate - verdict.v.estimate) / pooled;
    }
    verdict.pass = verdict.margin_se >= -3.0;
    return verdict;
}

struct SuiteSummary {
    int n_cases = 0;
    int n_pass = 0;
    int n_fail = 0;      ///< margin below -3 SE
    int n_hard_fail = 0; ///< margin below -4 SE
    double min_margin_se = 0.0;
};

/**
 * @brief Property-test suite around the comparison inequality.
 *
 * Each case builds a random correlation matrix with non-negative entries
 * (a Hadamard square), forms V from it, and shrinks it toward the identity
 * for U, so the ordering hypotheses hold by construction. The true ordering
 * is guaranteed, so only Monte Carlo noise can produce failures: margins
 * below -4 SE indicate a real defect.
 */
inline SuiteSummary random_comparison_suite(int n_cases, int dim,
                                            std::uint64_t master_seed,
                                            std::int64_t n_samples = 100000) {
    if (dim < 1 || dim > 8)
        throw PreconditionViolated("random_comparison_suite: dim must lie in [1, 8]");
    if (n_cases < 1)
        throw PreconditionViolated("random_comparison_suite: need at least one case");

    std::vector<double> margins(static_cast<std::size_t>(n_cases));

#pragma omp parallel for schedule(dynamic)
    for (int cs = 0; cs < n_cases; ++cs) {
        const std::uint64_t case_seed = stream_seed(master_seed, static_cast<std::uint64_t>(cs));
        NormalStream gen(stream_seed(case_seed, 1));

        Eigen::MatrixXd g(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = gen.next();
        Eigen::MatrixXd w = g * g.transpose();
        Eigen::MatrixXd corr(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i)
            for (Eigen::Index j = 0; j < dim; ++j)
                corr(i, j) = w(i, j) / std::sqrt(w(i, i) * w(j, j));

        // Hadamard square: still PSD, entries non-negative, unit diagonal.
        Eigen::MatrixXd v_cov = corr.cwiseProduct(corr);
        const double gamma = gen.uniform01();
        Eigen::MatrixXd u_cov = gamma * v_cov +
                                (1.0 - gamma) * Eigen::MatrixXd::Identity(dim, dim);

        Eigen::VectorXd thresholds(dim);
        for (Eigen::Index i = 0; i < dim; ++i) thresholds(i) = 0.5 + 1.5 * gen.uniform01();

        const SlepianVerdict verdict =
            slepian_check({u_cov, thresholds}, {v_cov, thresholds}, n_samples,
                          stream_seed(case_seed, 2));
        margins[static_cast<std::size_t>(cs)] = verdict.margin_se;
    }

    SuiteSummary summary;
    summary.n_cases = n_cases;
    summary.min_margin_se = margins.empty() ? 0.0 : margins.front();
    for (double m : margins) {
        summary.min_margin_se = std::min(summary.min_margin_se, m);
        if (m >= -3.0)
            ++summary.n_pass;
        else
            ++summary.n_fail;
        if (m < -4.0) ++summary.n_hard_fail;
    }
    return summary;
}

} // namespace lastexit
