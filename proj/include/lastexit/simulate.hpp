// Stationary Gaussian path generation on a uniform grid via circulant
// embedding, with deterministic per-path random streams.
#pragma once

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lastexit/covariance.hpp"
#include "lastexit/errors.hpp"
#include "lastexit/rng.hpp"

namespace lastexit {

/// Uniform time grid starting at t = 0.
struct GridSpec {
    double step = 0.0;
    std::int64_t n = 0;

    double t_max() const { return step * static_cast<double>(n - 1); }
    double time(std::int64_t i) const { return step * static_cast<double>(i); }

    void validate() const {
        if (!(step > 0.0) || n < 2)
            throw InvalidRange("GridSpec: need step > 0 and n >= 2");
    }
};

/**
 * @brief Eigenvalues of the circulant embedding of a covariance row.
 *
 * `eigenvalues` holds the real half-spectrum (size/2 + 1 entries, the rest
 * follows by symmetry), clipped to be non-negative. `clip_mass` is the total
 * negative mass removed by clipping.
 */
struct EmbeddingSpectrum {
    std::size_t size = 0; ///< embedding length M, a power of two >= 2(n-1)
    std::vector<double> eigenvalues;
    double clip_mass = 0.0;

    double trace() const {
        // Full-spectrum sum; interior half-spectrum entries count twice.
        double s = eigenvalues.front() + eigenvalues.back();
        for (std::size_t k = 1; k + 1 < eigenvalues.size(); ++k) s += 2.0 * eigenvalues[k];
        return s;
    }
};

/// One realization of the process on a grid, reproducible from seed_info.
struct PathSample {
    GridSpec grid;
    std::vector<double> values;
    std::uint64_t master_seed = 0;
    std::int64_t path_index = 0;
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Process-lifetime FFTW plan caches, keyed by transform length.
inline fftw_plan cached_c2r_plan(std::size_t m) {
    static std::map<std::size_t, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    fftw_complex* in = fftw_alloc_complex(m / 2 + 1);
    double* out = fftw_alloc_real(m);
    fftw_plan plan = fftw_plan_dft_c2r_1d(static_cast<int>(m), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    cache.emplace(m, plan);
    return plan;
}

inline fftw_plan cached_r2c_plan(std::size_t m) {
    static std::map<std::size_t, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    double* in = fftw_alloc_real(m);
    fftw_complex* out = fftw_alloc_complex(m / 2 + 1);
    fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    cache.emplace(m, plan);
    return plan;
}

/// Per-thread reusable FFTW buffers for the synthesis transform.
struct SynthesisWorkspace {
    std::size_t m = 0;
    fftw_complex* in = nullptr;
    double* out = nullptr;

    ~SynthesisWorkspace() { release(); }

    void ensure(std::size_t want) {
        if (m == want) return;
        release();
        in = fftw_alloc_complex(want / 2 + 1);
        out = fftw_alloc_real(want);
        m = want;
    }

    void release() {
        if (in) fftw_free(in);
        if (out) fftw_free(out);
        in = nullptr;
        out = nullptr;
        m = 0;
    }
};

inline SynthesisWorkspace& synthesis_workspace() {
    thread_local SynthesisWorkspace ws;
    return ws;
}

inline std::size_t next_pow2(std::size_t x) {
    std::size_t p = 1;
    while (p < x) p <<= 1;
    return p;
}

} // namespace detail

/**
 * @brief Builds the circulant embedding spectrum for a model on a grid.
 *
 * The first row c_k = rho(k step), k = 0..M/2, is periodized to length M
 * (a power of two >= 2(n-1)) and Fourier transformed. If the most negative
 * eigenvalue is below -clip_tol * max, M is doubled and the row rebuilt;
 * surviving small negatives are clipped to zero and accounted in clip_mass.
 */
inline EmbeddingSpectrum build_embedding(const CovarianceModel& model, const GridSpec& grid,
                                         double clip_tol = 1e-9, int max_doublings = 8) {
    grid.validate();
    if (!(clip_tol >= 0.0 && clip_tol <= 1e-6))
        throw InvalidRange("build_embedding: clip_tol must lie in [0, 1e-6]");
    if (max_doublings < 0 || max_doublings > 12)
        throw InvalidRange("build_embedding: max_doublings must lie in [0, 12]");

    const std::size_t m_base =
        detail::next_pow2(2 * static_cast<std::size_t>(grid.n - 1));
    double worst_ratio = 0.0;

    for (int d = 0; d <= max_doublings; ++d) {
        const std::size_t m = m_base << d;
        const std::size_t half = m / 2;

        std::vector<double> row(m);
        for (std::size_t k = 0; k <= half; ++k)
            row[k] = evaluate(model, static_cast<double>(k) * grid.step);
        for (std::size_t k = 1; k < half; ++k) row[m - k] = row[k];

        std::vector<double> lambda(half + 1);
        {
            fftw_plan plan = detail::cached_r2c_plan(m);
            double* in = fftw_alloc_real(m);
            fftw_complex* out = fftw_alloc_complex(half + 1);
            std::memcpy(in, row.data(), m * sizeof(double));
            fftw_execute_dft_r2c(plan, in, out);
            // The row is even-symmetric, so the transform is real.
            for (std::size_t k = 0; k <= half; ++k) lambda[k] = out[k][0];
            fftw_free(in);
            fftw_free(out);
        }

        const auto [mn_it, mx_it] = std::minmax_element(lambda.begin(), lambda.end());
        const double mn = *mn_it;
        const double mx = *mx_it;
        if (mn >= -clip_tol * mx) {
            EmbeddingSpectrum spec;
            spec.size = m;
            spec.clip_mass = 0.0;
            for (double& l : lambda) {
                if (l < 0.0) {
                    spec.clip_mass -= l;
                    l = 0.0;
                }
            }
            spec.eigenvalues = std::move(lambda);
            return spec;
        }
        worst_ratio = std::min(worst_ratio, mn / mx);
    }

    throw EmbeddingFailed("build_embedding: spectrum stayed negative after " +
                          std::to_string(max_doublings) +
                          " doublings (worst min/max eigenvalue ratio " +
                          std::to_string(worst_ratio) + ")");
}

/**
 * @brief Draws one stationary Gaussian path by spectral synthesis.
 *
 * The Hermitian frequency vector W_k = sqrt(lambda_k) eta_k is filled with
 * independent standard complex Gaussians (real at k = 0 and k = M/2) drawn
 * from the stream derived from (master_seed, path_index), then inverse
 * transformed; the first n points of the real output form the path. Paths
 * with distinct indices use disjoint streams and are mutually independent.
 */
inline PathSample sample_path(const EmbeddingSpectrum& spectrum, const GridSpec& grid,
                              std::uint64_t master_seed, std::int64_t path_index) {
    grid.validate();
    const std::size_t m = spectrum.size;
    const std::size_t half = m / 2;
    if (spectrum.eigenvalues.size() != half + 1 || m < 2 * static_cast<std::size_t>(grid.n - 1))
        throw PreconditionViolated("sample_path: spectrum does not match grid");

    auto& ws = detail::synthesis_workspace();
    ws.ensure(m);

    NormalStream gauss(stream_seed(master_seed, static_cast<std::uint64_t>(path_index)));
    const std::vector<double>& lam = spectrum.eigenvalues;

    ws.in[0][0] = std::sqrt(lam[0]) * gauss.next();
    ws.in[0][1] = 0.0;
    for (std::size_t k = 1; k < half; ++k) {
        const double s = std::sqrt(0.5 * lam[k]);
        ws.in[k][0] = s * gauss.next();
        ws.in[k][1] = s * gauss.next();
    }
    ws.in[half][0] = std::sqrt(lam[half]) * gauss.next();
    ws.in[half][1] = 0.0;

    fftw_execute_dft_c2r(detail::cached_c2r_plan(m), ws.in, ws.out);

    PathSample path;
    path.grid = grid;
    path.master_seed = master_seed;
    path.path_index = path_index;
    path.values.resize(static_cast<std::size_t>(grid.n));
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::int64_t i = 0; i < grid.n; ++i)
        path.values[static_cast<std::size_t>(i)] = ws.out[i] * scale;
    return path;
}

/// Samples `count` paths in parallel; output is independent of thread count.
inline std::vector<PathSample> sample_paths(const EmbeddingSpectrum& spectrum,
                                            const GridSpec& grid, std::uint64_t master_seed,
                                            std::int64_t count) {
    std::vector<PathSample> out(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic, 4)
    for (std::int64_t i = 0; i < count; ++i)
        out[static_cast<std::size_t>(i)] = sample_path(spectrum, grid, master_seed, i);
    return out;
}

struct CovLagCheck {
    int lag = 0;
    double mean = 0.0;
    double target = 0.0;
    double std_error = 0.0;
    double deviation_se = 0.0; ///< (mean - target) / std_error
};

/**
 * @brief Compares batch empirical covariances against the model.
 *
 * For each lag, Y(t_i) Y(t_{i+k}) is averaged within each path; the paths
 * are independent, so the spread of the per-path means gives the Monte
 * Carlo standard error. No normalization is applied to the paths.
 */
inline std::vector<CovLagCheck> empirical_cov_check(std::span<const PathSample> paths,
                                                    const CovarianceModel& model,
                                                    std::span<const int> lags) {
    if (paths.size() < 100)
        throw InvalidSampleSize("empirical_cov_check: need at least 100 paths");
    const GridSpec grid = paths.front().grid;
    for (const PathSample& p : paths)
        if (p.grid.n != grid.n || p.grid.step != grid.step)
            throw PreconditionViolated("empirical_cov_check: paths on different grids");

    std::vector<CovLagCheck> checks;
    checks.reserve(lags.size());
    for (int lag : lags) {
        if (lag < 0 || lag >= grid.n)
            throw InvalidRange("empirical_cov_check: lag outside grid");
        std::vector<double> per_path(paths.size());
        for (std::size_t p = 0; p < paths.size(); ++p) {
            const std::vector<double>& y = paths[p].values;
            const std::size_t count = y.size() - static_cast<std::size_t>(lag);
            double acc = 0.0;
            for (std::size_t i = 0; i < count; ++i) acc += y[i] * y[i + static_cast<std::size_t>(lag)];
            per_path[p] = acc / static_cast<double>(count);
        }
        double mean = 0.0;
        for (double x : per_path) mean += x;
        mean /= static_cast<double>(per_path.size());
        double var = 0.0;
        for (double x : per_path) var += (x - mean) * (x - mean);
        var /= static_cast<double>(per_path.size() - 1);

        CovLagCheck c;
        c.lag = lag;
        c.mean = mean;
        c.target = evaluate(model, static_cast<double>(lag) * grid.step);
        c.std_error = std::sqrt(var / static_cast<double>(per_path.size()));
        c.deviation_se = c.std_error > 0.0 ? (c.mean - c.target) / c.std_error : 0.0;
        checks.push_back(c);
    }
    return checks;
}

// ---------------------------------------------------------------------------
// Raw path dump: 32-byte header (magic "GPSIM1\0\0", u64 n, u64 count,
// f64 step), then count*n little-endian float64 values, path-major.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t bswap64(std::uint64_t x) {
    x = ((x & 0x00FF00FF00FF00FFULL) << 8) | ((x >> 8) & 0x00FF00FF00FF00FFULL);
    x = ((x & 0x0000FFFF0000FFFFULL) << 16) | ((x >> 16) & 0x0000FFFF0000FFFFULL);
    return (x << 32) | (x >> 32);
}

inline void put_u64_le(std::ofstream& out, std::uint64_t x) {
    if constexpr (std::endian::native == std::endian::big) x = bswap64(x);
    out.write(reinterpret_cast<const char*>(&x), 8);
}

inline void put_f64_le(std::ofstream& out, double v) {
    put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

} // namespace detail

class PathDumpWriter {
  public:
    PathDumpWriter(const std::string& filename, const GridSpec& grid, std::uint64_t count)
        : out_(filename, std::ios::binary), n_(static_cast<std::uint64_t>(grid.n)) {
        if (!out_) throw Error("PathDumpWriter: cannot open " + filename);
        out_.write("GPSIM1\0\0", 8);
        detail::put_u64_le(out_, n_);
        detail::put_u64_le(out_, count);
        detail::put_f64_le(out_, grid.step);
    }

    void append(const PathSample& path) {
        if (path.values.size() != n_)
            throw PreconditionViolated("PathDumpWriter: path length mismatch");
        if constexpr (std::endian::native == std::endian::little) {
            out_.write(reinterpret_cast<const char*>(path.values.data()),
                       static_cast<std::streamsize>(n_ * sizeof(double)));
        } else {
            for (double v : path.values) detail::put_f64_le(out_, v);
        }
    }

  private:
    std::ofstream out_;
    std::uint64_t n_;
};

} // namespace lastexit
