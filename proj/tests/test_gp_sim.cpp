#include <catch2/catch_amalgamated.hpp>

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "lastexit/covariance.hpp"
#include "lastexit/rng.hpp"
#include "lastexit/simulate.hpp"

using namespace lastexit;
using Catch::Approx;

TEST_CASE("stream splitting is deterministic and index-sensitive") {
    CHECK(stream_seed(42, 0) == stream_seed(42, 0));
    CHECK(stream_seed(42, 0) != stream_seed(42, 1));
    CHECK(stream_seed(42, 0) != stream_seed(43, 0));

    NormalStream a(stream_seed(7, 3));
    NormalStream b(stream_seed(7, 3));
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("normal stream moments") {
    NormalStream g(stream_seed(11, 0));
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = g.next();
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    s1 /= n;
    s2 /= n;
    s4 /= n;
    CHECK(s1 == Approx(0.0).margin(3.0 / std::sqrt(double(n))));
    CHECK(s2 == Approx(1.0).margin(3.0 * std::sqrt(2.0 / n)));
    CHECK(s4 / (s2 * s2) == Approx(3.0).margin(3.0 * std::sqrt(24.0 / n)));
}

TEST_CASE("two-point embedding by hand") {
    const auto ou = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    const GridSpec grid{1.0, 2};
    const auto spec = build_embedding(ou, grid);
    REQUIRE(spec.size == 2);
    REQUIRE(spec.eigenvalues.size() == 2);
    CHECK(spec.eigenvalues[0] == Approx(1.3678794411714423).epsilon(1e-14));
    CHECK(spec.eigenvalues[1] == Approx(0.6321205588285577).epsilon(1e-14));
    CHECK(spec.clip_mass == 0.0);
}

TEST_CASE("two-point eigenvalues are v^2 +- rho(h) for any model") {
    Xoshiro256pp rng(5);
    for (int i = 0; i < 20; ++i) {
        const double v = 0.5 + rng.uniform01();
        const double q = 0.2 + 2.0 * rng.uniform01();
        const double alpha = 0.2 + 1.8 * rng.uniform01();
        const double h = 0.1 + 3.0 * rng.uniform01();
        const auto m = CovarianceModel::exp_power(v, q, alpha);
        const auto spec = build_embedding(m, GridSpec{h, 2});
        const double rho = evaluate(m, h);
        CHECK(spec.eigenvalues[0] == Approx(v * v + rho).epsilon(1e-12));
        CHECK(spec.eigenvalues[1] == Approx(v * v - rho).epsilon(1e-12));
        CHECK(spec.eigenvalues[1] >= 0.0);
    }
}

TEST_CASE("smooth-kernel embedding stays near-nonnegative at fine steps") {
    const auto gauss = CovarianceModel::exp_power(1.0, 1.0, 2.0);
    const GridSpec grid{0.01, 4096};
    const auto spec = build_embedding(gauss, grid);
    CHECK(spec.clip_mass < 1e-9 * spec.trace());
}

TEST_CASE("positive definiteness witness on small grids") {
    Xoshiro256pp rng(17);
    for (int i = 0; i < 10; ++i) {
        const bool cauchy = rng.uniform01() < 0.5;
        const double v = 0.5 + rng.uniform01();
        const double q = 0.2 + 2.0 * rng.uniform01();
        const double alpha = 0.3 + 1.7 * rng.uniform01();
        const auto m = cauchy
                           ? CovarianceModel::cauchy_type(v, q, alpha, 0.5 + 2.0 * rng.uniform01())
                           : CovarianceModel::exp_power(v, q, alpha);
        const std::int64_t n = 64 + static_cast<std::int64_t>(rng.uniform01() * 448);
        const double step = 0.02 + rng.uniform01();
        const auto spec = build_embedding(m, GridSpec{step, n}, 1e-9, 8);
        CHECK(spec.clip_mass <= 1e-9 * spec.trace());
    }
}

TEST_CASE("sample_path is bit-reproducible") {
    const auto ou = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    const GridSpec grid{0.1, 257};
    const auto spec = build_embedding(ou, grid);
    const auto a = sample_path(spec, grid, 123, 7);
    const auto b = sample_path(spec, grid, 123, 7);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("batch sampling does not depend on thread count") {
    const auto ou = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    const GridSpec grid{0.1, 128};
    const auto spec = build_embedding(ou, grid);

    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const auto one = sample_paths(spec, grid, 99, 64);
    omp_set_num_threads(saved > 1 ? saved : 2);
    const auto many = sample_paths(spec, grid, 99, 64);
    omp_set_num_threads(saved);

    REQUIRE(one.size() == many.size());
    for (std::size_t p = 0; p < one.size(); ++p)
        for (std::size_t i = 0; i < one[p].values.size(); ++i)
            CHECK(one[p].values[i] == many[p].values[i]);
}

TEST_CASE("white spectrum gives iid N(0, v^2) marginals") {
    const double v2 = 2.25;
    EmbeddingSpectrum spec;
    spec.size = 256;
    spec.eigenvalues.assign(129, v2);
    const GridSpec grid{1.0, 128};

    const std::int64_t n_paths = 800; // pooled about 1e5 values
    double s2 = 0.0, s4 = 0.0, cross = 0.0;
    std::int64_t count = 0;
    std::vector<PathSample> first_two;
    for (std::int64_t p = 0; p < n_paths; ++p) {
        const auto path = sample_path(spec, grid, 2718, p);
        if (p < 2) first_two.push_back(path);
        for (double y : path.values) {
            s2 += y * y;
            s4 += y * y * y * y;
            ++count;
        }
    }
    s2 /= count;
    s4 /= count;
    CHECK(s2 == Approx(v2).margin(3.0 * v2 * std::sqrt(2.0 / double(count))));
    CHECK(s4 / (s2 * s2) == Approx(3.0).margin(3.0 * std::sqrt(24.0 / double(count))));

    // Distinct path indices are independent: lag-0 cross correlation ~ 0.
    double c01 = 0.0;
    for (std::int64_t i = 0; i < grid.n; ++i)
        c01 += first_two[0].values[i] * first_two[1].values[i];
    c01 /= double(grid.n) * v2;
    CHECK(std::abs(c01) <= 3.0 / std::sqrt(double(grid.n)));
    (void)cross;
}

TEST_CASE("implied covariance of the embedding matches the model exactly") {
    // The circulant restricted to the first n points reproduces rho on the
    // grid when nothing was clipped: C(h) = (1/M) sum_k lambda_k cos(2 pi h k / M).
    const auto ou = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    const GridSpec grid{0.1, 1024};
    const auto spec = build_embedding(ou, grid);
    REQUIRE(spec.clip_mass == 0.0);
    const std::size_t m = spec.size;
    const std::size_t half = m / 2;
    const double two_pi_over_m = 6.283185307179586 / double(m);
    for (std::int64_t h : {0, 1, 2, 5, 10, 100, 1023}) {
        double c = spec.eigenvalues[0] + spec.eigenvalues[half] * std::cos(two_pi_over_m * double(half * h));
        for (std::size_t k = 1; k < half; ++k)
            c += 2.0 * spec.eigenvalues[k] * std::cos(two_pi_over_m * double(k) * double(h));
        c /= double(m);
        CHECK(c == Approx(evaluate(ou, double(h) * grid.step)).margin(1e-10));
    }
}

TEST_CASE("empirical covariance matches the model within Monte Carlo error") {
    const auto ou = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    const GridSpec grid{0.1, 512};
    const auto spec = build_embedding(ou, grid);
    const auto paths = sample_paths(spec, grid, 31415, 300);

    const std::vector<int> lags = {0, 1, 10, 50};
    const auto checks = empirical_cov_check(paths, ou, lags);
    for (const auto& c : checks) CHECK(std::abs(c.deviation_se) <= 4.0);
    CHECK(checks[0].target == 1.0);
    CHECK(std::abs(checks[0].deviation_se) <= 3.0);
}

TEST_CASE("empirical_cov_check input contracts") {
    const auto ou = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    const GridSpec grid{0.5, 32};
    const auto spec = build_embedding(ou, grid);
    const auto paths = sample_paths(spec, grid, 1, 10);
    const std::vector<int> lags = {0};
    CHECK_THROWS_AS(empirical_cov_check(paths, ou, lags), InvalidSampleSize);
}

TEST_CASE("embedding argument validation") {
    const auto ou = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    CHECK_THROWS_AS(build_embedding(ou, GridSpec{0.1, 1}), InvalidRange);
    CHECK_THROWS_AS(build_embedding(ou, GridSpec{0.1, 64}, 1e-3), InvalidRange);
    CHECK_THROWS_AS(build_embedding(ou, GridSpec{0.1, 64}, 1e-9, 99), InvalidRange);
}

TEST_CASE("path dump format") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "lastexit_dump_test";
    fs::create_directories(dir);
    const auto file = (dir / "paths.bin").string();

    const GridSpec grid{0.25, 3};
    PathSample p1{grid, {1.0, -2.0, 0.5}, 0, 0};
    PathSample p2{grid, {0.0, 4.0, -1.0}, 0, 1};
    {
        PathDumpWriter w(file, grid, 2);
        w.append(p1);
        w.append(p2);
    }

    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    char magic[8];
    in.read(magic, 8);
    CHECK(std::string(magic, 8) == std::string("GPSIM1\0\0", 8));
    std::uint64_t n = 0, count = 0;
    double step = 0.0;
    in.read(reinterpret_cast<char*>(&n), 8);
    in.read(reinterpret_cast<char*>(&count), 8);
    in.read(reinterpret_cast<char*>(&step), 8);
    CHECK(n == 3);
    CHECK(count == 2);
    CHECK(step == 0.25);
    std::vector<double> values(6);
    in.read(reinterpret_cast<char*>(values.data()), 48);
    CHECK(in.gcount() == 48);
    CHECK(values == std::vector<double>{1.0, -2.0, 0.5, 0.0, 4.0, -1.0});
    in.get();
    CHECK(in.eof());
    fs::remove_all(dir);
}
