#include <catch2/catch_amalgamated.hpp>

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lastexit/experiment.hpp"
#include "lastexit/rng.hpp"

using namespace lastexit;
using Catch::Approx;

namespace fs = std::filesystem;

namespace {

const char* kSmallConfig = R"(
# small deterministic campaign
[model]
family = exp_power
v = 1.0
q = 1.0
alpha = 1.0

[run]
eps_list = 0.3, 0.25
n_paths = 150
master_seed = 42
delta_tail = 1e-2
eta = 0.2
output_dir = OUTDIR
)";

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_config(const std::string& outdir) {
    std::string text = kSmallConfig;
    text.replace(text.find("OUTDIR"), 6, outdir);
    return config_from_kv(parse_config_text(text));
}

} // namespace

TEST_CASE("config parsing") {
    const auto cfg = small_config("out_test");
    CHECK(cfg.model.family == CovFamily::ExpPower);
    CHECK(cfg.eps_list == std::vector<double>{0.3, 0.25});
    CHECK(cfg.n_paths == 150);
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.delta_tail == 0.01);
    CHECK(cfg.eta == 0.2);
    CHECK_FALSE(cfg.h_alpha.has_value());
    CHECK(cfg.output_dir == "out_test");
    CHECK_FALSE(cfg.dump_paths);
}

TEST_CASE("config overrides and rejection of unknown keys") {
    auto kv = parse_config_text(kSmallConfig);
    apply_override(kv, "run.n_paths=500");
    apply_override(kv, "model.alpha=2");
    apply_override(kv, "run.h_alpha=0.56418958354775628");
    auto cfg = config_from_kv(kv);
    CHECK(cfg.n_paths == 500);
    CHECK(cfg.model.alpha == 2.0);
    CHECK(cfg.h_alpha.has_value());

    auto bad = parse_config_text(kSmallConfig);
    apply_override(bad, "run.typo_key=1");
    CHECK_THROWS_AS(config_from_kv(bad), ConfigInvalid);
    CHECK_THROWS_AS(apply_override(bad, "no_dot"), ConfigInvalid);
    CHECK_THROWS_AS(parse_config_text("key_outside_section = 1"), ConfigInvalid);
}

TEST_CASE("config validation rules") {
    auto cfg = small_config("x");
    cfg.eps_list = {0.25, 0.3}; // not decreasing
    CHECK_THROWS_AS(validate_config(cfg), ConfigInvalid);

    cfg = small_config("x");
    cfg.eps_list = {1.5};
    CHECK_THROWS_AS(validate_config(cfg), ConfigInvalid);

    cfg = small_config("x");
    cfg.n_paths = 50;
    CHECK_THROWS_AS(validate_config(cfg), ConfigInvalid);

    cfg = small_config("x");
    cfg.eta = 0.9;
    CHECK_THROWS_AS(validate_config(cfg), ConfigInvalid);

    // Tiny eps implies a giant grid: flagged, not fatal.
    cfg = small_config("x");
    cfg.eps_list = {2e-5};
    const auto warnings = validate_config(cfg);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("2^24") != std::string::npos);
}

TEST_CASE("gumbel_fit against the exact inverse-CDF sampler") {
    const double c = 0.39894228040143268;
    // Stratified uniforms give an essentially perfect sample of the limit law.
    std::vector<double> samples;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / n;
        samples.push_back(-std::log(-std::log(u) / c));
    }
    const auto fit = gumbel_fit(samples, c);
    CHECK(fit.ks_distance < 1.0 / n + 1e-12);

    // Random uniforms: the standard KS bound at the 1% level.
    Xoshiro256pp rng(271828);
    samples.clear();
    for (int i = 0; i < n; ++i)
        samples.push_back(-std::log(-std::log(rng.uniform01()) / c));
    CHECK(gumbel_fit(samples, c).ks_distance < 1.63 / std::sqrt(double(n)));
}

TEST_CASE("gumbel_fit: point mass and contracts") {
    const double c = 0.39894228040143268;
    std::vector<double> point(100, std::log(c));
    CHECK(gumbel_fit(point, c).ks_distance == Approx(0.63212055882855768).epsilon(1e-12));

    std::vector<double> few(49, 0.0);
    CHECK_THROWS_AS(gumbel_fit(few, c), TooFewSamples);
}

TEST_CASE("gumbel_fit quantiles interpolate order statistics") {
    std::vector<double> v;
    for (int i = 0; i <= 100; ++i) v.push_back(double(i)); // 0..100
    const auto fit = gumbel_fit(v, 0.4);
    CHECK(fit.quantiles[0] == Approx(10.0).epsilon(1e-12));
    CHECK(fit.quantiles[2] == Approx(50.0).epsilon(1e-12));
    CHECK(fit.quantiles[4] == Approx(90.0).epsilon(1e-12));
}

TEST_CASE("convergence report") {
    const double c = 0.39894228040143268;
    GumbelFitReport a;
    a.eps = 0.1;
    a.ks_distance = 0.06;
    a.n_effective = 1000;
    a.c_used = c;
    a.quantiles = {0, 0, gumbel_limit_median(c) + 0.01, 0, 0};
    GumbelFitReport b = a;
    b.eps = 0.2;
    b.ks_distance = 0.07;

    // Out of order on purpose: rows come back sorted by decreasing eps.
    auto summary = convergence_report({a, b}, 0.08, 0.02);
    REQUIRE(summary.rows.size() == 2);
    CHECK(summary.rows[0].eps == 0.2);
    CHECK(summary.rows[1].eps == 0.1);
    CHECK(summary.pass);
    CHECK(summary.rows[1].median_shift == Approx(0.01).margin(1e-12));

    // Trend violation beyond slack fails.
    a.ks_distance = 0.095;
    summary = convergence_report({b, a}, 0.1, 0.02);
    CHECK_FALSE(summary.pass);

    // Single row: only the threshold applies.
    summary = convergence_report({b}, 0.08, 0.02);
    CHECK(summary.pass);
}

TEST_CASE("run_campaign: accounting, artifacts, determinism") {
    const auto dir1 = fs::temp_directory_path() / "lastexit_test_run1";
    const auto dir2 = fs::temp_directory_path() / "lastexit_test_run2";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    auto cfg = small_config(dir1.string());
    const int saved = omp_get_max_threads();
    omp_set_num_threads(2);
    const auto reports = run_campaign(cfg);
    omp_set_num_threads(1);
    cfg.output_dir = dir2.string();
    const auto reports2 = run_campaign(cfg);
    omp_set_num_threads(saved);

    REQUIRE(reports.size() == 2);
    for (const auto& r : reports) {
        CHECK(r.n_effective + r.n_nocross + r.n_censored == r.n_paths);
        CHECK(r.n_paths == 150);
        CHECK(r.ks_distance >= 0.0);
        CHECK(r.ks_distance <= 1.0);
    }

    // Byte-identical CSVs and summary regardless of worker count.
    for (const char* name : {"samples_000.csv", "samples_001.csv", "summary.json"})
        CHECK(read_file(dir1 / name) == read_file(dir2 / name));

    // CSV shape.
    const std::string csv = read_file(dir1 / "samples_000.csv");
    CHECK(csv.rfind("path_index,outcome,T,r_norm\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 151);
    CHECK(csv.find("CROSSED") != std::string::npos);

    // Reports can be reloaded from summary.json.
    const auto loaded = load_campaign_reports(dir1.string());
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].eps == reports[0].eps);
    CHECK(loaded[0].ks_distance == reports[0].ks_distance);
    CHECK(loaded[1].n_effective == reports[1].n_effective);

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("run_campaign: optional path dump") {
    const auto dir = fs::temp_directory_path() / "lastexit_test_dump";
    fs::remove_all(dir);
    auto cfg = small_config(dir.string());
    cfg.eps_list = {0.3};
    cfg.n_paths = 100;
    cfg.dump_paths = true;
    const auto reports = run_campaign(cfg);
    REQUIRE(reports.size() == 1);

    const auto dump = dir / "paths_0.bin";
    REQUIRE(fs::exists(dump));
    CHECK(fs::file_size(dump) ==
          32 + 100 * static_cast<std::uintmax_t>(reports[0].n_grid) * 8);
    fs::remove_all(dir);
}

TEST_CASE("normalization is affine in the exit time") {
    const auto m = CovarianceModel::exp_power(1.0, 1.0, 1.0);
    const auto sc = scaling_constants(m, 0.1, 1.0);
    Xoshiro256pp rng(1);
    for (int i = 0; i < 200; ++i) {
        const double T = sc.A + (rng.uniform01() - 0.3) * 5.0 * sc.B;
        const double r = (T - sc.A) / sc.B;
        const double r_shift = ((T + sc.B) - sc.A) / sc.B;
        CHECK(r_shift == Approx(r + 1.0).margin(1e-12));
    }
}
