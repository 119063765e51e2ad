// Command-line driver: campaign runs, convergence reports, and direct
// access to the verifier modules.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "lastexit/experiment.hpp"
#include "lastexit/lattice_sum.hpp"
#include "lastexit/slepian.hpp"
#include "lastexit/sup_tail.hpp"
#include "lastexit/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEmbedding = 3;
constexpr int kExitThreshold = 4;

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    lastexit::KeyValueConfig kv = lastexit::parse_config_file(config_path);
    for (const std::string& o : overrides) lastexit::apply_override(kv, o);
    const lastexit::ExperimentConfig cfg = lastexit::config_from_kv(kv);
    for (const std::string& w : lastexit::validate_config(cfg))
        std::cerr << "warning: " << w << "\n";

    const auto reports = lastexit::run_campaign(cfg);
    for (const auto& r : reports) {
        std::printf("eps=%-8g n_grid=%-9lld crossed=%lld nocross=%lld censored=%lld "
                    "ks=%.5f median=%+.5f\n",
                    r.eps, static_cast<long long>(r.n_grid),
                    static_cast<long long>(r.n_effective),
                    static_cast<long long>(r.n_nocross),
                    static_cast<long long>(r.n_censored), r.ks_distance, r.quantiles[2]);
    }
    std::printf("results written to %s\n", cfg.output_dir.c_str());
    return kExitOk;
}

int cmd_report(const std::string& output_dir, double ks_threshold, double slack) {
    const auto reports = lastexit::load_campaign_reports(output_dir);
    const auto summary = lastexit::convergence_report(reports, ks_threshold, slack);
    lastexit::print_convergence_table(std::cout, summary);
    return summary.pass ? kExitOk : kExitThreshold;
}

int cmd_check_lemma3(double alpha, std::vector<double> eps_grid, const std::string& out_path) {
    // Shipped rule family: a = eps^(-1/2), theta = eps^(-1) sqrt(-2 ln eps).
    auto a_rule = [](double eps) { return 1.0 / std::sqrt(eps); };
    auto theta_rule = [](double eps) { return std::sqrt(-2.0 * std::log(eps)) / eps; };
    const auto rows = lastexit::ratio_scan(alpha, a_rule, theta_rule, eps_grid);

    if (out_path.empty()) {
        lastexit::write_ratio_csv(std::cout, rows);
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw lastexit::Error("cannot open " + out_path);
        lastexit::write_ratio_csv(out, rows);
    }

    for (const auto& row : rows) {
        const lastexit::SumQuery q{1.0 / std::sqrt(row.eps), 0.0,
                                   std::sqrt(-2.0 * std::log(row.eps)) / row.eps, row.eps,
                                   alpha};
        const auto br = lastexit::integral_brackets(q);
        if (!(br.lower <= row.lhs && row.lhs <= br.upper)) {
            std::cerr << "bracket violation at eps=" << row.eps << "\n";
            return kExitFailure;
        }
    }
    return kExitOk;
}

int cmd_check_slepian(int cases, int dim, long long samples, std::uint64_t seed) {
    const auto summary = lastexit::random_comparison_suite(cases, dim, seed, samples);
    std::printf("cases=%d pass=%d fail(3se)=%d hard_fail(4se)=%d min_margin=%+.2f se\n",
                summary.n_cases, summary.n_pass, summary.n_fail, summary.n_hard_fail,
                summary.min_margin_se);
    return summary.n_hard_fail == 0 ? kExitOk : kExitFailure;
}

int cmd_check_tail(const std::string& family, double v, double q, double alpha, double beta,
                   double t, double x, double eta, long long n_paths, std::uint64_t seed,
                   double h_alpha_opt) {
    lastexit::CovarianceModel model =
        family == "cauchy_type" ? lastexit::CovarianceModel::cauchy_type(v, q, alpha, beta)
                                : lastexit::CovarianceModel::exp_power(v, q, alpha);
    const double h = lastexit::pickands_constant(
        alpha, h_alpha_opt > 0 ? std::optional<double>(h_alpha_opt) : std::nullopt);

    const auto approx = lastexit::tail_approx(model, t, x, h);
    std::printf("tail_approx = %.6e  [small_rhs=%s scale_ok=%s]\n", approx.p_hat,
                approx.small_rhs ? "yes" : "no", approx.scale_ok ? "yes" : "no");

    const double step = eta * std::pow(q, -1.0 / alpha) * std::pow(x, -2.0 / alpha);
    const auto mc = lastexit::tail_mc(model, t, x, step, n_paths, seed);
    std::printf("tail_mc     = %.6e +- %.2e  (n=%lld, step=%g, grid=%lld)\n", mc.estimate,
                mc.std_error, static_cast<long long>(mc.n_paths), mc.grid.step,
                static_cast<long long>(mc.grid.n));
    std::printf("mc/approx   = %.4f\n", mc.estimate / approx.p_hat);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Last-exit-time simulation and verification for stationary Gaussian "
                 "processes over a slowly growing linear boundary"};
    app.set_version_flag("--version", lastexit::kVersion);
    app.require_subcommand(1);

    // run
    std::string config_path;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run a Monte Carlo campaign from a config file");
    run->add_option("config", config_path, "Config file (flat [section] key = value text)")
        ->required();
    run->add_option("--set", overrides, "Override a config key: section.key=value");

    // report
    std::string report_dir;
    double ks_threshold = 0.08;
    double slack = 0.02;
    auto* report = app.add_subcommand("report", "Convergence report for a campaign output dir");
    report->add_option("output_dir", report_dir, "Campaign output directory")->required();
    report->add_option("--ks-threshold", ks_threshold, "Acceptance threshold on the final KS");
    report->add_option("--slack", slack, "Allowed KS increase between consecutive levels");

    // check-lemma3
    double l3_alpha = 1.0;
    std::vector<double> l3_eps = {0.1, 0.05, 0.02, 0.01};
    std::string l3_out;
    auto* lemma3 = app.add_subcommand(
        "check-lemma3", "Lattice-sum vs closed-form ratio scan with integral brackets");
    lemma3->add_option("--alpha", l3_alpha, "Local exponent in (0, 2]");
    lemma3->add_option("--eps", l3_eps, "Decreasing eps grid")->delimiter(',');
    lemma3->add_option("--out", l3_out, "Write the CSV here instead of stdout");

    // check-slepian
    int sl_cases = 100;
    int sl_dim = 4;
    long long sl_samples = 100000;
    std::uint64_t sl_seed = 1;
    auto* slepian = app.add_subcommand("check-slepian",
                                       "Random Gaussian comparison-inequality suite");
    slepian->add_option("--cases", sl_cases, "Number of random cases");
    slepian->add_option("--dim", sl_dim, "Vector dimension (<= 8)");
    slepian->add_option("--samples", sl_samples, "Monte Carlo samples per estimate");
    slepian->add_option("--seed", sl_seed, "Master seed");

    // check-tail
    std::string ct_family = "exp_power";
    double ct_v = 1.0, ct_q = 1.0, ct_alpha = 1.0, ct_beta = 1.0;
    double ct_t = 10.0, ct_x = 4.0, ct_eta = 0.1, ct_h = 0.0;
    long long ct_paths = 100000;
    std::uint64_t ct_seed = 1;
    auto* tail = app.add_subcommand("check-tail",
                                    "Supremum tail approximation vs Monte Carlo");
    tail->add_option("--family", ct_family, "exp_power or cauchy_type");
    tail->add_option("--v", ct_v, "Process standard deviation");
    tail->add_option("--q", ct_q, "Local scale coefficient");
    tail->add_option("--alpha", ct_alpha, "Local exponent in (0, 2]");
    tail->add_option("--beta", ct_beta, "CauchyType decay exponent");
    tail->add_option("--t", ct_t, "Interval length");
    tail->add_option("--x", ct_x, "Level");
    tail->add_option("--eta", ct_eta, "Step-rule factor");
    tail->add_option("--n-paths", ct_paths, "Monte Carlo paths");
    tail->add_option("--seed", ct_seed, "Master seed");
    tail->add_option("--h-alpha", ct_h, "Pickands constant for alpha outside {1, 2}");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, overrides);
        if (*report) return cmd_report(report_dir, ks_threshold, slack);
        if (*lemma3) return cmd_check_lemma3(l3_alpha, l3_eps, l3_out);
        if (*slepian) return cmd_check_slepian(sl_cases, sl_dim, sl_samples, sl_seed);
        if (*tail)
            return cmd_check_tail(ct_family, ct_v, ct_q, ct_alpha, ct_beta, ct_t, ct_x,
                                  ct_eta, ct_paths, ct_seed, ct_h);
    } catch (const lastexit::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const lastexit::EmbeddingFailed& e) {
        std::cerr << "embedding failure: " << e.what() << "\n";
        return kExitEmbedding;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}
