// Campaign orchestration: config parsing, Monte Carlo runs across a trend
// grid, empirical-vs-limit fitting, and result persistence.
#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lastexit/covariance.hpp"
#include "lastexit/errors.hpp"
#include "lastexit/last_exit.hpp"
#include "lastexit/scaling.hpp"
#include "lastexit/simulate.hpp"
#include "lastexit/version.hpp"

namespace lastexit {

// ---------------------------------------------------------------------------
// Flat key-value config: [section] headers, key = value lines, # comments.
// ---------------------------------------------------------------------------

using KeyValueConfig = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace detail

inline KeyValueConfig parse_config_text(const std::string& text) {
    KeyValueConfig cfg;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigInvalid("config line " + std::to_string(lineno) +
                                    ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            cfg[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw ConfigInvalid("config line " + std::to_string(lineno) +
                                ": expected 'key = value' inside a [section]");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigInvalid("config line " + std::to_string(lineno) + ": empty key");
        cfg[section][key] = value;
    }
    return cfg;
}

inline KeyValueConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Applies one "section.key=value" override onto a parsed config.
inline void apply_override(KeyValueConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigInvalid("override must look like section.key=value: " + assignment);
    const std::string path = detail::trim(assignment.substr(0, eq));
    const std::string value = detail::trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
        throw ConfigInvalid("override must look like section.key=value: " + assignment);
    cfg[path.substr(0, dot)][path.substr(dot + 1)] = value;
}

// ---------------------------------------------------------------------------
// Typed experiment configuration.
// ---------------------------------------------------------------------------

struct ExperimentConfig {
    CovarianceModel model;
    std::vector<double> eps_list;
    std::int64_t n_paths = 1000;
    std::uint64_t master_seed = 1;
    double delta_tail = 1e-3;
    double eta = 0.1;
    std::optional<double> h_alpha;
    std::string output_dir = "out";
    bool dump_paths = false;
    double clip_tol = 1e-9;
    int max_doublings = 8;
};

namespace detail {

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ConfigInvalid("bad number for " + what + ": '" + s + "'");
    }
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return x;
    } catch (const std::exception&) {
        throw ConfigInvalid("bad integer for " + what + ": '" + s + "'");
    }
}

inline bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigInvalid("bad boolean for " + what + ": '" + s + "'");
}

inline std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(s);
    while (std::getline(in, token, ',')) {
        token = trim(token);
        if (token.empty()) continue;
        out.push_back(parse_double(token, what));
    }
    if (out.empty()) throw ConfigInvalid(what + " must contain at least one value");
    return out;
}

} // namespace detail

inline ExperimentConfig config_from_kv(const KeyValueConfig& kv) {
    ExperimentConfig cfg;

    auto model_it = kv.find("model");
    if (model_it == kv.end()) throw ConfigInvalid("missing [model] section");
    static const std::array<const char*, 5> model_keys = {"family", "v", "q", "alpha", "beta"};
    for (const auto& [key, value] : model_it->second)
        if (std::find(model_keys.begin(), model_keys.end(), key) == model_keys.end())
            throw ConfigInvalid("unknown key in [model]: " + key);
    cfg.model = model_from_kv(model_it->second);

    auto run_it = kv.find("run");
    if (run_it == kv.end()) throw ConfigInvalid("missing [run] section");
    for (const auto& [key, value] : run_it->second) {
        if (key == "eps_list")
            cfg.eps_list = detail::parse_double_list(value, "run.eps_list");
        else if (key == "n_paths")
            cfg.n_paths = detail::parse_int(value, "run.n_paths");
        else if (key == "master_seed")
            cfg.master_seed = static_cast<std::uint64_t>(detail::parse_int(value, "run.master_seed"));
        else if (key == "delta_tail")
            cfg.delta_tail = detail::parse_double(value, "run.delta_tail");
        else if (key == "eta")
            cfg.eta = detail::parse_double(value, "run.eta");
        else if (key == "h_alpha")
            cfg.h_alpha = detail::parse_double(value, "run.h_alpha");
        else if (key == "output_dir")
            cfg.output_dir = value;
        else if (key == "dump_paths")
            cfg.dump_paths = detail::parse_bool(value, "run.dump_paths");
        else if (key == "clip_tol")
            cfg.clip_tol = detail::parse_double(value, "run.clip_tol");
        else if (key == "max_doublings")
            cfg.max_doublings = static_cast<int>(detail::parse_int(value, "run.max_doublings"));
        else
            throw ConfigInvalid("unknown key in [run]: " + key);
    }

    for (const auto& [section, entries] : kv)
        if (section != "model" && section != "run")
            throw ConfigInvalid("unknown config section: [" + section + "]");

    return cfg;
}

/// Validates the config; returns non-fatal warnings (e.g. huge grids).
inline std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    cfg.model.validate();
    if (cfg.eps_list.empty()) throw ConfigInvalid("eps_list must not be empty");
    for (std::size_t i = 0; i + 1 < cfg.eps_list.size(); ++i)
        if (!(cfg.eps_list[i + 1] < cfg.eps_list[i]))
            throw ConfigInvalid("eps_list must be strictly decreasing");
    for (double eps : cfg.eps_list)
        if (!(eps > 0.0 && eps / cfg.model.v < 1.0))
            throw ConfigInvalid("every eps must satisfy 0 < eps/v < 1");
    if (cfg.n_paths < 100) throw ConfigInvalid("n_paths must be >= 100");
    if (!(cfg.delta_tail > 0.0 && cfg.delta_tail <= 0.1))
        throw ConfigInvalid("delta_tail must lie in (0, 0.1]");
    if (!(cfg.eta > 0.0 && cfg.eta <= 0.5)) throw ConfigInvalid("eta must lie in (0, 0.5]");
    if (!(cfg.clip_tol >= 0.0 && cfg.clip_tol <= 1e-6))
        throw ConfigInvalid("clip_tol must lie in [0, 1e-6]");
    if (cfg.max_doublings < 0 || cfg.max_doublings > 12)
        throw ConfigInvalid("max_doublings must lie in [0, 12]");
    if (cfg.output_dir.empty()) throw ConfigInvalid("output_dir must not be empty");

    std::vector<std::string> warnings;
    const double h_alpha = pickands_constant(cfg.model.alpha, cfg.h_alpha);
    for (double eps : cfg.eps_list) {
        const ScalingConstants sc = scaling_constants(cfg.model, eps, h_alpha);
        const HorizonPlan plan = plan_horizon(sc, cfg.model, cfg.delta_tail, cfg.eta);
        const double n_grid = std::ceil(plan.t_max / plan.step) + 1.0;
        if (n_grid > 16777216.0) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "eps=%g implies a grid of %.3g points (> 2^24); expect heavy runtime",
                          eps, n_grid);
            warnings.emplace_back(buf);
        }
    }
    return warnings;
}

// ---------------------------------------------------------------------------
// Empirical-vs-limit fitting.
// ---------------------------------------------------------------------------

inline constexpr std::array<double, 5> kQuantileProbs = {0.1, 0.25, 0.5, 0.75, 0.9};

struct FitStats {
    double ks_distance = 0.0;
    std::array<double, 5> quantiles{}; ///< at probabilities kQuantileProbs
};

/**
 * @brief One-sample Kolmogorov-Smirnov fit against the fully specified
 * limit CDF exp(-c exp(-r)), plus interpolated sample quantiles.
 */
inline FitStats gumbel_fit(std::vector<double> samples, double c) {
    if (samples.size() < 50) throw TooFewSamples("gumbel_fit: need at least 50 samples");
    std::sort(samples.begin(), samples.end());
    const std::size_t n = samples.size();

    FitStats fit;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = gumbel_limit_cdf(samples[i], c);
        d = std::max(d, static_cast<double>(i + 1) / static_cast<double>(n) - f);
        d = std::max(d, f - static_cast<double>(i) / static_cast<double>(n));
    }
    fit.ks_distance = d;

    for (std::size_t k = 0; k < kQuantileProbs.size(); ++k) {
        const double h = kQuantileProbs[k] * static_cast<double>(n - 1);
        const std::size_t lo = static_cast<std::size_t>(h);
        const double frac = h - static_cast<double>(lo);
        fit.quantiles[k] = lo + 1 < n
                               ? samples[lo] + frac * (samples[lo + 1] - samples[lo])
                               : samples[lo];
    }
    return fit;
}

/// Per-trend-level outcome summary and fit against the limit law.
struct GumbelFitReport {
    double eps = 0.0;
    std::int64_t n_paths = 0;
    std::int64_t n_effective = 0; ///< Crossed count (the KS sample size)
    std::int64_t n_nocross = 0;
    std::int64_t n_censored = 0;
    double ks_distance = 0.0;
    std::array<double, 5> quantiles{};
    double c_used = 0.0;
    // Run geometry, echoed for reporting.
    double A = 0.0;
    double B = 0.0;
    double step = 0.0;
    double t_max = 0.0;
    double guard = 0.0;
    double R_used = 0.0;
    double tail_bound = 0.0;
    std::int64_t n_grid = 0;
    std::size_t embedding_size = 0;
    double clip_mass = 0.0;
};

// ---------------------------------------------------------------------------
// Campaign.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_path(const std::string& dir, std::size_t eps_index) {
    char name[32];
    std::snprintf(name, sizeof(name), "samples_%03zu.csv", eps_index);
    return (std::filesystem::path(dir) / name).string();
}

inline void write_samples_csv(const std::string& filename,
                              std::span<const ExitOutcome> outcomes,
                              std::span<const double> r_norm_by_path) {
    std::ofstream out(filename, std::ios::binary); // binary: keep \n on all platforms
    if (!out) throw Error("cannot open for writing: " + filename);
    out << "path_index,outcome,T,r_norm\n";
    char buf[96];
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const ExitOutcome& o = outcomes[i];
        switch (o.kind) {
            case ExitKind::Crossed:
                std::snprintf(buf, sizeof(buf), "%zu,CROSSED,%.17g,%.17g\n", i, o.value,
                              r_norm_by_path[i]);
                break;
            case ExitKind::NoCrossing:
                std::snprintf(buf, sizeof(buf), "%zu,NOCROSS,,\n", i);
                break;
            case ExitKind::RightCensored:
                std::snprintf(buf, sizeof(buf), "%zu,CENSORED,%.17g,\n", i, o.value);
                break;
        }
        out << buf;
    }
}

inline nlohmann::ordered_json config_echo_json(const ExperimentConfig& cfg) {
    nlohmann::ordered_json j;
    j["model"] = model_to_kv(cfg.model);
    nlohmann::ordered_json run;
    run["eps_list"] = cfg.eps_list;
    run["n_paths"] = cfg.n_paths;
    run["master_seed"] = cfg.master_seed;
    run["delta_tail"] = cfg.delta_tail;
    run["eta"] = cfg.eta;
    if (cfg.h_alpha) run["h_alpha"] = *cfg.h_alpha;
    // output_dir is where the file lives, not what the run means: leaving it
    // out keeps summaries of identical campaigns byte-identical.
    run["dump_paths"] = cfg.dump_paths;
    run["clip_tol"] = cfg.clip_tol;
    run["max_doublings"] = cfg.max_doublings;
    j["run"] = run;
    return j;
}

inline nlohmann::ordered_json report_json(const GumbelFitReport& r) {
    nlohmann::ordered_json j;
    j["eps"] = r.eps;
    j["n_paths"] = r.n_paths;
    j["n_effective"] = r.n_effective;
    j["n_nocross"] = r.n_nocross;
    j["n_censored"] = r.n_censored;
    j["ks_distance"] = r.ks_distance;
    j["quantiles"] = {{"p10", r.quantiles[0]},
                      {"p25", r.quantiles[1]},
                      {"p50", r.quantiles[2]},
                      {"p75", r.quantiles[3]},
                      {"p90", r.quantiles[4]}};
    j["c_used"] = r.c_used;
    j["A"] = r.A;
    j["B"] = r.B;
    j["step"] = r.step;
    j["t_max"] = r.t_max;
    j["guard"] = r.guard;
    j["R_used"] = r.R_used;
    j["tail_bound"] = r.tail_bound;
    j["n_grid"] = r.n_grid;
    j["embedding_size"] = r.embedding_size;
    j["clip_mass"] = r.clip_mass;
    return j;
}

inline GumbelFitReport report_from_json(const nlohmann::json& j) {
    GumbelFitReport r;
    r.eps = j.at("eps").get<double>();
    r.n_paths = j.at("n_paths").get<std::int64_t>();
    r.n_effective = j.at("n_effective").get<std::int64_t>();
    r.n_nocross = j.at("n_nocross").get<std::int64_t>();
    r.n_censored = j.at("n_censored").get<std::int64_t>();
    r.ks_distance = j.at("ks_distance").get<double>();
    const auto& q = j.at("quantiles");
    r.quantiles = {q.at("p10").get<double>(), q.at("p25").get<double>(),
                   q.at("p50").get<double>(), q.at("p75").get<double>(),
                   q.at("p90").get<double>()};
    r.c_used = j.at("c_used").get<double>();
    r.A = j.at("A").get<double>();
    r.B = j.at("B").get<double>();
    r.step = j.at("step").get<double>();
    r.t_max = j.at("t_max").get<double>();
    return r;
}

} // namespace detail

/**
 * @brief Runs the full Monte Carlo campaign described by the config.
 *
 * Per trend level: scaling constants, horizon and step, circulant-embedding
 * simulation of n_paths paths, last-exit extraction, normalization
 * r = (T - A)/B of the crossed outcomes, and a Gumbel-limit fit. Results are
 * persisted as one CSV per level plus summary.json; wall-clock timings go to
 * the separate run_meta.json so result files are bitwise reproducible.
 */
inline std::vector<GumbelFitReport> run_campaign(const ExperimentConfig& cfg) {
    validate_config(cfg);
    std::filesystem::create_directories(cfg.output_dir);

    const double h_alpha = pickands_constant(cfg.model.alpha, cfg.h_alpha);
    std::vector<GumbelFitReport> reports;
    std::vector<double> level_seconds;
    const auto campaign_start = std::chrono::steady_clock::now();

    for (std::size_t idx = 0; idx < cfg.eps_list.size(); ++idx) {
        const auto level_start = std::chrono::steady_clock::now();
        const double eps = cfg.eps_list[idx];
        const ScalingConstants sc = scaling_constants(cfg.model, eps, h_alpha);
        const HorizonPlan plan = plan_horizon(sc, cfg.model, cfg.delta_tail, cfg.eta);
        const GridSpec grid = grid_for_plan(plan);

        EmbeddingSpectrum spectrum;
        try {
            spectrum = build_embedding(cfg.model, grid, cfg.clip_tol, cfg.max_doublings);
        } catch (const EmbeddingFailed& e) {
            throw EmbeddingFailed(std::string(e.what()) + " (at eps=" + std::to_string(eps) + ")");
        }

        const std::uint64_t level_seed = stream_seed(cfg.master_seed, idx);
        const std::int64_t n_paths = cfg.n_paths;
        std::vector<ExitOutcome> outcomes(static_cast<std::size_t>(n_paths));

        if (cfg.dump_paths) {
            PathDumpWriter dump(
                (std::filesystem::path(cfg.output_dir) /
                 ("paths_" + std::to_string(idx) + ".bin")).string(),
                grid, static_cast<std::uint64_t>(n_paths));
            // Chunked so the dump stays in path order with bounded memory
            // (~64 MiB of buffered path values).
            const std::int64_t chunk = std::max<std::int64_t>(
                1, std::min<std::int64_t>(n_paths, (std::int64_t{1} << 23) / grid.n));
            std::vector<PathSample> buffer;
            for (std::int64_t lo = 0; lo < n_paths; lo += chunk) {
                const std::int64_t hi = std::min(n_paths, lo + chunk);
                buffer.assign(static_cast<std::size_t>(hi - lo), PathSample{});
#pragma omp parallel for schedule(dynamic, 4)
                for (std::int64_t i = lo; i < hi; ++i)
                    buffer[static_cast<std::size_t>(i - lo)] =
                        sample_path(spectrum, grid, level_seed, i);
                for (std::int64_t i = lo; i < hi; ++i) {
                    const PathSample& p = buffer[static_cast<std::size_t>(i - lo)];
                    dump.append(p);
                    outcomes[static_cast<std::size_t>(i)] = last_exit_time(p, eps, plan.guard);
                }
            }
        } else {
#pragma omp parallel for schedule(dynamic, 4)
            for (std::int64_t i = 0; i < n_paths; ++i) {
                const PathSample p = sample_path(spectrum, grid, level_seed, i);
                outcomes[static_cast<std::size_t>(i)] = last_exit_time(p, eps, plan.guard);
            }
        }

        GumbelFitReport rep;
        rep.eps = eps;
        rep.n_paths = n_paths;
        rep.c_used = sc.c;
        rep.A = sc.A;
        rep.B = sc.B;
        rep.step = grid.step;
        rep.t_max = plan.t_max;
        rep.guard = plan.guard;
        rep.R_used = plan.R_used;
        rep.tail_bound = plan.tail_bound;
        rep.n_grid = grid.n;
        rep.embedding_size = spectrum.size;
        rep.clip_mass = spectrum.clip_mass;

        std::vector<double> r_norm_by_path(static_cast<std::size_t>(n_paths), 0.0);
        std::vector<double> r_samples;
        r_samples.reserve(static_cast<std::size_t>(n_paths));
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            switch (outcomes[i].kind) {
                case ExitKind::Crossed: {
                    const double r = (outcomes[i].value - sc.A) / sc.B;
                    r_norm_by_path[i] = r;
                    r_samples.push_back(r);
                    ++rep.n_effective;
                    break;
                }
                case ExitKind::NoCrossing:
                    ++rep.n_nocross;
                    break;
                case ExitKind::RightCensored:
                    ++rep.n_censored;
                    break;
            }
        }

        const FitStats fit = gumbel_fit(r_samples, sc.c);
        rep.ks_distance = fit.ks_distance;
        rep.quantiles = fit.quantiles;
        reports.push_back(rep);

        detail::write_samples_csv(detail::csv_path(cfg.output_dir, idx), outcomes,
                                  r_norm_by_path);
        level_seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - level_start)
                .count());
    }

    nlohmann::ordered_json summary;
    summary["library_version"] = kVersion;
    summary["config"] = detail::config_echo_json(cfg);
    nlohmann::ordered_json report_array = nlohmann::ordered_json::array();
    for (const GumbelFitReport& r : reports) report_array.push_back(detail::report_json(r));
    summary["reports"] = report_array;
    {
        std::ofstream out(std::filesystem::path(cfg.output_dir) / "summary.json",
                          std::ios::binary);
        out << summary.dump(2) << '\n';
    }

    // Timings live apart from the results so reruns stay byte-identical.
    nlohmann::ordered_json meta;
    meta["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - campaign_start)
            .count();
    meta["per_eps_seconds"] = level_seconds;
    meta["unix_time"] =
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    {
        std::ofstream out(std::filesystem::path(cfg.output_dir) / "run_meta.json",
                          std::ios::binary);
        out << meta.dump(2) << '\n';
    }

    return reports;
}

/// Reads the per-level reports back from a campaign's summary.json.
inline std::vector<GumbelFitReport> load_campaign_reports(const std::string& output_dir) {
    const auto path = std::filesystem::path(output_dir) / "summary.json";
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    std::vector<GumbelFitReport> reports;
    for (const auto& rj : j.at("reports")) reports.push_back(detail::report_from_json(rj));
    return reports;
}

// ---------------------------------------------------------------------------
// Convergence report.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
    double eps = 0.0;
    std::int64_t n_effective = 0;
    double ks_distance = 0.0;
    double median_shift = 0.0; ///< empirical median - ln(c / ln 2)
};

struct ConvergenceSummary {
    std::vector<ConvergenceRow> rows; ///< sorted by decreasing eps
    bool pass = false;
    double ks_threshold = 0.0;
    double trend_slack = 0.0;
};

inline ConvergenceSummary convergence_report(std::vector<GumbelFitReport> reports,
                                             double ks_threshold = 0.08,
                                             double trend_slack = 0.02) {
    std::sort(reports.begin(), reports.end(),
              [](const GumbelFitReport& a, const GumbelFitReport& b) { return a.eps > b.eps; });

    ConvergenceSummary summary;
    summary.ks_threshold = ks_threshold;
    summary.trend_slack = trend_slack;
    for (const GumbelFitReport& r : reports) {
        ConvergenceRow row;
        row.eps = r.eps;
        row.n_effective = r.n_effective;
        row.ks_distance = r.ks_distance;
        row.median_shift = r.quantiles[2] - gumbel_limit_median(r.c_used);
        summary.rows.push_back(row);
    }

    bool pass = !summary.rows.empty() &&
                summary.rows.back().ks_distance <= ks_threshold;
    for (std::size_t i = 0; i + 1 < summary.rows.size(); ++i)
        if (summary.rows[i + 1].ks_distance > summary.rows[i].ks_distance + trend_slack)
            pass = false;
    summary.pass = pass;
    return summary;
}

inline void print_convergence_table(std::ostream& out, const ConvergenceSummary& s) {
    out << "      eps   n_eff   ks_distance   median_shift\n";
    char buf[96];
    for (const ConvergenceRow& r : s.rows) {
        std::snprintf(buf, sizeof(buf), "%9g  %6lld      %8.5f       %+8.5f\n", r.eps,
                      static_cast<long long>(r.n_effective), r.ks_distance, r.median_shift);
        out << buf;
    }
    out << (s.pass ? "PASS" : "FAIL") << " (final ks <= " << s.ks_threshold
        << ", trend slack " << s.trend_slack << ")\n";
}

} // namespace lastexit
