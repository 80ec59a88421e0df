#pragma once

// Command-line front end: sweep | crb | trial, each driven by a key = value
// config file plus --set overrides. CSV schemas and exit codes are part of
// the tool's contract:
//   0 ok, 2 config error, 3 I/O error, 4 numeric error.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "impest/config.hpp"
#include "impest/crb.hpp"
#include "impest/errors.hpp"
#include "impest/montecarlo.hpp"

namespace impest {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumeric = 4;

struct CliConfig {
    std::string config_path;
    std::string output_path;               // trial may omit it (stdout)
    std::vector<std::string> overrides;    // --set key=value, applied in order
    std::size_t threads = 0;               // 0 = hardware concurrency
    std::optional<std::uint64_t> seed;     // --seed overrides the config key
    bool zero_noise = false;               // --zero-noise forces the flag on
    bool dump_config = false;
};

namespace detail {

// dB column: 20 log10(x), with the documented -999.0 sentinel for zero or
// non-finite relative quantities.
inline std::string format_db(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) return "-999.0";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", 20.0 * std::log10(x));
    return buf;
}

inline std::string format_g(double x, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, x + 0.0);  // -0 -> 0
    return buf;
}

inline ExperimentConfig load_experiment(const CliConfig& cli) {
    KvConfig kv = parse_kv_file(cli.config_path);
    for (const std::string& pair : cli.overrides) apply_override(kv, pair);
    if (cli.seed) kv.values["seed"] = std::to_string(*cli.seed);
    if (cli.zero_noise) kv.values["zero_noise"] = "true";
    return experiment_from_kv(kv);
}

}  // namespace detail

// Runs the RMSE-vs-CRB sweep and writes
// snr_db,rmse_rel_ml_db,rmse_rel_mm_db,crb_rel_db,f_inf_count,degenerate_count,trials
inline int cmd_sweep(const CliConfig& cli, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    ExperimentConfig cfg;
    try {
        cfg = detail::load_experiment(cli);
        if (std::abs(*cfg.F_true) == 0.0)
            throw ConfigError("sweep: F_true must be nonzero (relative RMSE)");
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (cli.dump_config) {
        out << dump_experiment(cfg);
        return kExitOk;
    }

    SweepResult result;
    try {
        result = run_sweep(cfg, cli.threads);
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }

    std::ofstream csv(cli.output_path);
    if (!csv) {
        err << "io error: cannot open " << cli.output_path << "\n";
        return kExitIo;
    }
    csv << "snr_db,rmse_rel_ml_db,rmse_rel_mm_db,crb_rel_db,f_inf_count,degenerate_count,"
           "trials\n";
    for (const SweepPoint& p : result.points) {
        csv << detail::format_g(p.snr_db) << ',' << detail::format_db(p.rmse_rel_ml) << ','
            << detail::format_db(p.rmse_rel_mm) << ',' << detail::format_db(p.crb_rel) << ','
            << p.f_infinite_count << ',' << p.degenerate_count << ',' << p.trials << "\n";
    }
    csv.flush();
    if (!csv) {
        err << "io error: write failed for " << cli.output_path << "\n";
        return kExitIo;
    }
    return kExitOk;
}

// Tabulates the FIM and relative CRB per SNR point:
// snr_db,crb_rel_db,fim_11,fim_22,fim_12_re,fim_12_im
inline int cmd_crb(const CliConfig& cli, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    ExperimentConfig cfg;
    CorrelationSpec spec;
    try {
        cfg = detail::load_experiment(cli);
        spec = build_correlation(cfg);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (cli.dump_config) {
        out << dump_experiment(cfg);
        return kExitOk;
    }

    struct Row {
        double snr;
        double crb_rel;
        Herm2 fim;
    };
    std::vector<Row> rows;
    try {
        for (double snr : cfg.snr_db) {
            const double P = snr_to_power(cfg, snr);
            const double sigma2 =
                2.0 * static_cast<double>(cfg.N) / (P * static_cast<double>(cfg.K));
            const FimResult r = fim_closed(*cfg.F_true, cfg.sigma_h2_true, spec, cfg.N, sigma2);
            double crb_rel = std::numeric_limits<double>::infinity();
            if (r.valid && std::abs(*cfg.F_true) > 0.0)
                crb_rel = std::sqrt(r.crb_F) / std::abs(*cfg.F_true);
            rows.push_back({snr, crb_rel, r.fim});
        }
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }

    std::ofstream csv(cli.output_path);
    if (!csv) {
        err << "io error: cannot open " << cli.output_path << "\n";
        return kExitIo;
    }
    csv << "snr_db,crb_rel_db,fim_11,fim_22,fim_12_re,fim_12_im\n";
    for (const Row& r : rows) {
        const cplx fim12 = std::conj(r.fim.s21);
        csv << detail::format_g(r.snr) << ',' << detail::format_db(r.crb_rel) << ','
            << detail::format_g(r.fim.s11, 12) << ',' << detail::format_g(r.fim.s22, 12) << ','
            << detail::format_g(fim12.real(), 12) << ',' << detail::format_g(fim12.imag(), 12)
            << "\n";
    }
    csv.flush();
    if (!csv) {
        err << "io error: write failed for " << cli.output_path << "\n";
        return kExitIo;
    }
    return kExitOk;
}

// Single seeded trial at the first SNR point; prints the sufficient-statistic
// norms and both estimates as stable key: value lines.
inline int cmd_trial(const CliConfig& cli, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
    ExperimentConfig cfg;
    try {
        cfg = detail::load_experiment(cli);
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (cli.dump_config) {
        out << dump_experiment(cfg);
        return kExitOk;
    }

    TrialDebug dbg;
    try {
        dbg = run_trial_debug(cfg, 0, 0);
    } catch (const std::exception& e) {
        err << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }

    std::ostringstream report;
    const auto g = [](double v) { return detail::format_g(v, 9); };
    report << "snr_db: " << g(cfg.snr_db.front()) << "\n";
    report << "sigma2: " << g(dbg.stats.sigma2) << "\n";
    report << "y1_norm: " << g(dbg.stats.Y1.frobenius_norm()) << "\n";
    report << "y2_norm: " << g(dbg.stats.Y2.frobenius_norm()) << "\n";
    report << "ml_mu_hat: " << g(dbg.out.ml.mu_hat) << "\n";
    report << "ml_objective: " << g(dbg.out.ml.objective) << "\n";
    report << "ml_F_hat_re: " << g(dbg.out.ml.F_hat.real()) << "\n";
    report << "ml_F_hat_im: " << g(dbg.out.ml.F_hat.imag()) << "\n";
    report << "ml_sigma_h2_hat: " << g(dbg.out.ml.sigma_h2_hat) << "\n";
    report << "ml_status: " << to_string(dbg.out.ml.status) << "\n";
    report << "mm_mu_hat: " << g(dbg.out.mm.mu_hat) << "\n";
    report << "mm_objective: " << g(dbg.out.mm.objective) << "\n";
    report << "mm_F_hat_re: " << g(dbg.out.mm.F_hat.real()) << "\n";
    report << "mm_F_hat_im: " << g(dbg.out.mm.F_hat.imag()) << "\n";
    report << "mm_sigma_h2_hat: " << g(dbg.out.mm.sigma_h2_hat) << "\n";
    report << "mm_status: " << to_string(dbg.out.mm.status) << "\n";

    if (cli.output_path.empty()) {
        out << report.str();
        return kExitOk;
    }
    std::ofstream file(cli.output_path);
    if (!file) {
        err << "io error: cannot open " << cli.output_path << "\n";
        return kExitIo;
    }
    file << report.str();
    file.flush();
    if (!file) {
        err << "io error: write failed for " << cli.output_path << "\n";
        return kExitIo;
    }
    return kExitOk;
}

}  // namespace impest
