#pragma once

// Seeded, trial-parallel Monte Carlo harness: draw a channel, synthesize the
// two observation segments, reduce to sufficient statistics, run both
// estimators, and aggregate relative RMSE against the CRB across an SNR
// sweep. Every trial gets its own counter-derived RNG stream, so results are
// bit-identical for any worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "impest/channel.hpp"
#include "impest/crb.hpp"
#include "impest/errors.hpp"
#include "impest/estimators.hpp"
#include "impest/rng.hpp"
#include "impest/signal.hpp"

namespace impest {

enum class FadingModel { Iid, Clarke };

struct ExperimentConfig {
    std::size_t N = 4;
    std::size_t K = 16;
    std::size_t L = 10;
    std::vector<double> snr_db;            // P = 10^(snr/10) / sigma_h2_true
    double sigma_h2_true = 1.0;
    std::optional<cplx> F_true;            // deliberately no default
    FadingModel fading = FadingModel::Iid;
    double v_kmh = 0.0;                    // scatterer speed, Clarke model only
    double f_c_hz = 9e8;
    double T_s_s = 1e-3;
    double c_mps = kDefaultSpeedOfLight;
    std::size_t trials = 2000;
    std::uint64_t master_seed = 1;
    bool zero_noise = false;
};

inline void validate_config(const ExperimentConfig& cfg) {
    if (!cfg.F_true) throw InvalidArg("config: F_true is required");
    if (!is_finite(*cfg.F_true)) throw InvalidArg("config: F_true must be finite");
    if (cfg.snr_db.empty()) throw InvalidArg("config: snr_db must be nonempty");
    if (cfg.trials < 1) throw InvalidArg("config: trials must be >= 1");
    if (cfg.L < 1) throw InvalidArg("config: L must be >= 1");
    if (cfg.K % 2 != 0 || cfg.K / 2 < cfg.N) throw InvalidArg("config: need K even, K/2 >= N");
    if (cfg.sigma_h2_true < 0.0) throw InvalidArg("config: sigma_h2_true must be >= 0");
    if (cfg.fading == FadingModel::Clarke && cfg.v_kmh < 0.0)
        throw InvalidArg("config: v_kmh must be >= 0");
    for (double s : cfg.snr_db)
        if (!std::isfinite(s)) throw InvalidArg("config: snr_db entries must be finite");
}

inline CorrelationSpec build_correlation(const ExperimentConfig& cfg) {
    if (cfg.fading == FadingModel::Iid) return iid_correlation(cfg.L);
    const double f_d = doppler_freq(cfg.v_kmh / 3.6, cfg.f_c_hz, cfg.c_mps);
    return clarke_correlation(cfg.L, f_d, cfg.T_s_s);
}

inline double snr_to_power(const ExperimentConfig& cfg, double snr_db) {
    // Average post-detection SNR of a received symbol is P * sigma_h2.
    const double denom = cfg.sigma_h2_true > 0.0 ? cfg.sigma_h2_true : 1.0;
    return std::pow(10.0, snr_db / 10.0) / denom;
}

struct TrialOutput {
    ThetaEstimate ml;
    ThetaEstimate mm;
    cplx F_true{0.0, 0.0};
};

struct TrialDebug {
    SufficientStats stats;
    TrialOutput out;
};

namespace detail {

inline TrialDebug run_trial_impl(const ExperimentConfig& cfg, const CorrelationSpec& spec,
                                 const TrainingPair& pair, std::size_t snr_index,
                                 std::size_t trial_index) {
    Rng rng = Rng::stream(cfg.master_seed, snr_index, trial_index);
    ChannelDraw draw;
    if (cfg.sigma_h2_true > 0.0) {
        draw = sample_channel(spec, cfg.N, cfg.sigma_h2_true, rng);
    } else {
        draw.H = ComplexMat(cfg.L, cfg.N);  // degenerate debug case: no channel
        draw.sigma_h2 = 0.0;
    }
    const ObservationBatch batch = synthesize(draw, *cfg.F_true, pair, rng, cfg.zero_noise);
    TrialDebug dbg;
    dbg.stats = sufficient_stats(batch, pair);
    dbg.out.ml = estimate_ml(dbg.stats, spec);
    dbg.out.mm = estimate_mm(dbg.stats);
    dbg.out.F_true = *cfg.F_true;
    return dbg;
}

}  // namespace detail

// One generate -> estimate trial, deterministic in (master_seed, snr_index,
// trial_index).
inline TrialDebug run_trial_debug(const ExperimentConfig& cfg, std::size_t snr_index,
                                  std::size_t trial_index) {
    validate_config(cfg);
    if (snr_index >= cfg.snr_db.size()) throw InvalidArg("run_trial: snr_index out of range");
    const CorrelationSpec spec = build_correlation(cfg);
    const TrainingPair pair =
        make_training(cfg.N, cfg.K, snr_to_power(cfg, cfg.snr_db[snr_index]));
    return detail::run_trial_impl(cfg, spec, pair, snr_index, trial_index);
}

inline TrialOutput run_trial(const ExperimentConfig& cfg, std::size_t snr_index,
                             std::size_t trial_index) {
    return run_trial_debug(cfg, snr_index, trial_index).out;
}

struct SweepPoint {
    double snr_db = 0.0;
    double rmse_rel_ml = 0.0;   // sqrt(mean |F_hat - F|^2) / |F| over kept trials
    double rmse_rel_mm = 0.0;
    double crb_rel = 0.0;       // relative CRB at the true theta
    std::size_t f_infinite_count = 0;
    std::size_t degenerate_count = 0;
    std::size_t kept = 0;
    std::size_t trials = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
};

// Full sweep. `threads` = 0 means hardware concurrency. Trials are
// partitioned statically and written to a per-trial slot; the aggregation
// pass runs in trial order, so the result does not depend on the worker
// count.
inline SweepResult run_sweep(const ExperimentConfig& cfg, std::size_t threads = 0) {
    validate_config(cfg);
    if (std::abs(*cfg.F_true) == 0.0)
        throw InvalidArg("run_sweep: relative RMSE undefined for F_true = 0");
    const CorrelationSpec spec = build_correlation(cfg);

    std::size_t nworkers = threads != 0 ? threads : std::thread::hardware_concurrency();
    if (nworkers == 0) nworkers = 1;
    nworkers = std::min<std::size_t>(nworkers, cfg.trials);

    SweepResult result;
    result.points.reserve(cfg.snr_db.size());
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
        const double P = snr_to_power(cfg, cfg.snr_db[si]);
        const TrainingPair pair = make_training(cfg.N, cfg.K, P);

        std::vector<TrialOutput> outputs(cfg.trials);
        std::vector<std::exception_ptr> errors(nworkers);
        const std::size_t chunk = (cfg.trials + nworkers - 1) / nworkers;
        std::vector<std::thread> pool;
        pool.reserve(nworkers);
        for (std::size_t w = 0; w < nworkers; ++w) {
            const std::size_t t0 = w * chunk;
            const std::size_t t1 = std::min(cfg.trials, t0 + chunk);
            pool.emplace_back([&, w, t0, t1]() {
                try {
                    for (std::size_t t = t0; t < t1; ++t)
                        outputs[t] = detail::run_trial_impl(cfg, spec, pair, si, t).out;
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (std::thread& th : pool) th.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);

        SweepPoint pt;
        pt.snr_db = cfg.snr_db[si];
        pt.trials = cfg.trials;
        double sq_ml = 0.0, sq_mm = 0.0;
        for (const TrialOutput& t : outputs) {
            if (t.ml.status == EstStatus::FInfinite || t.mm.status == EstStatus::FInfinite) {
                ++pt.f_infinite_count;
                continue;
            }
            if (t.ml.status == EstStatus::DegenerateZeroMu ||
                t.mm.status == EstStatus::DegenerateZeroMu) {
                ++pt.degenerate_count;
                continue;
            }
            sq_ml += std::norm(t.ml.F_hat - t.F_true);
            sq_mm += std::norm(t.mm.F_hat - t.F_true);
            ++pt.kept;
        }
        const double f_abs = std::abs(*cfg.F_true);
        if (pt.kept > 0) {
            pt.rmse_rel_ml = std::sqrt(sq_ml / static_cast<double>(pt.kept)) / f_abs;
            pt.rmse_rel_mm = std::sqrt(sq_mm / static_cast<double>(pt.kept)) / f_abs;
        }
        const double sigma2 =
            2.0 * static_cast<double>(cfg.N) / (P * static_cast<double>(cfg.K));
        pt.crb_rel = cfg.sigma_h2_true > 0.0
                         ? relative_crb_F(*cfg.F_true, cfg.sigma_h2_true, spec, cfg.N, sigma2)
                         : std::numeric_limits<double>::infinity();
        result.points.push_back(pt);
    }
    return result;
}

}  // namespace impest
