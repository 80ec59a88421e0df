#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "impest/montecarlo.hpp"
#include "test_support.hpp"

using impest::cplx;
using impest::ExperimentConfig;
using impest::SweepResult;
using impest::TrialOutput;

namespace {

ExperimentConfig base_config() {
    ExperimentConfig cfg;
    cfg.N = 4;
    cfg.K = 16;
    cfg.L = 5;
    cfg.snr_db = {10.0, 20.0};
    cfg.F_true = cplx{1.0, 0.0};
    cfg.fading = impest::FadingModel::Clarke;
    cfg.v_kmh = 50.0;
    cfg.trials = 64;
    cfg.master_seed = 7;
    return cfg;
}

bool points_identical(const SweepResult& a, const SweepResult& b) {
    if (a.points.size() != b.points.size()) return false;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        const auto& pa = a.points[i];
        const auto& pb = b.points[i];
        if (pa.rmse_rel_ml != pb.rmse_rel_ml) return false;   // bit-exact on purpose
        if (pa.rmse_rel_mm != pb.rmse_rel_mm) return false;
        if (pa.crb_rel != pb.crb_rel) return false;
        if (pa.f_infinite_count != pb.f_infinite_count) return false;
        if (pa.degenerate_count != pb.degenerate_count) return false;
        if (pa.kept != pb.kept) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("run_trial determinism and identities") {
    const ExperimentConfig cfg = base_config();

    SECTION("same indices give bit-identical estimates") {
        const TrialOutput a = impest::run_trial(cfg, 1, 17);
        const TrialOutput b = impest::run_trial(cfg, 1, 17);
        REQUIRE(a.ml.F_hat == b.ml.F_hat);
        REQUIRE(a.ml.mu_hat == b.ml.mu_hat);
        REQUIRE(a.mm.F_hat == b.mm.F_hat);
        const TrialOutput c = impest::run_trial(cfg, 1, 18);
        REQUIRE(a.ml.F_hat != c.ml.F_hat);  // distinct stream
    }

    SECTION("zero-noise debug mode recovers the truth with both estimators") {
        ExperimentConfig zn = cfg;
        zn.F_true = cplx{0.6, -1.1};
        zn.zero_noise = true;
        const TrialOutput t = impest::run_trial(zn, 0, 3);
        REQUIRE(std::abs(t.ml.F_hat - *zn.F_true) < 1e-12);
        REQUIRE(std::abs(t.mm.F_hat - *zn.F_true) < 1e-12);
    }

    SECTION("iid trials: ML and MM coincide") {
        ExperimentConfig iid = cfg;
        iid.fading = impest::FadingModel::Iid;
        for (std::size_t t = 0; t < 10; ++t) {
            const TrialOutput out = impest::run_trial(iid, 1, t);
            REQUIRE(std::abs(out.ml.F_hat - out.mm.F_hat) <=
                    1e-9 * (1.0 + std::abs(out.mm.F_hat)));
        }
    }

    SECTION("config validation") {
        ExperimentConfig bad = cfg;
        bad.F_true.reset();
        REQUIRE_THROWS_AS(impest::run_trial(bad, 0, 0), impest::InvalidArg);
        bad = cfg;
        bad.snr_db.clear();
        REQUIRE_THROWS_AS(impest::run_trial(bad, 0, 0), impest::InvalidArg);
        bad = cfg;
        bad.K = 6;  // K/2 < N
        REQUIRE_THROWS_AS(impest::run_trial(bad, 0, 0), impest::InvalidArg);
    }
}

TEST_CASE("run_sweep") {
    SECTION("zero-noise single trial has zero RMSE") {
        ExperimentConfig cfg = base_config();
        cfg.trials = 1;
        cfg.snr_db = {20.0};
        cfg.zero_noise = true;
        const SweepResult r = impest::run_sweep(cfg);
        REQUIRE(r.points.size() == 1);
        REQUIRE(r.points[0].rmse_rel_ml == 0.0);
        REQUIRE(r.points[0].rmse_rel_mm == 0.0);
        REQUIRE(r.points[0].kept == 1);
    }

    SECTION("bit-identical across worker counts") {
        const ExperimentConfig cfg = base_config();
        const SweepResult r1 = impest::run_sweep(cfg, 1);
        const SweepResult r2 = impest::run_sweep(cfg, 2);
        const SweepResult r8 = impest::run_sweep(cfg, 8);
        REQUIRE(points_identical(r1, r2));
        REQUIRE(points_identical(r1, r8));
    }

    SECTION("relative RMSE undefined for F_true = 0") {
        ExperimentConfig cfg = base_config();
        cfg.F_true = cplx{0.0, 0.0};
        REQUIRE_THROWS_AS(impest::run_sweep(cfg), impest::InvalidArg);
    }

    SECTION("RMSE decreases with SNR and stays above the CRB", "[mc]") {
        ExperimentConfig cfg = base_config();
        cfg.L = 6;
        cfg.N = 2;
        cfg.K = 8;
        cfg.snr_db = {0.0, 10.0, 20.0, 30.0};
        cfg.trials = 800;
        const SweepResult r = impest::run_sweep(cfg);
        for (std::size_t i = 0; i + 1 < r.points.size(); ++i) {
            const double cur_db = 20.0 * std::log10(r.points[i].rmse_rel_ml);
            const double next_db = 20.0 * std::log10(r.points[i + 1].rmse_rel_ml);
            REQUIRE(next_db < cur_db + 0.3);  // monotone within Monte Carlo error
        }
        for (const auto& p : r.points) {
            const double rmse_db = 20.0 * std::log10(p.rmse_rel_ml);
            const double crb_db = 20.0 * std::log10(p.crb_rel);
            REQUIRE(rmse_db >= crb_db - 0.3);
        }
    }

    SECTION("degenerate debug config counts trials instead of scoring them") {
        ExperimentConfig cfg = base_config();
        cfg.sigma_h2_true = 0.0;  // no channel at all
        cfg.zero_noise = true;
        cfg.snr_db = {20.0};
        cfg.trials = 4;
        const SweepResult r = impest::run_sweep(cfg);
        REQUIRE(r.points[0].degenerate_count == 4);
        REQUIRE(r.points[0].kept == 0);
        REQUIRE(r.points[0].rmse_rel_ml == 0.0);
    }
}
