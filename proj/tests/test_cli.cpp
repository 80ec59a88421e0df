#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "impest/cli.hpp"
#include "impest/config.hpp"
#include "impest/crb.hpp"

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& contents = "") : path(name) {
        if (!contents.empty()) {
            std::ofstream f(path);
            f << contents;
        }
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

// Split a CSV line into fields.
std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(line);
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::string line;
    std::istringstream in(text);
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

const char* kSweepHeader =
    "snr_db,rmse_rel_ml_db,rmse_rel_mm_db,crb_rel_db,f_inf_count,degenerate_count,trials";
const char* kCrbHeader = "snr_db,crb_rel_db,fim_11,fim_22,fim_12_re,fim_12_im";

}  // namespace

TEST_CASE("kv config parsing") {
    const impest::KvConfig kv = impest::parse_kv_text(
        "# comment\n[sweep]\nL = 10\nsnr_db = 0, 10 ,20\nF_true_re=1\nF_true_im = 0\n"
        "fading = clarke\nv_kmh = 5\n");
    REQUIRE(kv.required("L") == "10");
    const impest::ExperimentConfig cfg = impest::experiment_from_kv(kv);
    REQUIRE(cfg.L == 10);
    REQUIRE(cfg.snr_db == std::vector<double>{0.0, 10.0, 20.0});
    REQUIRE(cfg.fading == impest::FadingModel::Clarke);
    REQUIRE(cfg.N == 4);  // default

    SECTION("missing keys are named in the error") {
        impest::KvConfig missing = kv;
        missing.values.erase("F_true_re");
        try {
            impest::experiment_from_kv(missing);
            FAIL("expected ConfigError");
        } catch (const impest::ConfigError& e) {
            REQUIRE(std::string(e.what()).find("F_true_re") != std::string::npos);
        }
    }

    SECTION("overrides apply last-wins") {
        impest::KvConfig over = kv;
        impest::apply_override(over, "L=4");
        impest::apply_override(over, "L=6");
        REQUIRE(impest::experiment_from_kv(over).L == 6);
        REQUIRE_THROWS_AS(impest::apply_override(over, "nonsense"), impest::ConfigError);
    }

    SECTION("malformed lines are rejected with line numbers") {
        REQUIRE_THROWS_AS(impest::parse_kv_text("key_without_value\n"), impest::ConfigError);
        REQUIRE_THROWS_AS(impest::parse_kv_text("L = ten\nsnr_db=0\n...\n"),
                          impest::ConfigError);
    }

    SECTION("dump round-trips to the same effective configuration") {
        const std::string dumped = impest::dump_experiment(cfg);
        const impest::ExperimentConfig again =
            impest::experiment_from_kv(impest::parse_kv_text(dumped));
        REQUIRE(impest::dump_experiment(again) == dumped);
        REQUIRE(again.L == cfg.L);
        REQUIRE(again.snr_db == cfg.snr_db);
        REQUIRE(*again.F_true == *cfg.F_true);
        REQUIRE(again.v_kmh == cfg.v_kmh);
    }
}

TEST_CASE("cmd_sweep") {
    SECTION("zero-noise minimal config emits the sentinel") {
        TempFile cfg("cli_zero.ini",
                     "L = 4\nsnr_db = 20\ntrials = 1\nF_true_re = 1\nF_true_im = 0\n"
                     "zero_noise = true\n");
        TempFile out("cli_zero.csv");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        cli.output_path = out.path;
        std::ostringstream sink, err;
        REQUIRE(impest::cmd_sweep(cli, sink, err) == impest::kExitOk);
        const auto ls = lines(read_file(out.path));
        REQUIRE(ls.size() == 2);
        REQUIRE(ls[0] == kSweepHeader);
        const auto f = fields(ls[1]);
        REQUIRE(f.size() == 7);
        REQUIRE(f[1] == "-999.0");
        REQUIRE(f[2] == "-999.0");
        REQUIRE(f[6] == "1");
    }

    SECTION("iid fading: ml and mm columns agree to 4 decimals") {
        TempFile cfg("cli_iid.ini",
                     "L = 10\nsnr_db = 10,20\ntrials = 60\nF_true_re = 1\nF_true_im = 0\n"
                     "fading = iid\nseed = 3\n");
        TempFile out("cli_iid.csv");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        cli.output_path = out.path;
        std::ostringstream sink, err;
        REQUIRE(impest::cmd_sweep(cli, sink, err) == impest::kExitOk);
        const auto ls = lines(read_file(out.path));
        REQUIRE(ls.size() == 3);
        for (std::size_t i = 1; i < ls.size(); ++i) {
            const auto f = fields(ls[i]);
            REQUIRE(f[1] == f[2]);  // identical at 4-decimal precision
        }
    }

    SECTION("missing required key exits 2 and names it") {
        TempFile cfg("cli_missing.ini", "L = 4\nsnr_db = 20\n");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        cli.output_path = "unused.csv";
        std::ostringstream sink, err;
        REQUIRE(impest::cmd_sweep(cli, sink, err) == impest::kExitConfig);
        REQUIRE(err.str().find("F_true_re") != std::string::npos);
    }

    SECTION("unreadable config and unwritable output") {
        impest::CliConfig cli;
        cli.config_path = "does_not_exist.ini";
        cli.output_path = "unused.csv";
        std::ostringstream sink, err;
        REQUIRE(impest::cmd_sweep(cli, sink, err) == impest::kExitConfig);

        TempFile cfg("cli_io.ini",
                     "L = 4\nsnr_db = 20\ntrials = 1\nF_true_re = 1\nF_true_im = 0\n");
        cli.config_path = cfg.path;
        cli.output_path = "no_such_dir/sweep.csv";
        std::ostringstream err2;
        REQUIRE(impest::cmd_sweep(cli, sink, err2) == impest::kExitIo);
    }

    SECTION("--set overrides and --dump-config round trip") {
        TempFile cfg("cli_dump.ini",
                     "L = 4\nsnr_db = 20\ntrials = 2\nF_true_re = 1\nF_true_im = 0\n");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        cli.overrides = {"L=8", "trials=5"};
        cli.seed = 99;
        cli.dump_config = true;
        std::ostringstream out, err;
        REQUIRE(impest::cmd_sweep(cli, out, err) == impest::kExitOk);
        const impest::ExperimentConfig cfg2 =
            impest::experiment_from_kv(impest::parse_kv_text(out.str()));
        REQUIRE(cfg2.L == 8);
        REQUIRE(cfg2.trials == 5);
        REQUIRE(cfg2.master_seed == 99);
    }
}

TEST_CASE("cmd_crb") {
    SECTION("F = 0 zeroes the off-diagonal columns") {
        TempFile cfg("cli_crb0.ini",
                     "L = 6\nsnr_db = 10,20\nF_true_re = 0\nF_true_im = 0\nfading = clarke\n"
                     "v_kmh = 50\n");
        TempFile out("cli_crb0.csv");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        cli.output_path = out.path;
        std::ostringstream sink, err;
        REQUIRE(impest::cmd_crb(cli, sink, err) == impest::kExitOk);
        const auto ls = lines(read_file(out.path));
        REQUIRE(ls[0] == kCrbHeader);
        for (std::size_t i = 1; i < ls.size(); ++i) {
            const auto f = fields(ls[i]);
            REQUIRE(std::stod(f[4]) == 0.0);
            REQUIRE(std::stod(f[5]) == 0.0);
            REQUIRE(f[1] == "-999.0");  // relative CRB undefined at F = 0
        }
    }

    SECTION("doubling L in slow fading drops crb_rel_db by about 3 dB") {
        auto crb_db_for_l = [](const std::string& l) {
            TempFile cfg("cli_crb_l" + l + ".ini",
                         "L = " + l +
                             "\nsnr_db = 20\nF_true_re = 1\nF_true_im = 0\nfading = clarke\n"
                             "v_kmh = 5\n");
            TempFile out("cli_crb_l" + l + ".csv");
            impest::CliConfig cli;
            cli.config_path = cfg.path;
            cli.output_path = out.path;
            std::ostringstream sink, err;
            REQUIRE(impest::cmd_crb(cli, sink, err) == impest::kExitOk);
            return std::stod(fields(lines(read_file(out.path))[1])[1]);
        };
        const double gap = crb_db_for_l("10") - crb_db_for_l("5");
        REQUIRE(gap == Catch::Approx(-3.0).margin(0.7));
    }

    SECTION("CSV values match the trace-formula oracle to 1e-8") {
        TempFile cfg("cli_crb_iid.ini",
                     "L = 10\nsnr_db = 20\nF_true_re = 1\nF_true_im = 0.5\nfading = iid\n");
        TempFile out("cli_crb_iid.csv");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        cli.output_path = out.path;
        std::ostringstream sink, err;
        REQUIRE(impest::cmd_crb(cli, sink, err) == impest::kExitOk);
        const auto f = fields(lines(read_file(out.path))[1]);
        const double p = std::pow(10.0, 20.0 / 10.0);
        const double s2 = 2.0 * 4.0 / (p * 16.0);
        const impest::FimResult oracle = impest::fim_general(
            impest::cplx{1.0, 0.5}, 1.0, impest::iid_correlation(10), 4, s2);
        const impest::cplx fim12 = std::conj(oracle.fim.s21);
        REQUIRE(std::stod(f[2]) == Catch::Approx(oracle.fim.s11).epsilon(1e-8));
        REQUIRE(std::stod(f[3]) == Catch::Approx(oracle.fim.s22).epsilon(1e-8));
        REQUIRE(std::stod(f[4]) == Catch::Approx(fim12.real()).epsilon(1e-8));
        REQUIRE(std::stod(f[5]) == Catch::Approx(fim12.imag()).epsilon(1e-8));
    }
}

TEST_CASE("cmd_trial") {
    SECTION("zero-noise trial reports the configured truth") {
        TempFile cfg("cli_trial.ini",
                     "L = 5\nsnr_db = 20\nF_true_re = 0.75\nF_true_im = -0.25\n"
                     "zero_noise = true\n");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        std::ostringstream out, err;
        REQUIRE(impest::cmd_trial(cli, out, err) == impest::kExitOk);
        REQUIRE(out.str().find("ml_F_hat_re: 0.75\n") != std::string::npos);
        REQUIRE(out.str().find("ml_F_hat_im: -0.25\n") != std::string::npos);
        REQUIRE(out.str().find("ml_status: Ok\n") != std::string::npos);
    }

    SECTION("all-zero observations report the degenerate status") {
        TempFile cfg("cli_trial_degen.ini",
                     "L = 5\nsnr_db = 20\nF_true_re = 1\nF_true_im = 0\nsigma_h2 = 0\n"
                     "zero_noise = true\n");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        std::ostringstream out, err;
        REQUIRE(impest::cmd_trial(cli, out, err) == impest::kExitOk);
        REQUIRE(out.str().find("ml_status: DegenerateZeroMu\n") != std::string::npos);
        REQUIRE(out.str().find("mm_status: DegenerateZeroMu\n") != std::string::npos);
    }

    SECTION("byte-identical output across runs") {
        TempFile cfg("cli_trial_det.ini",
                     "L = 6\nsnr_db = 15\nF_true_re = 1\nF_true_im = 0\nfading = clarke\n"
                     "v_kmh = 50\nseed = 31\n");
        impest::CliConfig cli;
        cli.config_path = cfg.path;
        std::ostringstream out1, out2, err;
        REQUIRE(impest::cmd_trial(cli, out1, err) == impest::kExitOk);
        REQUIRE(impest::cmd_trial(cli, out2, err) == impest::kExitOk);
        REQUIRE(out1.str() == out2.str());
        REQUIRE_FALSE(out1.str().empty());
    }
}
