// impest: ML / MM front-end parameter estimation experiments.
//
//   impest sweep --config cfg.ini --out sweep.csv [--set key=value]...
//   impest crb   --config cfg.ini --out crb.csv
//   impest trial --config cfg.ini [--out report.txt]

#include <CLI11.hpp>
#include <string>

#include "impest/cli.hpp"

namespace {

void add_common_options(CLI::App* sub, impest::CliConfig& cli, bool out_required) {
    sub->add_option("--config", cli.config_path, "key = value config file")->required();
    auto* out = sub->add_option("--out", cli.output_path, "output path");
    if (out_required) out->required();
    sub->add_option("--set", cli.overrides, "override config key (key=value, last wins)");
    sub->add_option("--threads", cli.threads, "worker threads (0 = auto)");
    sub->add_option("--seed", cli.seed, "override the master seed");
    sub->add_flag("--zero-noise", cli.zero_noise, "disable the noise draw (debug)");
    sub->add_flag("--dump-config", cli.dump_config, "print the effective config and exit");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"training-based estimation of the receive front-end parameter F and channel "
                 "power under correlated Rayleigh fading"};
    app.require_subcommand(1);

    impest::CliConfig cli;
    CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo RMSE sweep vs CRB (CSV)");
    add_common_options(sweep, cli, true);
    CLI::App* crb = app.add_subcommand("crb", "FIM / relative CRB table (CSV)");
    add_common_options(crb, cli, true);
    CLI::App* trial = app.add_subcommand("trial", "single seeded trial report");
    add_common_options(trial, cli, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return impest::kExitConfig;
    }

    if (sweep->parsed()) return impest::cmd_sweep(cli);
    if (crb->parsed()) return impest::cmd_crb(cli);
    return impest::cmd_trial(cli);
}
