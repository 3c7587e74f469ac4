#include <CLI11.hpp>

#include "dpt/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Optimal delay-power tradeoff solver for a single transmission queue"};
    app.require_subcommand(1);

    dpt::cli::RunManifest manifest;
    std::vector<double> pth, mu;
    std::uint64_t seed = 0;
    long long horizon = 0;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", manifest.config_path, "model/run config (JSON)")
            ->required();
        cmd->add_option("--out", manifest.out_path, "output file (default stdout)");
        cmd->add_option("--format", manifest.format, "csv|doc")
            ->check(CLI::IsMember({"csv", "doc"}));
    };

    CLI::App* curve = app.add_subcommand("curve", "trace the optimal tradeoff curve");
    add_common(curve);

    CLI::App* lp = app.add_subcommand("lp", "optimal delay per power budget via the LP");
    add_common(lp);
    CLI::Option* lp_pth = lp->add_option("--pth", pth, "power budget list (overrides config)");
    lp->add_option("--dump-lp", manifest.lp_dump_path, "dump the LP in sparse triplet form");

    CLI::App* validate = app.add_subcommand("validate", "cross-validate curve, LP and simulation");
    add_common(validate);
    validate->add_option("--curve", manifest.curve_path, "validate this curve doc instead of tracing");
    CLI::Option* va_seed = validate->add_option("--seed", seed, "simulation seed override");
    CLI::Option* va_hor = validate->add_option("--horizon", horizon, "simulation horizon override");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo check of constrained policies");
    add_common(simulate);
    CLI::Option* sim_pth = simulate->add_option("--pth", pth, "power budget list (overrides config)");
    CLI::Option* sim_seed = simulate->add_option("--seed", seed, "seed override");
    CLI::Option* sim_hor = simulate->add_option("--horizon", horizon, "horizon override");

    CLI::App* iterate = app.add_subcommand("iterate", "Lagrangian policy iteration over a mu grid");
    add_common(iterate);
    CLI::Option* it_mu = iterate->add_option("--mu", mu, "multiplier list (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : dpt::cli::kExitUsage;
    }

    manifest.subcommand = app.get_subcommands().front()->get_name();
    if ((lp_pth && lp_pth->count()) || (sim_pth && sim_pth->count())) manifest.pth_override = pth;
    if (it_mu && it_mu->count()) manifest.mu_override = mu;
    if ((va_seed && va_seed->count()) || (sim_seed && sim_seed->count()))
        manifest.seed_override = seed;
    if ((va_hor && va_hor->count()) || (sim_hor && sim_hor->count()))
        manifest.horizon_override = horizon;

    return dpt::cli::run(manifest);
}
