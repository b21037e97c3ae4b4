// Command-line driver: solve steady states, simulate panels, run the
// panel regressions, compare economies, and run prize-structure
// experiments, all from INI config files.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lotecon/checkpoint.hpp"
#include "lotecon/config_io.hpp"
#include "lotecon/econometrics.hpp"
#include "lotecon/equilibrium.hpp"
#include "lotecon/hash.hpp"
#include "lotecon/reports.hpp"
#include "lotecon/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lotecon;

namespace {

std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::string default_out_dir() {
    const char* env = std::getenv("LOTECON_OUT_DIR");
    return env && *env ? env : "out";
}

struct Manifest {
    std::string command;
    std::string config_path;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string started;
    std::vector<std::string> outputs;

    void write(const fs::path& dir) const {
        json j;
        j["command"] = command;
        j["config"] = config_path;
        j["config_hash"] = config_hash;
        j["seed"] = seed;
        j["started"] = started;
        j["finished"] = now_iso8601();
        j["outputs"] = outputs;
        std::ofstream f(dir / "manifest.json");
        f << j.dump(2) << "\n";
    }
};

struct NumericOverrides {
    double kl_tol = 0.0, tau_tol = 0.0, vfi_tol = 0.0, dist_tol = 0.0;

    void apply(ModelConfig& cfg) const {
        if (kl_tol > 0.0) cfg.numerics.kl_tol = kl_tol;
        if (tau_tol > 0.0) cfg.numerics.tau_tol = tau_tol;
        if (vfi_tol > 0.0) cfg.numerics.vfi_tol = vfi_tol;
        if (dist_tol > 0.0) cfg.numerics.dist_tol = dist_tol;
    }
    void add_flags(CLI::App* cmd) {
        cmd->add_option("--kl-tol", kl_tol, "override the capital-labor clearing tolerance");
        cmd->add_option("--tau-tol", tau_tol, "override the lottery revenue tolerance");
        cmd->add_option("--vfi-tol", vfi_tol, "override the value function tolerance");
        cmd->add_option("--dist-tol", dist_tol, "override the distribution tolerance");
    }
};

void write_solve_reports(const Equilibrium& eq, const fs::path& out, Manifest& man) {
    auto add = [&](const fs::path& p) { man.outputs.push_back(p.string()); };
    write_moments_csv(eq.moments, (out / "moments.csv").string());
    add(out / "moments.csv");
    write_text_file(moments_text(eq.moments, eq.config.has_lottery() ? "lottery economy moments"
                                                                     : "benchmark economy moments"),
                    (out / "moments.txt").string());
    add(out / "moments.txt");
    write_theta_table_csv(eq.moments, (out / "theta_table.csv").string());
    add(out / "theta_table.csv");
    write_ability_composition_csv(eq, (out / "ability_composition.csv").string());
    add(out / "ability_composition.csv");
    write_investment_by_asset_csv(eq, (out / "investment_by_asset.csv").string());
    add(out / "investment_by_asset.csv");
    write_asset_density_csv(eq, (out / "asset_density_by_occupation.csv").string());
    add(out / "asset_density_by_occupation.csv");
    if (eq.config.has_lottery()) {
        write_prize_leverage_csv(eq.moments, (out / "leverage_by_prize.csv").string());
        add(out / "leverage_by_prize.csv");
        write_policy_by_winning_csv(eq, (out / "policy_by_winning_status.csv").string());
        add(out / "policy_by_winning_status.csv");
        write_investment_by_prize_csv(eq, (out / "investment_by_prize.csv").string());
        add(out / "investment_by_prize.csv");
    }
}

Equilibrium run_solve(ModelConfig cfg, const std::string& economy, std::uint64_t source_hash,
                      const fs::path& out, bool quiet, const std::string& resume) {
    if (economy == "benchmark") cfg.lottery.reset();
    else if (economy == "lottery" && !cfg.has_lottery())
        throw ValidationError("--economy lottery requires a [lottery] section in the config");

    EquilibriumHooks hooks;
    if (!quiet)
        hooks.on_log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
    hooks.on_outer_iterate = [&](const Equilibrium& eq, int) {
        checkpoint::save(eq, (out / "checkpoint_iter.bin").string(), source_hash);
    };
    ValueTables warm;
    const ValueTables* warm_ptr = nullptr;
    if (!resume.empty()) {
        checkpoint::Loaded prev = checkpoint::load(resume);
        if (!prev.eq.grid.same_axes(StateGrid::build(cfg)))
            throw ValidationError("--resume checkpoint has incompatible grids");
        if (cfg.has_lottery() && prev.eq.config.has_lottery()) cfg.lottery->tau = prev.eq.tau;
        warm = std::move(prev.eq.values);
        warm_ptr = &warm;
    }
    return cfg.has_lottery() ? solve_lottery(cfg, hooks, warm_ptr)
                             : solve_benchmark(cfg, hooks, warm_ptr);
}

void write_panel_outputs(const Panel& panel, const Equilibrium& eq, std::uint64_t source_hash,
                         const fs::path& out, Manifest& man) {
    write_panel_csv(panel, eq.grid, (out / "panel.csv").string());
    man.outputs.push_back((out / "panel.csv").string());
    write_panel_series_csv(panel, (out / "panel_series.csv").string());
    man.outputs.push_back((out / "panel_series.csv").string());
    json meta;
    meta["seed"] = panel.sim.rng_seed;
    meta["n_households"] = panel.sim.n_households;
    meta["n_periods"] = panel.sim.n_periods;
    meta["endowment"] = panel.endowment;
    meta["source_config_hash"] = hex64(source_hash);
    meta["resolved_config_hash"] = content_hash(eq.config.canonical_text());
    meta["prizes"] = eq.grid.prizes;
    meta["columns"] = "id,t,a_lag,eta,theta,psi,occupation,c,a_next,k; eta/theta are grid values; "
                      "occupation 0=worker 1=entrepreneur; k is 0 for workers; a_lag is the "
                      "beginning-of-period asset one period back";
    std::ofstream mf(out / "panel_meta.json");
    mf << meta.dump(2) << "\n";
    man.outputs.push_back((out / "panel_meta.json").string());
}

int cmd_solve(const std::string& config_path, const std::string& economy, const std::string& out_dir,
              const NumericOverrides& num, bool quiet, const std::string& resume) {
    ModelConfig cfg = load_config_file(config_path);
    num.apply(cfg);
    std::uint64_t source_hash = fnv1a64(cfg.canonical_text());
    fs::path out(out_dir);
    fs::create_directories(out);
    Manifest man{"solve", config_path, hex64(source_hash), 0, now_iso8601(), {}};
    Equilibrium eq = run_solve(cfg, economy, source_hash, out, quiet, resume);
    checkpoint::save(eq, (out / "checkpoint.bin").string(), source_hash);
    man.outputs.push_back((out / "checkpoint.bin").string());
    write_solve_reports(eq, out, man);
    man.write(out);
    std::printf("solved: r=%.6f w=%.6f K/L=%.6f", eq.prices.r, eq.prices.w, eq.k_over_l);
    if (eq.config.has_lottery())
        std::printf(" tau=%.6f (%.4f%% of output)", eq.tau, eq.moments.tau_output_share * 100.0);
    std::printf("\n%s", moments_text(eq.moments, "moments").c_str());
    if (eq.top_asset_mass > 0.01)
        std::fprintf(stderr, "warning: %.2f%% of mass sits at the top asset grid point; "
                             "consider a larger assets.max\n", eq.top_asset_mass * 100.0);
    return 0;
}

int cmd_simulate(const std::string& ckpt_path, const std::string& config_path, std::uint64_t seed,
                 std::int64_t households, int periods, const std::string& out_dir) {
    checkpoint::Loaded L = checkpoint::load(ckpt_path);
    if (!config_path.empty()) {
        ModelConfig check = load_config_file(config_path);
        std::uint64_t h = fnv1a64(check.canonical_text());
        if (h != L.source_config_hash)
            throw ValidationError("checkpoint/config mismatch: checkpoint was solved from config "
                                  "hash " + hex64(L.source_config_hash) + ", provided config hashes to " +
                                  hex64(h));
    }
    SimConfig sim;
    sim.rng_seed = seed;
    sim.n_households = households;
    sim.n_periods = periods;
    fs::path out(out_dir);
    fs::create_directories(out);
    Manifest man{"simulate", ckpt_path, hex64(L.source_config_hash), seed, now_iso8601(), {}};
    Panel panel = run_simulation(sim, L.eq);
    write_panel_outputs(panel, L.eq, L.source_config_hash, out, man);
    man.write(out);
    std::printf("simulated %lld households over %d periods; terminal mean assets %.4f, "
                "entrepreneur fraction %.4f\n",
                static_cast<long long>(sim.n_households), sim.n_periods,
                panel.series.back().mean_assets, panel.series.back().entrepreneur_fraction);
    return 0;
}

int cmd_regress(const std::string& panel_path, const std::string& out_dir, bool no_intercept) {
    PanelRegressionData data = regression_data_from_csv(panel_path);
    auto results = run_panel_regressions(data, !no_intercept);
    fs::path out(out_dir);
    fs::create_directories(out);
    Manifest man{"regress", panel_path, "", 0, now_iso8601(), {}};
    write_regression_csv(results, (out / "regressions.csv").string());
    man.outputs.push_back((out / "regressions.csv").string());
    std::string table = regression_table_text(results);
    write_text_file(table, (out / "regressions.txt").string());
    man.outputs.push_back((out / "regressions.txt").string());
    man.write(out);
    std::fputs(table.c_str(), stdout);
    return 0;
}

int cmd_compare(const std::string& base_path, const std::string& other_path,
                const std::string& out_dir) {
    checkpoint::Loaded a = checkpoint::load(base_path);
    checkpoint::Loaded b = checkpoint::load(other_path);
    DeltaReport rep = compare_steady_states(a.eq, b.eq);
    fs::path out(out_dir);
    fs::create_directories(out);
    Manifest man{"compare", base_path + "," + other_path, "", 0, now_iso8601(), {}};
    write_delta_csv(rep, (out / "deltas.csv").string());
    man.outputs.push_back((out / "deltas.csv").string());
    std::string txt = delta_text(rep, "base", "other");
    write_text_file(txt, (out / "deltas.txt").string());
    man.outputs.push_back((out / "deltas.txt").string());
    man.write(out);
    std::fputs(txt.c_str(), stdout);
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
                   std::int64_t households, int periods, const NumericOverrides& num, bool quiet) {
    ModelConfig cfg = load_config_file(config_path);
    num.apply(cfg);
    if (!cfg.has_lottery())
        throw ValidationError("experiment: config must define a lottery prize structure");
    double payout = cfg.lottery->expected_payout();
    if (std::fabs(payout - cfg.lottery->tau) > 5e-4)
        throw ValidationError("experiment: prize structure is unbalanced: expected payout " +
                              std::to_string(payout) + " vs ticket price " +
                              std::to_string(cfg.lottery->tau));
    std::uint64_t source_hash = fnv1a64(cfg.canonical_text());
    fs::path out(out_dir);
    fs::create_directories(out);
    Manifest man{"experiment", config_path, hex64(source_hash), seed, now_iso8601(), {}};
    Equilibrium eq = run_solve(cfg, "auto", source_hash, out, quiet, "");
    checkpoint::save(eq, (out / "checkpoint.bin").string(), source_hash);
    man.outputs.push_back((out / "checkpoint.bin").string());
    write_solve_reports(eq, out, man);
    SimConfig sim;
    sim.rng_seed = seed;
    sim.n_households = households;
    sim.n_periods = periods;
    Panel panel = run_simulation(sim, eq);
    write_panel_outputs(panel, eq, source_hash, out, man);
    auto results = run_panel_regressions(regression_data_from_panel(panel));
    write_regression_csv(results, (out / "regressions.csv").string());
    man.outputs.push_back((out / "regressions.csv").string());
    std::string table = regression_table_text(results);
    write_text_file(table, (out / "regressions.txt").string());
    man.outputs.push_back((out / "regressions.txt").string());
    man.write(out);
    std::fputs(table.c_str(), stdout);
    return 0;
}

int cmd_report(const std::string& ckpt_path, const std::string& out_dir) {
    checkpoint::Loaded L = checkpoint::load(ckpt_path);
    fs::path out(out_dir);
    fs::create_directories(out);
    Manifest man{"report", ckpt_path, hex64(L.source_config_hash), 0, now_iso8601(), {}};
    write_solve_reports(L.eq, out, man);
    man.write(out);
    std::fputs(moments_text(L.eq.moments, "moments").c_str(), stdout);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"general-equilibrium solver, panel simulator, and regression harness for an "
                 "incomplete-markets economy with occupational choice and a lottery sector"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker thread count (0 = library default)");

    std::string config_path, out_dir = default_out_dir(), economy = "auto", resume;
    bool quiet = false;
    NumericOverrides num;

    auto* solve = app.add_subcommand("solve", "solve a steady state from a config");
    solve->add_option("config", config_path, "model config file")->required();
    solve->add_option("--economy", economy, "benchmark, lottery, or auto (from config)")
        ->check(CLI::IsMember({"benchmark", "lottery", "auto"}));
    solve->add_option("--out", out_dir, "output directory");
    solve->add_option("--resume", resume, "warm-start from a previous checkpoint");
    solve->add_flag("--quiet", quiet, "suppress iteration logging");
    num.add_flags(solve);

    std::string ckpt_path, sim_config;
    std::uint64_t seed = 1;
    std::int64_t households = 400000;
    int periods = 200;
    auto* simulate = app.add_subcommand("simulate", "simulate a household panel from a checkpoint");
    simulate->add_option("checkpoint", ckpt_path, "equilibrium checkpoint")->required();
    simulate->add_option("--config", sim_config, "cross-check config against the checkpoint");
    simulate->add_option("--seed", seed, "rng seed");
    simulate->add_option("--households", households, "panel size");
    simulate->add_option("--periods", periods, "periods to simulate");
    simulate->add_option("--out", out_dir, "output directory");

    std::string panel_path;
    bool no_intercept = false;
    auto* regress = app.add_subcommand("regress", "run the panel regressions on a panel CSV");
    regress->add_option("panel", panel_path, "panel CSV")->required();
    regress->add_option("--out", out_dir, "output directory");
    regress->add_flag("--no-intercept", no_intercept,
                      "estimate without an intercept (as the equations are written)");

    std::string base_path, other_path;
    auto* compare = app.add_subcommand("compare", "compare two solved steady states");
    compare->add_option("base", base_path, "baseline checkpoint")->required();
    compare->add_option("other", other_path, "comparison checkpoint")->required();
    compare->add_option("--out", out_dir, "output directory");

    auto* experiment =
        app.add_subcommand("experiment", "solve + simulate + regress for a prize structure");
    experiment->add_option("config", config_path, "model config file")->required();
    experiment->add_option("--out", out_dir, "output directory");
    experiment->add_option("--seed", seed, "rng seed");
    experiment->add_option("--households", households, "panel size");
    experiment->add_option("--periods", periods, "periods to simulate");
    experiment->add_flag("--quiet", quiet, "suppress iteration logging");
    num.add_flags(experiment);

    auto* report = app.add_subcommand("report", "re-emit moment tables and figure data");
    report->add_option("checkpoint", ckpt_path, "equilibrium checkpoint")->required();
    report->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);
    set_thread_count(threads);

    try {
        if (solve->parsed()) return cmd_solve(config_path, economy, out_dir, num, quiet, resume);
        if (simulate->parsed())
            return cmd_simulate(ckpt_path, sim_config, seed, households, periods, out_dir);
        if (regress->parsed()) return cmd_regress(panel_path, out_dir, no_intercept);
        if (compare->parsed()) return cmd_compare(base_path, other_path, out_dir);
        if (experiment->parsed())
            return cmd_experiment(config_path, out_dir, seed, households, periods, num, quiet);
        if (report->parsed()) return cmd_report(ckpt_path, out_dir);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
