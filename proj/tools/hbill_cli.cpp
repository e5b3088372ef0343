#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbill/analysis.hpp"
#include "hbill/io.hpp"

namespace {

using namespace hbill;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("DR_SEED")) return std::strtoull(env, nullptr, 10);
    return 1;
}

double wall_ms(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct SolveArgs {
    std::string game_path;
    std::string out_prefix = "solve";
    std::string algorithm = "cbrd";
    double eps_stop = 1e-3;
    int k_max = 10000;
    std::optional<double> gamma;
    bool history = false;
    bool serial = false;
};

int cmd_solve(const SolveArgs& args, bool centralized) {
    const GameInstance game = io::load_game(args.game_path);
    SolverConfig cfg;
    cfg.eps_stop = args.eps_stop;
    cfg.k_max = args.k_max;
    if (args.gamma) cfg.gamma = *args.gamma;
    cfg.record_history = args.history;
    cfg.parallel = !args.serial;

    SolveReport rep;
    if (centralized)
        rep = solve_optimal(game, cfg);
    else if (args.algorithm == "sird")
        rep = solve_sird(game, default_start(game), cfg);
    else
        rep = solve_cbrd(game, default_start(game), cfg);

    io::write_profile_csv(args.out_prefix + ".profile.csv", rep.profile);
    io::save_json(args.out_prefix + ".report.json", nlohmann::json(rep));
    if (args.history) io::write_history_csv(args.out_prefix + ".history.csv", rep);

    std::cout << (centralized ? "optimal" : args.algorithm) << ": iterations=" << rep.iterations
              << " residual=" << io::format_number(rep.final_residual)
              << " social_cost=" << io::format_number(social_cost(game, rep.profile))
              << (rep.converged ? " converged" : " NOT converged") << '\n';
    return rep.converged ? 0 : 2;
}

int cmd_poa(const std::string& game_path, bool empirical, const std::string& out_path) {
    const GameInstance game = io::load_game(game_path);
    PoaBoundReport rep = poa_bound(game);

    std::printf("%3s %10s %10s %10s %10s\n", "t", "alpha", "beta", "Lbar", "phi");
    for (int t = 0; t < game.periods(); ++t) {
        const auto& p = game.prices.affine_at(t);
        std::printf("%3d %10.4g %10.4g %10.4g %10.4g\n", t, p.alpha, p.beta, rep.lbar[t],
                    rep.phi[t]);
    }
    std::printf("t0=%d  condition(8)=%s  bound Eq.(9)=%.6g  bound Eq.(10)=%.6g\n", rep.t0,
                rep.condition_holds ? "holds" : "VIOLATED", rep.bound_tight,
                rep.bound_simplified);

    if (empirical) {
        const LoadProfile ne = reference_ne(game);
        SolverConfig ocfg;
        ocfg.eps_stop = 1e-6;
        ocfg.k_max = 200000;
        const auto opt = solve_optimal(game, ocfg);
        rep.empirical_poa = empirical_poa(game, ne, opt.profile);
        std::printf("empirical PoA=%.6g\n", rep.empirical_poa);
    }
    if (!out_path.empty()) io::save_json(out_path, nlohmann::json(rep));
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 const std::optional<std::uint64_t>& seed_flag) {
    const nlohmann::json j = io::load_json(config_path);
    CampaignConfig cfg = j.get<CampaignConfig>();
    if (seed_flag)
        cfg.seed = *seed_flag;
    else if (!j.contains("seed")) {
        if (const char* env = std::getenv("DR_SEED"))
            cfg.seed = std::strtoull(env, nullptr, 10);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const CampaignResult res = run_campaign(cfg);

    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    io::write_campaign_csv((dir / "campaign.csv").string(), res);
    io::write_hourly_csv((dir / "hourly.csv").string(), res);

    std::printf("%-20s %14s %12s %10s\n", "scenario", "mean SC ($)", "avg $/kWh", "gain %");
    for (const auto& a : res.aggregates)
        std::printf("%-20s %14.6g %12.6g %10.6g\n", to_string(a.kind), a.mean_social_cost,
                    a.avg_price, a.gain_pct);
    std::printf("%d day(s) in %.1f ms -> %s\n", cfg.days, wall_ms(t0), out_dir.c_str());
    return 0;
}

int cmd_forecast_fit(const std::string& history_path, const std::string& out_path) {
    std::ifstream in(history_path);
    if (!in) throw std::runtime_error("cannot open '" + history_path + "'");
    std::vector<std::pair<int, double>> history;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string hour_s, kw_s;
        if (!std::getline(ss, hour_s, ',') || !std::getline(ss, kw_s))
            throw std::invalid_argument("row " + std::to_string(row) +
                                        ": expected 2 columns (hour,kw)");
        if (row == 1 && (hour_s == "hour" || hour_s == "timestamp")) continue;
        try {
            history.emplace_back(static_cast<int>(std::stoll(hour_s) % kHoursPerWeek),
                                 std::stod(kw_s));
        } catch (const std::exception&) {
            throw std::invalid_argument("row " + std::to_string(row) + ": non-numeric value");
        }
    }
    const ForecastModel model = fit(history);
    io::save_json(out_path, nlohmann::json(model));
    std::printf("fit: %zu observations -> m=%.6g sigma=%.6g (%s)\n", history.size(), model.m,
                model.sigma, out_path.c_str());
    return 0;
}

int cmd_bench(const std::vector<int>& n_list, int periods, double eps, std::uint64_t seed,
              const std::string& out_path) {
    std::ostringstream csv;
    csv << "section,algorithm,N,T,iterations,updates,wall_ms\n";

    // CBRD vs SIRD iteration growth on uniform-price instances (the
    // crossover experiment).
    for (int N : n_list) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(N)));
        const GameInstance g = random_windowed_instance(N, periods, {1.0, 1.0}, {0.3, 0.3}, rng);
        const auto x0 = default_start(g);
        SolverConfig cfg;
        cfg.eps_stop = eps;
        cfg.k_max = 200000;

        auto t0 = std::chrono::steady_clock::now();
        const auto cb = solve_cbrd(g, x0, cfg);
        const double cb_ms = wall_ms(t0);
        t0 = std::chrono::steady_clock::now();
        const auto si = solve_sird(g, x0, cfg);
        const double si_ms = wall_ms(t0);

        csv << "crossover,cbrd," << N << ',' << periods << ',' << cb.iterations << ','
            << static_cast<long long>(cb.iterations) * N << ',' << io::format_number(cb_ms)
            << '\n';
        csv << "crossover,sird," << N << ',' << periods << ',' << si.iterations << ','
            << static_cast<long long>(si.iterations) * N << ',' << io::format_number(si_ms)
            << '\n';
        std::printf("N=%3d T=%d: CBRD %d sweeps (%.1f ms)  SIRD %d iters (%.1f ms)\n", N,
                    periods, cb.iterations, cb_ms, si.iterations, si_ms);
    }

    // Parallel SIRD kernel vs the serial reference on one larger instance,
    // fixed iteration count for a like-for-like comparison.
    {
        const int N = std::max(64, n_list.empty() ? 64 : n_list.back());
        const int T = 24;
        Rng rng(mix_seed(seed, 0xBE7C));
        const GameInstance g = random_windowed_instance(N, T, {1.0, 1.0}, {0.3, 0.3}, rng);
        const auto x0 = default_start(g);
        SolverConfig cfg;
        cfg.eps_stop = 1e-300;  // run the full budget
        cfg.k_max = 300;
        for (const bool parallel : {false, true}) {
            cfg.parallel = parallel;
            const auto t0 = std::chrono::steady_clock::now();
            const auto rep = solve_sird(g, x0, cfg);
            const double ms = wall_ms(t0);
            csv << "sird_kernel," << (parallel ? "parallel" : "serial") << ',' << N << ',' << T
                << ',' << rep.iterations << ',' << static_cast<long long>(rep.iterations) * N
                << ',' << io::format_number(ms) << '\n';
            std::printf("SIRD %s kernel: N=%d T=%d %d iters in %.1f ms\n",
                        parallel ? "parallel" : "serial  ", N, T, rep.iterations, ms);
        }
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
        out << csv.str();
        std::printf("bench table -> %s\n", out_path.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hbill: hourly-billing demand-response game solver and simulator"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed_flag;
    app.add_option("--seed", seed_flag, "Seed override (fallback: DR_SEED env var)");

    SolveArgs sargs;
    auto* solve = app.add_subcommand("solve", "Nash equilibrium of a game JSON file");
    solve->add_option("--game", sargs.game_path, "GameInstance JSON path")->required();
    solve->add_option("--out-prefix", sargs.out_prefix, "Output file prefix");
    solve->add_option("--algorithm", sargs.algorithm, "cbrd or sird")
        ->check(CLI::IsMember({"cbrd", "sird"}));
    solve->add_option("--eps-stop", sargs.eps_stop, "Stopping threshold");
    solve->add_option("--k-max", sargs.k_max, "Iteration cap");
    solve->add_option("--gamma", sargs.gamma, "SIRD step size (default: a/(N M^2))");
    solve->add_flag("--history", sargs.history, "Record per-iteration history CSV");
    solve->add_flag("--serial", sargs.serial, "Disable the OpenMP kernels");

    auto* optimal = app.add_subcommand("optimal", "Centralized social-cost minimizer");
    optimal->add_option("--game", sargs.game_path, "GameInstance JSON path")->required();
    optimal->add_option("--out-prefix", sargs.out_prefix, "Output file prefix");
    optimal->add_option("--eps-stop", sargs.eps_stop, "Stopping threshold");
    optimal->add_option("--k-max", sargs.k_max, "Iteration cap");
    optimal->add_flag("--history", sargs.history, "Record per-iteration history CSV");
    optimal->add_flag("--serial", sargs.serial, "Disable the OpenMP kernels");

    std::string poa_game, poa_out;
    bool poa_empirical = false;
    auto* poa = app.add_subcommand("poa", "Price-of-anarchy bound report");
    poa->add_option("--game", poa_game, "GameInstance JSON path")->required();
    poa->add_flag("--empirical", poa_empirical, "Also solve NE and optimum for SC ratio");
    poa->add_option("--out", poa_out, "Write the report JSON here");

    std::string sim_config, sim_out_dir = ".";
    auto* simulate = app.add_subcommand("simulate", "Multi-day five-scenario campaign");
    simulate->add_option("--config", sim_config, "CampaignConfig JSON path")->required();
    simulate->add_option("--out-dir", sim_out_dir, "Directory for campaign/hourly CSVs");

    std::string fit_history, fit_out = "model.json";
    auto* ffit = app.add_subcommand("forecast-fit", "Fit the seasonal OU model from (hour,kw) CSV");
    ffit->add_option("--history", fit_history, "CSV path")->required();
    ffit->add_option("--out", fit_out, "Model JSON output path");

    std::vector<int> bench_n{5, 10, 20, 30, 50};
    int bench_t = 10;
    double bench_eps = 1e-4;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "CBRD/SIRD growth and kernel timings");
    bench->add_option("--n-list", bench_n, "Player counts");
    bench->add_option("--t", bench_t, "Periods");
    bench->add_option("--eps-stop", bench_eps, "Stopping threshold");
    bench->add_option("--out", bench_out, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (solve->parsed()) return cmd_solve(sargs, false);
        if (optimal->parsed()) return cmd_solve(sargs, true);
        if (poa->parsed()) return cmd_poa(poa_game, poa_empirical, poa_out);
        if (simulate->parsed()) return cmd_simulate(sim_config, sim_out_dir, seed_flag);
        if (ffit->parsed()) return cmd_forecast_fit(fit_history, fit_out);
        if (bench->parsed())
            return cmd_bench(bench_n, bench_t, bench_eps, resolve_seed(seed_flag), bench_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
