#include "hbill/online.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hbill {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

SolveReport solve_ne(const GameInstance& game, const OnlineConfig& cfg) {
    const auto x0 = default_start(game);
    return cfg.use_sird ? solve_sird(game, x0, cfg.solver) : solve_cbrd(game, x0, cfg.solver);
}

}  // namespace

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Uncoordinated: return "uncoordinated";
        case ScenarioKind::OfflineDR: return "offline_dr";
        case ScenarioKind::OnlineDR: return "online_dr";
        case ScenarioKind::PerfectForecastDR: return "perfect_forecast_dr";
        case ScenarioKind::Optimal: return "optimal";
    }
    return "?";
}

std::optional<ScenarioKind> scenario_from_string(std::string_view name) {
    if (name == "uncoordinated") return ScenarioKind::Uncoordinated;
    if (name == "offline_dr" || name == "offline") return ScenarioKind::OfflineDR;
    if (name == "online_dr" || name == "online") return ScenarioKind::OnlineDR;
    if (name == "perfect_forecast_dr" || name == "perfect") return ScenarioKind::PerfectForecastDR;
    if (name == "optimal") return ScenarioKind::Optimal;
    return std::nullopt;
}

GameInstance GameTemplate::instantiate(const std::vector<double>& nonflexible) const {
    if (static_cast<int>(nonflexible.size()) != grid.periods)
        throw std::invalid_argument("GameTemplate: nonflexible path length mismatch");
    GameInstance g;
    g.grid = grid;
    g.prices = derive_prices(cost, nonflexible);
    g.consumers = consumers;
    g.nonflexible = nonflexible;
    return g;
}

DayRun run_online(const GameTemplate& tmpl, const ForecastModel& model,
                  const std::vector<double>& realized_nf, const OnlineConfig& cfg) {
    const int T = tmpl.grid.periods;
    const int N = tmpl.players();
    if (static_cast<int>(realized_nf.size()) < T)
        throw std::invalid_argument("run_online: realized path shorter than the horizon");

    DayRun run;
    run.kind = ScenarioKind::OnlineDR;
    run.realized_nf.assign(realized_nf.begin(), realized_nf.begin() + T);
    run.realized = LoadProfile(N, T);
    tmpl.instantiate(run.realized_nf).validate();  // feasibility at t = 1

    std::vector<double> e_rem(N);
    for (int n = 0; n < N; ++n) e_rem[n] = tmpl.consumers[n].energy;

    std::vector<double> nf_hat;
    for (int t = 0; t < T; ++t) {
        const int Th = T - t;
        nf_hat.assign(Th, 0.0);
        nf_hat[0] = run.realized_nf[t];  // perfect forecast at s = t
        for (int s = t + 1; s < T; ++s)
            nf_hat[s - t] = forecast(model, cfg.start_hour + t, run.realized_nf[t],
                                     cfg.start_hour + s);

        GameInstance g;
        g.grid = TimeGrid{Th, tmpl.grid.period_hours};
        g.prices = derive_prices(tmpl.cost, nf_hat);
        g.nonflexible = nf_hat;
        g.consumers.resize(N);
        for (int n = 0; n < N; ++n) {
            auto& c = g.consumers[n];
            const auto& full = tmpl.consumers[n];
            c.lower.assign(full.lower.begin() + t, full.lower.end());
            c.upper.assign(full.upper.begin() + t, full.upper.end());
            const double lo = std::accumulate(c.lower.begin(), c.lower.end(), 0.0);
            const double hi = std::accumulate(c.upper.begin(), c.upper.end(), 0.0);
            double e = e_rem[n];
            if (e < lo - 10.0 * kFeasTol || e > hi + 10.0 * kFeasTol)
                throw std::runtime_error("run_online: residual demand of player " +
                                         std::to_string(n) + " infeasible at period " +
                                         std::to_string(t) + " (drift " +
                                         std::to_string(std::max(lo - e, e - hi)) + ")");
            c.energy = std::clamp(e, lo, hi);
        }

        const auto rep = solve_ne(g, cfg);
        if (cfg.record_steps) run.step_profiles.push_back(rep.profile);
        for (int n = 0; n < N; ++n) {
            const double v = rep.profile.at(n, 0);
            run.realized.at(n, t) = v;
            e_rem[n] -= v;
        }
    }

    run.social_cost = social_cost(tmpl.instantiate(run.realized_nf), run.realized);
    return run;
}

DayRun run_scenario(ScenarioKind kind, const GameTemplate& tmpl, const ForecastModel& model,
                    const std::vector<double>& realized_nf, const OnlineConfig& cfg,
                    const LoadProfile* uncoordinated, const LoadProfile* warm_start) {
    const int T = tmpl.grid.periods;
    if (static_cast<int>(realized_nf.size()) < T)
        throw std::invalid_argument("run_scenario: realized path shorter than the horizon");
    const std::vector<double> nf(realized_nf.begin(), realized_nf.begin() + T);

    if (kind == ScenarioKind::OnlineDR) {
        DayRun run = run_online(tmpl, model, nf, cfg);
        return run;
    }

    const GameInstance truth = tmpl.instantiate(nf);
    DayRun run;
    run.kind = kind;
    run.realized_nf = nf;

    switch (kind) {
        case ScenarioKind::Uncoordinated:
            if (!uncoordinated)
                throw std::invalid_argument(
                    "run_scenario: Uncoordinated needs a supplied exogenous profile");
            run.realized = *uncoordinated;
            break;
        case ScenarioKind::OfflineDR: {
            // Single NE planned at t = 1 on forecasts conditioned on the
            // first observation.
            std::vector<double> nf_hat(T);
            nf_hat[0] = nf[0];
            for (int s = 1; s < T; ++s)
                nf_hat[s] = forecast(model, cfg.start_hour, nf[0], cfg.start_hour + s);
            run.realized = solve_ne(tmpl.instantiate(nf_hat), cfg).profile;
            break;
        }
        case ScenarioKind::PerfectForecastDR:
            run.realized = solve_ne(truth, cfg).profile;
            break;
        case ScenarioKind::Optimal:
            run.realized = warm_start ? solve_optimal(truth, *warm_start, cfg.solver).profile
                                      : solve_optimal(truth, cfg.solver).profile;
            break;
        case ScenarioKind::OnlineDR:
            break;  // handled above
    }

    run.social_cost = social_cost(truth, run.realized);
    return run;
}

std::vector<ConsumerSpec> synthetic_consumers(int players, int periods, Rng& rng) {
    if (players < 1 || periods < 1)
        throw std::invalid_argument("synthetic_consumers: players and periods must be >= 1");
    static constexpr double kRatings[] = {3.3, 7.4, 11.0};
    std::vector<ConsumerSpec> out(players);
    for (auto& c : out) {
        const double rating = kRatings[rng.uniform_int(0, 2)];
        const int start = std::min<int>(rng.uniform_int(5, 11), periods - 1);
        const int len = rng.uniform_int(8, 14);
        const int end = std::min(start + len, periods);
        c.lower.assign(periods, 0.0);
        c.upper.assign(periods, 0.0);
        for (int t = start; t < end; ++t) c.upper[t] = rating;
        const double cap = rating * (end - start);
        c.energy = rng.uniform(0.3, 0.85) * cap;
        c.validate();
    }
    return out;
}

LoadProfile plug_and_charge(const std::vector<ConsumerSpec>& consumers) {
    const int N = static_cast<int>(consumers.size());
    if (N == 0) throw std::invalid_argument("plug_and_charge: no consumers");
    const int T = consumers[0].periods();
    LoadProfile x(N, T);
    for (int n = 0; n < N; ++n) {
        const auto& c = consumers[n];
        // Charge as much and as early as possible, reserving just enough
        // energy to honor later lower bounds.
        double future_lo = std::accumulate(c.lower.begin(), c.lower.end(), 0.0);
        double rem = c.energy;
        for (int t = 0; t < T; ++t) {
            future_lo -= c.lower[t];
            const double v = std::clamp(rem - future_lo, c.lower[t], c.upper[t]);
            x.at(n, t) = v;
            rem -= v;
        }
    }
    return x;
}

GameInstance random_windowed_instance(int players, int periods,
                                      std::pair<double, double> alpha_range,
                                      std::pair<double, double> beta_range, Rng& rng) {
    GameInstance g;
    g.grid = TimeGrid{periods, 1.0};
    g.prices.per_period.reserve(periods);
    for (int t = 0; t < periods; ++t) {
        AffinePrice p;
        p.alpha = rng.uniform(alpha_range.first, alpha_range.second);
        p.beta = rng.uniform(beta_range.first, beta_range.second);
        g.prices.per_period.emplace_back(p);
    }
    g.consumers.resize(players);
    for (auto& c : g.consumers) {
        const int len = rng.uniform_int(std::min(4, periods), std::min(8, periods));
        const int start = rng.uniform_int(0, periods - len);
        const double rate = rng.uniform(3.0, 10.0);
        c.lower.assign(periods, 0.0);
        c.upper.assign(periods, 0.0);
        for (int t = start; t < start + len; ++t) c.upper[t] = rate;
        c.energy = rng.uniform(0.3, 0.85) * rate * len;
    }
    g.validate();
    return g;
}

std::vector<double> default_seasonality() {
    std::vector<double> P(kHoursPerWeek);
    for (int s = 0; s < kHoursPerWeek; ++s) {
        const int hour_of_day = (12 + s) % 24;  // slot 0 is noon
        const double daily = 35.0 + 9.0 * std::cos(kTwoPi * (hour_of_day - 19) / 24.0);
        const double weekly = 1.0 + 0.05 * std::sin(kTwoPi * s / 168.0);
        P[s] = daily * weekly;
    }
    return P;
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
    if (cfg.days < 1) throw std::invalid_argument("run_campaign: days must be >= 1");
    if (cfg.scenarios.empty()) throw std::invalid_argument("run_campaign: no scenarios");

    ForecastModel model = cfg.model;
    if (model.P.empty()) {
        model.P = default_seasonality();
        if (!(model.m > 0.0)) model.m = 0.198;
        if (model.sigma <= 0.0) model.sigma = 0.117;
    }
    model.validate();

    const int T = cfg.periods;
    const auto path = simulate_path(model, cfg.days * T, mix_seed(cfg.seed, 0xDA7A));

    CampaignResult res;
    res.scenarios = cfg.scenarios;
    res.runs.assign(cfg.scenarios.size(), std::vector<DayRun>(cfg.days));

    const bool want_optimal =
        std::find(cfg.scenarios.begin(), cfg.scenarios.end(), ScenarioKind::Optimal) !=
        cfg.scenarios.end();
    std::vector<double> day_energy(cfg.days, 0.0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (cfg.parallel_days)
#endif
    for (int d = 0; d < cfg.days; ++d) {
        Rng day_rng(mix_seed(cfg.seed, 2ull * d + 1));
        GameTemplate tmpl;
        tmpl.grid = TimeGrid{T, 1.0};
        tmpl.cost = cfg.cost;
        tmpl.consumers = synthetic_consumers(cfg.players, T, day_rng);
        for (const auto& c : tmpl.consumers) day_energy[d] += c.energy;

        const std::vector<double> nf(path.begin() + static_cast<std::ptrdiff_t>(d) * T,
                                     path.begin() + static_cast<std::ptrdiff_t>(d + 1) * T);
        OnlineConfig ocfg;
        ocfg.solver = cfg.solver;
        ocfg.use_sird = cfg.use_sird;
        ocfg.start_hour = static_cast<std::int64_t>(d) * T;

        const LoadProfile unc = plug_and_charge(tmpl.consumers);

        // Non-optimal scenarios first; Optimal then warm-starts from the
        // cheapest realized profile, so its cost lower-bounds every other
        // scenario on this day by monotone descent.
        const LoadProfile* best = &unc;
        double best_sc = social_cost(tmpl.instantiate(nf), unc);
        for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
            const ScenarioKind kind = cfg.scenarios[s];
            if (kind == ScenarioKind::Optimal) continue;
            DayRun run = run_scenario(kind, tmpl, model, nf, ocfg, &unc);
            run.day = d;
            res.runs[s][d] = std::move(run);
            if (res.runs[s][d].social_cost < best_sc) {
                best_sc = res.runs[s][d].social_cost;
                best = &res.runs[s][d].realized;
            }
        }
        if (want_optimal) {
            for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
                if (cfg.scenarios[s] != ScenarioKind::Optimal) continue;
                DayRun run = run_scenario(ScenarioKind::Optimal, tmpl, model, nf, ocfg,
                                          &unc, best);
                run.day = d;
                res.runs[s][d] = std::move(run);
            }
        }
    }

    // Aggregates.
    std::optional<std::size_t> unc_idx;
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s)
        if (cfg.scenarios[s] == ScenarioKind::Uncoordinated) unc_idx = s;

    res.mean_hourly_nf.assign(T, 0.0);
    for (int d = 0; d < cfg.days; ++d)
        for (int t = 0; t < T; ++t) res.mean_hourly_nf[t] += path[d * T + t];
    for (double& v : res.mean_hourly_nf) v /= cfg.days;

    const double total_energy = std::accumulate(day_energy.begin(), day_energy.end(), 0.0);

    res.aggregates.resize(cfg.scenarios.size());
    res.mean_hourly_flexible.assign(cfg.scenarios.size(), std::vector<double>(T, 0.0));
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        double total_sc = 0.0;
        for (int d = 0; d < cfg.days; ++d) {
            total_sc += res.runs[s][d].social_cost;
            const auto agg = aggregate(res.runs[s][d].realized);
            for (int t = 0; t < T; ++t) res.mean_hourly_flexible[s][t] += agg[t];
        }
        for (double& v : res.mean_hourly_flexible[s]) v /= cfg.days;
        auto& a = res.aggregates[s];
        a.kind = cfg.scenarios[s];
        a.mean_social_cost = total_sc / cfg.days;
        a.avg_price = total_energy > 0.0 ? total_sc / total_energy
                                         : std::numeric_limits<double>::quiet_NaN();
        a.gain_pct = std::numeric_limits<double>::quiet_NaN();
    }
    if (unc_idx) {
        const double base = res.aggregates[*unc_idx].mean_social_cost;
        for (auto& a : res.aggregates)
            a.gain_pct = 100.0 * (base - a.mean_social_cost) / base;
    }
    return res;
}

}  // namespace hbill
