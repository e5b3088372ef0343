#include "hbill/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hbill {

namespace {

std::vector<CappedSimplex> player_sets(const GameInstance& game) {
    std::vector<CappedSimplex> sets;
    sets.reserve(game.players());
    for (const auto& c : game.consumers) sets.emplace_back(c);
    return sets;
}

std::vector<double> headroom_row(const ConsumerSpec& c) {
    const int T = c.periods();
    double sum_lo = 0.0, span = 0.0;
    for (int t = 0; t < T; ++t) {
        sum_lo += c.lower[t];
        span += c.upper[t] - c.lower[t];
    }
    std::vector<double> row(c.lower);
    if (span > 0.0) {
        const double theta = (c.energy - sum_lo) / span;
        for (int t = 0; t < T; ++t) row[t] = c.lower[t] + theta * (c.upper[t] - c.lower[t]);
    }
    return row;
}

double convex_br_lipschitz(const GameInstance& game, const ConsumerSpec& c,
                           const std::vector<double>& s) {
    double lip = 0.0;
    for (int t = 0; t < c.periods(); ++t) {
        const double L = s[t] + c.upper[t];
        lip = std::max(lip, 2.0 * game.prices.first(t, L) + c.upper[t] * game.prices.second(t, L));
    }
    return std::max(lip, 1e-12);
}

void require_feasible_start(const GameInstance& game, const LoadProfile& x0,
                            const char* who) {
    if (!profile_feasible(game, x0, 10.0 * kFeasTol))
        throw std::invalid_argument(std::string(who) + ": x0 is not feasible");
}

}  // namespace

std::vector<double> best_response(const GameInstance& game, int n,
                                  const std::vector<double>& s, double br_tol) {
    if (n < 0 || n >= game.players())
        throw std::out_of_range("best_response: player index");
    const auto& c = game.consumers[n];
    c.validate();
    const int T = game.periods();
    if (static_cast<int>(s.size()) != T)
        throw std::invalid_argument("best_response: aggregate length mismatch");

    std::vector<double> out(T);
    if (game.prices.affine_increasing()) {
        // Stationarity alpha_t + beta_t s_t + 2 beta_t x_t = lam on free
        // coordinates: x_t(lam) = clamp((lam - alpha_t - beta_t s_t)/(2 beta_t)).
        std::vector<double> a(T), b(T);
        for (int t = 0; t < T; ++t) {
            const auto& p = game.prices.affine_at(t);
            a[t] = -(p.alpha + p.beta * s[t]) / (2.0 * p.beta);
            b[t] = 1.0 / (2.0 * p.beta);
        }
        detail::clamp_sum_solve(a.data(), b.data(), c.lower.data(), c.upper.data(), T,
                                c.energy, out.data());
        return out;
    }

    // General convex prices: projected gradient with fixed step 1/Lip.
    const CappedSimplex set(c);
    std::vector<double> x = project(set, headroom_row(c));
    const double step = 1.0 / convex_br_lipschitz(game, c, s);
    std::vector<double> g(T), y(T), xn(T);
    for (int it = 0; it < 100000; ++it) {
        for (int t = 0; t < T; ++t) {
            const double L = s[t] + x[t];
            g[t] = game.prices.value(t, L) + x[t] * game.prices.first(t, L);
        }
        for (int t = 0; t < T; ++t) y[t] = x[t] - step * g[t];
        project_inplace(set, y.data(), xn.data());
        double move = 0.0;
        for (int t = 0; t < T; ++t) move += (xn[t] - x[t]) * (xn[t] - x[t]);
        x = xn;
        if (std::sqrt(move) <= br_tol) break;
    }
    return x;
}

LoadProfile default_start(const GameInstance& game) {
    LoadProfile x(game.players(), game.periods());
    for (int n = 0; n < game.players(); ++n) {
        const auto row = project(CappedSimplex(game.consumers[n]), headroom_row(game.consumers[n]));
        x.set_row(n, row);
    }
    return x;
}

LoadProfile random_feasible_profile(const GameInstance& game, Rng& rng) {
    LoadProfile x(game.players(), game.periods());
    std::vector<double> draw(game.periods());
    for (int n = 0; n < game.players(); ++n) {
        const auto& c = game.consumers[n];
        for (int t = 0; t < game.periods(); ++t) draw[t] = rng.uniform(c.lower[t], c.upper[t]);
        x.set_row(n, project(CappedSimplex(c), draw));
    }
    return x;
}

SolveReport solve_cbrd(const GameInstance& game, const LoadProfile& x0,
                       const SolverConfig& cfg) {
    game.validate();
    require_feasible_start(game, x0, "solve_cbrd");
    const int N = game.players();
    const int T = game.periods();
    const bool affine = game.prices.all_affine();
    const double br_tol = cfg.eps_stop * cfg.br_tol_factor;

    SolveReport rep;
    rep.profile = x0;
    LoadProfile& x = rep.profile;
    if (cfg.record_potential_steps && affine)
        rep.potential_steps.push_back(potential(game, x));

    LoadProfile prev = x;
    std::vector<double> s(T);
    for (int k = 1; k <= cfg.k_max; ++k) {
        prev = x;
        auto agg = aggregate(x);
        for (int n = 0; n < N; ++n) {
            for (int t = 0; t < T; ++t) s[t] = agg[t] - x.at(n, t);
            const auto br = best_response(game, n, s, br_tol);
            x.set_row(n, br);
            for (int t = 0; t < T; ++t) agg[t] = s[t] + br[t];
            if (cfg.record_potential_steps && affine)
                rep.potential_steps.push_back(potential(game, x));
        }
        const double res = norm2_diff(x, prev);
        rep.iterations = k;
        rep.final_residual = res;
        if (cfg.record_history)
            rep.history.push_back({k, res, social_cost(game, x),
                                   affine ? potential(game, x)
                                          : std::numeric_limits<double>::quiet_NaN()});
        if (res < cfg.eps_stop) {
            rep.converged = true;
            break;
        }
    }
    return rep;
}

SolveReport solve_sird(const GameInstance& game, const LoadProfile& x0,
                       const SolverConfig& cfg) {
    game.validate();
    require_feasible_start(game, x0, "solve_sird");
    const int N = game.players();
    const int T = game.periods();
    const bool affine = game.prices.all_affine();

    double gamma;
    if (cfg.gamma) {
        gamma = *cfg.gamma;
        if (!(gamma > 0.0)) throw std::invalid_argument("solve_sird: gamma must be positive");
    } else {
        const auto [a, M] = stability_constants(game);  // throws for non-affine
        gamma = a / (N * M * M);
    }

    const auto sets = player_sets(game);
    SolveReport rep;
    rep.profile = x0;
    LoadProfile& x = rep.profile;
    LoadProfile xn(N, T);

    for (int k = 1; k <= cfg.k_max; ++k) {
        const auto agg = aggregate(x);
        // One projected gradient step per player from the common snapshot.
        // Rows are written disjointly from read-only state, so the parallel
        // kernel is bitwise-identical to the serial reference.
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (cfg.parallel)
#endif
        for (int n = 0; n < N; ++n) {
            std::vector<double> g(T), y(T);
            bill_gradient(game, x, agg, n, g.data());
            const double* xr = x.row(n);
            for (int t = 0; t < T; ++t) y[t] = xr[t] - gamma * g[t];
            project_inplace(sets[n], y.data(), xn.row(n));
        }
        const double res = norm2_diff(xn, x);
        x = xn;
        rep.iterations = k;
        rep.final_residual = res;
        if (cfg.record_history)
            rep.history.push_back({k, res, social_cost(game, x),
                                   affine ? potential(game, x)
                                          : std::numeric_limits<double>::quiet_NaN()});
        if (res < cfg.eps_stop) {
            rep.converged = true;
            break;
        }
    }
    return rep;
}

SolveReport solve_optimal(const GameInstance& game, const SolverConfig& cfg) {
    return solve_optimal(game, default_start(game), cfg);
}

SolveReport solve_optimal(const GameInstance& game, const LoadProfile& x0,
                          const SolverConfig& cfg) {
    game.validate();
    require_feasible_start(game, x0, "solve_optimal");
    const int N = game.players();
    const int T = game.periods();
    const auto sets = player_sets(game);

    // Gradient of SC in l_{n,t} is d_t = c_t(L_t) + L_t c_t'(L_t), the same
    // for every player, so its per-period Jacobian is the all-ones block
    // (2 c' + L c'') J with norm N times the scalar curvature. Step from that
    // bound at the aggregate upper load; backtracking halves it whenever SC
    // fails to decrease, so a coarse estimate only costs a few rejected trials.
    double lip = 0.0;
    for (int t = 0; t < T; ++t) {
        double lbar = 0.0;
        for (int n = 0; n < N; ++n) lbar += game.consumers[n].upper[t];
        lip = std::max(lip, 2.0 * game.prices.first(t, lbar) + lbar * game.prices.second(t, lbar));
    }
    const double step0 = 1.0 / std::max(N * lip, 1e-12);
    const double step_floor = step0 * 1e-16;
    double step = step0;

    SolveReport rep;
    rep.profile = x0;
    LoadProfile& x = rep.profile;
    // Clean up feasibility drift in the warm start, but leave an already
    // feasible profile untouched: descent from it must never end higher.
    if (!profile_feasible(game, x, kFeasTol)) {
        std::vector<double> tmp(T);
        for (int n = 0; n < N; ++n) {
            project_inplace(sets[n], x.row(n), tmp.data());
            std::copy(tmp.begin(), tmp.end(), x.row(n));
        }
    }
    double sc = social_cost(game, x);

    LoadProfile trial(N, T);
    std::vector<double> d(T);
    for (int k = 1; k <= cfg.k_max; ++k) {
        const auto agg = aggregate(x);
        for (int t = 0; t < T; ++t)
            d[t] = game.prices.value(t, agg[t]) + agg[t] * game.prices.first(t, agg[t]);

        // Certify first: the fixed-point residual is the stopping contract.
        const double res = opt_residual(game, x);
        rep.iterations = k;
        rep.final_residual = res;
        if (cfg.record_history)
            rep.history.push_back({k, res, sc,
                                   game.prices.all_affine()
                                       ? potential(game, x)
                                       : std::numeric_limits<double>::quiet_NaN()});
        if (res < cfg.eps_stop) {
            rep.converged = true;
            break;
        }

        bool accepted = false;
        while (step > step_floor) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (cfg.parallel)
#endif
            for (int n = 0; n < N; ++n) {
                std::vector<double> y(T);
                const double* xr = x.row(n);
                for (int t = 0; t < T; ++t) y[t] = xr[t] - step * d[t];
                project_inplace(sets[n], y.data(), trial.row(n));
            }
            // A trial that does not move cannot make progress at any smaller
            // step either; stop here so the caller sees the honest residual
            // instead of the loop spinning on no-op accepts until k_max.
            if (trial.data() == x.data()) break;
            const double sc_new = social_cost(game, trial);
            if (sc_new <= sc) {
                x = trial;
                sc = sc_new;
                accepted = true;
                // Let the step recover from transient backtracking so one bad
                // stretch cannot throttle the whole tail of the run.
                step = std::min(step * 2.0, step0);
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // step exhausted; converged stays honest
    }
    return rep;
}

double ne_residual(const GameInstance& game, const LoadProfile& profile) {
    const int N = game.players();
    const int T = game.periods();
    const auto agg = aggregate(profile);
    const auto sets = player_sets(game);
    std::vector<double> g(T), y(T), p(T);
    double worst = 0.0;
    for (int n = 0; n < N; ++n) {
        bill_gradient(game, profile, agg, n, g.data());
        const double* xr = profile.row(n);
        for (int t = 0; t < T; ++t) y[t] = xr[t] - g[t];
        project_inplace(sets[n], y.data(), p.data());
        double r = 0.0;
        for (int t = 0; t < T; ++t) r += (xr[t] - p[t]) * (xr[t] - p[t]);
        worst = std::max(worst, std::sqrt(r));
    }
    return worst;
}

double opt_residual(const GameInstance& game, const LoadProfile& profile) {
    const int N = game.players();
    const int T = game.periods();
    const auto agg = aggregate(profile);
    const auto sets = player_sets(game);
    std::vector<double> d(T), y(T), p(T);
    for (int t = 0; t < T; ++t)
        d[t] = game.prices.value(t, agg[t]) + agg[t] * game.prices.first(t, agg[t]);
    double sq = 0.0;
    for (int n = 0; n < N; ++n) {
        const double* xr = profile.row(n);
        for (int t = 0; t < T; ++t) y[t] = xr[t] - d[t];
        project_inplace(sets[n], y.data(), p.data());
        for (int t = 0; t < T; ++t) sq += (xr[t] - p[t]) * (xr[t] - p[t]);
    }
    return std::sqrt(sq);
}

LoadProfile reference_ne(const GameInstance& game) {
    SolverConfig cfg;
    cfg.eps_stop = 1e-10;
    cfg.k_max = 100000;
    const auto rep = solve_cbrd(game, default_start(game), cfg);
    if (!rep.converged)
        throw std::runtime_error("reference_ne: CBRD did not reach 1e-10 within 1e5 sweeps");
    return rep.profile;
}

}  // namespace hbill
