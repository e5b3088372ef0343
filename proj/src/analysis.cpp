#include "hbill/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hbill/solvers.hpp"

namespace hbill {

PoaBoundReport poa_bound(const GameInstance& game) {
    if (!game.prices.affine_increasing())
        throw std::invalid_argument("poa_bound: requires increasing affine prices");
    const int T = game.periods();
    PoaBoundReport rep;
    rep.phi.resize(T);
    rep.ratio.resize(T);
    rep.lbar.resize(T);

    for (int t = 0; t < T; ++t) {
        double lbar = 0.0;
        for (const auto& c : game.consumers) lbar += c.upper[t];
        if (lbar <= 0.0)
            throw std::invalid_argument("poa_bound: bound undefined for period " +
                                        std::to_string(t) + " (aggregate upper bound is 0)");
        const auto& p = game.prices.affine_at(t);
        rep.lbar[t] = lbar;
        rep.ratio[t] = p.alpha / (p.beta * lbar);
        const double onepr = 1.0 + rep.ratio[t];
        rep.phi[t] = onepr * onepr;
    }

    rep.t0 = static_cast<int>(std::min_element(rep.ratio.begin(), rep.ratio.end()) -
                              rep.ratio.begin());
    const double phi0 = rep.phi[rep.t0];
    const double cap = phi0 + 2.0 + std::sqrt(1.0 + phi0);
    rep.condition_holds = std::all_of(rep.phi.begin(), rep.phi.end(),
                                      [cap](double p) { return p <= cap; });

    rep.bound_tight =
        0.5 * (1.0 + std::sqrt(1.0 + 1.0 / phi0) + 0.5 / std::sqrt(phi0));
    rep.bound_simplified = 1.0 + 0.75 / (1.0 + rep.ratio[rep.t0]);
    return rep;
}

double empirical_poa(const GameInstance& game, const LoadProfile& ne, const LoadProfile& opt) {
    const double sc_opt = social_cost(game, opt);
    if (sc_opt <= 0.0)
        throw std::invalid_argument("empirical_poa: SC(opt) <= 0");
    return social_cost(game, ne) / sc_opt;
}

double poa_mu_star(double phi) {
    return (-1.0 + std::sqrt(1.0 + phi)) / phi;
}

double poa_lambda_star(double mu, double r) {
    // lambda*_r(mu) = ((1 + r mu)^2 + mu) / (4 mu (1 + r)), the normalized
    // form of ((Lbar + b mu)^2 + mu Lbar^2)/(Lbar (Lbar + b) 4 mu).
    const double onerm = 1.0 + r * mu;
    return (onerm * onerm + mu) / (4.0 * mu * (1.0 + r));
}

StabilityReport check_strong_stability(const GameInstance& game, double a, int samples,
                                       std::uint64_t seed, bool parallel) {
    game.validate();
    StabilityReport rep;
    rep.samples = samples;
    const int T = game.periods();
    const int N = game.players();

    double min_lhs = std::numeric_limits<double>::infinity();
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(min : min_lhs) if (parallel)
#else
    (void)parallel;
#endif
    for (int i = 0; i < samples; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        const LoadProfile x = random_feasible_profile(game, rng);
        const auto agg = aggregate(x);
        for (int t = 0; t < T; ++t) {
            const double c1 = game.prices.first(t, agg[t]);
            const double c2 = game.prices.second(t, agg[t]);
            double col_sq = 0.0;
            for (int n = 0; n < N; ++n) col_sq += x.at(n, t) * x.at(n, t);
            const double ratio = c2 / (2.0 * c1);
            const double lhs = 2.0 * c1 * (1.0 - ratio * ratio * col_sq);
            min_lhs = std::min(min_lhs, lhs);
        }
    }
    rep.min_lhs = min_lhs;
    rep.passes = min_lhs >= a;
    return rep;
}

}  // namespace hbill
