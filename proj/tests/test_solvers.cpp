#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hbill/game.hpp"
#include "hbill/online.hpp"
#include "hbill/projection.hpp"
#include "hbill/rng.hpp"
#include "hbill/solvers.hpp"

using namespace hbill;

namespace {

// Two players, two periods, c_t(L) = alpha_t + L. With both rows interior the
// NE is closed-form: L_0 = (alpha_1 - alpha_0)/3 + E/2 and
// s_n = (alpha_1 - alpha_0 + E + E_n)/2 - L_0, from equal per-player marginals.
GameInstance two_by_two(double a0, double a1, double e1, double e2, double cap) {
    GameInstance g;
    g.grid.periods = 2;
    g.prices.per_period = {PriceFunction{AffinePrice{a0, 1.0}}, PriceFunction{AffinePrice{a1, 1.0}}};
    ConsumerSpec c1{e1, {0.0, 0.0}, {cap, cap}};
    ConsumerSpec c2{e2, {0.0, 0.0}, {cap, cap}};
    g.consumers = {c1, c2};
    g.validate();
    return g;
}

SolverConfig tight(double eps = 1e-9) {
    SolverConfig cfg;
    cfg.eps_stop = eps;
    cfg.k_max = 100000;
    return cfg;
}

}  // namespace

TEST_CASE("CBRD and SIRD find the closed-form interior NE") {
    const auto game = two_by_two(1.0, 3.0, 1.0, 1.5, 1.2);
    // L_0 = 2/3 + 5/4 = 23/12; rows (5/6, 1/6) and (13/12, 5/12).
    const double want[2][2] = {{5.0 / 6, 1.0 / 6}, {13.0 / 12, 5.0 / 12}};

    for (bool sird : {false, true}) {
        CAPTURE(sird);
        const auto rep = sird ? solve_sird(game, default_start(game), tight())
                              : solve_cbrd(game, default_start(game), tight());
        REQUIRE(rep.converged);
        for (int n = 0; n < 2; ++n)
            for (int t = 0; t < 2; ++t)
                CHECK(rep.profile.at(n, t) == doctest::Approx(want[n][t]).epsilon(1e-6));
        CHECK(ne_residual(game, rep.profile) < 1e-7);
    }
}

TEST_CASE("boundary NE: expensive period stays empty") {
    // alpha = (1, 5): at s = 0 the period-0 marginal (4) is below the
    // period-1 marginal (5), so both players load everything into period 0.
    const auto game = two_by_two(1.0, 5.0, 1.0, 1.0, 1.0);
    const auto rep = solve_cbrd(game, default_start(game), tight());
    REQUIRE(rep.converged);
    for (int n = 0; n < 2; ++n) {
        CHECK(rep.profile.at(n, 0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.profile.at(n, 1) == doctest::Approx(0.0).scale(1).epsilon(1e-9));
    }
}

TEST_CASE("best response is a constrained bill minimizer") {
    Rng rng(mix_seed(1, 2));
    const auto game = random_windowed_instance(4, 6, {0.5, 1.5}, {0.2, 0.4}, rng);
    for (int trial = 0; trial < 30; ++trial) {
        const auto x = random_feasible_profile(game, rng);
        const auto agg = aggregate(x);
        for (int n = 0; n < game.players(); ++n) {
            std::vector<double> s(game.periods());
            for (int t = 0; t < game.periods(); ++t) s[t] = agg[t] - x.at(n, t);
            const auto br = best_response(game, n, s);
            auto xbr = x;
            xbr.set_row(n, br);
            const double b_star = bill(game, xbr, n);
            CHECK(b_star <= bill(game, x, n) + 1e-10);
            // no sampled feasible row does better
            CappedSimplex set(game.consumers[n]);
            std::vector<double> p(game.periods());
            for (int k = 0; k < 25; ++k) {
                for (auto& v : p) v = rng.uniform(-2.0, 8.0);
                auto y = x;
                y.set_row(n, project(set, p));
                CHECK(b_star <= bill(game, y, n) + 1e-8);
            }
        }
    }
}

TEST_CASE("the two dynamics agree across random instances and starts") {
    Rng rng(mix_seed(1, 3));
    for (int inst = 0; inst < 10; ++inst) {
        const int N = 2 + rng.uniform_int(0, 4);
        const auto game = random_windowed_instance(N, 8, {0.5, 1.5}, {0.2, 0.4}, rng);
        auto cfg = tight(1e-4);
        std::vector<LoadProfile> solutions;
        for (int s = 0; s < 3; ++s) {
            const auto x0 = random_feasible_profile(game, rng);
            const auto a = solve_cbrd(game, x0, cfg);
            const auto b = solve_sird(game, x0, cfg);
            REQUIRE(a.converged);
            REQUIRE(b.converged);
            solutions.push_back(a.profile);
            solutions.push_back(b.profile);
        }
        for (std::size_t i = 0; i < solutions.size(); ++i)
            for (std::size_t j = i + 1; j < solutions.size(); ++j)
                CHECK(norm_inf_diff(solutions[i], solutions[j]) < 1e-2);
    }
}

TEST_CASE("CBRD potential is non-increasing step by step") {
    Rng rng(mix_seed(1, 4));
    for (int inst = 0; inst < 5; ++inst) {
        const auto game = random_windowed_instance(4, 8, {0.5, 1.5}, {0.2, 0.4}, rng);
        auto cfg = tight(1e-8);
        cfg.record_potential_steps = true;
        const auto rep = solve_cbrd(game, random_feasible_profile(game, rng), cfg);
        REQUIRE(rep.converged);
        REQUIRE(rep.potential_steps.size() > 1);
        for (std::size_t i = 1; i < rep.potential_steps.size(); ++i)
            CHECK(rep.potential_steps[i] <= rep.potential_steps[i - 1] + 1e-10);
    }
}

TEST_CASE("SIRD parallel and serial kernels produce bitwise-identical iterates") {
    Rng rng(mix_seed(1, 5));
    const auto game = random_windowed_instance(16, 12, {0.5, 1.5}, {0.2, 0.4}, rng);
    const auto x0 = random_feasible_profile(game, rng);
    auto cfg = tight(1e-300);  // never stops early: exercise all k_max steps
    cfg.k_max = 60;
    auto par = cfg;
    par.parallel = true;
    auto ser = cfg;
    ser.parallel = false;
    const auto a = solve_sird(game, x0, par);
    const auto b = solve_sird(game, x0, ser);
    REQUIRE(a.iterations == b.iterations);
    CHECK(a.profile.data() == b.profile.data());  // exact double equality
}

TEST_CASE("SIRD auto step equals the explicit a/(N M^2) step") {
    Rng rng(mix_seed(1, 6));
    const auto game = random_windowed_instance(5, 6, {0.5, 1.5}, {0.2, 0.4}, rng);
    const auto x0 = random_feasible_profile(game, rng);
    const auto [a, M] = stability_constants(game);
    auto cfg_auto = tight(1e-7);
    auto cfg_explicit = cfg_auto;
    cfg_explicit.gamma = a / (game.players() * M * M);
    const auto ra = solve_sird(game, x0, cfg_auto);
    const auto re = solve_sird(game, x0, cfg_explicit);
    CHECK(ra.iterations == re.iterations);
    CHECK(ra.profile.data() == re.profile.data());
}

TEST_CASE("solve_optimal reaches the closed-form social optimum") {
    // SC depends on the aggregate only; with c_t(L) = alpha_t + L the optimal
    // aggregate splits as L_0 = (alpha_1 - alpha_0)/4 + E/2 when interior.
    const auto game = two_by_two(1.0, 3.0, 1.0, 1.5, 1.2);
    auto cfg = tight(1e-8);
    cfg.k_max = 200000;
    const auto rep = solve_optimal(game, cfg);
    REQUIRE(rep.converged);
    const double sc_star = 1.75 * 2.75 + 0.75 * 3.75;  // L_0 = 1.75, E = 2.5
    CHECK(social_cost(game, rep.profile) == doctest::Approx(sc_star).epsilon(1e-8));
    const auto agg = aggregate(rep.profile);
    CHECK(agg[0] == doctest::Approx(1.75).epsilon(1e-5));

    // NE social cost sits above the optimum: SC(ne) = 1106/144.
    const auto ne = reference_ne(game);
    CHECK(social_cost(game, ne) == doctest::Approx(1106.0 / 144).epsilon(1e-9));
    CHECK(social_cost(game, rep.profile) <= social_cost(game, ne));
}

TEST_CASE("solve_optimal never ends above its warm start") {
    Rng rng(mix_seed(1, 7));
    for (int inst = 0; inst < 10; ++inst) {
        const auto game = random_windowed_instance(5, 8, {0.5, 1.5}, {0.2, 0.4}, rng);
        const auto x0 = random_feasible_profile(game, rng);
        auto cfg = tight(1e-6);
        cfg.k_max = 2000;  // possibly not converged; the guarantee holds anyway
        const auto rep = solve_optimal(game, x0, cfg);
        CHECK(social_cost(game, rep.profile) <= social_cost(game, x0) + 1e-12);
        CHECK(profile_feasible(game, rep.profile, 1e-7));
    }
}

TEST_CASE("residuals vanish at the solution and not elsewhere") {
    const auto game = two_by_two(1.0, 3.0, 1.0, 1.5, 1.2);
    const auto ne = reference_ne(game);
    CHECK(ne_residual(game, ne) < 1e-9);
    auto off = ne;
    off.at(0, 0) -= 0.3;
    off.at(0, 1) += 0.3;
    CHECK(ne_residual(game, off) > 1e-2);

    auto cfg = tight(1e-9);
    cfg.k_max = 200000;
    const auto opt = solve_optimal(game, cfg);
    CHECK(opt_residual(game, opt.profile) < 1e-9);
}

TEST_CASE("history records one entry per iteration") {
    const auto game = two_by_two(1.0, 3.0, 1.0, 1.5, 1.2);
    auto cfg = tight(1e-6);
    cfg.record_history = true;
    const auto rep = solve_cbrd(game, default_start(game), cfg);
    REQUIRE(rep.converged);
    REQUIRE(static_cast<int>(rep.history.size()) == rep.iterations);
    CHECK(rep.history.back().residual == rep.final_residual);
    CHECK(rep.history.back().iteration == rep.iterations);
    CHECK(std::isfinite(rep.history.front().potential));  // affine: recorded
    for (std::size_t i = 0; i + 1 < rep.history.size(); ++i)
        CHECK(rep.history[i].potential + 1e-10 >= rep.history[i + 1].potential);
}

TEST_CASE("starts: default_start and random_feasible_profile are feasible") {
    Rng rng(mix_seed(1, 8));
    const auto game = random_windowed_instance(6, 10, {0.5, 1.5}, {0.2, 0.4}, rng);
    CHECK(profile_feasible(game, default_start(game)));
    Rng r1(99), r2(99);
    const auto a = random_feasible_profile(game, r1);
    const auto b = random_feasible_profile(game, r2);
    CHECK(profile_feasible(game, a));
    CHECK(a.data() == b.data());  // deterministic in the generator state
}

TEST_CASE("convex prices: CBRD converges and resists sampled deviations") {
    GameInstance game;
    game.grid.periods = 3;
    for (int t = 0; t < 3; ++t) {
        const double alpha = 0.8 + 0.2 * t, beta = 0.25, q = 0.01;
        ConvexPrice cp;
        cp.value = [=](double L) { return alpha + beta * L + q * L * L; };
        cp.first = [=](double L) { return beta + 2 * q * L; };
        cp.second = [=](double) { return 2 * q; };
        cp.domain_upper = 30.0;
        REQUIRE(cp.well_formed());
        game.prices.per_period.emplace_back(cp);
    }
    ConsumerSpec c{4.0, {0, 0, 0}, {3, 3, 3}};
    game.consumers = {c, c, c};
    game.validate();

    auto cfg = tight(1e-8);
    const auto rep = solve_cbrd(game, default_start(game), cfg);
    REQUIRE(rep.converged);
    CHECK(ne_residual(game, rep.profile) < 1e-6);

    Rng rng(mix_seed(1, 9));
    CappedSimplex set(c);
    std::vector<double> p(3);
    for (int n = 0; n < 3; ++n) {
        const double mine = bill(game, rep.profile, n);
        for (int k = 0; k < 50; ++k) {
            for (auto& v : p) v = rng.uniform(0.0, 3.0);
            auto y = rep.profile;
            y.set_row(n, project(set, p));
            CHECK(mine <= bill(game, y, n) + 1e-6);
        }
    }

    // SIRD needs an explicit step for non-affine prices...
    CHECK_THROWS_AS(solve_sird(game, default_start(game), cfg), std::logic_error);
    // ...and with one it lands on the same point.
    auto cfg_g = cfg;
    cfg_g.gamma = 0.05;
    const auto rep2 = solve_sird(game, default_start(game), cfg_g);
    REQUIRE(rep2.converged);
    CHECK(norm_inf_diff(rep.profile, rep2.profile) < 1e-5);
}

TEST_CASE("infeasible starts are rejected") {
    const auto game = two_by_two(1.0, 3.0, 1.0, 1.5, 1.2);
    LoadProfile bad(2, 2, 10.0);
    CHECK_THROWS_WITH_AS(solve_cbrd(game, bad, tight()), doctest::Contains("not feasible"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(solve_sird(game, bad, tight()), doctest::Contains("not feasible"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(solve_optimal(game, bad, tight()), doctest::Contains("not feasible"),
                         std::invalid_argument);
    SolverConfig nogamma;
    nogamma.gamma = -1.0;
    CHECK_THROWS_WITH_AS(solve_sird(game, default_start(game), nogamma),
                         doctest::Contains("gamma"), std::invalid_argument);
}
