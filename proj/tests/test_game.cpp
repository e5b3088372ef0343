#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hbill/game.hpp"
#include "hbill/projection.hpp"
#include "hbill/rng.hpp"
#include "hbill/solvers.hpp"

using namespace hbill;

namespace {

GameInstance small_affine(int N = 3, int T = 4, std::uint64_t seed = 11) {
    GameInstance g;
    g.grid.periods = T;
    Rng rng(seed);
    for (int t = 0; t < T; ++t)
        g.prices.per_period.emplace_back(AffinePrice{rng.uniform(0.5, 1.5), rng.uniform(0.2, 0.4)});
    for (int n = 0; n < N; ++n) {
        ConsumerSpec c;
        c.lower.assign(T, 0.0);
        c.upper.resize(T);
        double cap = 0.0;
        for (int t = 0; t < T; ++t) { c.upper[t] = rng.uniform(1.0, 4.0); cap += c.upper[t]; }
        c.energy = rng.uniform(0.3, 0.85) * cap;
        g.consumers.push_back(c);
    }
    g.validate();
    return g;
}

}  // namespace

TEST_CASE("derive_prices reproduces the incremental provider cost") {
    // For quadratic C the per-unit flexible price obeys L * c_t(L) = C(L_NF + L) - C(L_NF)
    // everywhere, including the removable singularity at L = 0.
    const ProviderCost cost{0.711, -0.0417, 0.00295};
    const std::vector<double> nf{40.0, 55.0, 100.0, 72.5};
    const auto prices = derive_prices(cost, nf);
    REQUIRE(prices.periods() == 4);
    CHECK(prices.all_affine());

    Rng rng(3);
    for (int t = 0; t < 4; ++t) {
        for (int k = 0; k < 50; ++k) {
            const double L = rng.uniform(0.0, 60.0);
            const double lhs = L * prices.value(t, L);
            const double rhs = cost.value(nf[t] + L) - cost.value(nf[t]);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }

    SUBCASE("coefficients in closed form") {
        for (int t = 0; t < 4; ++t) {
            const auto& p = prices.affine_at(t);
            CHECK(p.alpha == doctest::Approx(cost.c1 + 2 * cost.c2 * nf[t]).epsilon(1e-14));
            CHECK(p.beta == doctest::Approx(cost.c2).epsilon(1e-14));
        }
    }
    SUBCASE("dollar prices land on the published cent figures") {
        // alpha at L_NF = 100 kW: -0.0417 + 2*0.00295*100 = 0.5483 $/kWh = 54.83 c/kWh.
        CHECK(100.0 * prices.affine_at(2).alpha == doctest::Approx(54.83).epsilon(1e-10));
        CHECK(100.0 * prices.affine_at(2).beta == doctest::Approx(0.295).epsilon(1e-10));
    }
    CHECK_THROWS_WITH_AS(derive_prices(cost, {}), doctest::Contains("empty baseline"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(derive_prices(cost, {-1.0}), doctest::Contains("negative baseline"),
                         std::invalid_argument);
}

TEST_CASE("social cost equals the sum of bills") {
    const auto game = small_affine(4, 6, 17);
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto x = random_feasible_profile(game, rng);
        double bills = 0.0;
        for (int n = 0; n < game.players(); ++n) bills += bill(game, x, n);
        const double sc = social_cost(game, x);
        CHECK(sc == doctest::Approx(bills).epsilon(1e-12));
        // and SC = sum_t L_t c_t(L_t) directly
        const auto agg = aggregate(x);
        double direct = 0.0;
        for (int t = 0; t < game.periods(); ++t) direct += agg[t] * game.prices.value(t, agg[t]);
        CHECK(sc == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("potential differences equal unilateral bill differences") {
    const auto game = small_affine(3, 5, 23);
    Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        auto x = random_feasible_profile(game, rng);
        const int n = rng.uniform_int(0, game.players() - 1);
        auto y = x;
        // random feasible replacement of row n
        CappedSimplex set(game.consumers[n]);
        std::vector<double> p(game.periods());
        for (auto& v : p) v = rng.uniform(-2.0, 6.0);
        y.set_row(n, project(set, p));

        const double dphi = potential(game, y) - potential(game, x);
        const double dbill = bill(game, y, n) - bill(game, x, n);
        CHECK(std::abs(dphi - dbill) <= 1e-10);
    }
}

TEST_CASE("marginal_cost and bill_gradient match finite differences") {
    const auto game = small_affine(3, 4, 29);
    Rng rng(11);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        auto x = random_feasible_profile(game, rng);
        const auto agg = aggregate(x);
        for (int n = 0; n < game.players(); ++n) {
            std::vector<double> grad(game.periods());
            bill_gradient(game, x, agg, n, grad.data());
            for (int t = 0; t < game.periods(); ++t) {
                auto xp = x, xm = x;
                xp.at(n, t) += h;
                xm.at(n, t) -= h;
                const double fd = (bill(game, xp, n) - bill(game, xm, n)) / (2 * h);
                CHECK(grad[t] == doctest::Approx(fd).epsilon(1e-5));
                CHECK(marginal_cost(game, x, n, t) == doctest::Approx(fd).epsilon(1e-5));
                CHECK(grad[t] == doctest::Approx(marginal_cost(game, x, n, t)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("stability constants under affine prices") {
    GameInstance g;
    g.grid.periods = 3;
    g.prices.per_period = {PriceFunction{AffinePrice{1.0, 0.25}},
                           PriceFunction{AffinePrice{0.8, 0.40}},
                           PriceFunction{AffinePrice{1.2, 0.30}}};
    ConsumerSpec c;
    c.energy = 2.0;
    c.lower = {0, 0, 0};
    c.upper = {2, 2, 2};
    g.consumers = {c, c};
    g.validate();
    const auto [a, M] = stability_constants(g);
    CHECK(a == doctest::Approx(0.5));
    CHECK(M == doctest::Approx(0.8));
}

TEST_CASE("convex price wrapper agrees with its affine counterpart") {
    const AffinePrice affine{0.9, 0.3};
    ConvexPrice convex;
    convex.value = [affine](double L) { return affine.value(L); };
    convex.first = [affine](double) { return affine.beta; };
    convex.second = [](double) { return 0.0; };
    convex.domain_upper = 50.0;
    CHECK(convex.well_formed());

    PriceModel pm;
    pm.per_period = {PriceFunction{affine}, PriceFunction{convex}};
    CHECK_FALSE(pm.all_affine());
    for (double L : {0.0, 1.3, 7.7, 42.0}) {
        CHECK(pm.value(0, L) == doctest::Approx(pm.value(1, L)).epsilon(1e-14));
        CHECK(pm.first(0, L) == doctest::Approx(pm.first(1, L)).epsilon(1e-14));
        CHECK(pm.second(0, L) == doctest::Approx(pm.second(1, L)).epsilon(1e-14));
    }

    ConvexPrice bad = convex;
    bad.first = [](double) { return -0.1; };  // decreasing: rejected
    CHECK_FALSE(bad.well_formed());
}

TEST_CASE("potential and stability_constants reject non-affine models") {
    auto game = small_affine(2, 2, 31);
    ConvexPrice cp;
    cp.value = [](double L) { return 1.0 + 0.3 * L + 0.01 * L * L; };
    cp.first = [](double L) { return 0.3 + 0.02 * L; };
    cp.second = [](double) { return 0.02; };
    cp.domain_upper = 20.0;
    game.prices.per_period[1] = cp;
    const LoadProfile x(2, 2, 0.5);
    CHECK_THROWS_AS(potential(game, x), std::logic_error);
    CHECK_THROWS_AS(stability_constants(game), std::logic_error);
    CHECK_THROWS_AS(game.prices.affine_at(1), std::logic_error);
}

TEST_CASE("validation errors name the offending part") {
    ConsumerSpec c;
    c.energy = 1.0;
    c.lower = {0.0, 0.0};
    c.upper = {1.0};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("length mismatch"),
                         std::invalid_argument);
    c.upper = {1.0, -0.5};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("upper < lower"),
                         std::invalid_argument);
    c.lower = {-0.2, 0.0};
    c.upper = {1.0, 1.0};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("negative lower"),
                         std::invalid_argument);
    c.lower = {0.0, 0.0};
    c.energy = 5.0;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("energy target"),
                         std::invalid_argument);

    GameInstance g;
    g.grid.periods = 2;
    g.prices.per_period = {PriceFunction{AffinePrice{1, 0.3}}};
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("no players"), std::invalid_argument);
    c.energy = 1.0;
    g.consumers = {c};
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("price model covers"),
                         std::invalid_argument);
    g.prices.per_period.push_back(PriceFunction{AffinePrice{1, 0.3}});
    g.nonflexible = {10.0};
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("nonflexible length"),
                         std::invalid_argument);
    g.nonflexible.clear();
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("profile feasibility uses absolute tolerances") {
    const auto game = small_affine(2, 3, 37);
    Rng rng(13);
    auto x = random_feasible_profile(game, rng);
    CHECK(profile_feasible(game, x));
    auto y = x;
    y.at(0, 0) += 1e-4;  // breaks the energy balance
    CHECK_FALSE(profile_feasible(game, y, 1e-8));
    CHECK(profile_feasible(game, y, 1e-3));
}
