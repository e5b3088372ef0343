#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hbill/forecast.hpp"

using namespace hbill;

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

ForecastModel paper_model() {
    ForecastModel m;
    m.P.resize(kHoursPerWeek);
    for (int s = 0; s < kHoursPerWeek; ++s)
        m.P[s] = 35.0 + 8.0 * std::cos(kTwoPi * (s % 24) / 24.0) +
                 2.0 * std::sin(kTwoPi * s / kHoursPerWeek);
    m.m = 0.198;
    m.sigma = 0.117;
    return m;
}

}  // namespace

TEST_CASE("nowcast is the observation itself") {
    const auto model = paper_model();
    for (std::int64_t t : {0, 5, 167, 168, 1000}) {
        CHECK(forecast(model, t, 12.34, t) == 12.34);  // exact, not approximate
    }
}

TEST_CASE("noiseless forecast reverts toward the seasonal profile") {
    auto model = paper_model();
    model.sigma = 0.0;
    const std::int64_t t = 7;
    const double obs = model.P[t] * 1.5;
    for (std::int64_t dt : {1, 3, 24, 200}) {
        const double f = forecast(model, t, obs, t + dt);
        const double expected =
            model.seasonal(t + dt) * std::pow(1.5, std::exp(-model.m * dt));
        CHECK(f == doctest::Approx(expected).epsilon(1e-14));
    }
    // far horizon: deviation forgotten entirely
    const double far = forecast(model, t, obs, t + 2000);
    CHECK(far == doctest::Approx(model.seasonal(t + 2000)).epsilon(1e-10));
}

TEST_CASE("24-hour variance correction matches the published factor") {
    const auto model = paper_model();
    // observation on the seasonal mean: the whole forecast/seasonal ratio is
    // the lognormal correction exp(sigma^2/(4m) (1 - e^{-48m})) ~ 1.01739.
    const std::int64_t t = 3;
    const double f = forecast(model, t, model.seasonal(t), t + 24);
    const double factor = f / model.seasonal(t + 24);
    CHECK(factor == doctest::Approx(1.01739).epsilon(1e-4));
}

TEST_CASE("forecast input validation") {
    const auto model = paper_model();
    CHECK_THROWS_WITH_AS(forecast(model, 5, 10.0, 4), doctest::Contains("before"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(forecast(model, 5, 0.0, 6), doctest::Contains("observed"),
                         std::invalid_argument);
    auto bad = model;
    bad.m = 0.0;
    CHECK_THROWS_WITH_AS(forecast(bad, 5, 10.0, 6), doctest::Contains("m must be"),
                         std::invalid_argument);
    bad = model;
    bad.P.resize(10);
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("168"), std::invalid_argument);
    bad = model;
    bad.P[3] = 0.0;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("slot 3"), std::invalid_argument);
    bad = model;
    bad.sigma = -0.1;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("sigma"), std::invalid_argument);
}

TEST_CASE("simulated path is deterministic and statistically consistent") {
    const auto model = paper_model();
    const int H = 100000;
    const auto path = simulate_path(model, H, 2024);
    const auto path2 = simulate_path(model, H, 2024);
    CHECK(path == path2);
    CHECK(simulate_path(model, 100, 2025) != std::vector<double>(path.begin(), path.begin() + 100));

    std::vector<double> x(H);
    for (int h = 0; h < H; ++h) {
        CHECK(path[h] > 0.0);
        x[h] = std::log(path[h] / model.seasonal(h));
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / H;
    double var = 0.0, lag = 0.0;
    for (int h = 0; h < H; ++h) var += (x[h] - mean) * (x[h] - mean);
    var /= H;
    for (int h = 0; h + 1 < H; ++h) lag += (x[h] - mean) * (x[h + 1] - mean);
    lag /= (H - 1) * var;

    const double stat_var = model.sigma * model.sigma / (2.0 * model.m);
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == doctest::Approx(stat_var).epsilon(0.05));
    CHECK(lag == doctest::Approx(std::exp(-model.m)).epsilon(0.02));
}

TEST_CASE("fit recovers the generating parameters from a year of data") {
    const auto truth = paper_model();
    const auto path = simulate_path(truth, 8760, 31415);
    std::vector<std::pair<int, double>> history(8760);
    for (int h = 0; h < 8760; ++h) history[h] = {h % kHoursPerWeek, path[h]};

    const auto fitted = fit(history);
    CHECK(std::abs(fitted.m - truth.m) / truth.m < 0.15);
    CHECK(std::abs(fitted.sigma - truth.sigma) / truth.sigma < 0.10);
    double worst_p = 0.0;
    for (int s = 0; s < kHoursPerWeek; ++s)
        worst_p = std::max(worst_p, std::abs(fitted.P[s] / truth.P[s] - 1.0));
    CHECK(worst_p < 0.10);
}

TEST_CASE("fit edge cases") {
    SUBCASE("too little data") {
        std::vector<std::pair<int, double>> h(100, {0, 1.0});
        CHECK_THROWS_WITH_AS(fit(h), doctest::Contains("336"), std::invalid_argument);
    }
    SUBCASE("slot out of range / nonpositive load") {
        std::vector<std::pair<int, double>> h(400);
        for (int i = 0; i < 400; ++i) h[i] = {i % kHoursPerWeek, 2.0};
        auto bad = h;
        bad[37].first = 200;
        CHECK_THROWS_WITH_AS(fit(bad), doctest::Contains("row 37"), std::invalid_argument);
        bad = h;
        bad[12].second = -1.0;
        CHECK_THROWS_WITH_AS(fit(bad), doctest::Contains("row 12"), std::invalid_argument);
    }
    SUBCASE("uncovered slot") {
        std::vector<std::pair<int, double>> h(500);
        for (int i = 0; i < 500; ++i) h[i] = {i % 100, 2.0};  // slots 100.. never seen
        CHECK_THROWS_WITH_AS(fit(h), doctest::Contains("covered fewer than twice"),
                             std::invalid_argument);
    }
    SUBCASE("constant data falls back to a noiseless model") {
        std::vector<std::pair<int, double>> h(2 * kHoursPerWeek);
        for (int i = 0; i < 2 * kHoursPerWeek; ++i) h[i] = {i % kHoursPerWeek, 5.0};
        const auto m = fit(h);
        CHECK(m.sigma == 0.0);
        CHECK(m.m == 1.0);
        for (double p : m.P) CHECK(p == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("explosive data is rejected as non-mean-reverting") {
        // log-deviations grow geometrically, so the lag-1 slope exceeds 1
        std::vector<std::pair<int, double>> h(3 * kHoursPerWeek);
        for (int i = 0; i < 3 * kHoursPerWeek; ++i)
            h[i] = {i % kHoursPerWeek, 5.0 * std::exp(1e-3 * std::pow(1.02, i))};
        CHECK_THROWS_WITH_AS(fit(h), doctest::Contains("not mean-reverting"),
                             std::runtime_error);
    }
}
