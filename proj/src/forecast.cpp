#include "hbill/forecast.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hbill {

void ForecastModel::validate() const {
    if (static_cast<int>(P.size()) != kHoursPerWeek)
        throw std::invalid_argument("ForecastModel: P must have 168 entries, has " +
                                    std::to_string(P.size()));
    for (std::size_t s = 0; s < P.size(); ++s)
        if (!(P[s] > 0.0))
            throw std::invalid_argument("ForecastModel: nonpositive seasonality at slot " +
                                        std::to_string(s));
    if (!(m > 0.0)) throw std::invalid_argument("ForecastModel: m must be > 0");
    if (sigma < 0.0) throw std::invalid_argument("ForecastModel: sigma must be >= 0");
}

double forecast(const ForecastModel& model, std::int64_t t, double observed,
                std::int64_t t_prime) {
    if (t_prime < t) throw std::invalid_argument("forecast: t_prime before t");
    if (!(observed > 0.0))
        throw std::invalid_argument("forecast: observed load must be > 0 (log undefined)");
    if (t_prime == t) return observed;  // perfect nowcast by convention
    model.validate();
    const double dt = static_cast<double>(t_prime - t);
    const double decay = std::exp(-model.m * dt);
    const double var_term =
        model.sigma * model.sigma / (4.0 * model.m) * (1.0 - std::exp(-2.0 * model.m * dt));
    return model.seasonal(t_prime) * std::pow(observed / model.seasonal(t), decay) *
           std::exp(var_term);
}

std::vector<double> simulate_path(const ForecastModel& model, int horizon,
                                  std::uint64_t seed) {
    if (horizon < 1) throw std::invalid_argument("simulate_path: horizon must be >= 1");
    model.validate();
    Rng rng(seed);
    const double decay = std::exp(-model.m);
    const double stat_var = model.sigma * model.sigma / (2.0 * model.m);
    const double step_sd = std::sqrt(stat_var * (1.0 - decay * decay));

    std::vector<double> path(horizon);
    double x = std::sqrt(stat_var) * rng.gaussian();
    path[0] = model.seasonal(0) * std::exp(x);
    for (int h = 1; h < horizon; ++h) {
        x = x * decay + step_sd * rng.gaussian();
        path[h] = model.seasonal(h) * std::exp(x);
    }
    return path;
}

ForecastModel fit(const std::vector<std::pair<int, double>>& history) {
    const std::size_t n = history.size();
    if (n < 2 * kHoursPerWeek)
        throw std::invalid_argument("fit: need at least 336 observations, got " +
                                    std::to_string(n));

    // Seasonality: geometric mean per hour-of-week slot (log-domain average,
    // consistent with the multiplicative model L = P e^X).
    std::vector<double> log_sum(kHoursPerWeek, 0.0);
    std::vector<int> count(kHoursPerWeek, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [slot, load] = history[i];
        if (slot < 0 || slot >= kHoursPerWeek)
            throw std::invalid_argument("fit: hour-of-week out of range at row " +
                                        std::to_string(i));
        if (!(load > 0.0))
            throw std::invalid_argument("fit: nonpositive load at row " + std::to_string(i));
        log_sum[slot] += std::log(load);
        ++count[slot];
    }
    ForecastModel model;
    model.P.resize(kHoursPerWeek);
    for (int s = 0; s < kHoursPerWeek; ++s) {
        if (count[s] < 2)
            throw std::invalid_argument("fit: hour-of-week slot " + std::to_string(s) +
                                        " covered fewer than twice");
        model.P[s] = std::exp(log_sum[s] / count[s]);
    }

    // Lag-1 regression of the log-deviations through the origin (X is
    // zero-mean once the seasonality is divided out).
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::log(history[i].second / model.P[history[i].first]);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        sxx += x[i] * x[i];
        sxy += x[i] * x[i + 1];
    }
    // Constant data leaves no deviation signal at all (up to the exp/log
    // round-trip noise of the seasonal means); report a fast-reverting
    // noiseless model rather than failing.
    if (sxx <= static_cast<double>(n) * 1e-24) {
        model.m = 1.0;
        model.sigma = 0.0;
        return model;
    }
    const double slope = sxy / sxx;
    if (!(slope > 0.0) || !(slope < 1.0))
        throw std::runtime_error("fit: lag-1 slope " + std::to_string(slope) +
                                 " outside (0,1); data is not mean-reverting");
    model.m = -std::log(slope);

    double rss = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double e = x[i + 1] - slope * x[i];
        rss += e * e;
    }
    const double var_eps = rss / static_cast<double>(n - 1);
    model.sigma = std::sqrt(2.0 * model.m * var_eps / (1.0 - slope * slope));
    return model;
}

}  // namespace hbill
