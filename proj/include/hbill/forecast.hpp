#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hbill/rng.hpp"

namespace hbill {

constexpr int kHoursPerWeek = 168;

/// Seasonal Ornstein-Uhlenbeck model of the non-flexible load:
///   L_NF,t = P_{t mod 168} * exp(X_t),
/// X the stationary OU process dX = -m X dt + sigma dW. Hours are absolute
/// indices; hour 0 is slot 0 of the weekly seasonality.
struct ForecastModel {
    std::vector<double> P;   // 168 hourly factors, kW
    double m = 0.0;          // mean reversion, 1/h
    double sigma = 0.0;      // volatility, 1/sqrt(h)

    void validate() const;
    double seasonal(std::int64_t hour) const { return P[static_cast<std::size_t>(hour % kHoursPerWeek)]; }
};

/// Conditional-mean forecast of L_NF at hour t_prime given the observation
/// at hour t:
///   Lhat = P_{t'} (L_t/P_t)^{exp(-m (t'-t))} * exp(sigma^2/(4m) (1 - e^{-2m(t'-t)})).
/// Returns the observation exactly at t_prime == t (perfect nowcast).
double forecast(const ForecastModel& model, std::int64_t t, double observed,
                std::int64_t t_prime);

/// Samples L_NF over `horizon` hours by the exact OU discretization
///   X_{k+1} = X_k e^{-m} + eps_k,  eps_k ~ N(0, sigma^2 (1-e^{-2m})/(2m)),
/// with X_0 drawn from the stationary law N(0, sigma^2/(2m)). Deterministic
/// given the seed.
std::vector<double> simulate_path(const ForecastModel& model, int horizon,
                                  std::uint64_t seed);

/// Fits (P, m, sigma) from hourly observations (hour-of-week, load), assumed
/// consecutive in time. P by per-slot geometric mean; m from the lag-1
/// least-squares slope of the log-deviations (m = -log slope); sigma by
/// inverting the exact-discretization noise variance. Requires every
/// hour-of-week slot covered at least twice and strictly positive loads.
ForecastModel fit(const std::vector<std::pair<int, double>>& history);

}  // namespace hbill
