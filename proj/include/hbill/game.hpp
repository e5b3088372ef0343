#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace hbill {

/// Discrete planning horizon. T periods; the duration is label-only, all
/// math works per period.
struct TimeGrid {
    int periods = 24;
    double period_hours = 1.0;

    void validate() const {
        if (periods < 1) throw std::invalid_argument("TimeGrid: periods must be >= 1");
    }
};

/// Per-period unit price c(L) = alpha + beta * L in $/kWh, L the aggregate
/// flexible load in kW. Increasing affine prices need alpha > 0, beta > 0.
struct AffinePrice {
    double alpha = 0.0;
    double beta = 0.0;

    double value(double load) const { return alpha + beta * load; }
    bool increasing_positive() const { return alpha > 0.0 && beta > 0.0; }
};

/// General convex per-period price given as a scalar map plus its first two
/// derivatives. The callables are user-supplied black boxes; convexity and
/// monotonicity are spot-checked on a sample grid, not proven.
struct ConvexPrice {
    std::function<double(double)> value;
    std::function<double(double)> first;
    std::function<double(double)> second;
    double domain_upper = 0.0;

    /// Checks c' > 0 and c'' >= 0 on `samples` evenly spaced points of
    /// [0, domain_upper].
    bool well_formed(int samples = 256) const;
};

using PriceFunction = std::variant<AffinePrice, ConvexPrice>;

/// One price function per period.
struct PriceModel {
    std::vector<PriceFunction> per_period;

    int periods() const { return static_cast<int>(per_period.size()); }
    bool all_affine() const;
    /// True when every period is affine with alpha > 0 and beta > 0.
    bool affine_increasing() const;

    const AffinePrice& affine_at(int t) const;

    double value(int t, double load) const;
    double first(int t, double load) const;
    double second(int t, double load) const;
};

/// Provider cost C(D) = c0 + c1 D + c2 D^2 in $ for a total demand D in kW.
struct ProviderCost {
    double c0 = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    double value(double demand) const { return c0 + c1 * demand + c2 * demand * demand; }
};

/// A consumer's flexible-load constraints: total energy over the horizon and
/// per-period power bounds. lower_t = upper_t pins the period (e.g. an EV
/// that is not plugged in).
struct ConsumerSpec {
    double energy = 0.0;               // sum of loads over the horizon (kW*periods)
    std::vector<double> lower;         // kW
    std::vector<double> upper;         // kW

    int periods() const { return static_cast<int>(lower.size()); }
    void validate() const;
};

/// N x T matrix of flexible loads, row per player.
class LoadProfile {
public:
    LoadProfile() = default;
    LoadProfile(int players, int periods, double fill = 0.0)
        : players_(players), periods_(periods),
          data_(static_cast<std::size_t>(players) * periods, fill) {}

    int players() const { return players_; }
    int periods() const { return periods_; }

    double& at(int n, int t) { return data_[static_cast<std::size_t>(n) * periods_ + t]; }
    double at(int n, int t) const { return data_[static_cast<std::size_t>(n) * periods_ + t]; }

    double* row(int n) { return data_.data() + static_cast<std::size_t>(n) * periods_; }
    const double* row(int n) const { return data_.data() + static_cast<std::size_t>(n) * periods_; }

    std::vector<double> row_copy(int n) const {
        return {row(n), row(n) + periods_};
    }
    void set_row(int n, const std::vector<double>& values);

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    int players_ = 0;
    int periods_ = 0;
    std::vector<double> data_;
};

/// Distance helpers on profiles of identical shape.
double norm2_diff(const LoadProfile& a, const LoadProfile& b);
double norm_inf_diff(const LoadProfile& a, const LoadProfile& b);

/// The consumption game: N players over a common grid, per-period prices,
/// per-player constraints. `nonflexible` records the load the prices were
/// derived from.
struct GameInstance {
    TimeGrid grid;
    PriceModel prices;
    std::vector<ConsumerSpec> consumers;
    std::vector<double> nonflexible;

    int players() const { return static_cast<int>(consumers.size()); }
    int periods() const { return grid.periods; }
    void validate() const;
};

constexpr double kFeasTol = 1e-8;

/// Prices induced by a quadratic provider cost on top of a non-flexible
/// baseline: the per-unit flexible price at t is
///   c_t(L) = [C(L_NF + L) - C(L_NF)] / L
/// which for quadratic C collapses to the affine form
///   c_t(L) = (c1 + 2 c2 L_NF,t) + c2 L.
/// The affine form is the definition here; the raw ratio has a removable
/// singularity at L = 0.
PriceModel derive_prices(const ProviderCost& cost, const std::vector<double>& nonflexible);

/// Aggregate load per period, L_t = sum_n l_{n,t}.
std::vector<double> aggregate(const LoadProfile& profile);

/// Player n's bill: sum_t l_{n,t} * c_t(L_t).
double bill(const GameInstance& game, const LoadProfile& profile, int n);

/// Total cost over all players, equal to sum_t L_t c_t(L_t).
double social_cost(const GameInstance& game, const LoadProfile& profile);
double social_cost(const PriceModel& prices, const LoadProfile& profile);

/// Marginal cost gamma_{n,t} = c_t(L_t) + l_{n,t} c_t'(L_t); component (n,t)
/// of the stacked-gradient operator F.
double marginal_cost(const GameInstance& game, const LoadProfile& profile, int n, int t);

/// Gradient of player n's bill with respect to their own row, evaluated at
/// `profile` with aggregate `agg` (avoids re-summing inside solver loops).
void bill_gradient(const GameInstance& game, const LoadProfile& profile,
                   const std::vector<double>& agg, int n, double* out);

/// Exact potential for affine prices:
///   Phi(x) = sum_t alpha_t L_t + (beta_t/2) (L_t^2 + sum_n l_{n,t}^2).
/// Unilateral bill differences equal potential differences.
double potential(const GameInstance& game, const LoadProfile& profile);

/// (a, M) = (2 min_t beta_t, 2 max_t beta_t): strong-stability constant and
/// gradient Lipschitz constant under affine prices.
std::pair<double, double> stability_constants(const GameInstance& game);

/// True when every row satisfies its ConsumerSpec within tol.
bool profile_feasible(const GameInstance& game, const LoadProfile& profile,
                      double tol = kFeasTol);

}  // namespace hbill
