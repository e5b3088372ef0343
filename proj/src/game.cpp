#include "hbill/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hbill {

bool ConvexPrice::well_formed(int samples) const {
    if (!value || !first || !second || domain_upper <= 0.0) return false;
    for (int i = 0; i <= samples; ++i) {
        const double L = domain_upper * i / samples;
        if (!(first(L) > 0.0)) return false;
        if (second(L) < 0.0) return false;
    }
    return true;
}

bool PriceModel::all_affine() const {
    for (const auto& p : per_period)
        if (!std::holds_alternative<AffinePrice>(p)) return false;
    return true;
}

bool PriceModel::affine_increasing() const {
    for (const auto& p : per_period) {
        const auto* a = std::get_if<AffinePrice>(&p);
        if (!a || !a->increasing_positive()) return false;
    }
    return !per_period.empty();
}

const AffinePrice& PriceModel::affine_at(int t) const {
    const auto* a = std::get_if<AffinePrice>(&per_period[t]);
    if (!a) throw std::logic_error("PriceModel: period " + std::to_string(t) + " is not affine");
    return *a;
}

double PriceModel::value(int t, double load) const {
    return std::visit([load](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AffinePrice>) return p.value(load);
        else return p.value(load);
    }, per_period[t]);
}

double PriceModel::first(int t, double load) const {
    return std::visit([load](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AffinePrice>) { (void)load; return p.beta; }
        else return p.first(load);
    }, per_period[t]);
}

double PriceModel::second(int t, double load) const {
    return std::visit([load](const auto& p) -> double {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, AffinePrice>) { (void)load; return 0.0; }
        else return p.second(load);
    }, per_period[t]);
}

void ConsumerSpec::validate() const {
    const int T = periods();
    if (T == 0) throw std::invalid_argument("ConsumerSpec: empty bounds");
    if (static_cast<int>(upper.size()) != T)
        throw std::invalid_argument("ConsumerSpec: lower/upper length mismatch");
    double lo = 0.0, hi = 0.0;
    for (int t = 0; t < T; ++t) {
        if (lower[t] < 0.0)
            throw std::invalid_argument("ConsumerSpec: negative lower bound at period " +
                                        std::to_string(t));
        if (upper[t] < lower[t])
            throw std::invalid_argument("ConsumerSpec: upper < lower at period " +
                                        std::to_string(t));
        lo += lower[t];
        hi += upper[t];
    }
    if (energy < lo - kFeasTol || energy > hi + kFeasTol)
        throw std::invalid_argument("ConsumerSpec: energy target " + std::to_string(energy) +
                                    " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
}

void LoadProfile::set_row(int n, const std::vector<double>& values) {
    if (static_cast<int>(values.size()) != periods_)
        throw std::invalid_argument("LoadProfile::set_row: length mismatch");
    std::copy(values.begin(), values.end(), row(n));
}

double norm2_diff(const LoadProfile& a, const LoadProfile& b) {
    double s = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double norm_inf_diff(const LoadProfile& a, const LoadProfile& b) {
    double m = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i)
        m = std::max(m, std::abs(da[i] - db[i]));
    return m;
}

void GameInstance::validate() const {
    grid.validate();
    if (consumers.empty()) throw std::invalid_argument("GameInstance: no players");
    if (prices.periods() != grid.periods)
        throw std::invalid_argument("GameInstance: price model covers " +
                                    std::to_string(prices.periods()) + " periods, grid has " +
                                    std::to_string(grid.periods));
    if (!nonflexible.empty() && static_cast<int>(nonflexible.size()) != grid.periods)
        throw std::invalid_argument("GameInstance: nonflexible length mismatch");
    for (std::size_t n = 0; n < consumers.size(); ++n) {
        if (consumers[n].periods() != grid.periods)
            throw std::invalid_argument("GameInstance: consumer " + std::to_string(n) +
                                        " bound length mismatch");
        consumers[n].validate();
    }
}

PriceModel derive_prices(const ProviderCost& cost, const std::vector<double>& nonflexible) {
    if (nonflexible.empty()) throw std::invalid_argument("derive_prices: empty baseline");
    PriceModel model;
    model.per_period.reserve(nonflexible.size());
    for (double lnf : nonflexible) {
        if (lnf < 0.0) throw std::invalid_argument("derive_prices: negative baseline load");
        AffinePrice p;
        p.alpha = cost.c1 + 2.0 * cost.c2 * lnf;
        p.beta = cost.c2;
        model.per_period.push_back(p);
    }
    return model;
}

std::vector<double> aggregate(const LoadProfile& profile) {
    std::vector<double> agg(profile.periods(), 0.0);
    for (int n = 0; n < profile.players(); ++n) {
        const double* r = profile.row(n);
        for (int t = 0; t < profile.periods(); ++t) agg[t] += r[t];
    }
    return agg;
}

double bill(const GameInstance& game, const LoadProfile& profile, int n) {
    const auto agg = aggregate(profile);
    double b = 0.0;
    for (int t = 0; t < profile.periods(); ++t)
        b += profile.at(n, t) * game.prices.value(t, agg[t]);
    return b;
}

double social_cost(const PriceModel& prices, const LoadProfile& profile) {
    const auto agg = aggregate(profile);
    double s = 0.0;
    for (int t = 0; t < profile.periods(); ++t)
        s += agg[t] * prices.value(t, agg[t]);
    return s;
}

double social_cost(const GameInstance& game, const LoadProfile& profile) {
    return social_cost(game.prices, profile);
}

double marginal_cost(const GameInstance& game, const LoadProfile& profile, int n, int t) {
    const auto agg = aggregate(profile);
    return game.prices.value(t, agg[t]) + profile.at(n, t) * game.prices.first(t, agg[t]);
}

void bill_gradient(const GameInstance& game, const LoadProfile& profile,
                   const std::vector<double>& agg, int n, double* out) {
    for (int t = 0; t < profile.periods(); ++t)
        out[t] = game.prices.value(t, agg[t]) + profile.at(n, t) * game.prices.first(t, agg[t]);
}

double potential(const GameInstance& game, const LoadProfile& profile) {
    if (!game.prices.all_affine())
        throw std::logic_error("potential: defined for affine prices only");
    const auto agg = aggregate(profile);
    double phi = 0.0;
    for (int t = 0; t < profile.periods(); ++t) {
        const auto& p = game.prices.affine_at(t);
        double sq = 0.0;
        for (int n = 0; n < profile.players(); ++n) {
            const double l = profile.at(n, t);
            sq += l * l;
        }
        phi += p.alpha * agg[t] + 0.5 * p.beta * (agg[t] * agg[t] + sq);
    }
    return phi;
}

std::pair<double, double> stability_constants(const GameInstance& game) {
    if (!game.prices.affine_increasing())
        throw std::logic_error("stability_constants: needs increasing affine prices");
    double bmin = std::numeric_limits<double>::infinity();
    double bmax = 0.0;
    for (int t = 0; t < game.periods(); ++t) {
        const double b = game.prices.affine_at(t).beta;
        bmin = std::min(bmin, b);
        bmax = std::max(bmax, b);
    }
    return {2.0 * bmin, 2.0 * bmax};
}

bool profile_feasible(const GameInstance& game, const LoadProfile& profile, double tol) {
    if (profile.players() != game.players() || profile.periods() != game.periods())
        return false;
    for (int n = 0; n < game.players(); ++n) {
        const auto& c = game.consumers[n];
        double sum = 0.0;
        for (int t = 0; t < game.periods(); ++t) {
            const double l = profile.at(n, t);
            if (l < c.lower[t] - tol || l > c.upper[t] + tol) return false;
            sum += l;
        }
        if (std::abs(sum - c.energy) > tol) return false;
    }
    return true;
}

}  // namespace hbill
