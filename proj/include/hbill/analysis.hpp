#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "hbill/game.hpp"

namespace hbill {

/// Theorem 2 analytics: per-period smoothness numbers, the applicability
/// condition (8), and the two closed-form PoA bounds (9) and (10).
struct PoaBoundReport {
    std::vector<double> phi;    // phi_t = (1 + alpha_t/(beta_t Lbar_t))^2
    std::vector<double> ratio;  // r_t = alpha_t / (beta_t Lbar_t)
    std::vector<double> lbar;   // Lbar_t = sum_n upper_{n,t}
    int t0 = 0;                 // argmin_t r_t
    bool condition_holds = false;          // (8): phi_t <= phi_t0 + 2 + sqrt(1+phi_t0)
    double bound_tight = 0.0;              // Eq. (9)
    double bound_simplified = 0.0;         // Eq. (10), always >= Eq. (9)
    double empirical_poa = std::numeric_limits<double>::quiet_NaN();
};

/// Computes the report for an affine-priced game. Errors when any Lbar_t = 0
/// (the bound is undefined for that period) or prices are not affine.
PoaBoundReport poa_bound(const GameInstance& game);

/// SC(ne)/SC(opt); errors when SC(opt) <= 0.
double empirical_poa(const GameInstance& game, const LoadProfile& ne, const LoadProfile& opt);

/// Appendix B intermediates, exposed so the algebra chain
/// lambda_star(mu_star(phi), r) / (1 - mu_star(phi)) = Eq. (9) is testable.
double poa_mu_star(double phi);
double poa_lambda_star(double mu, double r);

struct StabilityReport {
    bool passes = false;
    double min_lhs = std::numeric_limits<double>::infinity();
    int samples = 0;
};

/// Samples the Eq. (7) strong-stability inequality
///   2 c_t'(L_t) (1 - (c_t''(L_t)/(2 c_t'(L_t)))^2 |x_t|_2^2) >= a
/// at random feasible profiles (uniform box draws projected row-wise).
/// Sampling is a falsifier search, not a proof; per-sample seeds are derived
/// from `seed`, so results are reproducible and thread-count independent.
StabilityReport check_strong_stability(const GameInstance& game, double a, int samples,
                                       std::uint64_t seed, bool parallel = true);

}  // namespace hbill
