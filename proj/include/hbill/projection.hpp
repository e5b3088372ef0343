#pragma once

#include <vector>

#include "hbill/game.hpp"

namespace hbill {

/// Feasible set of one consumer: {x : sum_t x_t = E, lower <= x <= upper}.
struct CappedSimplex {
    double E = 0.0;
    std::vector<double> lower;
    std::vector<double> upper;

    CappedSimplex() = default;
    CappedSimplex(double energy, std::vector<double> lo, std::vector<double> hi)
        : E(energy), lower(std::move(lo)), upper(std::move(hi)) {}
    explicit CappedSimplex(const ConsumerSpec& c)
        : E(c.energy), lower(c.lower), upper(c.upper) {}

    int periods() const { return static_cast<int>(lower.size()); }
    void validate() const;
};

constexpr double kProjTol = 1e-10;

namespace detail {

/// Solves sum_t clamp(a_t + b_t * lam, lo_t, hi_t) = target for the scalar
/// lam, writing the clamped coordinates to out. Requires b_t > 0 on free
/// coordinates, so the sum is nondecreasing in lam. Pinned coordinates
/// (lo == hi) are fixed before the search. Exact breakpoint bracketing is
/// the reference path; a 100-step bisection takes over if the bracketing
/// residual is off (pathological ties).
///
/// Both the Euclidean projection (a = point, b = 1) and the affine best
/// response (a_t = -(alpha_t + beta_t s_t)/(2 beta_t), b_t = 1/(2 beta_t))
/// reduce to this kernel.
void clamp_sum_solve(const double* a, const double* b, const double* lo, const double* hi,
                     int T, double target, double* out);

}  // namespace detail

/// Euclidean projection onto the capped simplex: argmin_{x in set} |x - p|_2.
/// KKT: x_t = clamp(p_t - nu, lower_t, upper_t) for the multiplier nu making
/// the sum hit E, found by clamp_sum_solve.
std::vector<double> project(const CappedSimplex& set, const std::vector<double>& point);

/// In-place variant over raw rows (solver hot path).
void project_inplace(const CappedSimplex& set, const double* point, double* out);

/// |sum x - E| <= tol and bounds within tol, both absolute.
bool is_feasible(const CappedSimplex& set, const std::vector<double>& point,
                 double tol = kFeasTol);

}  // namespace hbill
