#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "hbill/game.hpp"
#include "hbill/projection.hpp"
#include "hbill/rng.hpp"

namespace hbill {

struct SolverConfig {
    double eps_stop = 1e-3;          // stopping threshold on ||x^{k+1} - x^k||_2
    int k_max = 10000;
    std::optional<double> gamma;     // SIRD step; unset = auto a/(N M^2)
    bool record_history = false;
    bool record_potential_steps = false;  // CBRD: potential after every BR step
    bool parallel = true;            // use the OpenMP kernels where available
    double br_tol_factor = 0.01;     // inner BR tolerance = eps_stop * factor
};

struct HistoryEntry {
    int iteration = 0;
    double residual = 0.0;       // ||x^k - x^{k-1}||_2
    double social_cost = 0.0;
    double potential = std::numeric_limits<double>::quiet_NaN();  // affine only
};

struct SolveReport {
    LoadProfile profile;
    int iterations = 0;
    double final_residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::vector<HistoryEntry> history;        // when record_history
    std::vector<double> potential_steps;      // when record_potential_steps (CBRD)
};

/// Player n's bill-minimizing row against the others' aggregate s (length T).
/// Affine prices: exact separable-QP solution via the multiplier kernel.
/// General convex prices: inner projected gradient to br_tol.
std::vector<double> best_response(const GameInstance& game, int n,
                                  const std::vector<double>& s, double br_tol = 1e-8);

/// Deterministic feasible start: loads proportional to headroom,
/// lower + (E - sum lower) * (upper - lower) / sum(upper - lower), projected.
LoadProfile default_start(const GameInstance& game);

/// Uniform draw in the box [lower, upper] projected row-wise onto each
/// player's simplex; used for multi-start checks and stability sampling.
LoadProfile random_feasible_profile(const GameInstance& game, Rng& rng);

/// Cycling Best Response Dynamics (Alg. 1): players updated sequentially in
/// ascending order within each sweep; one iteration = one full sweep.
SolveReport solve_cbrd(const GameInstance& game, const LoadProfile& x0,
                       const SolverConfig& cfg);

/// Simultaneous Improving Response Dynamics (Alg. 2): every player takes one
/// projected gradient step from the common snapshot x^k. Auto step
/// gamma = a/(N M^2) needs affine prices; pass cfg.gamma explicitly otherwise.
/// cfg.parallel selects the OpenMP per-player kernel; the serial kernel is
/// the reference and both produce bitwise-identical iterates.
SolveReport solve_sird(const GameInstance& game, const LoadProfile& x0,
                       const SolverConfig& cfg);

/// Centralized social-cost minimizer: projected gradient on the joint
/// profile with backtracking (never accepts an SC increase), certified by
/// the variational-inequality fixed-point residual. The warm-start overload
/// guarantees SC(result) <= SC(x0).
SolveReport solve_optimal(const GameInstance& game, const SolverConfig& cfg);
SolveReport solve_optimal(const GameInstance& game, const LoadProfile& x0,
                          const SolverConfig& cfg);

/// max_n ||x_n - proj_n(x_n - grad_n b_n(x))||_2 — zero iff x is the NE.
double ne_residual(const GameInstance& game, const LoadProfile& profile);

/// Joint fixed-point residual ||x - proj(x - grad SC(x))||_2 of the optimum.
double opt_residual(const GameInstance& game, const LoadProfile& profile);

/// Reference NE: CBRD at eps_stop = 1e-10, k_max = 1e5 (unique by Theorem 1).
LoadProfile reference_ne(const GameInstance& game);

}  // namespace hbill
