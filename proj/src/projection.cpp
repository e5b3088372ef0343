#include "hbill/projection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace hbill {

void CappedSimplex::validate() const {
    const int T = periods();
    if (T == 0) throw std::invalid_argument("CappedSimplex: empty bounds");
    if (static_cast<int>(upper.size()) != T)
        throw std::invalid_argument("CappedSimplex: lower/upper length mismatch");
    double lo = 0.0, hi = 0.0;
    for (int t = 0; t < T; ++t) {
        if (upper[t] < lower[t])
            throw std::invalid_argument("CappedSimplex: upper < lower at period " +
                                        std::to_string(t));
        lo += lower[t];
        hi += upper[t];
    }
    if (E < lo - kFeasTol || E > hi + kFeasTol)
        throw std::invalid_argument("CappedSimplex: target sum " + std::to_string(E) +
                                    " outside [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
}

namespace detail {

namespace {

double clamp_sum(const double* a, const double* b, const double* lo, const double* hi,
                 const int* free_idx, int nfree, double lam) {
    double s = 0.0;
    for (int i = 0; i < nfree; ++i) {
        const int t = free_idx[i];
        s += std::clamp(a[t] + b[t] * lam, lo[t], hi[t]);
    }
    return s;
}

}  // namespace

void clamp_sum_solve(const double* a, const double* b, const double* lo, const double* hi,
                     int T, double target, double* out) {
    // Pin coordinates with lo == hi, shrink the target accordingly.
    std::vector<int> free_idx;
    free_idx.reserve(T);
    double rem = target;
    for (int t = 0; t < T; ++t) {
        if (lo[t] == hi[t]) {
            out[t] = lo[t];
            rem -= lo[t];
        } else {
            if (!(b[t] > 0.0))
                throw std::invalid_argument("clamp_sum_solve: nonpositive slope at " +
                                            std::to_string(t));
            free_idx.push_back(t);
        }
    }
    const int F = static_cast<int>(free_idx.size());
    if (F == 0) {
        if (std::abs(rem) > kFeasTol * std::max(1.0, std::abs(target)))
            throw std::invalid_argument("clamp_sum_solve: all coordinates pinned, target off by " +
                                        std::to_string(rem));
        return;
    }

    double sum_lo = 0.0, sum_hi = 0.0;
    for (int i = 0; i < F; ++i) {
        sum_lo += lo[free_idx[i]];
        sum_hi += hi[free_idx[i]];
    }
    const double slack = kFeasTol * std::max(1.0, std::abs(rem));
    if (rem < sum_lo - slack || rem > sum_hi + slack)
        throw std::invalid_argument("clamp_sum_solve: target " + std::to_string(rem) +
                                    " outside feasible range [" + std::to_string(sum_lo) +
                                    ", " + std::to_string(sum_hi) + "]");
    rem = std::clamp(rem, sum_lo, sum_hi);

    // Breakpoints of lam where some coordinate enters/leaves its bound.
    std::vector<double> bp;
    bp.reserve(2 * F);
    for (int i = 0; i < F; ++i) {
        const int t = free_idx[i];
        bp.push_back((lo[t] - a[t]) / b[t]);
        bp.push_back((hi[t] - a[t]) / b[t]);
    }
    std::sort(bp.begin(), bp.end());

    auto eval = [&](double lam) {
        return clamp_sum(a, b, lo, hi, free_idx.data(), F, lam);
    };

    // S(bp.front()) = sum_lo, S(bp.back()) = sum_hi; bracket rem between
    // consecutive breakpoints, then solve the linear segment exactly.
    double lam;
    if (rem <= sum_lo) {
        lam = bp.front();
    } else if (rem >= sum_hi) {
        lam = bp.back();
    } else {
        std::size_t ilo = 0, ihi = bp.size() - 1;
        while (ihi - ilo > 1) {
            const std::size_t mid = (ilo + ihi) / 2;
            if (eval(bp[mid]) < rem)
                ilo = mid;
            else
                ihi = mid;
        }
        const double s_lo = eval(bp[ilo]);
        const double s_hi = eval(bp[ihi]);
        if (s_hi > s_lo)
            lam = bp[ilo] + (rem - s_lo) * (bp[ihi] - bp[ilo]) / (s_hi - s_lo);
        else
            lam = bp[ilo];
    }

    // Newton polish on the interior slope; repairs interpolation rounding.
    {
        double s = eval(lam);
        double m = 0.0;
        for (int i = 0; i < F; ++i) {
            const int t = free_idx[i];
            const double v = a[t] + b[t] * lam;
            if (v > lo[t] && v < hi[t]) m += b[t];
        }
        if (m > 0.0) lam += (rem - s) / m;
    }

    if (std::abs(eval(lam) - rem) > kProjTol * std::max(1.0, std::abs(rem))) {
        // Bisection fallback on an expanded bracket.
        double blo = bp.front() - 1.0, bhi = bp.back() + 1.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (blo + bhi);
            if (eval(mid) < rem)
                blo = mid;
            else
                bhi = mid;
        }
        lam = 0.5 * (blo + bhi);
    }

    for (int i = 0; i < F; ++i) {
        const int t = free_idx[i];
        out[t] = std::clamp(a[t] + b[t] * lam, lo[t], hi[t]);
    }
}

}  // namespace detail

std::vector<double> project(const CappedSimplex& set, const std::vector<double>& point) {
    if (static_cast<int>(point.size()) != set.periods())
        throw std::invalid_argument("project: point length mismatch");
    set.validate();
    std::vector<double> out(point.size());
    project_inplace(set, point.data(), out.data());
    return out;
}

void project_inplace(const CappedSimplex& set, const double* point, double* out) {
    const int T = set.periods();
    // x_t = clamp(p_t - nu, lo, hi); substitute lam = -nu to match the
    // increasing-slope kernel convention.
    static thread_local std::vector<double> ones;
    if (static_cast<int>(ones.size()) < T) ones.assign(T, 1.0);
    detail::clamp_sum_solve(point, ones.data(), set.lower.data(), set.upper.data(), T,
                            set.E, out);
}

bool is_feasible(const CappedSimplex& set, const std::vector<double>& point, double tol) {
    if (static_cast<int>(point.size()) != set.periods()) return false;
    double s = 0.0;
    for (int t = 0; t < set.periods(); ++t) {
        if (point[t] < set.lower[t] - tol || point[t] > set.upper[t] + tol) return false;
        s += point[t];
    }
    return std::abs(s - set.E) <= tol;
}

}  // namespace hbill
