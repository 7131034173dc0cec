#include "srdetect/calibrate.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace srdetect {

namespace {

double arl_at(double threshold, double theta_putative, const SolverConfig& config) {
    const GaussianModel model(theta_putative, theta_putative);
    KernelGrid grid = build_grid(model, threshold, config.n_nodes, config.scheme);
    return solve_arl(grid, config.initial_state);
}

}  // namespace

double threshold_from_zeta(double gamma, double theta_putative) {
    if (!(gamma > 1.0))
        throw std::invalid_argument("threshold_from_zeta: gamma must exceed 1");
    return zeta(theta_putative) * gamma;
}

Calibration calibrate_exact(double gamma, double theta_putative, double rel_tol,
                            const SolverConfig& config) {
    const double a_zeta = threshold_from_zeta(gamma, theta_putative);
    Calibration cal{gamma, theta_putative, a_zeta, std::nullopt, 0.0, 0};

    // ARL(A) is strictly increasing in A; bracket the root of ARL(A) - gamma.
    double lo = a_zeta / 2.0, hi = 2.0 * a_zeta;
    double f_lo = arl_at(lo, theta_putative, config) - gamma;
    double f_hi = arl_at(hi, theta_putative, config) - gamma;
    for (int expand = 0; expand < 8 && f_lo > 0.0; ++expand) {
        hi = lo;
        f_hi = f_lo;
        lo /= 2.0;
        f_lo = arl_at(lo, theta_putative, config) - gamma;
        ++cal.iterations;
    }
    for (int expand = 0; expand < 8 && f_hi < 0.0; ++expand) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = arl_at(hi, theta_putative, config) - gamma;
        ++cal.iterations;
    }
    if (f_lo > 0.0 || f_hi < 0.0) {
        std::ostringstream msg;
        msg << "calibrate_exact: failed to bracket ARL = " << gamma
            << " (last bracket [" << lo << ", " << hi << "] with ARL offsets [" << f_lo
            << ", " << f_hi << "])";
        throw std::runtime_error(msg.str());
    }

    double a = a_zeta, f = 0.0;
    constexpr int kMaxIterations = 60;
    while (cal.iterations < kMaxIterations) {
        // Prefer a secant step; fall back to bisection when it leaves the bracket.
        double candidate = lo - f_lo * (hi - lo) / (f_hi - f_lo);
        if (!(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
        a = candidate;
        f = arl_at(a, theta_putative, config) - gamma;
        ++cal.iterations;
        if (std::fabs(f) <= rel_tol * gamma) break;
        if (f < 0.0) {
            lo = a;
            f_lo = f;
        } else {
            hi = a;
            f_hi = f;
        }
    }
    cal.threshold_exact = a;
    cal.achieved_arl = f + gamma;
    if (std::fabs(f) > rel_tol * gamma) {
        std::ostringstream msg;
        msg << "calibrate_exact: no convergence after " << cal.iterations
            << " iterations (A = " << a << ", ARL = " << cal.achieved_arl << ")";
        throw std::runtime_error(msg.str());
    }
    return cal;
}

}  // namespace srdetect
