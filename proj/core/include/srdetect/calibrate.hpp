#pragma once

#include <optional>

#include "srdetect/solver.hpp"

namespace srdetect {

struct Calibration {
    double gamma;
    double theta_putative;
    double threshold_asymptotic;            ///< zeta(theta_putative) * gamma
    std::optional<double> threshold_exact;  ///< present after calibrate_exact
    double achieved_arl;                    ///< solver ARL at the selected threshold
    int iterations = 0;                     ///< root-finder iterations used
};

/// Asymptotic threshold A = zeta * gamma. Throws std::invalid_argument if
/// gamma <= 1 or theta_putative == 0.
double threshold_from_zeta(double gamma, double theta_putative);

/// Finds A with |ARL(A)/gamma - 1| <= rel_tol by bracketed root-finding on
/// the monotone map A -> ARL(A), starting from the bracket
/// [zeta*gamma/2, 2*zeta*gamma] (expanded if needed). Bisection with a
/// secant step when the secant iterate stays inside the bracket.
/// Throws std::runtime_error with the last iterates if no bracket can be
/// established.
Calibration calibrate_exact(double gamma, double theta_putative, double rel_tol = 1e-3,
                            const SolverConfig& config = {});

}  // namespace srdetect
