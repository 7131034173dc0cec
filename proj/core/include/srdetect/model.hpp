#pragma once

#include <cstdint>

namespace srdetect {

/// Gaussian mean-shift scenario: observations are N(0,1) before the change
/// and N(theta_true, 1) after it. The detector is built with the putative
/// mean theta_putative, which may differ from theta_true.
struct GaussianModel {
    double theta_true;
    double theta_putative;

    /// Throws std::invalid_argument if theta_putative == 0 (the likelihood
    /// ratio degenerates to the constant 1 there).
    GaussianModel(double theta_true, double theta_putative);
};

enum class Regime { PreChange, PostChange };

/// Distribution of the one-observation likelihood ratio under the selected
/// regime. PreChange does not depend on theta_true.
struct LrLaw {
    GaussianModel model;
    Regime regime;
};

/// Standard normal cdf, absolute error below 1e-15 (erfc based).
double std_normal_cdf(double x) noexcept;

/// Standard normal density.
double std_normal_pdf(double x) noexcept;

/// Inverse of std_normal_cdf on (0,1); returns -inf/+inf at 0/1.
/// Wichura's AS241 rational approximations, |relative error| < 1e-15.
/// Throws std::domain_error outside [0,1].
double std_normal_quantile(double p);

/// One-observation likelihood ratio exp(tp*x - tp^2/2).
/// Throws std::invalid_argument if theta_putative == 0.
double lr_step(double x, double theta_putative);

/// log of lr_step; cheap path for CUSUM updates.
double log_lr_step(double x, double theta_putative);

/// cdf of the likelihood ratio under law.regime; 0 for t < 0.
double lr_cdf(double t, const LrLaw& law) noexcept;

/// Density of the likelihood ratio under law.regime; 0 for t <= 0.
double lr_pdf(double t, const LrLaw& law) noexcept;

inline constexpr std::int64_t kZetaDefaultTerms = 1'000'000;

/// Limiting average exponential overshoot of the log-LR random walk,
///   zeta = (2/tp^2) * exp(-2 * sum_{k>=1} Phi(-(tp/2) sqrt(k)) / k),
/// evaluated as a partial sum with n_terms terms. The series converges
/// exponentially; the default term count is far more than needed for
/// |tp| >= 0.1. Throws std::invalid_argument if theta_putative == 0 or
/// n_terms < 1.
double zeta(double theta_putative, std::int64_t n_terms = kZetaDefaultTerms);

}  // namespace srdetect
