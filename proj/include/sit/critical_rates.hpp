#pragma once

// Critical release rates and related scalar analysis: the threshold above
// which constant or periodic sterile releases drive the population extinct,
// the equilibria of the constant-release system, and admissible feedback
// gain intervals for the closed-loop laws.

#include <vector>

#include "sit/model_core.hpp"

namespace sit {

// Scalar root finding knobs shared by the solvers in this module.
struct RootFindConfig {
    double abs_tol = 1e-12;      // absolute tolerance on the root location
    int max_iter = 200;          // iteration cap before NumericError
    double bracket_growth = 2.0; // expansion factor when searching a bracket
};

// Two-sided interval (lo, hi), open at both ends unless stated otherwise.
struct Interval {
    double lo;
    double hi;
};

// Which stability argument the feedback gain is tuned for. Case1 keeps the
// female count nonincreasing across releases; Case2 contracts the quadratic
// form (M^2 + F^2)/2.
enum class GainCase { Case1, Case2 };

// Root of 1 + phi*(1 + sqrt(1 + 2/phi)) = b*exp(-2/(1 + sqrt(1 + 2/phi)))
// for b = n_F > 1. Throws ConfigError when b <= 1 (no viable population,
// nothing to suppress).
double phi_crit(double b, const RootFindConfig& cfg = {});

// Constant-release extinction threshold
//   2*(mu_S/(beta*gamma)) * phi_crit(n_F) / (1 + n_F/n_M).
double lambda_crit(const ModelParams& p, const SterileParams& sp,
                   const RootFindConfig& cfg = {});

// Positive equilibria of the constant-release system at rate lambda, sorted
// by M_star ascending. Size is 0, 1 or 2: none above lambda_crit, a tangent
// double root on the threshold (within a relative band of 1e-6), two below.
// Each root pairs F_star = (n_F/n_M) * M_star. lambda = 0 returns the wild
// equilibrium.
std::vector<Equilibrium> sit_equilibria(const ModelParams& p, const SterileParams& sp,
                                        double lambda, const RootFindConfig& cfg = {});

// Periodic-impulsive extinction threshold for period tau:
//   (cosh(mu_S*tau) - 1)/(mu_S*tau^2) * (1/(e*beta*gamma))
//     * min{2 n_M, 2 n_F, max(r, 1-r) * max(n_M/r, n_F/(1-r))}.
// Throws ConfigError when tau <= 0.
double lambda_per_crit(const ModelParams& p, const SterileParams& sp, double tau);

// Open interval of stabilizing feedback gains.
// Case1: (0, 1/n_F). Case2: (0, 2*(mu_M/rho)*((1-r)/r^2)*(sqrt(1 + (mu_F/mu_M)*(r/(1-r))^2) - 1)).
Interval feedback_gain_interval(const ModelParams& p, GainCase which);

// Time average of 1/m_S(t) over one period for the periodic sterile level
// sustained by releases of size tau*lambda every tau:
//   2*(cosh(mu_S*tau) - 1)/(mu_S*tau^2*lambda).
double mean_inverse_ms_per(double lambda, double tau, double mu_S);

}  // namespace sit
