#include "sit/critical_rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sit {

namespace {

// cosh(x) - 1 without cancellation for small x.
double cosh_m1(double x) {
    const double s = std::sinh(0.5 * x);
    return 2.0 * s * s;
}

template <class F>
double bisect(F f, double lo, double hi, const RootFindConfig& cfg, const char* what) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        std::ostringstream os;
        os << what << ": no sign change on [" << lo << ", " << hi << "]";
        throw NumericError(os.str());
    }
    for (int i = 0; i < cfg.max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0 || hi - lo < cfg.abs_tol) return mid;
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

void check_rootfind(const RootFindConfig& cfg) {
    if (!(cfg.abs_tol > 0.0) || cfg.max_iter < 1 || !(cfg.bracket_growth > 1.0))
        throw ConfigError(
            "rootfind: need abs_tol > 0, max_iter >= 1, bracket_growth > 1");
}

}  // namespace

double phi_crit(double b, const RootFindConfig& cfg) {
    check_rootfind(cfg);
    if (!(b > 1.0)) {
        std::ostringstream os;
        os << "phi_crit: requires a basic offspring number above 1, got " << b;
        throw ConfigError(os.str());
    }
    const auto g = [b](double phi) {
        const double s = std::sqrt(1.0 + 2.0 / phi);
        return 1.0 + phi * (1.0 + s) - b * std::exp(-2.0 / (1.0 + s));
    };
    // g < 0 near 0 (limit 1 - b) and grows without bound, so expand the upper
    // end until the sign flips.
    double lo = 1e-12;
    double hi = 1.0;
    int grow = 0;
    while (g(hi) < 0.0) {
        hi *= cfg.bracket_growth;
        if (++grow > cfg.max_iter) throw NumericError("phi_crit: bracket search failed");
    }
    return bisect(g, lo, hi, cfg, "phi_crit");
}

double lambda_crit(const ModelParams& p, const SterileParams& sp,
                   const RootFindConfig& cfg) {
    validate_pair(p, sp);
    const auto n = offspring_numbers(p);
    if (!(n.n_F > 1.0)) {
        std::ostringstream os;
        os << "lambda_crit: population not viable (n_F = " << n.n_F
           << " <= 1), no release threshold exists";
        throw ConfigError(os.str());
    }
    const double phi = phi_crit(n.n_F, cfg);
    return 2.0 * (sp.mu_S / (p.beta * sp.gamma)) * phi / (1.0 + n.n_F / n.n_M);
}

std::vector<Equilibrium> sit_equilibria(const ModelParams& p, const SterileParams& sp,
                                        double lambda, const RootFindConfig& cfg) {
    validate_pair(p, sp);
    check_rootfind(cfg);
    if (!(lambda >= 0.0)) throw ConfigError("sit_equilibria: lambda must be >= 0");
    const auto n = offspring_numbers(p);
    if (!(n.n_F > 1.0)) return {};
    const double ratio = n.n_F / n.n_M;

    if (lambda == 0.0) {
        const auto eq = wild_equilibrium(p);
        return {*eq};
    }

    // Equilibria in the male coordinate x solve
    //   f(x) = 1 + a/x - b*exp(-c*x) = 0
    // with a = gamma*lambda/mu_S, b = n_F, c = beta*(1 + n_F/n_M); the female
    // coordinate is (n_F/n_M)*x.
    const double a = sp.gamma * lambda / sp.mu_S;
    const double b = n.n_F;
    const double c = p.beta * (1.0 + ratio);
    const auto f = [a, b, c](double x) {
        return 1.0 + a / x - b * std::exp(-c * x);
    };

    // The root count follows the position of a*c/2 against phi_crit(b), with
    // a tangency band around equality.
    const double phi = 0.5 * a * c;
    const double phi_c = phi_crit(b, cfg);
    const double band = 1e-6;
    const double x_valley = (2.0 / c) / (1.0 + std::sqrt(1.0 + 4.0 / (a * c)));

    if (phi > phi_c * (1.0 + band)) return {};
    if (phi >= phi_c * (1.0 - band)) {
        return {Equilibrium{x_valley, ratio * x_valley}};
    }

    // Two roots. Every root satisfies a/(b-1) <= x <= ln(b)/c, with f positive
    // at both ends, and x_valley sits between the roots where f is negative.
    const double x_lo = a / (b - 1.0);
    const double x_hi = std::log(b) / c;
    if (!(f(x_valley) < 0.0)) {
        // Numerically tangent just outside the band.
        return {Equilibrium{x_valley, ratio * x_valley}};
    }
    const double root1 = bisect(f, x_lo, x_valley, cfg, "sit_equilibria");
    const double root2 = bisect(f, x_valley, x_hi, cfg, "sit_equilibria");
    return {Equilibrium{root1, ratio * root1}, Equilibrium{root2, ratio * root2}};
}

double lambda_per_crit(const ModelParams& p, const SterileParams& sp, double tau) {
    validate_pair(p, sp);
    if (!(tau > 0.0)) {
        std::ostringstream os;
        os << "lambda_per_crit: tau must be positive, got " << tau;
        throw ConfigError(os.str());
    }
    const auto n = offspring_numbers(p);
    const double shape = std::max(p.r, 1.0 - p.r) *
                         std::max(n.n_M / p.r, n.n_F / (1.0 - p.r));
    const double budget = std::min({2.0 * n.n_M, 2.0 * n.n_F, shape});
    const double e = std::exp(1.0);
    return cosh_m1(sp.mu_S * tau) / (sp.mu_S * tau * tau) * budget /
           (e * p.beta * sp.gamma);
}

Interval feedback_gain_interval(const ModelParams& p, GainCase which) {
    validate(p);
    const auto n = offspring_numbers(p);
    if (which == GainCase::Case1) {
        if (!(n.n_F > 1.0))
            throw ConfigError("feedback_gain_interval: requires n_F > 1");
        return {0.0, 1.0 / n.n_F};
    }
    const double q = (p.mu_F / p.mu_M) * std::pow(p.r / (1.0 - p.r), 2);
    const double hi = 2.0 * (p.mu_M / p.rho) * ((1.0 - p.r) / (p.r * p.r)) *
                      (std::sqrt(1.0 + q) - 1.0);
    return {0.0, hi};
}

double mean_inverse_ms_per(double lambda, double tau, double mu_S) {
    if (!(lambda > 0.0) || !(tau > 0.0) || !(mu_S > 0.0))
        throw ConfigError("mean_inverse_ms_per: lambda, tau, mu_S must be positive");
    return 2.0 * cosh_m1(mu_S * tau) / (mu_S * tau * tau * lambda);
}

}  // namespace sit
