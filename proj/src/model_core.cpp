#include "sit/model_core.hpp"

#include <cmath>
#include <sstream>

namespace sit {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw ConfigError(what);
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

void validate(const ModelParams& p) {
    require(std::isfinite(p.r) && p.r > 0.0 && p.r < 1.0,
            "model: r must lie in (0, 1), got " + num(p.r));
    require(std::isfinite(p.rho) && p.rho > 0.0,
            "model: rho must be positive, got " + num(p.rho));
    require(std::isfinite(p.beta) && p.beta > 0.0,
            "model: beta must be positive, got " + num(p.beta));
    require(std::isfinite(p.mu_M) && p.mu_M > 0.0,
            "model: mu_M must be positive, got " + num(p.mu_M));
    require(std::isfinite(p.mu_F) && p.mu_F > 0.0,
            "model: mu_F must be positive, got " + num(p.mu_F));
}

void validate(const SterileParams& s) {
    require(std::isfinite(s.mu_S) && s.mu_S > 0.0,
            "sterile: mu_S must be positive, got " + num(s.mu_S));
    require(std::isfinite(s.gamma) && s.gamma > 0.0,
            "sterile: gamma must be positive, got " + num(s.gamma));
}

void validate_pair(const ModelParams& p, const SterileParams& s) {
    validate(p);
    validate(s);
    require(s.mu_S >= p.mu_M,
            "sterile: mu_S must be at least mu_M (sterile males die no slower), got mu_S = " +
                num(s.mu_S) + " < mu_M = " + num(p.mu_M));
}

ModelParams make_params(double r, double rho, double beta, double mu_M, double mu_F) {
    ModelParams p{r, rho, beta, mu_M, mu_F};
    validate(p);
    return p;
}

ModelParams make_params_sigma_k(double r, double rho, double sigma, double K,
                                double mu_M, double mu_F) {
    if (!(std::isfinite(sigma) && sigma > 0.0))
        throw ConfigError("model: sigma must be positive, got " + num(sigma));
    if (!(std::isfinite(K) && K > 0.0))
        throw ConfigError("model: K must be positive, got " + num(K));
    return make_params(r, rho, sigma / K, mu_M, mu_F);
}

OffspringNumbers offspring_numbers(const ModelParams& p) {
    validate(p);
    return {(1.0 - p.r) * p.rho / p.mu_F, p.r * p.rho / p.mu_M};
}

std::optional<Equilibrium> wild_equilibrium(const ModelParams& p) {
    const auto n = offspring_numbers(p);
    if (n.n_F <= 1.0) return std::nullopt;
    // M + F at equilibrium solves exp(-beta*(M+F)) = 1/n_F; the split is
    // proportional to (n_M, n_F).
    const double total = std::log(n.n_F) / p.beta;
    const double M_star = n.n_M / (n.n_F + n.n_M) * total;
    const double F_star = n.n_F / (n.n_F + n.n_M) * total;
    return Equilibrium{M_star, F_star};
}

Deriv2 rhs_wild(const SimState& s, const ModelParams& p) {
    const double births = p.rho * s.F * std::exp(-p.beta * (s.M + s.F));
    return {p.r * births - p.mu_M * s.M, (1.0 - p.r) * births - p.mu_F * s.F};
}

Deriv2 rhs_sit(const SimState& s, const ModelParams& p, const SterileParams& sp) {
    const double denom = s.M + sp.gamma * s.M_S;
    const double frac = denom > 0.0 ? s.M / denom : 0.0;
    const double births = p.rho * s.F * frac * std::exp(-p.beta * (s.M + s.F));
    return {p.r * births - p.mu_M * s.M, (1.0 - p.r) * births - p.mu_F * s.F};
}

}  // namespace sit
