#pragma once

// Core model types: parameter records, state, equilibria, and the
// right-hand sides of the wild and sterile-male-augmented dynamics.

#include <optional>
#include <stdexcept>
#include <string>

namespace sit {

// Configuration problems (bad parameters, bad scenario files). CLI maps these
// to exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (integrator blow-up, ambiguous classification). CLI maps
// these to exit code 2.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Vital rates and competition parameters of the wild population.
// beta may be given directly or derived as sigma/K.
struct ModelParams {
    double r;      // primary sex ratio, fraction of offspring that are male
    double rho;    // eggs per female per day
    double beta;   // competition coefficient per individual
    double mu_M;   // male death rate (1/day)
    double mu_F;   // female death rate (1/day)
};

// Sterile-male parameters.
struct SterileParams {
    double mu_S;   // sterile-male death rate (1/day)
    double gamma;  // sterile-male mating fitness relative to wild males
};

// Mean offspring per female (n_F) and per male (n_M) over a lifetime.
struct OffspringNumbers {
    double n_F;
    double n_M;
};

// Instantaneous population state (individuals per hectare).
struct SimState {
    double t = 0.0;
    double M = 0.0;    // wild males
    double F = 0.0;    // wild females
    double M_S = 0.0;  // sterile males
};

// A stationary point of the wild or controlled dynamics.
struct Equilibrium {
    double M_star;
    double F_star;
};

// Time derivatives of the wild components.
struct Deriv2 {
    double dM;
    double dF;
};

// Throwing validators; every public entry point validates its inputs.
void validate(const ModelParams& p);
void validate(const SterileParams& s);
void validate_pair(const ModelParams& p, const SterileParams& s);

// Factories. The sigma/K form computes beta = sigma/K; the direct form takes
// beta as given. Both validate.
ModelParams make_params(double r, double rho, double beta, double mu_M, double mu_F);
ModelParams make_params_sigma_k(double r, double rho, double sigma, double K,
                                double mu_M, double mu_F);

OffspringNumbers offspring_numbers(const ModelParams& p);

// Unique positive equilibrium of the wild dynamics when n_F > 1, otherwise
// nothing (the population is not viable and only extinction remains).
std::optional<Equilibrium> wild_equilibrium(const ModelParams& p);

// Wild dynamics: births r*rho*F*exp(-beta(M+F)) split by sex, linear deaths.
Deriv2 rhs_wild(const SimState& s, const ModelParams& p);

// Controlled dynamics: births additionally scaled by M/(M + gamma*M_S).
// With no males at all (M = M_S = 0) the fraction is taken as 0: no mating.
Deriv2 rhs_sit(const SimState& s, const ModelParams& p, const SterileParams& sp);

}  // namespace sit
