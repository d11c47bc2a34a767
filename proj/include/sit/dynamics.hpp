#pragma once

// Time integration of the wild and controlled systems, with optional
// impulsive sterile releases, plus closed forms used as references:
// the periodic sterile level and the linear comparison envelope.

#include <functional>
#include <utility>
#include <vector>

#include "sit/model_core.hpp"

namespace sit {

enum class Method { RK4, RK45 };

struct IntegratorConfig {
    Method method = Method::RK4;
    double max_step = 0.1;   // step (RK4) or initial/maximum step (RK45)
    double rel_tol = 1e-9;   // RK45 only
    double abs_tol = 1e-9;   // RK45 only
};

// Which vector field to integrate. SitConstant adds dM_S = lambda - mu_S*M_S;
// SitImpulsive uses dM_S = -mu_S*M_S between jumps.
enum class RhsKind { Wild, SitConstant, SitImpulsive };

struct System {
    RhsKind kind = RhsKind::Wild;
    ModelParams mp{};
    SterileParams sp{};
    double lambda_const = 0.0;  // SitConstant only
};

// One impulsive release: at t = n*tau the sterile pool jumps by tau*lambda.
// state_pre is the state immediately before the jump, which is what any
// feedback law reads.
struct ImpulseEvent {
    int n;
    double t;
    double lambda;      // release rate applied over the slot, 0 if skipped
    SimState state_pre;
};

// Sampled solution. Sample time stamps are strictly increasing; the sample
// at a release instant is the post-jump state, the pre-jump state lives in
// the matching event.
struct Trajectory {
    std::vector<SimState> samples;
    std::vector<ImpulseEvent> events;
};

// Release sizes for integrate(): called at each t = n*tau with the pre-jump
// state, returns the rate lambda_n (the jump is tau*lambda_n).
struct ImpulseSchedule {
    double tau;
    std::function<double(int n, const SimState& pre)> amount;
};

// Integrate sys from initial for `horizon` days. schedule may be null (no
// impulses). Components that dip into (-1e-12, 0) are clamped to 0; anything
// more negative raises NumericError.
Trajectory integrate(const System& sys, const SimState& initial, double horizon,
                     const ImpulseSchedule* schedule, const IntegratorConfig& cfg = {});

// Periodic sterile level sustained by impulses tau*lambda every tau, at time
// t after a release: tau*lambda*exp(-mu_S*(t mod tau)) / (1 - exp(-mu_S*tau)).
double ms_per(double t, double lambda, double tau, double mu_S);

// Linear comparison envelope started from (M0, F0): an upper bound for the
// controlled dynamics over one inter-release interval when the sterile level
// stays at or above (1-k)/(gamma*k) * M.
//   F'(s) = exp((-mu_F + (1-r)*rho*k) * s) * F0
//   M'(s) = exp(-mu_M*s)*M0 + (r*rho*k/D)*(exp((-mu_F+(1-r)*rho*k)*s) - exp(-mu_M*s))*F0
// with D = mu_M - mu_F + (1-r)*rho*k.
std::pair<double, double> super_solution(double M0, double F0, double k,
                                         const ModelParams& p, double s);

}  // namespace sit
