#pragma once

// Campaign driver: runs a release policy against the controlled dynamics
// until the female population falls under an elimination threshold, and
// summarizes cost and duration. Also hosts the constant-release experiment
// and Lyapunov-style diagnostics along a trajectory.

#include <utility>
#include <vector>

#include "sit/control_policies.hpp"
#include "sit/dynamics.hpp"

namespace sit {

struct CampaignConfig {
    ModelParams mp{};
    SterileParams sp{};
    ReleasePolicy policy{};
    double tau = 7.0;
    SimState initial{};                  // typically the wild equilibrium, M_S = 0
    double elimination_threshold = 0.1;  // females per hectare
    double max_horizon = 2500.0;         // days; rounded up to a multiple of tau
};

struct CampaignMetrics {
    double cumulative_released = 0.0;  // sum of tau*lambda_n over applied releases
    int nonzero_releases = 0;
    bool eliminated = false;
    int weeks_to_elimination = -1;     // ceil(t/7) at the stopping instant
    double t_elimination = -1.0;
};

// Default campaign: start at the wild equilibrium with no sterile males.
CampaignConfig make_default_config(const ModelParams& p, const SterileParams& sp,
                                   const ReleasePolicy& pol, double tau);

// Release-by-release simulation. Releases happen at t = n*tau, n = 0, 1, ...;
// the policy reads the pre-jump state. The campaign stops at the first
// release instant where F is already under the threshold, and no release is
// applied there. Sparse policies measure at window starts t = n*p*tau.
std::pair<Trajectory, CampaignMetrics> run_campaign(const CampaignConfig& cfg,
                                                    const IntegratorConfig& icfg = {});

enum class LyapunovKind { V_F, V_quadratic };

// The chosen function evaluated along the trajectory samples, as (t, value).
// V_F is F itself; V_quadratic is (M^2 + F^2)/2.
std::vector<std::pair<double, double>> lyapunov_series(const Trajectory& traj,
                                                       LyapunovKind kind);

// Same function evaluated at the pre-jump state of every release instant.
std::vector<std::pair<double, double>> lyapunov_at_releases(const Trajectory& traj,
                                                            LyapunovKind kind);

enum class ConstOutcome { ExtinctionReached, PositiveAttractor };

struct ConstantReleaseResult {
    ConstOutcome outcome;
    Equilibrium attractor{};  // valid when outcome == PositiveAttractor
    SimState final_state{};
};

// Integrate the constant-release system for `horizon` days and classify the
// endpoint: extinction when F ends below `threshold`, otherwise the nearest
// equilibrium of sit_equilibria within 1% relative distance per component.
// An endpoint near neither raises NumericError.
ConstantReleaseResult constant_release_experiment(const ModelParams& p,
                                                  const SterileParams& sp,
                                                  double lambda, const SimState& initial,
                                                  double horizon, double threshold = 0.1,
                                                  const IntegratorConfig& icfg = {});

}  // namespace sit
