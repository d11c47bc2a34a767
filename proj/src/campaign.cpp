#include "sit/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sit {

namespace {

double lyapunov_value(const SimState& s, LyapunovKind kind) {
    return kind == LyapunovKind::V_F ? s.F : 0.5 * (s.M * s.M + s.F * s.F);
}

}  // namespace

CampaignConfig make_default_config(const ModelParams& p, const SterileParams& sp,
                                   const ReleasePolicy& pol, double tau) {
    const auto eq = wild_equilibrium(p);
    if (!eq)
        throw ConfigError(
            "campaign: wild population not viable (n_F <= 1), nothing to suppress");
    CampaignConfig cfg;
    cfg.mp = p;
    cfg.sp = sp;
    cfg.policy = pol;
    cfg.tau = tau;
    cfg.initial = SimState{0.0, eq->M_star, eq->F_star, 0.0};
    return cfg;
}

std::pair<Trajectory, CampaignMetrics> run_campaign(const CampaignConfig& cfg,
                                                    const IntegratorConfig& icfg) {
    validate_policy(cfg.policy, cfg.mp, cfg.sp, cfg.tau);
    if (!(cfg.elimination_threshold > 0.0))
        throw ConfigError("campaign: elimination threshold must be positive");
    if (!(cfg.max_horizon > 0.0))
        throw ConfigError("campaign: max_horizon must be positive");
    if (!(cfg.initial.M >= 0.0 && cfg.initial.F >= 0.0 && cfg.initial.M_S >= 0.0))
        throw ConfigError("campaign: initial state must be componentwise >= 0");

    // The horizon is rounded up to a whole number of release slots.
    const auto nslots = static_cast<long long>(
        std::ceil(cfg.max_horizon / cfg.tau - 1e-9));

    IntegratorConfig eff = icfg;
    eff.max_step = std::min(icfg.max_step, cfg.tau / 10.0);

    System sys;
    sys.kind = RhsKind::SitImpulsive;
    sys.mp = cfg.mp;
    sys.sp = cfg.sp;

    const bool feedback = cfg.policy.kind != PolicyKind::OpenLoop;
    const double t0 = cfg.initial.t;

    Trajectory traj;
    CampaignMetrics metrics;
    SimState state = cfg.initial;
    MeasurementRecord meas;

    auto finish = [&](double t_elim) {
        metrics.eliminated = true;
        metrics.t_elimination = t_elim;
        metrics.weeks_to_elimination =
            static_cast<int>(std::ceil(t_elim / 7.0 - 1e-9));
    };

    for (long long n = 0; n < nslots; ++n) {
        // state is the pre-release value at t = n*tau.
        if (state.F < cfg.elimination_threshold) {
            finish(state.t);
            break;
        }
        const int m = static_cast<int>(n % cfg.policy.p);
        if (feedback && m == 0) {
            meas = MeasurementRecord{state.t, state.M, state.F, state.M_S, {}};
        }
        double lam = 0.0;
        switch (cfg.policy.kind) {
            case PolicyKind::OpenLoop:
                lam = cfg.policy.lambda_const;
                break;
            case PolicyKind::ClosedLoopSync:
            case PolicyKind::ClosedLoopSparse:
                lam = sparse_release(meas, m, cfg.policy.k, cfg.mp, cfg.sp, cfg.tau);
                break;
            case PolicyKind::Mixed:
                lam = mixed_release(meas, m, cfg.policy.k, cfg.mp, cfg.sp, cfg.tau,
                                    cfg.policy.lambda_bar);
                break;
        }
        if (feedback) meas.past_releases.push_back(lam);
        if (lam > 0.0) ++metrics.nonzero_releases;
        metrics.cumulative_released += cfg.tau * lam;

        traj.events.push_back(ImpulseEvent{static_cast<int>(n), state.t, lam, state});
        state.M_S += cfg.tau * lam;
        traj.samples.push_back(state);

        Trajectory leg = integrate(sys, state, cfg.tau, nullptr, eff);
        for (std::size_t i = 1; i + 1 < leg.samples.size(); ++i)
            traj.samples.push_back(leg.samples[i]);
        state = leg.samples.back();
        state.t = t0 + static_cast<double>(n + 1) * cfg.tau;
    }
    if (!metrics.eliminated && state.F < cfg.elimination_threshold) finish(state.t);
    traj.samples.push_back(state);
    return {std::move(traj), metrics};
}

std::vector<std::pair<double, double>> lyapunov_series(const Trajectory& traj,
                                                       LyapunovKind kind) {
    std::vector<std::pair<double, double>> out;
    out.reserve(traj.samples.size());
    for (const auto& s : traj.samples) out.emplace_back(s.t, lyapunov_value(s, kind));
    return out;
}

std::vector<std::pair<double, double>> lyapunov_at_releases(const Trajectory& traj,
                                                            LyapunovKind kind) {
    std::vector<std::pair<double, double>> out;
    out.reserve(traj.events.size());
    for (const auto& e : traj.events)
        out.emplace_back(e.t, lyapunov_value(e.state_pre, kind));
    return out;
}

ConstantReleaseResult constant_release_experiment(const ModelParams& p,
                                                  const SterileParams& sp,
                                                  double lambda, const SimState& initial,
                                                  double horizon, double threshold,
                                                  const IntegratorConfig& icfg) {
    if (!(lambda >= 0.0))
        throw ConfigError("constant_release_experiment: lambda must be >= 0");
    if (!(threshold > 0.0))
        throw ConfigError("constant_release_experiment: threshold must be positive");

    System sys;
    sys.kind = RhsKind::SitConstant;
    sys.mp = p;
    sys.sp = sp;
    sys.lambda_const = lambda;
    const Trajectory traj = integrate(sys, initial, horizon, nullptr, icfg);
    const SimState final_state = traj.samples.back();

    ConstantReleaseResult res;
    res.final_state = final_state;
    if (final_state.F < threshold) {
        res.outcome = ConstOutcome::ExtinctionReached;
        return res;
    }

    const auto roots = sit_equilibria(p, sp, lambda);
    const Equilibrium* best = nullptr;
    double best_dist = 0.0;
    for (const auto& eq : roots) {
        const double dM = std::abs(final_state.M - eq.M_star) / std::max(eq.M_star, 1e-12);
        const double dF = std::abs(final_state.F - eq.F_star) / std::max(eq.F_star, 1e-12);
        const double d = std::max(dM, dF);
        if (d <= 0.01 && (best == nullptr || d < best_dist)) {
            best = &eq;
            best_dist = d;
        }
    }
    if (best == nullptr) {
        std::ostringstream os;
        os << "constant_release_experiment: endpoint (M = " << final_state.M
           << ", F = " << final_state.F << ") at t = " << final_state.t
           << " is neither under the threshold nor within 1% of any equilibrium; "
              "longer horizon needed";
        throw NumericError(os.str());
    }
    res.outcome = ConstOutcome::PositiveAttractor;
    res.attractor = *best;
    return res;
}

}  // namespace sit
