#include "sit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sit {

namespace {

struct Deriv3 {
    double dM, dF, dM_S;
};

Deriv3 eval_rhs(const System& sys, const SimState& s) {
    switch (sys.kind) {
        case RhsKind::Wild: {
            const Deriv2 d = rhs_wild(s, sys.mp);
            return {d.dM, d.dF, 0.0};
        }
        case RhsKind::SitConstant: {
            const Deriv2 d = rhs_sit(s, sys.mp, sys.sp);
            return {d.dM, d.dF, sys.lambda_const - sys.sp.mu_S * s.M_S};
        }
        case RhsKind::SitImpulsive: {
            const Deriv2 d = rhs_sit(s, sys.mp, sys.sp);
            return {d.dM, d.dF, -sys.sp.mu_S * s.M_S};
        }
    }
    throw NumericError("integrate: unknown system kind");
}

double clamped(double v, const char* name, double t) {
    if (v >= 0.0) return v;
    if (v > -1e-12) return 0.0;
    std::ostringstream os;
    os << "integrate: component " << name << " went negative (" << v << ") at t = " << t;
    throw NumericError(os.str());
}

void clamp_state(SimState& s) {
    s.M = clamped(s.M, "M", s.t);
    s.F = clamped(s.F, "F", s.t);
    s.M_S = clamped(s.M_S, "M_S", s.t);
}

SimState rk4_step(const System& sys, const SimState& s, double h) {
    const Deriv3 k1 = eval_rhs(sys, s);
    SimState s2{s.t + 0.5 * h, s.M + 0.5 * h * k1.dM, s.F + 0.5 * h * k1.dF,
                s.M_S + 0.5 * h * k1.dM_S};
    const Deriv3 k2 = eval_rhs(sys, s2);
    SimState s3{s.t + 0.5 * h, s.M + 0.5 * h * k2.dM, s.F + 0.5 * h * k2.dF,
                s.M_S + 0.5 * h * k2.dM_S};
    const Deriv3 k3 = eval_rhs(sys, s3);
    SimState s4{s.t + h, s.M + h * k3.dM, s.F + h * k3.dF, s.M_S + h * k3.dM_S};
    const Deriv3 k4 = eval_rhs(sys, s4);
    SimState out{s.t + h,
                 s.M + h / 6.0 * (k1.dM + 2.0 * k2.dM + 2.0 * k3.dM + k4.dM),
                 s.F + h / 6.0 * (k1.dF + 2.0 * k2.dF + 2.0 * k3.dF + k4.dF),
                 s.M_S + h / 6.0 * (k1.dM_S + 2.0 * k2.dM_S + 2.0 * k3.dM_S + k4.dM_S)};
    clamp_state(out);
    return out;
}

// Advance over [state.t, state.t + span] with fixed RK4 substeps no longer
// than max_step. Appends every substep endpoint except the last one when
// keep_last is false (the caller then owns the interval-end state).
void advance_rk4(const System& sys, SimState& state, double span, double max_step,
                 Trajectory* out, bool keep_last) {
    const auto n = std::max<long long>(
        1, static_cast<long long>(std::ceil(span / max_step - 1e-12)));
    const double h = span / static_cast<double>(n);
    const double t0 = state.t;
    for (long long i = 0; i < n; ++i) {
        state = rk4_step(sys, state, h);
        state.t = t0 + static_cast<double>(i + 1) * h;
        if (out && (keep_last || i + 1 < n)) out->samples.push_back(state);
    }
}

// Dormand-Prince 5(4) with standard step control. Appends accepted steps.
void advance_rk45(const System& sys, SimState& state, double span,
                  const IntegratorConfig& cfg, Trajectory* out, bool keep_last) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double t_end = state.t + span;
    double h = std::min(cfg.max_step, span);
    int rejects = 0;
    while (state.t < t_end - 1e-12 * std::max(1.0, t_end)) {
        h = std::min(h, t_end - state.t);
        const SimState& y = state;
        auto at = [&](double dt, double m, double f, double ms) {
            return SimState{y.t + dt, y.M + m, y.F + f, y.M_S + ms};
        };
        const Deriv3 k1 = eval_rhs(sys, y);
        const Deriv3 k2 = eval_rhs(sys, at(c2 * h, h * a21 * k1.dM, h * a21 * k1.dF,
                                           h * a21 * k1.dM_S));
        const Deriv3 k3 = eval_rhs(
            sys, at(c3 * h, h * (a31 * k1.dM + a32 * k2.dM),
                    h * (a31 * k1.dF + a32 * k2.dF), h * (a31 * k1.dM_S + a32 * k2.dM_S)));
        const Deriv3 k4 =
            eval_rhs(sys, at(c4 * h, h * (a41 * k1.dM + a42 * k2.dM + a43 * k3.dM),
                             h * (a41 * k1.dF + a42 * k2.dF + a43 * k3.dF),
                             h * (a41 * k1.dM_S + a42 * k2.dM_S + a43 * k3.dM_S)));
        const Deriv3 k5 = eval_rhs(
            sys, at(c5 * h, h * (a51 * k1.dM + a52 * k2.dM + a53 * k3.dM + a54 * k4.dM),
                    h * (a51 * k1.dF + a52 * k2.dF + a53 * k3.dF + a54 * k4.dF),
                    h * (a51 * k1.dM_S + a52 * k2.dM_S + a53 * k3.dM_S + a54 * k4.dM_S)));
        const Deriv3 k6 = eval_rhs(
            sys,
            at(h, h * (a61 * k1.dM + a62 * k2.dM + a63 * k3.dM + a64 * k4.dM + a65 * k5.dM),
               h * (a61 * k1.dF + a62 * k2.dF + a63 * k3.dF + a64 * k4.dF + a65 * k5.dF),
               h * (a61 * k1.dM_S + a62 * k2.dM_S + a63 * k3.dM_S + a64 * k4.dM_S +
                    a65 * k5.dM_S)));
        SimState y5{y.t + h,
                    y.M + h * (b1 * k1.dM + b3 * k3.dM + b4 * k4.dM + b5 * k5.dM + b6 * k6.dM),
                    y.F + h * (b1 * k1.dF + b3 * k3.dF + b4 * k4.dF + b5 * k5.dF + b6 * k6.dF),
                    y.M_S + h * (b1 * k1.dM_S + b3 * k3.dM_S + b4 * k4.dM_S + b5 * k5.dM_S +
                                 b6 * k6.dM_S)};
        const Deriv3 k7 = eval_rhs(sys, y5);
        const double errM = h * (e1 * k1.dM + e3 * k3.dM + e4 * k4.dM + e5 * k5.dM +
                                 e6 * k6.dM + e7 * k7.dM);
        const double errF = h * (e1 * k1.dF + e3 * k3.dF + e4 * k4.dF + e5 * k5.dF +
                                 e6 * k6.dF + e7 * k7.dF);
        const double errS = h * (e1 * k1.dM_S + e3 * k3.dM_S + e4 * k4.dM_S +
                                 e5 * k5.dM_S + e6 * k6.dM_S + e7 * k7.dM_S);
        auto scale = [&](double err, double a, double b2) {
            return err / (cfg.abs_tol + cfg.rel_tol * std::max(std::abs(a), std::abs(b2)));
        };
        const double err = std::sqrt((std::pow(scale(errM, y.M, y5.M), 2) +
                                      std::pow(scale(errF, y.F, y5.F), 2) +
                                      std::pow(scale(errS, y.M_S, y5.M_S), 2)) /
                                     3.0);
        if (err <= 1.0) {
            clamp_state(y5);
            state = y5;
            rejects = 0;
            const bool at_end = state.t >= t_end - 1e-12 * std::max(1.0, t_end);
            if (out && (keep_last || !at_end)) out->samples.push_back(state);
        } else if (++rejects > 200) {
            throw NumericError("integrate: RK45 failed to find an acceptable step");
        }
        const double factor =
            std::clamp(0.9 * std::pow(err > 0.0 ? 1.0 / err : 1e4, 0.2), 0.2, 5.0);
        h = std::min(cfg.max_step, h * factor);
        if (!(h > 0.0) || !std::isfinite(h))
            throw NumericError("integrate: RK45 step collapsed");
    }
}

void advance(const System& sys, SimState& state, double span, const IntegratorConfig& cfg,
             double max_step, Trajectory* out, bool keep_last) {
    if (cfg.method == Method::RK4)
        advance_rk4(sys, state, span, max_step, out, keep_last);
    else {
        IntegratorConfig c = cfg;
        c.max_step = max_step;
        advance_rk45(sys, state, span, c, out, keep_last);
    }
}

}  // namespace

Trajectory integrate(const System& sys, const SimState& initial, double horizon,
                     const ImpulseSchedule* schedule, const IntegratorConfig& cfg) {
    if (sys.kind == RhsKind::Wild)
        validate(sys.mp);
    else
        validate_pair(sys.mp, sys.sp);
    if (!(cfg.max_step > 0.0)) throw ConfigError("integrate: max_step must be positive");
    if (!(horizon >= 0.0)) throw ConfigError("integrate: horizon must be >= 0");
    if (!(initial.M >= 0.0 && initial.F >= 0.0 && initial.M_S >= 0.0))
        throw ConfigError("integrate: initial state must be componentwise >= 0");
    if (sys.kind == RhsKind::SitConstant && !(sys.lambda_const >= 0.0))
        throw ConfigError("integrate: lambda_const must be >= 0");

    Trajectory traj;
    SimState state = initial;
    if (schedule == nullptr) {
        traj.samples.push_back(state);
        if (horizon > 0.0) advance(sys, state, horizon, cfg, cfg.max_step, &traj, true);
        return traj;
    }

    if (!(schedule->tau > 0.0)) throw ConfigError("integrate: schedule tau must be positive");
    if (!schedule->amount) throw ConfigError("integrate: schedule amount callback not set");
    const double tau = schedule->tau;
    // With impulses the step is additionally capped so that several substeps
    // resolve each inter-release interval.
    const double max_step = std::min(cfg.max_step, tau / 10.0);

    const double t0 = initial.t;
    int n = 0;
    auto fire = [&](const SimState& pre) {
        const double lam = schedule->amount(n, pre);
        if (!(lam >= 0.0) || !std::isfinite(lam))
            throw NumericError("integrate: schedule returned a negative or non-finite rate");
        SimState post = pre;
        post.M_S += tau * lam;
        traj.events.push_back(ImpulseEvent{n, pre.t, lam, pre});
        traj.samples.push_back(post);
        ++n;
        return post;
    };

    state = fire(state);
    while ((static_cast<double>(n)) * tau < horizon - 1e-9 * tau) {
        advance(sys, state, tau, cfg, max_step, &traj, false);
        state.t = t0 + static_cast<double>(n) * tau;
        state = fire(state);
    }
    const double remaining = t0 + horizon - state.t;
    if (remaining > 1e-9 * tau) advance(sys, state, remaining, cfg, max_step, &traj, true);
    return traj;
}

double ms_per(double t, double lambda, double tau, double mu_S) {
    if (!(tau > 0.0) || !(mu_S > 0.0) || !(lambda >= 0.0))
        throw ConfigError("ms_per: need tau > 0, mu_S > 0, lambda >= 0");
    if (!(t >= 0.0)) throw ConfigError("ms_per: t must be >= 0");
    const double phase = std::fmod(t, tau);
    return tau * lambda * std::exp(-mu_S * phase) / (1.0 - std::exp(-mu_S * tau));
}

std::pair<double, double> super_solution(double M0, double F0, double k,
                                         const ModelParams& p, double s) {
    validate(p);
    if (!(k > 0.0)) throw ConfigError("super_solution: k must be positive");
    const double g = -p.mu_F + (1.0 - p.r) * p.rho * k;  // female growth exponent
    const double D = p.mu_M + g;
    const double eg = std::exp(g * s);
    const double em = std::exp(-p.mu_M * s);
    const double F = eg * F0;
    double M;
    if (D != 0.0) {
        M = em * M0 + (p.r * p.rho * k / D) * (eg - em) * F0;
    } else {
        M = em * M0 + p.r * p.rho * k * s * em * F0;
    }
    return {M, F};
}

}  // namespace sit
