#pragma once

// Release policies: fixed periodic releases, state feedback applied at every
// release, feedback from sparse measurements taken every p-th release, and
// the mixed law that caps the feedback release at a fixed budget.

#include <vector>

#include "sit/critical_rates.hpp"
#include "sit/model_core.hpp"

namespace sit {

enum class PolicyKind { OpenLoop, ClosedLoopSync, ClosedLoopSparse, Mixed };

struct ReleasePolicy {
    PolicyKind kind = PolicyKind::OpenLoop;
    double lambda_const = 0.0;        // OpenLoop rate
    double k = 0.0;                   // feedback gain
    int p = 1;                        // releases per measurement window
    GainCase gain_case = GainCase::Case1;
    double lambda_bar = 0.0;          // Mixed cap
};

// The state measured at the start of a window, together with the release
// rates already applied at the window's earlier slots. past_releases.size()
// must equal the in-window slot index m passed to the law.
struct MeasurementRecord {
    double t_measured = 0.0;
    double M_hat = 0.0;
    double F_hat = 0.0;
    double M_S_known = 0.0;
    std::vector<double> past_releases;
};

// Coefficients of the measurement in the feedback law for the slot m slots
// after the measurement (m = 0 is the measurement slot itself):
//   A(m) = ((1-k)/k) * exp(-mu_M*(m+1)*tau)
//   B(m) = (r*rho*(1-k)/D) * (exp(-(mu_F-(1-r)*rho*k)*(m+1)*tau) - exp(-mu_M*(m+1)*tau))
// with D = mu_M - mu_F + (1-r)*rho*k.
struct FeedbackCoeffs {
    double A;
    double B;
};
FeedbackCoeffs feedback_coeffs(const ModelParams& p, double k, double tau, int m);

// Factories; each validates its arguments against the model.
ReleasePolicy make_open_loop(const ModelParams& p, const SterileParams& sp, double tau);
ReleasePolicy make_closed_loop(const ModelParams& p, double k);
ReleasePolicy make_sparse(const ModelParams& p, double k, int p_releases);
ReleasePolicy make_mixed(const ModelParams& p, const SterileParams& sp, double tau,
                         double k, int p_releases, GainCase which);

// Throws ConfigError when the policy is inconsistent with the model: gain
// outside the open interval for its case, p < 1, negative rates.
void validate_policy(const ReleasePolicy& pol, const ModelParams& p,
                     const SterileParams& sp, double tau);

// Budget cap for the mixed law, by gain case:
//   Case1: 2*(cosh(mu_S*tau)-1)/(mu_S*tau^2) * n_F/(e*beta*gamma)
//   Case2: (cosh(mu_S*tau)-1)/(mu_S*tau^2) * max(r,1-r)*max(n_M/r, n_F/(1-r))/(e*beta*gamma)
double lambda_bar_case(const ModelParams& p, const SterileParams& sp, double tau,
                       GainCase which);

// Constant rate of the open-loop policy; equals lambda_per_crit.
double open_loop_release(const ModelParams& p, const SterileParams& sp, double tau);

// Feedback release at a measured slot, floored at zero:
//   max{0, (exp(mu_S*tau)/(gamma*tau)) * (A(0)*M + B(0)*F) - M_S/tau}.
double closed_loop_release(double M, double F, double M_S, double k,
                           const ModelParams& p, const SterileParams& sp, double tau);

// Sparse-measurement release for the slot m slots past the measurement.
// m = 0 subtracts the measured sterile stock; m >= 1 instead discounts the
// window's first applied release geometrically through exp(-j*mu_S*tau),
// treating the later in-window releases as copies of it:
//   m = 0: max{0, (exp(mu_S*tau)/(gamma*tau))*(A(0)*M_hat + B(0)*F_hat) - M_S_known/tau}
//   m >= 1: max{0, (exp(mu_S*tau)/(gamma*tau))*(A(m)*M_hat + B(m)*F_hat)
//                  - past_releases[0] * sum_{j=1..m} exp(-j*mu_S*tau)}
// Throws ConfigError when past_releases.size() != m.
double sparse_release(const MeasurementRecord& meas, int m, double k,
                      const ModelParams& p, const SterileParams& sp, double tau);

// Sparse release clipped at the budget: min(sparse_release, lambda_bar).
double mixed_release(const MeasurementRecord& meas, int m, double k,
                     const ModelParams& p, const SterileParams& sp, double tau,
                     double lambda_bar);

}  // namespace sit
