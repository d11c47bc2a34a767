#pragma once

// Scenario files, presets, output writers and the command-line entry points.
// Scenario files use a small INI dialect: [section] headers, key = value
// lines, # or ; comments. Unknown sections or keys are rejected with the
// offending line number.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sit/campaign.hpp"

namespace sit {

// A fully described experiment: model, sterile pool, policy and run controls.
struct Scenario {
    ModelParams mp{};
    SterileParams sp{};
    ReleasePolicy policy{};
    double tau = 7.0;
    double horizon = 2500.0;
    double threshold = 0.1;
    double max_step = 0.0;               // 0 means min(tau/50, 0.1)
    std::optional<SimState> initial;     // default: wild equilibrium, M_S = 0
};

// Parameter set used throughout the reference experiments: r = 0.5,
// rho = 4.55, sigma = 0.05, K = 140, mu_M = mu_S = 0.04, mu_F = 0.03,
// gamma = 1. The only embedded preset name is "paper-2019-table1".
Scenario preset_scenario(const std::string& name);
std::vector<std::string> preset_names();

Scenario parse_scenario_text(const std::string& text, const std::string& origin);
Scenario parse_scenario_file(const std::string& path);
std::string scenario_to_text(const Scenario& sc);

// Effective integrator settings for a scenario.
IntegratorConfig integrator_for(const Scenario& sc);
CampaignConfig campaign_config_for(const Scenario& sc);

// Trajectory CSV, fixed schema: header "t,M,F,M_S,release_applied", one row
// per sample; the row at a release instant carries that release's rate.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Campaign metrics as a JSON object.
std::string metrics_json(const CampaignMetrics& m);

// One row of the reference comparison emitted by the tables command.
struct TableRow {
    std::string policy;     // "open-loop", "closed-loop", "mixed"
    double tau = 0.0;
    int p = 1;
    double k_times_nF = 0.0;  // 0 for open loop
    bool ok = false;
    std::string error;      // set when the run failed
    CampaignMetrics metrics{};
    int ref_weeks = -1;
    long long ref_cumulative = -1;
    int ref_nonzero = -1;   // -1 when not available
};

// The 18 reference configurations: open-loop for tau in {7, 14}; closed-loop
// and mixed for tau in {7, 14} x p in {1, 4} x k*n_F in {0.2, 0.99}. Runs are
// spread over at most max_threads workers (0 means SIT_MAX_THREADS or the
// hardware count). A failing cell reports its error, the rest still run.
std::vector<TableRow> run_reference_table(const Scenario& base, int max_threads = 0);

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows);
std::string table_json(const std::vector<TableRow>& rows);

// CLI entry point; returns the process exit code (0 ok, 1 configuration
// error, 2 numerical failure).
int run_cli(int argc, const char* const* argv);

}  // namespace sit
