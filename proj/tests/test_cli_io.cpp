#include "doctest.h"
#include "sit/cli_io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using namespace sit;
namespace fs = std::filesystem;

namespace {

const char* kSampleScenario =
    "# demo scenario\n"
    "[model]\n"
    "r = 0.5\n"
    "rho = 4.55\n"
    "sigma = 0.05\n"
    "K = 140\n"
    "mu_M = 0.04\n"
    "mu_F = 0.03\n"
    "\n"
    "[sterile]\n"
    "mu_S = 0.04\n"
    "gamma = 1\n"
    "\n"
    "[policy]\n"
    "kind = mixed\n"
    "k_times_nF = 0.99\n"
    "p = 4\n"
    "\n"
    "[simulation]\n"
    "tau = 14\n";

int call_cli(std::vector<const char*> args, std::string* out) {
    args.insert(args.begin(), "sitctl");
    std::ostringstream oss;
    auto* old = std::cout.rdbuf(oss.rdbuf());
    int rc = 0;
    try {
        rc = run_cli(static_cast<int>(args.size()), args.data());
    } catch (...) {
        std::cout.rdbuf(old);
        throw;
    }
    std::cout.rdbuf(old);
    if (out) *out = oss.str();
    return rc;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sit_test_" + std::to_string(static_cast<unsigned>(::getpid())));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("scenario files round-trip through text") {
    const Scenario sc = parse_scenario_text(kSampleScenario, "sample.ini");
    CHECK(sc.mp.beta == doctest::Approx(0.05 / 140.0).epsilon(1e-12));
    CHECK(sc.policy.kind == PolicyKind::Mixed);
    CHECK(sc.policy.p == 4);
    CHECK(sc.policy.k == doctest::Approx(0.99 / 75.833333333333).epsilon(1e-10));
    // The mixed cap defaults to the first-argument budget.
    CHECK(sc.policy.lambda_bar == doctest::Approx(2.0 * 1603.5176346180).epsilon(1e-9));
    CHECK(sc.tau == 14.0);
    CHECK(sc.horizon == 2500.0);
    CHECK(sc.threshold == 0.1);

    const std::string text = scenario_to_text(sc);
    const Scenario rt = parse_scenario_text(text, "roundtrip.ini");
    CHECK(rt.mp.r == sc.mp.r);
    CHECK(rt.mp.beta == doctest::Approx(sc.mp.beta).epsilon(1e-10));
    CHECK(rt.policy.kind == sc.policy.kind);
    CHECK(rt.policy.k == doctest::Approx(sc.policy.k).epsilon(1e-10));
    CHECK(rt.policy.lambda_bar == doctest::Approx(sc.policy.lambda_bar).epsilon(1e-10));
    CHECK(rt.tau == sc.tau);
}

TEST_CASE("scenario parser reports the offending line") {
    const std::string bad =
        "[model]\n"
        "r = 0.5\n"
        "lifespan = 20\n";
    try {
        parse_scenario_text(bad, "bad.ini");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.ini:3") != std::string::npos);
        CHECK(msg.find("lifespan") != std::string::npos);
    }

    const std::string dup =
        "[sterile]\n"
        "mu_S = 0.04\n"
        "mu_S = 0.05\n";
    try {
        parse_scenario_text(dup, "dup.ini");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("dup.ini:3") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_scenario_text("[orbit]\n", "sec.ini"), ConfigError);
    CHECK_THROWS_AS(parse_scenario_text("r = 0.5\n", "nosec.ini"), ConfigError);
}

TEST_CASE("scenario parser rejects inconsistent parameter sets") {
    // beta together with sigma/K.
    const std::string both =
        "[model]\nr = 0.5\nrho = 4.55\nbeta = 3e-4\nsigma = 0.05\nK = 140\n"
        "mu_M = 0.04\nmu_F = 0.03\n"
        "[sterile]\nmu_S = 0.04\ngamma = 1\n"
        "[policy]\nkind = open-loop\n"
        "[simulation]\ntau = 7\n";
    CHECK_THROWS_AS(parse_scenario_text(both, "both.ini"), ConfigError);

    // Feedback gain given twice.
    const std::string twok =
        "[model]\nr = 0.5\nrho = 4.55\nbeta = 3e-4\nmu_M = 0.04\nmu_F = 0.03\n"
        "[sterile]\nmu_S = 0.04\ngamma = 1\n"
        "[policy]\nkind = closed-loop\nk = 0.005\nk_times_nF = 0.2\n"
        "[simulation]\ntau = 7\n";
    CHECK_THROWS_AS(parse_scenario_text(twok, "twok.ini"), ConfigError);

    // Gain keys are meaningless for open-loop releases.
    const std::string openk =
        "[model]\nr = 0.5\nrho = 4.55\nbeta = 3e-4\nmu_M = 0.04\nmu_F = 0.03\n"
        "[sterile]\nmu_S = 0.04\ngamma = 1\n"
        "[policy]\nkind = open-loop\nk = 0.005\n"
        "[simulation]\ntau = 7\n";
    CHECK_THROWS_AS(parse_scenario_text(openk, "openk.ini"), ConfigError);
}

TEST_CASE("the embedded preset carries the reference parameters") {
    const Scenario sc = preset_scenario("paper-2019-table1");
    CHECK(sc.mp.r == 0.5);
    CHECK(sc.mp.rho == 4.55);
    CHECK(sc.mp.beta == doctest::Approx(0.05 / 140.0).epsilon(1e-15));
    CHECK(sc.sp.mu_S == 0.04);
    CHECK(sc.tau == 14.0);
    CHECK(sc.policy.kind == PolicyKind::OpenLoop);
    CHECK(sc.policy.lambda_const == doctest::Approx(1603.5176346180).epsilon(1e-10));
    CHECK_THROWS_AS(preset_scenario("no-such-preset"), ConfigError);
    CHECK(preset_names() == std::vector<std::string>{"paper-2019-table1"});
}

TEST_CASE("trajectory CSV keeps its schema and marks releases") {
    Scenario sc = preset_scenario("paper-2019-table1");
    sc.tau = 7.0;
    sc.policy = make_open_loop(sc.mp, sc.sp, sc.tau);
    sc.horizon = 28.0;
    const auto [traj, metrics] = run_campaign(campaign_config_for(sc), integrator_for(sc));
    (void)metrics;
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "t,M,F,M_S,release_applied");
    std::size_t rows = 0;
    std::size_t marked = 0;
    while (std::getline(is, line)) {
        ++rows;
        const auto last = line.rfind(',');
        if (line.substr(last + 1) != "0") ++marked;
    }
    CHECK(rows == traj.samples.size());
    CHECK(marked == traj.events.size());
}

TEST_CASE("campaign metrics serialize to JSON") {
    CampaignMetrics m;
    m.cumulative_released = 12345.5;
    m.nonzero_releases = 17;
    m.eliminated = true;
    m.weeks_to_elimination = 56;
    m.t_elimination = 392.0;
    const auto j = nlohmann::json::parse(metrics_json(m));
    CHECK(j["cumulative_released"].get<double>() == 12345.5);
    CHECK(j["nonzero_releases"].get<int>() == 17);
    CHECK(j["eliminated"].get<bool>());
    CHECK(j["weeks_to_elimination"].get<int>() == 56);
    CampaignMetrics open;
    const auto j2 = nlohmann::json::parse(metrics_json(open));
    CHECK(j2["weeks_to_elimination"].is_null());
    CHECK_FALSE(j2["eliminated"].get<bool>());
}

TEST_CASE("reference table runs are thread-count independent") {
    const Scenario sc = preset_scenario("paper-2019-table1");
    const auto serial = run_reference_table(sc, 1);
    const auto parallel = run_reference_table(sc, 4);
    REQUIRE(serial.size() == 18);
    REQUIRE(parallel.size() == 18);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].ok);
        CHECK(parallel[i].ok);
        CHECK(serial[i].metrics.cumulative_released ==
              parallel[i].metrics.cumulative_released);
        CHECK(serial[i].metrics.weeks_to_elimination ==
              parallel[i].metrics.weeks_to_elimination);
        CHECK(serial[i].metrics.nonzero_releases == parallel[i].metrics.nonzero_releases);
    }
    CHECK(serial[0].policy == "open-loop");
    CHECK(serial[0].metrics.weeks_to_elimination == 84);
    CHECK(serial[0].metrics.cumulative_released ==
          doctest::Approx(924626.969).epsilon(1e-6));

    std::ostringstream os;
    write_table_csv(os, serial);
    std::istringstream is(os.str());
    std::string line;
    std::size_t lines = 0;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == 19);

    const auto j = nlohmann::json::parse(table_json(serial));
    REQUIRE(j.is_array());
    CHECK(j.size() == 18);
    CHECK(j[0]["status"] == "ok");
    CHECK(j[0]["reference"]["cumulative"].get<long long>() == 924627);
}

TEST_CASE("the worker cap from the environment is validated") {
    const Scenario sc = preset_scenario("paper-2019-table1");
    ::setenv("SIT_MAX_THREADS", "not-a-number", 1);
    CHECK_THROWS_AS(run_reference_table(sc, 0), ConfigError);
    ::setenv("SIT_MAX_THREADS", "0", 1);
    CHECK_THROWS_AS(run_reference_table(sc, 0), ConfigError);
    ::unsetenv("SIT_MAX_THREADS");
}

TEST_CASE("cli: equilibria and critical rates answer in JSON") {
    std::string out;
    int rc = call_cli({"equilibria", "--format", "json", "--lambda", "1162.729519183"},
                      &out);
    CHECK(rc == 0);
    auto j = nlohmann::json::parse(out);
    CHECK(j["n_F"].get<double>() == doctest::Approx(75.8333333).epsilon(1e-8));
    CHECK(j["wild_equilibrium"]["M"].get<double>() ==
          doctest::Approx(5194.2455).epsilon(1e-7));
    REQUIRE(j["sit_equilibria"].is_array());
    CHECK(j["sit_equilibria"].size() == 2);

    rc = call_cli({"critical-rates", "--format", "json"}, &out);
    CHECK(rc == 0);
    j = nlohmann::json::parse(out);
    CHECK(j["phi_crit"].get<double>() == doctest::Approx(13.457517583137).epsilon(1e-9));
    CHECK(j["lambda_crit"].get<double>() ==
          doctest::Approx(1291.9216879811).epsilon(1e-9));
    REQUIRE(j["periodic"].size() == 2);
    CHECK(j["periodic"][1]["per_release"].get<double>() ==
          doctest::Approx(22449.24688465).epsilon(1e-9));
}

TEST_CASE("cli: simulate writes outputs and honors overrides") {
    TempDir tmp;
    const std::string out_dir = (tmp.path / "run").string();
    std::string out;
    const int rc = call_cli({"simulate", "--policy", "closed-loop", "--tau", "14",
                             "--p", "4", "--k-times-nf", "0.99", "--format", "json",
                             "--out", out_dir.c_str()},
                            &out);
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(out);
    CHECK(j["eliminated"].get<bool>());
    CHECK(j["weeks_to_elimination"].get<int>() == 56);
    CHECK(j["nonzero_releases"].get<int>() == 21);
    CHECK(fs::exists(fs::path(out_dir) / "trajectory.csv"));
    CHECK(fs::exists(fs::path(out_dir) / "metrics.json"));
    CHECK(fs::exists(fs::path(out_dir) / "scenario.ini"));
    // The persisted scenario parses back to the same campaign.
    const Scenario rt = parse_scenario_file((fs::path(out_dir) / "scenario.ini").string());
    CHECK(rt.policy.kind == PolicyKind::ClosedLoopSparse);
    CHECK(rt.policy.p == 4);
    CHECK(rt.tau == 14.0);
}

TEST_CASE("cli: configuration problems exit with code 1") {
    std::string out;
    CHECK(call_cli({"equilibria", "--preset", "no-such-preset"}, &out) == 1);
    CHECK(call_cli({"simulate", "--scenario", "/nonexistent/path.ini"}, &out) == 1);
    CHECK(call_cli({"simulate", "--policy", "closed-loop", "--k", "0.5"}, &out) == 1);
}

TEST_CASE("cli: scenario files drive simulations end to end") {
    TempDir tmp;
    const fs::path ini = tmp.path / "scenario.ini";
    {
        std::ofstream f(ini);
        f << kSampleScenario;
    }
    std::string out;
    const int rc =
        call_cli({"simulate", "--scenario", ini.string().c_str(), "--format", "json"},
                 &out);
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(out);
    CHECK(j["eliminated"].get<bool>());
    CHECK(j["weeks_to_elimination"].get<int>() == 62);
    CHECK(j["nonzero_releases"].get<int>() == 26);
}

TEST_CASE("trajectory CSV golden file") {
    const char* text =
        "[model]\n"
        "r = 0.5\n"
        "rho = 4.55\n"
        "beta = 3.571428571428571e-4\n"
        "mu_M = 0.04\n"
        "mu_F = 0.03\n"
        "[sterile]\n"
        "mu_S = 0.04\n"
        "gamma = 1.0\n"
        "[policy]\n"
        "kind = open-loop\n"
        "lambda = 1500\n"
        "[simulation]\n"
        "tau = 7\n"
        "horizon = 14\n"
        "max_step = 0.7\n"
        "[initial]\n"
        "M = 5000\n"
        "F = 7000\n"
        "M_S = 0\n";
    const Scenario sc = parse_scenario_text(text, "golden.ini");
    const auto [traj, metrics] = run_campaign(campaign_config_for(sc), integrator_for(sc));
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    const std::string golden =
        "t,M,F,M_S,release_applied\n"
        "0,5000,7000,10500,1500\n"
        "0.7,4912.22532748,6904.99009986,10210.0778529,0\n"
        "1.4,4829.83572596,6814.92639432,9928.16092976,0\n"
        "2.1,4752.71085598,6729.73455178,9654.02819325,0\n"
        "2.8,4680.72472345,6649.33277647,9387.46470927,0\n"
        "3.5,4613.74600307,6573.63213144,9128.26147839,0\n"
        "4.2,4551.63842535,6502.53692761,8876.21527201,0\n"
        "4.9,4494.26121342,6435.94516528,8631.12847299,0\n"
        "5.6,4441.46955634,6373.74901542,8392.80892074,0\n"
        "6.3,4393.11510685,6315.83532844,8161.06976051,0\n"
        "7,4349.04649293,6262.08616019,18435.7292969,1500\n"
        "7.7,4272.53687881,6175.67900002,17926.6887045,0\n"
        "8.4,4200.44544654,6093.38112988,17431.7035541,0\n"
        "9.1,4132.67795858,6015.13500942,16950.385752,0\n"
        "9.8,4069.13882632,5940.88032703,16482.3579204,0\n"
        "10.5,4009.73127893,5870.55418945,16027.2531016,0\n"
        "11.2,3954.35753794,5804.09131779,15584.7144701,0\n"
        "11.9,3902.91899093,5741.42424357,15154.3950529,0\n"
        "12.6,3855.31635851,5682.48349862,14735.9574575,0\n"
        "13.3,3811.44984986,5627.19779427,14329.0736074,0\n"
        "14,3771.2193027,5575.49418543,13933.424485,0\n";
    CHECK(os.str() == golden);
    CHECK(metrics.nonzero_releases == 2);
    CHECK(metrics.cumulative_released == doctest::Approx(21000.0));
}
