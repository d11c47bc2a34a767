#include "sit/cli_io.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace sit {

namespace {

using nlohmann::json;

std::string trimmed(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

[[noreturn]] void fail_at(const std::string& origin, int line, const std::string& msg) {
    std::ostringstream os;
    os << origin << ":" << line << ": " << msg;
    throw ConfigError(os.str());
}

// One parsed key = value entry.
struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using SectionMap = std::map<std::string, std::map<std::string, Entry>>;

SectionMap read_ini(const std::string& text, const std::string& origin) {
    static const std::map<std::string, std::vector<std::string>> known = {
        {"model", {"r", "rho", "beta", "sigma", "K", "mu_M", "mu_F"}},
        {"sterile", {"mu_S", "gamma"}},
        {"policy", {"kind", "k", "k_times_nF", "p", "gain_case", "lambda", "lambda_bar"}},
        {"simulation", {"tau", "horizon", "threshold", "max_step"}},
        {"initial", {"M", "F", "M_S"}},
    };

    SectionMap out;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        const auto hash = raw.find_first_of("#;");
        std::string line = trimmed(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail_at(origin, lineno, "malformed section header");
            section = trimmed(line.substr(1, line.size() - 2));
            if (known.find(section) == known.end())
                fail_at(origin, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail_at(origin, lineno, "expected key = value, got '" + line + "'");
        if (section.empty())
            fail_at(origin, lineno, "key outside of any section");
        const std::string key = trimmed(line.substr(0, eq));
        const std::string value = trimmed(line.substr(eq + 1));
        const auto& keys = known.at(section);
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            fail_at(origin, lineno, "unknown key '" + key + "' in section [" + section + "]");
        if (value.empty()) fail_at(origin, lineno, "empty value for '" + key + "'");
        auto [it, inserted] = out[section].emplace(key, Entry{value, lineno, false});
        if (!inserted)
            fail_at(origin, lineno,
                    "duplicate key '" + key + "' (first given on line " +
                        std::to_string(it->second.line) + ")");
    }
    return out;
}

// Typed lookups over the parsed sections.
struct IniView {
    SectionMap map;
    std::string origin;

    const Entry* find(const std::string& sec, const std::string& key) const {
        auto s = map.find(sec);
        if (s == map.end()) return nullptr;
        auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    bool has(const std::string& sec, const std::string& key) const {
        return find(sec, key) != nullptr;
    }

    double number(const std::string& sec, const std::string& key) const {
        const Entry* e = find(sec, key);
        const char* text = e->value.c_str();
        char* end = nullptr;
        const double v = std::strtod(text, &end);
        if (end == text || *end != '\0')
            fail_at(origin, e->line, "expected a number for '" + key + "', got '" + e->value + "'");
        return v;
    }

    double number_or(const std::string& sec, const std::string& key, double dflt) const {
        return has(sec, key) ? number(sec, key) : dflt;
    }

    double required(const std::string& sec, const std::string& key) const {
        if (!has(sec, key))
            throw ConfigError(origin + ": missing required key '" + key + "' in section [" +
                              sec + "]");
        return number(sec, key);
    }

    std::string text(const std::string& sec, const std::string& key) const {
        return find(sec, key)->value;
    }

    int line(const std::string& sec, const std::string& key) const {
        return find(sec, key)->line;
    }
};

GainCase parse_gain_case(const std::string& s, const std::string& origin, int line) {
    if (s == "case1") return GainCase::Case1;
    if (s == "case2") return GainCase::Case2;
    fail_at(origin, line, "gain_case must be 'case1' or 'case2', got '" + s + "'");
}

std::string policy_kind_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::OpenLoop: return "open-loop";
        case PolicyKind::ClosedLoopSync:
        case PolicyKind::ClosedLoopSparse: return "closed-loop";
        case PolicyKind::Mixed: return "mixed";
    }
    return "?";
}

}  // namespace

Scenario parse_scenario_text(const std::string& text, const std::string& origin) {
    IniView ini{read_ini(text, origin), origin};

    Scenario sc;
    const double r = ini.required("model", "r");
    const double rho = ini.required("model", "rho");
    const double mu_M = ini.required("model", "mu_M");
    const double mu_F = ini.required("model", "mu_F");
    const bool has_beta = ini.has("model", "beta");
    const bool has_sigma = ini.has("model", "sigma");
    const bool has_K = ini.has("model", "K");
    if (has_beta && (has_sigma || has_K))
        throw ConfigError(origin + ": give either beta or the sigma/K pair, not both");
    if (has_beta) {
        sc.mp = make_params(r, rho, ini.number("model", "beta"), mu_M, mu_F);
    } else if (has_sigma && has_K) {
        sc.mp = make_params_sigma_k(r, rho, ini.number("model", "sigma"),
                                    ini.number("model", "K"), mu_M, mu_F);
    } else {
        throw ConfigError(origin + ": section [model] needs beta, or both sigma and K");
    }
    sc.sp = SterileParams{ini.required("sterile", "mu_S"), ini.required("sterile", "gamma")};
    validate_pair(sc.mp, sc.sp);

    sc.tau = ini.required("simulation", "tau");
    if (!(sc.tau > 0.0)) throw ConfigError(origin + ": tau must be positive");
    sc.horizon = ini.number_or("simulation", "horizon", 2500.0);
    sc.threshold = ini.number_or("simulation", "threshold", 0.1);
    sc.max_step = ini.number_or("simulation", "max_step", 0.0);

    if (!ini.has("policy", "kind"))
        throw ConfigError(origin + ": missing required key 'kind' in section [policy]");
    const std::string kind = ini.text("policy", "kind");
    const int kind_line = ini.line("policy", "kind");
    const bool has_k = ini.has("policy", "k");
    const bool has_kf = ini.has("policy", "k_times_nF");
    const auto gain = [&]() {
        if (has_k && has_kf)
            throw ConfigError(origin + ": give either k or k_times_nF, not both");
        if (!has_k && !has_kf)
            throw ConfigError(origin + ": policy '" + kind + "' needs k or k_times_nF");
        if (has_k) return ini.number("policy", "k");
        return ini.number("policy", "k_times_nF") / offspring_numbers(sc.mp).n_F;
    };
    const auto reject = [&](const char* key, const char* why) {
        if (ini.has("policy", key))
            fail_at(origin, ini.line("policy", key),
                    std::string("key '") + key + "' " + why);
    };
    const double p_raw = ini.number_or("policy", "p", 1.0);
    if (p_raw < 1.0 || p_raw != std::floor(p_raw))
        fail_at(origin, ini.has("policy", "p") ? ini.line("policy", "p") : 0,
                "p must be a whole number >= 1");
    const int p = static_cast<int>(p_raw);
    GainCase gc = GainCase::Case1;
    if (ini.has("policy", "gain_case"))
        gc = parse_gain_case(ini.text("policy", "gain_case"), origin,
                             ini.line("policy", "gain_case"));

    if (kind == "open-loop") {
        reject("k", "only applies to feedback policies");
        reject("k_times_nF", "only applies to feedback policies");
        reject("gain_case", "only applies to feedback policies");
        reject("lambda_bar", "only applies to the mixed policy");
        reject("p", "only applies to feedback policies");
        sc.policy.kind = PolicyKind::OpenLoop;
        sc.policy.lambda_const = ini.has("policy", "lambda")
                                     ? ini.number("policy", "lambda")
                                     : open_loop_release(sc.mp, sc.sp, sc.tau);
    } else if (kind == "closed-loop") {
        reject("lambda", "only applies to the open-loop policy");
        reject("lambda_bar", "only applies to the mixed policy");
        sc.policy.kind = p == 1 ? PolicyKind::ClosedLoopSync : PolicyKind::ClosedLoopSparse;
        sc.policy.k = gain();
        sc.policy.p = p;
        sc.policy.gain_case = gc;
    } else if (kind == "mixed") {
        reject("lambda", "only applies to the open-loop policy");
        sc.policy.kind = PolicyKind::Mixed;
        sc.policy.k = gain();
        sc.policy.p = p;
        sc.policy.gain_case = gc;
        sc.policy.lambda_bar = ini.has("policy", "lambda_bar")
                                   ? ini.number("policy", "lambda_bar")
                                   : lambda_bar_case(sc.mp, sc.sp, sc.tau, gc);
    } else {
        fail_at(origin, kind_line,
                "kind must be 'open-loop', 'closed-loop' or 'mixed', got '" + kind + "'");
    }
    validate_policy(sc.policy, sc.mp, sc.sp, sc.tau);

    if (ini.map.count("initial") != 0) {
        SimState init;
        init.M = ini.required("initial", "M");
        init.F = ini.required("initial", "F");
        init.M_S = ini.number_or("initial", "M_S", 0.0);
        sc.initial = init;
    }
    if (!(sc.horizon > 0.0)) throw ConfigError(origin + ": horizon must be positive");
    if (!(sc.threshold > 0.0)) throw ConfigError(origin + ": threshold must be positive");
    if (sc.max_step < 0.0) throw ConfigError(origin + ": max_step must be >= 0");
    return sc;
}

Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_scenario_text(os.str(), path);
}

std::string scenario_to_text(const Scenario& sc) {
    std::ostringstream os;
    os << "[model]\n";
    os << "r = " << fmt(sc.mp.r) << "\n";
    os << "rho = " << fmt(sc.mp.rho) << "\n";
    os << "beta = " << fmt(sc.mp.beta) << "\n";
    os << "mu_M = " << fmt(sc.mp.mu_M) << "\n";
    os << "mu_F = " << fmt(sc.mp.mu_F) << "\n\n";
    os << "[sterile]\n";
    os << "mu_S = " << fmt(sc.sp.mu_S) << "\n";
    os << "gamma = " << fmt(sc.sp.gamma) << "\n\n";
    os << "[policy]\n";
    os << "kind = " << policy_kind_name(sc.policy.kind) << "\n";
    if (sc.policy.kind == PolicyKind::OpenLoop) {
        os << "lambda = " << fmt(sc.policy.lambda_const) << "\n";
    } else {
        os << "k = " << fmt(sc.policy.k) << "\n";
        os << "p = " << sc.policy.p << "\n";
        os << "gain_case = " << (sc.policy.gain_case == GainCase::Case1 ? "case1" : "case2")
           << "\n";
        if (sc.policy.kind == PolicyKind::Mixed)
            os << "lambda_bar = " << fmt(sc.policy.lambda_bar) << "\n";
    }
    os << "\n[simulation]\n";
    os << "tau = " << fmt(sc.tau) << "\n";
    os << "horizon = " << fmt(sc.horizon) << "\n";
    os << "threshold = " << fmt(sc.threshold) << "\n";
    if (sc.max_step > 0.0) os << "max_step = " << fmt(sc.max_step) << "\n";
    if (sc.initial) {
        os << "\n[initial]\n";
        os << "M = " << fmt(sc.initial->M) << "\n";
        os << "F = " << fmt(sc.initial->F) << "\n";
        os << "M_S = " << fmt(sc.initial->M_S) << "\n";
    }
    return os.str();
}

std::vector<std::string> preset_names() { return {"paper-2019-table1"}; }

Scenario preset_scenario(const std::string& name) {
    if (name != "paper-2019-table1") {
        std::string avail;
        for (const auto& n : preset_names()) avail += (avail.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "'; available: " + avail);
    }
    Scenario sc;
    sc.mp = make_params_sigma_k(0.5, 4.55, 0.05, 140.0, 0.04, 0.03);
    sc.sp = SterileParams{0.04, 1.0};
    sc.tau = 14.0;
    sc.policy = make_open_loop(sc.mp, sc.sp, sc.tau);
    return sc;
}

IntegratorConfig integrator_for(const Scenario& sc) {
    IntegratorConfig icfg;
    icfg.max_step = sc.max_step > 0.0 ? sc.max_step : std::min(sc.tau / 50.0, 0.1);
    return icfg;
}

CampaignConfig campaign_config_for(const Scenario& sc) {
    CampaignConfig cfg = make_default_config(sc.mp, sc.sp, sc.policy, sc.tau);
    cfg.elimination_threshold = sc.threshold;
    cfg.max_horizon = sc.horizon;
    if (sc.initial) {
        cfg.initial = *sc.initial;
        cfg.initial.t = 0.0;
    }
    return cfg;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,M,F,M_S,release_applied\n";
    std::size_t ei = 0;
    char buf[192];
    for (const auto& s : traj.samples) {
        double rel = 0.0;
        if (ei < traj.events.size() && s.t == traj.events[ei].t) {
            rel = traj.events[ei].lambda;
            ++ei;
        }
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", s.t, s.M, s.F,
                      s.M_S, rel);
        os << buf;
    }
}

std::string metrics_json(const CampaignMetrics& m) {
    json j;
    j["cumulative_released"] = m.cumulative_released;
    j["nonzero_releases"] = m.nonzero_releases;
    j["eliminated"] = m.eliminated;
    if (m.eliminated) {
        j["weeks_to_elimination"] = m.weeks_to_elimination;
        j["t_elimination"] = m.t_elimination;
    } else {
        j["weeks_to_elimination"] = nullptr;
        j["t_elimination"] = nullptr;
    }
    return j.dump(2);
}

namespace {

// One benchmark configuration with its reference outcome. ref_nonzero is -1
// where the reference does not report it.
struct RowSpec {
    const char* policy;
    double tau;
    int p;
    double k_times_nF;
    int ref_weeks;
    long long ref_cumulative;
    int ref_nonzero;
};

const RowSpec kReferenceRuns[] = {
    {"open-loop", 7, 1, 0.0, 84, 924627, -1},
    {"open-loop", 14, 1, 0.0, 84, 942869, -1},
    {"closed-loop", 7, 1, 0.2, 64, 2251052, -1},
    {"closed-loop", 7, 4, 0.2, 54, 4363430, 34},
    {"closed-loop", 14, 1, 0.2, 64, 2390676, -1},
    {"closed-loop", 14, 4, 0.2, 56, 2896835, 17},
    {"closed-loop", 7, 1, 0.99, 240, 794807, -1},
    {"closed-loop", 7, 4, 0.99, 58, 1221593, 37},
    {"closed-loop", 14, 1, 0.99, 130, 909344, -1},
    {"closed-loop", 14, 4, 0.99, 62, 1043107, 20},
    {"mixed", 7, 1, 0.2, 72, 450668, -1},
    {"mixed", 7, 4, 0.2, 65, 534849, 53},
    {"mixed", 14, 1, 0.2, 72, 465187, -1},
    {"mixed", 14, 4, 0.2, 66, 499497, 25},
    {"mixed", 7, 1, 0.99, 246, 457489, -1},
    {"mixed", 7, 4, 0.99, 69, 450077, 53},
    {"mixed", 14, 1, 0.99, 136, 427701, -1},
    {"mixed", 14, 4, 0.99, 74, 449059, 28},
};

int resolve_threads(int max_threads, std::size_t jobs) {
    int n = max_threads;
    if (n <= 0) {
        if (const char* env = std::getenv("SIT_MAX_THREADS")) {
            char* end = nullptr;
            const long v = std::strtol(env, &end, 10);
            if (end == env || *end != '\0' || v < 1)
                throw ConfigError("SIT_MAX_THREADS must be a positive integer, got '" +
                                  std::string(env) + "'");
            n = static_cast<int>(v);
        } else {
            n = static_cast<int>(std::thread::hardware_concurrency());
            if (n < 1) n = 1;
        }
    }
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), jobs));
}

}  // namespace

std::vector<TableRow> run_reference_table(const Scenario& base, int max_threads) {
    validate_pair(base.mp, base.sp);
    const double n_F = offspring_numbers(base.mp).n_F;
    const std::size_t count = std::size(kReferenceRuns);
    std::vector<TableRow> rows(count);

    const int workers = resolve_threads(max_threads, count);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            const RowSpec& run = kReferenceRuns[i];
            TableRow& row = rows[i];
            row.policy = run.policy;
            row.tau = run.tau;
            row.p = run.p;
            row.k_times_nF = run.k_times_nF;
            row.ref_weeks = run.ref_weeks;
            row.ref_cumulative = run.ref_cumulative;
            row.ref_nonzero = run.ref_nonzero;
            try {
                Scenario sc = base;
                sc.tau = run.tau;
                const std::string kind = run.policy;
                if (kind == "open-loop") {
                    sc.policy = make_open_loop(sc.mp, sc.sp, sc.tau);
                } else {
                    const double k = run.k_times_nF / n_F;
                    if (kind == "closed-loop")
                        sc.policy = run.p == 1 ? make_closed_loop(sc.mp, k)
                                                : make_sparse(sc.mp, k, run.p);
                    else
                        sc.policy = make_mixed(sc.mp, sc.sp, sc.tau, k, run.p,
                                               GainCase::Case1);
                }
                const auto [traj, metrics] =
                    run_campaign(campaign_config_for(sc), integrator_for(sc));
                (void)traj;
                row.metrics = metrics;
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    return rows;
}

void write_table_csv(std::ostream& os, const std::vector<TableRow>& rows) {
    os << "policy,tau,p,k_times_nF,weeks,ref_weeks,nonzero,ref_nonzero,"
          "cumulative,ref_cumulative,dev_weeks,dev_cumulative_pct,status,error\n";
    for (const auto& row : rows) {
        os << row.policy << "," << fmt(row.tau) << "," << row.p << ","
           << fmt(row.k_times_nF) << ",";
        if (row.ok) {
            const auto& m = row.metrics;
            os << (m.eliminated ? std::to_string(m.weeks_to_elimination) : std::string())
               << "," << (row.ref_weeks >= 0 ? std::to_string(row.ref_weeks) : std::string())
               << "," << m.nonzero_releases << ","
               << (row.ref_nonzero >= 0 ? std::to_string(row.ref_nonzero) : std::string())
               << "," << fmt(m.cumulative_released) << ","
               << (row.ref_cumulative >= 0 ? std::to_string(row.ref_cumulative)
                                           : std::string())
               << ",";
            if (m.eliminated && row.ref_weeks >= 0)
                os << m.weeks_to_elimination - row.ref_weeks;
            os << ",";
            if (row.ref_cumulative > 0)
                os << fmt(100.0 * (m.cumulative_released -
                                   static_cast<double>(row.ref_cumulative)) /
                          static_cast<double>(row.ref_cumulative));
            os << ",ok,\n";
        } else {
            std::string err = row.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            os << ",,,,," << (row.ref_cumulative >= 0 ? std::to_string(row.ref_cumulative)
                                                      : std::string())
               << ",,,error," << err << "\n";
        }
    }
}

std::string table_json(const std::vector<TableRow>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json j;
        j["policy"] = row.policy;
        j["tau"] = row.tau;
        j["p"] = row.p;
        j["k_times_nF"] = row.k_times_nF;
        j["status"] = row.ok ? "ok" : "error";
        if (row.ok) {
            j["metrics"] = json::parse(metrics_json(row.metrics));
        } else {
            j["error"] = row.error;
        }
        json ref;
        ref["weeks"] = row.ref_weeks >= 0 ? json(row.ref_weeks) : json(nullptr);
        ref["cumulative"] =
            row.ref_cumulative >= 0 ? json(row.ref_cumulative) : json(nullptr);
        ref["nonzero"] = row.ref_nonzero >= 0 ? json(row.ref_nonzero) : json(nullptr);
        j["reference"] = ref;
        if (row.ok && row.ref_cumulative > 0) {
            j["dev_cumulative_pct"] =
                100.0 *
                (row.metrics.cumulative_released - static_cast<double>(row.ref_cumulative)) /
                static_cast<double>(row.ref_cumulative);
            if (row.metrics.eliminated && row.ref_weeks >= 0)
                j["dev_weeks"] = row.metrics.weeks_to_elimination - row.ref_weeks;
        }
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

namespace {

struct CommonOpts {
    std::string scenario_path;
    std::string preset;
    std::string out_dir;
    std::string format = "csv";
    bool seedless = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_out) {
    auto* sopt = cmd->add_option("--scenario", o.scenario_path, "scenario file (INI)");
    auto* popt =
        cmd->add_option("--preset", o.preset,
                        "embedded preset (default paper-2019-table1 when no scenario)");
    sopt->excludes(popt);
    if (with_out)
        cmd->add_option("--out", o.out_dir, "directory for output files");
    cmd->add_option("--format", o.format, "stdout payload format")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--seedless", o.seedless,
                  "reserved; every computation here is deterministic")
        ->disable_flag_override();
}

Scenario load_scenario(const CommonOpts& o) {
    if (!o.scenario_path.empty()) return parse_scenario_file(o.scenario_path);
    return preset_scenario(o.preset.empty() ? "paper-2019-table1" : o.preset);
}

void write_file(const std::string& dir, const std::string& name, const std::string& body) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << body;
}

int cmd_equilibria(const CommonOpts& o, double lambda, bool lambda_set) {
    const Scenario sc = load_scenario(o);
    const auto n = offspring_numbers(sc.mp);
    const auto wild = wild_equilibrium(sc.mp);
    std::vector<Equilibrium> roots;
    if (lambda_set) roots = sit_equilibria(sc.mp, sc.sp, lambda);

    if (o.format == "json") {
        json j;
        j["n_F"] = n.n_F;
        j["n_M"] = n.n_M;
        if (wild)
            j["wild_equilibrium"] = {{"M", wild->M_star}, {"F", wild->F_star}};
        else
            j["wild_equilibrium"] = nullptr;
        if (lambda_set) {
            j["lambda"] = lambda;
            json arr = json::array();
            for (const auto& eq : roots)
                arr.push_back({{"M", eq.M_star}, {"F", eq.F_star}});
            j["sit_equilibria"] = arr;
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "quantity,value\n";
        std::cout << "n_F," << fmt(n.n_F) << "\n";
        std::cout << "n_M," << fmt(n.n_M) << "\n";
        if (wild) {
            std::cout << "wild_M," << fmt(wild->M_star) << "\n";
            std::cout << "wild_F," << fmt(wild->F_star) << "\n";
        }
        if (lambda_set) {
            std::cout << "lambda," << fmt(lambda) << "\n";
            std::cout << "sit_equilibria," << roots.size() << "\n";
            for (std::size_t i = 0; i < roots.size(); ++i) {
                std::cout << "sit_M_" << i + 1 << "," << fmt(roots[i].M_star) << "\n";
                std::cout << "sit_F_" << i + 1 << "," << fmt(roots[i].F_star) << "\n";
            }
        }
    }
    return 0;
}

int cmd_critical_rates(const CommonOpts& o, const std::vector<double>& taus) {
    const Scenario sc = load_scenario(o);
    const auto n = offspring_numbers(sc.mp);
    const double phi = phi_crit(n.n_F);
    const double lam = lambda_crit(sc.mp, sc.sp);
    const Interval g1 = feedback_gain_interval(sc.mp, GainCase::Case1);
    const Interval g2 = feedback_gain_interval(sc.mp, GainCase::Case2);

    if (o.format == "json") {
        json j;
        j["phi_crit"] = phi;
        j["lambda_crit"] = lam;
        j["gain_interval_case1"] = {g1.lo, g1.hi};
        j["gain_interval_case2"] = {g2.lo, g2.hi};
        json arr = json::array();
        for (double tau : taus) {
            const double lp = lambda_per_crit(sc.mp, sc.sp, tau);
            arr.push_back({{"tau", tau},
                           {"lambda_per_crit", lp},
                           {"per_release", tau * lp}});
        }
        j["periodic"] = arr;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "quantity,value\n";
        std::cout << "phi_crit," << fmt(phi) << "\n";
        std::cout << "lambda_crit," << fmt(lam) << "\n";
        std::cout << "gain_case1_hi," << fmt(g1.hi) << "\n";
        std::cout << "gain_case2_hi," << fmt(g2.hi) << "\n";
        for (double tau : taus) {
            const double lp = lambda_per_crit(sc.mp, sc.sp, tau);
            std::cout << "lambda_per_crit_tau_" << fmt(tau) << "," << fmt(lp) << "\n";
            std::cout << "per_release_tau_" << fmt(tau) << "," << fmt(tau * lp) << "\n";
        }
    }
    return 0;
}

struct SimulateOverrides {
    std::string policy;
    double tau = 0.0;
    int p = 0;
    double k = 0.0;
    double k_times_nF = 0.0;
    std::string gain_case;
    double horizon = 0.0;
    double threshold = 0.0;
    double max_step = 0.0;
};

Scenario apply_overrides(Scenario sc, const SimulateOverrides& ov) {
    if (ov.tau > 0.0) sc.tau = ov.tau;
    if (ov.horizon > 0.0) sc.horizon = ov.horizon;
    if (ov.threshold > 0.0) sc.threshold = ov.threshold;
    if (ov.max_step > 0.0) sc.max_step = ov.max_step;

    std::string kind = ov.policy.empty() ? policy_kind_name(sc.policy.kind) : ov.policy;
    const bool feedback_requested =
        !ov.policy.empty() || ov.p > 0 || ov.k > 0.0 || ov.k_times_nF > 0.0 ||
        !ov.gain_case.empty() || ov.tau > 0.0;
    if (!feedback_requested) return sc;

    if (ov.k > 0.0 && ov.k_times_nF > 0.0)
        throw ConfigError("give either --k or --k-times-nf, not both");
    double k = sc.policy.k;
    if (ov.k > 0.0) k = ov.k;
    if (ov.k_times_nF > 0.0) k = ov.k_times_nF / offspring_numbers(sc.mp).n_F;
    int p = ov.p > 0 ? ov.p : sc.policy.p;
    GainCase gc = sc.policy.gain_case;
    if (!ov.gain_case.empty()) gc = ov.gain_case == "case2" ? GainCase::Case2 : GainCase::Case1;

    if (kind == "open-loop") {
        sc.policy = make_open_loop(sc.mp, sc.sp, sc.tau);
    } else if (kind == "closed-loop") {
        if (!(k > 0.0)) throw ConfigError("closed-loop policy needs a gain (--k or --k-times-nf)");
        ReleasePolicy pol;
        pol.kind = p == 1 ? PolicyKind::ClosedLoopSync : PolicyKind::ClosedLoopSparse;
        pol.k = k;
        pol.p = p;
        pol.gain_case = gc;
        validate_policy(pol, sc.mp, sc.sp, sc.tau);
        sc.policy = pol;
    } else if (kind == "mixed") {
        if (!(k > 0.0)) throw ConfigError("mixed policy needs a gain (--k or --k-times-nf)");
        sc.policy = make_mixed(sc.mp, sc.sp, sc.tau, k, p, gc);
    } else {
        throw ConfigError("unknown policy '" + kind + "'");
    }
    return sc;
}

int cmd_simulate(const CommonOpts& o, const SimulateOverrides& ov) {
    const Scenario sc = apply_overrides(load_scenario(o), ov);
    const auto [traj, metrics] = run_campaign(campaign_config_for(sc), integrator_for(sc));

    if (o.format == "json") {
        std::cout << metrics_json(metrics) << "\n";
    } else {
        std::cout << "metric,value\n";
        std::cout << "eliminated," << (metrics.eliminated ? "true" : "false") << "\n";
        if (metrics.eliminated) {
            std::cout << "weeks_to_elimination," << metrics.weeks_to_elimination << "\n";
            std::cout << "t_elimination," << fmt(metrics.t_elimination) << "\n";
        }
        std::cout << "nonzero_releases," << metrics.nonzero_releases << "\n";
        std::cout << "cumulative_released," << fmt(metrics.cumulative_released) << "\n";
    }
    if (!o.out_dir.empty()) {
        std::ostringstream csv;
        write_trajectory_csv(csv, traj);
        write_file(o.out_dir, "trajectory.csv", csv.str());
        write_file(o.out_dir, "metrics.json", metrics_json(metrics) + "\n");
        write_file(o.out_dir, "scenario.ini", scenario_to_text(sc));
    }
    return 0;
}

int cmd_tables(const CommonOpts& o, int threads) {
    const Scenario sc = load_scenario(o);
    const auto rows = run_reference_table(sc, threads);
    if (o.format == "json") {
        std::cout << table_json(rows) << "\n";
    } else {
        write_table_csv(std::cout, rows);
    }
    if (!o.out_dir.empty()) {
        std::ostringstream csv;
        write_table_csv(csv, rows);
        write_file(o.out_dir, "table.csv", csv.str());
        write_file(o.out_dir, "table.json", table_json(rows) + "\n");
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"sterile insect release planning for a sex-structured mosquito model"};
    app.require_subcommand(1);

    CommonOpts eq_opts;
    double eq_lambda = 0.0;
    auto* eq_cmd = app.add_subcommand(
        "equilibria", "offspring numbers, wild equilibrium, equilibria under a release rate");
    add_common(eq_cmd, eq_opts, false);
    auto* eq_lam_opt = eq_cmd->add_option("--lambda", eq_lambda,
                                          "constant release rate to analyze")
                           ->check(CLI::NonNegativeNumber);

    CommonOpts cr_opts;
    std::vector<double> cr_taus{7.0, 14.0};
    auto* cr_cmd = app.add_subcommand(
        "critical-rates", "extinction thresholds and admissible feedback gains");
    add_common(cr_cmd, cr_opts, false);
    cr_cmd->add_option("--tau", cr_taus, "release periods to evaluate (days)")
        ->check(CLI::PositiveNumber);

    CommonOpts sim_opts;
    SimulateOverrides sim_ov;
    auto* sim_cmd = app.add_subcommand("simulate", "run one release campaign");
    add_common(sim_cmd, sim_opts, true);
    sim_cmd->add_option("--policy", sim_ov.policy, "open-loop, closed-loop or mixed")
        ->check(CLI::IsMember({"open-loop", "closed-loop", "mixed"}));
    sim_cmd->add_option("--tau", sim_ov.tau, "release period (days)")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--p", sim_ov.p, "releases per measurement window")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--k", sim_ov.k, "feedback gain")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--k-times-nf", sim_ov.k_times_nF, "feedback gain as k * n_F")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--gain-case", sim_ov.gain_case, "stability argument for the gain")
        ->check(CLI::IsMember({"case1", "case2"}));
    sim_cmd->add_option("--horizon", sim_ov.horizon, "campaign horizon (days)")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--threshold", sim_ov.threshold, "elimination threshold (females)")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--max-step", sim_ov.max_step, "integrator step cap (days)")
        ->check(CLI::PositiveNumber);

    CommonOpts tab_opts;
    int tab_threads = 0;
    auto* tab_cmd = app.add_subcommand(
        "tables", "rerun the eighteen reference configurations and compare");
    add_common(tab_cmd, tab_opts, true);
    tab_cmd->add_option("--threads", tab_threads,
                        "worker cap (default SIT_MAX_THREADS or hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (eq_cmd->parsed()) return cmd_equilibria(eq_opts, eq_lambda, eq_lam_opt->count() > 0);
        if (cr_cmd->parsed()) return cmd_critical_rates(cr_opts, cr_taus);
        if (sim_cmd->parsed()) return cmd_simulate(sim_opts, sim_ov);
        if (tab_cmd->parsed()) return cmd_tables(tab_opts, tab_threads);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace sit
