#include "doctest.h"
#include "sit/model_core.hpp"

#include <cmath>

using namespace sit;

namespace {

ModelParams baseline() { return make_params_sigma_k(0.5, 4.55, 0.05, 140.0, 0.04, 0.03); }

}  // namespace

TEST_CASE("beta derives from sigma over K") {
    const ModelParams p = baseline();
    CHECK(p.beta == doctest::Approx(0.05 / 140.0).epsilon(1e-15));
}

TEST_CASE("offspring numbers match the closed forms") {
    const auto n = offspring_numbers(baseline());
    // n_F = (1-r)*rho/mu_F, n_M = r*rho/mu_M.
    CHECK(n.n_F == doctest::Approx(75.833333333333).epsilon(1e-12));
    CHECK(n.n_M == doctest::Approx(56.875).epsilon(1e-12));
}

TEST_CASE("wild equilibrium splits log(n_F)/beta by offspring shares") {
    const ModelParams p = baseline();
    const auto eq = wild_equilibrium(p);
    REQUIRE(eq.has_value());
    CHECK(eq->M_star == doctest::Approx(5194.2455396675).epsilon(1e-10));
    CHECK(eq->F_star == doctest::Approx(6925.6607195566).epsilon(1e-10));
    CHECK(eq->M_star + eq->F_star ==
          doctest::Approx(std::log(75.833333333333) / p.beta).epsilon(1e-10));
    // More females than males at equilibrium because n_F > n_M.
    CHECK(eq->F_star > eq->M_star);
}

TEST_CASE("wild equilibrium vanishes for a non-viable population") {
    // n_F = (1-r)*rho/mu_F = 0.833 < 1.
    const ModelParams p = make_params(0.5, 0.05, 3e-4, 0.04, 0.03);
    CHECK_FALSE(wild_equilibrium(p).has_value());
}

TEST_CASE("wild dynamics are stationary at the wild equilibrium") {
    const ModelParams p = baseline();
    const auto eq = wild_equilibrium(p);
    const Deriv2 d = rhs_wild(SimState{0.0, eq->M_star, eq->F_star, 0.0}, p);
    CHECK(std::abs(d.dM) < 1e-9 * eq->M_star);
    CHECK(std::abs(d.dF) < 1e-9 * eq->F_star);
}

TEST_CASE("sterile males scale births by the wild-male mating share") {
    const ModelParams p = baseline();
    const SterileParams sp{0.04, 1.0};
    const SimState s{0.0, 1000.0, 2000.0, 3000.0};
    const Deriv2 with = rhs_sit(s, p, sp);
    const Deriv2 without = rhs_wild(s, p);
    const double share = s.M / (s.M + sp.gamma * s.M_S);
    CHECK(with.dF + p.mu_F * s.F ==
          doctest::Approx(share * (without.dF + p.mu_F * s.F)).epsilon(1e-12));
    // No sterile males: both systems agree.
    const SimState s0{0.0, 1000.0, 2000.0, 0.0};
    const Deriv2 a = rhs_sit(s0, p, sp);
    const Deriv2 b = rhs_wild(s0, p);
    CHECK(a.dM == doctest::Approx(b.dM).epsilon(1e-14));
    CHECK(a.dF == doctest::Approx(b.dF).epsilon(1e-14));
}

TEST_CASE("the no-male corner produces no births") {
    const ModelParams p = baseline();
    const SterileParams sp{0.04, 1.0};
    // M = M_S = 0 leaves the mating share at 0 by definition.
    const Deriv2 d = rhs_sit(SimState{0.0, 0.0, 5.0, 0.0}, p, sp);
    CHECK(d.dM == 0.0);
    CHECK(d.dF == doctest::Approx(-p.mu_F * 5.0).epsilon(1e-14));
    const Deriv2 d2 = rhs_sit(SimState{0.0, 0.0, 5.0, 100.0}, p, sp);
    CHECK(d2.dF == doctest::Approx(-p.mu_F * 5.0).epsilon(1e-14));
}

TEST_CASE("parameter validation rejects bad inputs") {
    CHECK_THROWS_AS(make_params(0.0, 4.55, 3e-4, 0.04, 0.03), ConfigError);
    CHECK_THROWS_AS(make_params(1.0, 4.55, 3e-4, 0.04, 0.03), ConfigError);
    CHECK_THROWS_AS(make_params(0.5, -1.0, 3e-4, 0.04, 0.03), ConfigError);
    CHECK_THROWS_AS(make_params(0.5, 4.55, 0.0, 0.04, 0.03), ConfigError);
    CHECK_THROWS_AS(make_params(0.5, 4.55, 3e-4, 0.04, 0.0), ConfigError);
    CHECK_THROWS_AS(make_params_sigma_k(0.5, 4.55, 0.05, 0.0, 0.04, 0.03), ConfigError);
    CHECK_THROWS_AS(validate(SterileParams{0.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(validate(SterileParams{0.04, -1.0}), ConfigError);
    // Sterile males must not outlive wild males.
    CHECK_THROWS_AS(validate_pair(baseline(), SterileParams{0.03, 1.0}), ConfigError);
    CHECK_NOTHROW(validate_pair(baseline(), SterileParams{0.05, 1.0}));
}
