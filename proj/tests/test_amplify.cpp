#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgrw/amplify.hpp"
#include "dgrw/errors.hpp"
#include "dgrw/params.hpp"
#include "dgrw/units.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace dgrw;

TEST_CASE("rigid body reduction adds rates and masses") {
    BodySpec b;
    b.groups = {{1e20, 1.7e-27, 1e-16}, {2e20, 9.1e-31, 1e-16}};
    auto p = rigid_body_reduce(b, 1.054571817e4);
    CHECK(p.mass == doctest::Approx(1e20 * 1.7e-27 + 2e20 * 9.1e-31).epsilon(1e-14));
    CHECK(p.lambda_rate == doctest::Approx(3e20 * 1e-16).epsilon(1e-14));
    // heavier bodies damp harder: k scales as 1/M
    auto d = derive_params(p);
    ModelParams single;
    single.mass = 1.7e-27;
    single.v_eta = 1.054571817e4;
    CHECK(d.k == doctest::Approx(derive_params(single).k * single.mass / p.mass).epsilon(1e-12));
}

TEST_CASE("a gram of nucleons reaches the macroscopic rate") {
    BodySpec b;
    b.groups = {{1e23, 1e-26, 1e-16}};
    auto p = rigid_body_reduce(b, 1.054571817e4);
    CHECK(p.lambda_rate == doctest::Approx(1e7).epsilon(1e-12));
    CHECK(p.mass == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("non-rigid bodies are refused") {
    BodySpec b;
    b.rigid = false;
    b.groups = {{10, 1e-27, 1e-16}};
    CHECK_THROWS_AS(rigid_body_reduce(b, 1e4), std::invalid_argument);
    BodySpec empty;
    CHECK_THROWS_AS(rigid_body_reduce(empty, 1e4), std::invalid_argument);
    BodySpec bad;
    bad.groups = {{0.0, 1e-27, 1e-16}};
    CHECK_THROWS_AS(rigid_body_reduce(bad, 1e4), std::invalid_argument);
}

TEST_CASE("body spec files") {
    const std::string path = "amplify_body_tmp.cfg";
    {
        std::ofstream f(path);
        f << "# two species\n"
          << "rigid = true\n"
          << "group = 1e20 1.7e-27 1e-16\n"
          << "group = 2e20 9.1e-31 1e-16\n";
    }
    auto b = load_body_spec(path);
    CHECK(b.rigid);
    REQUIRE(b.groups.size() == 2);
    CHECK(b.groups[0].count == 1e20);
    CHECK(b.groups[1].mass == 9.1e-31);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_body_spec("missing_body.cfg"), io_error);
}

TEST_CASE("pair means: exact formula against the wide-packet limit") {
    auto p = preset_params("nucleon"); // k = 5e-5
    TwoParticleGaussian s;
    s.gamma_cm = 5e-29;
    s.gamma_rel = 5e-29;
    s.alpha_rel = 1e-15;
    // regime: k r_c^2 = 5e-19 >> gamma
    for (double y : {0.0, 1e-8, 1e-7, -3e-8}) {
        auto exact = two_particle_jump_means(s, y, p);
        auto wide = two_particle_jump_means_wide(s, y, p);
        CHECK(exact.mean_x_cm == doctest::Approx(wide.mean_x_cm).epsilon(0.01));
        CHECK(exact.mean_x_rel == doctest::Approx(wide.mean_x_rel).epsilon(0.01));
    }
}

TEST_CASE("a single jump drags the relative coordinate four orders past its mean") {
    auto p = preset_params("nucleon");
    TwoParticleGaussian s;
    s.gamma_cm = 5e-29;
    s.gamma_rel = 5e-29;
    s.alpha_rel = 1e-15; // nuclear-scale separation
    const double y = 1e-7; // jump one localization length away
    auto m = two_particle_jump_means(s, y, p);
    // alpha - 2 k y = 1e-15 - 1e-11: the jump term dominates by 1e4
    CHECK(m.mean_x_rel == doctest::Approx(-1.0e-11).epsilon(2e-3));
    CHECK(std::abs(m.mean_x_rel / s.alpha_rel) > 5e3);
}

TEST_CASE("post-jump pair variances and jump law in the wide regime") {
    auto p = preset_params("nucleon");
    TwoParticleGaussian s;
    s.gamma_cm = 1e-22;
    s.gamma_rel = 2e-22;
    s.alpha_rel = 3e-9;
    auto a = two_particle_post_variances(s, p);
    const double k = derive_params(p).k;
    CHECK(a.regime_valid); // 5e-19 >= 100 * 2e-22
    CHECK(a.var_cm ==
          doctest::Approx(s.gamma_cm / 2.0 + k * k * s.gamma_rel / 8.0).epsilon(1e-12));
    CHECK(a.var_rel ==
          doctest::Approx(s.gamma_rel / 2.0 + 2.0 * k * k * s.gamma_cm).epsilon(1e-12));
    CHECK(a.density.mean == doctest::Approx(s.alpha_rel / 2.0).epsilon(1e-12));
    CHECK(a.density.variance ==
          doctest::Approx(p.r_c * p.r_c * (1.0 - k) * (1.0 - k) / 2.0).epsilon(1e-12));

    TwoParticleGaussian too_wide = s;
    too_wide.gamma_rel = 1e-18;
    CHECK(!two_particle_post_variances(too_wide, p).regime_valid);
}

TEST_CASE("energy kicked in by a jump against the level spacing") {
    auto p = preset_params("nucleon");
    const double k = derive_params(p).k;
    const double g = 1e-20; // r_c^2 / g = 1e6, comfortably bound
    auto e = energy_kick_estimate(g, g, p);
    CHECK(e.regime_valid);
    CHECK(e.delta_e == doctest::Approx(p.hbar * p.hbar * k / (p.mass * g)).epsilon(1e-12));
    CHECK(e.level_spacing == doctest::Approx(p.hbar * p.hbar / (p.mass * g)).epsilon(1e-12));
    // equal widths: the ratio is exactly k, five orders below unity
    CHECK(e.ratio == doctest::Approx(k).epsilon(1e-12));
    CHECK(e.ratio == doctest::Approx(5e-5).epsilon(1e-10));

    auto loose = energy_kick_estimate(1e-12, 1e-12, p);
    CHECK(!loose.regime_valid);
}

TEST_CASE("the wide limit degenerates cleanly at k = 0") {
    ModelParams p = preset_params("grw1986"); // k = 0
    TwoParticleGaussian s;
    s.gamma_cm = 1e-22;
    s.gamma_rel = 1e-22;
    s.alpha_rel = 4e-9;
    auto wide = two_particle_jump_means_wide(s, 2e-8, p);
    CHECK(wide.mean_x_cm == 0.0);                 // no dissipative drag on the CM
    CHECK(wide.mean_x_rel == s.alpha_rel);        // relative coordinate untouched
}
