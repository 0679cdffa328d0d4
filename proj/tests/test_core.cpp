#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dgrw/errors.hpp"
#include "dgrw/params.hpp"
#include "dgrw/units.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

using namespace dgrw;

TEST_CASE("dissipation parameter for reference masses") {
    ModelParams p;
    p.mass = 1e-27;
    auto d = derive_params(p);
    CHECK(d.k == doctest::Approx(5e-5).epsilon(1e-12));

    p.mass = 1e-3;
    d = derive_params(p);
    CHECK(d.k == doctest::Approx(5e-29).epsilon(1e-12));
    CHECK(d.gamma_thr / 2.0 == doctest::Approx(1e-42).epsilon(1e-12));
}

TEST_CASE("noise temperature sits near 0.2 K for a nucleon") {
    auto d = derive_params(preset_params("nucleon"));
    CHECK(d.temperature > 0.1);
    CHECK(d.temperature < 0.3);
    CHECK(d.temperature ==
          doctest::Approx(ModelParams{}.hbar * ModelParams{}.hbar /
                          (8.0 * 1.380649e-23 * 1e-27 * 1e-14 * d.k))
              .epsilon(1e-12));
}

TEST_CASE("presets") {
    auto grw = preset_params("grw1986");
    CHECK(grw.lambda_rate == 1e-16);
    CHECK(grw.r_c == 1e-7);
    CHECK(std::isinf(grw.v_eta));
    auto dg = derive_params(grw);
    CHECK(dg.k == 0.0);
    CHECK(dg.xi == 0.0);
    CHECK(std::isinf(dg.h_as));
    CHECK(std::isinf(dg.temperature));

    auto adler = preset_params("adler2007");
    CHECK(adler.lambda_rate == 2.2e-8);
    CHECK(std::isinf(adler.v_eta));

    auto nuc = preset_params("nucleon");
    CHECK(nuc.mass == 1e-27);
    CHECK(derive_params(nuc).k == doctest::Approx(5e-5).epsilon(1e-12));

    auto mac = preset_params("macro_1g");
    CHECK(mac.mass == 1e-3);
    CHECK(mac.lambda_rate == 1e7);

    CHECK_THROWS_AS(preset_params("no_such_preset"), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    ModelParams p;
    p.lambda_rate = -1.0;
    CHECK_THROWS_AS(derive_params(p), std::invalid_argument);
    p = ModelParams{};
    p.r_c = 0.0;
    CHECK_THROWS_AS(derive_params(p), std::invalid_argument);
    p = ModelParams{};
    p.mass = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(derive_params(p), std::invalid_argument);
    p = ModelParams{};
    p.v_eta = 0.0;
    CHECK_THROWS_AS(derive_params(p), std::invalid_argument);
    p = ModelParams{};
    p.v_eta = 1e-10; // k >= 1
    CHECK_THROWS_AS(derive_params(p), std::invalid_argument);
    p = ModelParams{};
    p.lambda_rate = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(derive_params(p), std::invalid_argument);
}

TEST_CASE("unit scales and round trips") {
    auto p = preset_params("nucleon");
    CHECK(unit_scale(p, Quantity::length) == p.r_c);
    CHECK(unit_scale(p, Quantity::time) == 1.0 / p.lambda_rate);
    CHECK(unit_scale(p, Quantity::momentum) == p.hbar / p.r_c);
    CHECK(unit_scale(p, Quantity::energy) ==
          doctest::Approx(p.hbar * p.hbar / (p.mass * p.r_c * p.r_c)).epsilon(1e-15));
    CHECK(unit_scale(p, Quantity::variance) == p.r_c * p.r_c);

    // energy unit is also hbar * lambda * eps_hat, the two routes must agree
    auto d = derive_params(p);
    CHECK(unit_scale(p, Quantity::energy) ==
          doctest::Approx(p.hbar * p.lambda_rate * d.eps_hat).epsilon(1e-12));

    const double values[] = {3.7e-9, 1.0, 4.2e11};
    const Quantity kinds[] = {Quantity::length, Quantity::time, Quantity::momentum,
                              Quantity::energy, Quantity::variance};
    for (double v : values)
        for (auto kind : kinds) {
            const double back = dimensionalize(p, nondimensionalize(p, v, kind), kind);
            CHECK(back == doctest::Approx(v).epsilon(1e-14));
        }
}

TEST_CASE("dimensionless parameter sets") {
    auto p = make_nondim_params(0.05, 2.0);
    CHECK(p.hbar == 1.0);
    CHECK(p.r_c == 1.0);
    CHECK(p.lambda_rate == 1.0);
    auto d = derive_params(p);
    CHECK(d.k == doctest::Approx(0.05).epsilon(1e-14));
    CHECK(d.eps_hat == doctest::Approx(2.0).epsilon(1e-14));

    auto zero = make_nondim_params(0.0, 1.0);
    CHECK(std::isinf(zero.v_eta));
    CHECK(derive_params(zero).k == 0.0);

    auto nuc = preset_params("nucleon");
    auto dn = derive_params(nuc);
    auto nd = nondimensional_params(nuc);
    auto dd = derive_params(nd);
    CHECK(dd.k == doctest::Approx(dn.k).epsilon(1e-12));
    CHECK(dd.eps_hat == doctest::Approx(dn.eps_hat).epsilon(1e-12));
}

TEST_CASE("quantity names") {
    CHECK(quantity_from_string("length") == Quantity::length);
    CHECK(quantity_from_string("energy") == Quantity::energy);
    CHECK_THROWS_AS(quantity_from_string("furlongs"), std::invalid_argument);
}

TEST_CASE("parameter files") {
    const std::string path = "core_params_tmp.cfg";
    {
        std::ofstream f(path);
        f << "# comment line\n"
          << "lambda_rate = 2.5e-16\n"
          << "preset = grw1986\n";
    }
    auto p = load_params_file(path);
    CHECK(p.lambda_rate == 2.5e-16); // explicit key beats the preset either way
    CHECK(std::isinf(p.v_eta));
    CHECK(p.mass == 1.67262192369e-27);

    {
        std::ofstream f(path);
        f << "preset = nucleon\n"
          << "v_eta = inf\n";
    }
    p = load_params_file(path);
    CHECK(std::isinf(p.v_eta));
    CHECK(p.mass == 1e-27);

    {
        std::ofstream f(path);
        f << "wavelength = 3\n";
    }
    CHECK_THROWS_AS(load_params_file(path), std::invalid_argument);
    std::remove(path.c_str());

    CHECK_THROWS_AS(load_params_file("definitely_missing.cfg"), io_error);
}
