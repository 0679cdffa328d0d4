#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using nlohmann::json;

namespace {

std::string g_cli;

struct RunResult {
    int code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " 2>cli_stderr.txt";
    FILE* f = popen(cmd.c_str(), "r");
    REQUIRE(f != nullptr);
    std::string out;
    char buf[4096];
    std::size_t m;
    while ((m = fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, m);
    const int st = pclose(f);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json stderr_json() { return json::parse(slurp("cli_stderr.txt")); }

} // namespace

TEST_CASE("params prints the inputs and the derived set") {
    auto r = run_cli("params --preset nucleon");
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["params"]["mass"].get<double>() == 1e-27);
    CHECK(j["derived"]["k"].get<double>() == doctest::Approx(5e-5).epsilon(1e-12));
    CHECK(j["derived"]["temperature"].get<double>() == doctest::Approx(0.2014).epsilon(1e-3));

    // infinities survive the trip through JSON as strings
    auto g = run_cli("params --preset grw1986");
    REQUIRE(g.code == 0);
    auto jg = json::parse(g.out);
    CHECK(jg["params"]["v_eta"].is_string());
    CHECK(jg["derived"]["h_as"] == "inf");
}

TEST_CASE("ensemble run, manifest, and bit-exact rerun") {
    auto r = run_cli("ensemble --nondim --k 0.05 --n-traj 60 --seed 7 "
                     "--t-start 0.5 --t-stop 2 --t-points 3 "
                     "--beta 1 --out cli_a.csv --manifest cli_m.json");
    REQUIRE(r.code == 0);
    const std::string a = slurp("cli_a.csv");
    CHECK(a.rfind("t,observable,estimate,std_error\n", 0) == 0);

    auto m = json::parse(slurp("cli_m.json"));
    CHECK(m["subcommand"] == "ensemble");
    CHECK(m["seed"].get<std::uint64_t>() == 7);
    CHECK(m["n_traj"].get<std::uint64_t>() == 60);
    CHECK(m["t_grid"]["points"].get<int>() == 3);
    CHECK(m["t_grid"]["spacing"] == "linear");
    CHECK(m["params"]["lambda_rate"].get<double>() == 1.0);
    CHECK(m["derived"]["k"].get<double>() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(m["options"]["beta"].get<double>() == 1.0);
    CHECK(m["outputs"]["csv"] == "cli_a.csv");
    CHECK(m.contains("git_rev"));
    CHECK(m["wall_seconds"].get<double>() >= 0.0);

    auto rr = run_cli("rerun --manifest cli_m.json --out cli_b.csv");
    REQUIRE(rr.code == 0);
    CHECK(slurp("cli_b.csv") == a);

    // rerun can also restate its own manifest
    auto rr2 = run_cli("rerun --manifest cli_m.json --out cli_c.csv --manifest-out cli_m2.json");
    REQUIRE(rr2.code == 0);
    auto m2 = json::parse(slurp("cli_m2.json"));
    CHECK(m2["seed"] == m["seed"]);
    CHECK(m2["t_grid"] == m["t_grid"]);
    CHECK(slurp("cli_c.csv") == a);
}

TEST_CASE("thread count never changes the bytes") {
    const std::string base = "ensemble --nondim --k 0.02 --n-traj 130 --seed 3 "
                             "--t-stop 3 --t-points 4 ";
    auto r1 = run_cli(base + "--threads 1 --out cli_t1.csv");
    auto r4 = run_cli(base + "--threads 4 --out cli_t4.csv");
    auto r16 = run_cli(base + "--threads 16 --out cli_t16.csv");
    REQUIRE(r1.code == 0);
    REQUIRE(r4.code == 0);
    REQUIRE(r16.code == 0);
    const std::string t1 = slurp("cli_t1.csv");
    CHECK(t1 == slurp("cli_t4.csv"));
    CHECK(t1 == slurp("cli_t16.csv"));

    // environment-selected worker count takes the same path
    RunResult re{-1, ""};
    {
        const std::string saved = g_cli;
        g_cli = "DGRW_THREADS=8 " + g_cli;
        re = run_cli(base + "--out cli_env.csv");
        g_cli = saved;
    }
    REQUIRE(re.code == 0);
    CHECK(t1 == slurp("cli_env.csv"));
}

TEST_CASE("stdout and file output carry the same bytes") {
    const std::string args = "variance --nondim --k 0.05 --n-traj 40 --seed 5 "
                             "--t-stop 2 --t-points 3";
    auto to_stdout = run_cli(args);
    auto to_file = run_cli(args + " --out cli_v.csv");
    REQUIRE(to_stdout.code == 0);
    REQUIRE(to_file.code == 0);
    CHECK(to_stdout.out == slurp("cli_v.csv"));
}

TEST_CASE("single-trajectory errors are printed as nan") {
    auto r = run_cli("ensemble --nondim --k 0.05 --n-traj 1 --t-stop 1 --t-points 2");
    REQUIRE(r.code == 0);
    CHECK(r.out.find(",nan\n") != std::string::npos);
}

TEST_CASE("configuration mistakes exit 2 with a typed message") {
    CHECK(run_cli("ensemble --bogus-flag 3").code == 2);
    CHECK(stderr_json()["error"]["type"] == "config");

    CHECK(run_cli("params --preset atlantis").code == 2);
    CHECK(run_cli("ensemble --nondim --k 0.05 --lambda 2 --t-stop 1 --t-points 2").code == 2);
    CHECK(run_cli("ensemble --nondim --t-stop 1 --t-points 0").code == 2);
    CHECK(run_cli("oracle --kind nonsense").code == 2);
    CHECK(run_cli("grid-born --nondim --k 1e-4 --cplus2 1.5").code == 2);
    CHECK(run_cli("oracle --preset nucleon").code == 2); // --kind is required
    CHECK(run_cli("amplify --preset nucleon").code == 2); // neither body nor pair
}

TEST_CASE("missing files exit 4") {
    CHECK(run_cli("params --params-file no_such_file.cfg").code == 4);
    CHECK(stderr_json()["error"]["type"] == "io");
    CHECK(run_cli("rerun --manifest no_such_manifest.json").code == 4);
    CHECK(run_cli("amplify --preset nucleon --body no_such_body.cfg").code == 4);
}

TEST_CASE("numerical failures exit 3") {
    auto r = run_cli("grid-born --nondim --k 5e-5 --grid-n 8 --n-samples 10");
    CHECK(r.code == 3);
    CHECK(stderr_json()["error"]["type"] == "numerical");
}

TEST_CASE("oracle closed forms through the command line") {
    auto heat = run_cli("oracle --preset nucleon --kind heating_rate");
    REQUIRE(heat.code == 0);
    auto jh = json::parse(heat.out);
    CHECK(jh["value"].get<double>() == doctest::Approx(2.78e-44).epsilon(0.01));

    auto mom = run_cli("oracle --nondim --k 0.25 --kind mean_momentum --p0 3 --t 1.7");
    REQUIRE(mom.code == 0);
    CHECK(json::parse(mom.out)["value"].get<double>() ==
          doctest::Approx(3.0 * std::exp(-2.0 * 0.25 * 1.7 / 1.25)).epsilon(1e-12));

    auto as = run_cli("oracle --preset macro_1g --kind asymptotic --lambda-eff 1e7");
    REQUIRE(as.code == 0);
    auto ja = json::parse(as.out);
    CHECK(ja["residual"].get<double>() <= 1e-10);
    CHECK(ja["var_x"].get<double>() ==
          doctest::Approx(ja["var_x_discriminant"].get<double>()).epsilon(1e-10));
    CHECK(ja["var_p"].get<double>() ==
          doctest::Approx(ja["var_p_discriminant"].get<double>()).epsilon(1e-10));
    CHECK(ja["product_ratio"].get<double>() >= 1.0);

    auto tr = run_cli("oracle --nondim --k 0.1 --kind transfer --beta 2 --gamma-re 0.7");
    REQUIRE(tr.code == 0);
    auto jt = json::parse(tr.out);
    CHECK(jt["dp_dt_quadrature"].get<double>() ==
          doctest::Approx(jt["dp_dt_closed"].get<double>()).epsilon(1e-6));
    CHECK(jt["dh_dt_quadrature"].get<double>() ==
          doctest::Approx(jt["dh_dt_closed"].get<double>()).epsilon(1e-6));

    auto chi = run_cli("oracle --nondim --k 0.05 --kind chi --nu 0.3 --mu -0.2 --t 1");
    REQUIRE(chi.code == 0);
    auto jc = json::parse(chi.out);
    CHECK(jc["abs"].get<double>() <= 1.0 + 1e-12);

    auto col = run_cli("oracle --preset nucleon --kind collisional");
    REQUIRE(col.code == 0);
    auto jl = json::parse(col.out);
    CHECK(jl["lambda_th"].get<double>() == doctest::Approx(4.0 * std::sqrt(M_PI) * 1e-7));
    CHECK(jl["v_mp"].get<double>() == doctest::Approx(1.054571817e4));

    auto vr = run_cli("oracle --nondim --k 0.05 --kind var_x_rho --t 1 --gamma-re 1");
    REQUIRE(vr.code == 0);
    CHECK(json::parse(vr.out)["value"].get<double>() > 0.0);
}

TEST_CASE("two-peak statistics through the command line") {
    auto r = run_cli("grid-born --nondim --k 5e-5 --cplus2 0.5 --n-samples 400 --seed 11 "
                     "--manifest cli_born_m.json");
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["n_plus"].get<int>() + j["n_minus"].get<int>() + j["n_undecided"].get<int>() ==
          400);
    CHECK(j["n_undecided"].get<int>() == 0);
    CHECK(j["weight_plus"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    const double freq = j["freq_plus"].get<double>();
    const double se = j["freq_se"].get<double>();
    CHECK(std::abs(freq - 0.5) <= 4.0 * se);
    CHECK(std::isfinite(j["z_score"].get<double>()));
}

TEST_CASE("composite bodies and pairs through the command line") {
    {
        std::ofstream f("cli_body.cfg");
        f << "rigid = true\n"
          << "group = 1e23 1e-26 1e-16\n";
    }
    auto r = run_cli("amplify --preset nucleon --body cli_body.cfg");
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["params"]["lambda_rate"].get<double>() == doctest::Approx(1e7).epsilon(1e-12));
    CHECK(j["params"]["mass"].get<double>() == doctest::Approx(1e-3).epsilon(1e-12));
    std::remove("cli_body.cfg");

    auto pair = run_cli("amplify --preset nucleon --gamma-cm 5e-29 --gamma-rel 5e-29 "
                        "--alpha-rel 1e-15 --y 1e-7 --out cli_pair.csv");
    REQUIRE(pair.code == 0);
    const std::string csv = slurp("cli_pair.csv");
    CHECK(csv.rfind("y,observable,value\n", 0) == 0);
    CHECK(csv.find(",mean_x_rel,") != std::string::npos);
    CHECK(csv.find("nan,delta_e_ratio,") != std::string::npos);
    // the amplified relative mean lands at -1e-11
    std::istringstream lines(csv);
    std::string line;
    bool found = false;
    while (std::getline(lines, line)) {
        if (line.find(",mean_x_rel,") != std::string::npos) {
            const double v = std::stod(line.substr(line.rfind(',') + 1));
            CHECK(v == doctest::Approx(-1.0e-11).epsilon(2e-3));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("standard variance panels") {
    auto r = run_cli("fig2 --panel a --n-traj 15 --t-points 4 --seed 2 --out cli_f2.csv "
                     "--manifest cli_f2m.json");
    REQUIRE(r.code == 0);
    const std::string csv = slurp("cli_f2.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "t,observable,estimate,std_error");
    int rows = 0, free_rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        if (line.find(",free_reference,") != std::string::npos) {
            ++free_rows;
            CHECK(line.substr(line.size() - 4) == ",nan");
        }
    }
    CHECK(rows == 8); // 4 grid times, two observables each
    CHECK(free_rows == 4);
    auto m = json::parse(slurp("cli_f2m.json"));
    CHECK(m["subcommand"] == "fig2");
    CHECK(m["t_grid"]["spacing"] == "log");
    CHECK(m["options"]["panel"] == "a");
}

int main(int argc, char** argv) {
    if (argc > 1) g_cli = argv[1];
    if (g_cli.empty()) {
        std::fprintf(stderr, "usage: test_cli <path-to-cli-binary>\n");
        return 1;
    }
    doctest::Context ctx;
    ctx.applyCommandLine(1, argv);
    return ctx.run();
}
