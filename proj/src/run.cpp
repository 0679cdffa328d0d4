#include "dgrw/run.hpp"

#include "dgrw/amplify.hpp"
#include "dgrw/errors.hpp"
#include "dgrw/gaussian.hpp"
#include "dgrw/grid.hpp"
#include "dgrw/oracle.hpp"
#include "dgrw/trajectory.hpp"
#include "dgrw/units.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifndef DGRW_GIT_REV
#define DGRW_GIT_REV "unknown"
#endif

namespace dgrw {

using nlohmann::json;

std::vector<double> build_time_grid(const TimeGridSpec& g) {
    if (g.points < 1)
        throw std::invalid_argument("time grid needs at least one point");
    if (g.points == 1) {
        if (!(g.stop >= 0.0)) throw std::invalid_argument("time grid stop must be >= 0");
        return {g.stop};
    }
    if (!(g.stop > g.start))
        throw std::invalid_argument("time grid needs stop > start");
    std::vector<double> t(static_cast<std::size_t>(g.points));
    const auto n = static_cast<double>(g.points - 1);
    if (g.log_spacing) {
        if (!(g.start > 0.0))
            throw std::invalid_argument("log-spaced time grid needs start > 0");
        const double r = std::log(g.stop / g.start) / n;
        for (int i = 0; i < g.points; ++i)
            t[static_cast<std::size_t>(i)] = g.start * std::exp(r * static_cast<double>(i));
    } else {
        const double d = (g.stop - g.start) / n;
        for (int i = 0; i < g.points; ++i)
            t[static_cast<std::size_t>(i)] = g.start + d * static_cast<double>(i);
    }
    t.back() = g.stop;
    return t;
}

json json_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    return v;
}

double number_from_json(const json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw std::invalid_argument(std::string(what) + ": expected a number");
}

json params_to_json(const ModelParams& p) {
    return json{{"lambda_rate", json_number(p.lambda_rate)}, {"r_c", json_number(p.r_c)},
                {"v_eta", json_number(p.v_eta)},             {"mass", json_number(p.mass)},
                {"hbar", json_number(p.hbar)},               {"k_boltzmann", json_number(p.k_boltzmann)}};
}

ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.lambda_rate = number_from_json(j.at("lambda_rate"), "lambda_rate");
    p.r_c = number_from_json(j.at("r_c"), "r_c");
    p.v_eta = number_from_json(j.at("v_eta"), "v_eta");
    p.mass = number_from_json(j.at("mass"), "mass");
    if (j.contains("hbar")) p.hbar = number_from_json(j.at("hbar"), "hbar");
    if (j.contains("k_boltzmann"))
        p.k_boltzmann = number_from_json(j.at("k_boltzmann"), "k_boltzmann");
    return p;
}

json derived_to_json(const DerivedParams& d) {
    return json{{"k", json_number(d.k)},
                {"gamma_thr", json_number(d.gamma_thr)},
                {"xi", json_number(d.xi)},
                {"h_as", json_number(d.h_as)},
                {"temperature", json_number(d.temperature)},
                {"epsilon", json_number(d.epsilon)},
                {"eps_hat", json_number(d.eps_hat)}};
}

namespace {

double opt_num(const json& o, const char* key, double def) {
    if (!o.is_object() || !o.contains(key) || o.at(key).is_null()) return def;
    return number_from_json(o.at(key), key);
}

double req_num(const json& o, const char* key) {
    if (!o.is_object() || !o.contains(key))
        throw std::invalid_argument(std::string("missing option: ") + key);
    return number_from_json(o.at(key), key);
}

GaussianState state_from_options(const json& o, const ModelParams& p) {
    GaussianState s;
    s.alpha = {opt_num(o, "alpha_re", 0.0), opt_num(o, "alpha_im", 0.0)};
    s.beta = opt_num(o, "beta", 0.0);
    s.gamma = {opt_num(o, "gamma_re", p.r_c * p.r_c), opt_num(o, "gamma_im", 0.0)};
    return s;
}

void write_text(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open output file: " + path);
    out << content;
    if (!out) throw io_error("failed writing output file: " + path);
}

void write_manifest(const RunConfig& cfg, double wall_seconds) {
    if (cfg.out_manifest.empty()) return;
    json j;
    j["subcommand"] = cfg.subcommand;
    j["params"] = params_to_json(cfg.params);
    j["derived"] = derived_to_json(derive_params(cfg.params));
    j["seed"] = cfg.seed;
    j["n_traj"] = cfg.n_traj;
    j["t_grid"] = json{{"start", json_number(cfg.t_grid.start)},
                       {"stop", json_number(cfg.t_grid.stop)},
                       {"points", cfg.t_grid.points},
                       {"spacing", cfg.t_grid.log_spacing ? "log" : "linear"}};
    j["threads"] = cfg.threads;
    j["options"] = cfg.options.is_null() ? json::object() : cfg.options;
    j["outputs"] = json{{"csv", cfg.out_csv}};
    j["git_rev"] = DGRW_GIT_REV;
    j["wall_seconds"] = wall_seconds;
    write_text(cfg.out_manifest, j.dump(2) + "\n");
}

void run_params(const RunConfig& cfg) {
    json out;
    out["params"] = params_to_json(cfg.params);
    out["derived"] = derived_to_json(derive_params(cfg.params));
    write_text(cfg.out_csv, out.dump(2) + "\n");
}

void run_ensemble(const RunConfig& cfg) {
    const std::vector<double> grid = build_time_grid(cfg.t_grid);
    const GaussianState s0 = state_from_options(cfg.options, cfg.params);
    EnsembleOptions eo;
    eo.threads = cfg.threads;
    eo.trajectory.free_evolution = opt_num(cfg.options, "free_evolution", 1.0) != 0.0;
    const EnsembleSeries series =
        ensemble_statistics(cfg.params, s0, grid, cfg.n_traj, cfg.seed, eo);
    std::ostringstream ss;
    write_series_csv(ss, series);
    write_text(cfg.out_csv, ss.str());
}

// variance-only fast path; fig2 routes here with free_reference on
void run_variance(const RunConfig& cfg, bool free_reference_default) {
    const std::vector<double> grid = build_time_grid(cfg.t_grid);
    const std::complex<double> gamma0{opt_num(cfg.options, "gamma_re", cfg.params.r_c * cfg.params.r_c),
                                      opt_num(cfg.options, "gamma_im", 0.0)};
    EnsembleOptions eo;
    eo.threads = cfg.threads;
    const VarianceSeries series =
        expected_variance_timeonly(cfg.params, gamma0, grid, cfg.n_traj, cfg.seed, eo);
    const bool free_ref =
        opt_num(cfg.options, "free_reference", free_reference_default ? 1.0 : 0.0) != 0.0;
    std::ostringstream ss;
    write_csv_header(ss);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        write_csv_row(ss, grid[i], "var_x_psi", series.var_x_psi.estimate[i],
                      series.var_x_psi.std_error[i]);
        if (free_ref)
            write_csv_row(ss, grid[i], "free_reference",
                          free_position_variance(gamma0, grid[i], cfg.params),
                          std::numeric_limits<double>::quiet_NaN());
    }
    write_text(cfg.out_csv, ss.str());
}

void run_oracle(const RunConfig& cfg) {
    const json& o = cfg.options;
    if (!o.is_object() || !o.contains("kind"))
        throw std::invalid_argument("oracle needs a kind");
    const std::string kind = o.at("kind").get<std::string>();
    const ModelParams& p = cfg.params;
    json out;
    out["kind"] = kind;
    if (kind == "mean_momentum") {
        out["value"] = json_number(mean_momentum(req_num(o, "p0"), req_num(o, "t"), p));
    } else if (kind == "mean_energy") {
        out["value"] = json_number(mean_energy(req_num(o, "h0"), req_num(o, "t"), p));
    } else if (kind == "heating_rate") {
        out["value"] = json_number(grw_heating_rate(p));
    } else if (kind == "var_x_rho") {
        const std::complex<double> g0{opt_num(o, "gamma_re", p.r_c * p.r_c),
                                      opt_num(o, "gamma_im", 0.0)};
        const double t = req_num(o, "t");
        const double fv = free_position_variance(g0, t, p);
        out["free_var"] = json_number(fv);
        out["value"] = json_number(var_x_rho(fv, t, p));
    } else if (kind == "chi") {
        const GaussianState s = state_from_options(o, p);
        const std::complex<double> c =
            characteristic_function(req_num(o, "nu"), req_num(o, "mu"), req_num(o, "t"), s, p);
        out["re"] = json_number(c.real());
        out["im"] = json_number(c.imag());
        out["abs"] = json_number(std::abs(c));
    } else if (kind == "asymptotic") {
        const double rate = opt_num(o, "lambda_eff", p.lambda_rate);
        const AsymptoticVariances a = asymptotic_variances(p, rate);
        const DiscriminantVariances d = asymptotic_variances_discriminant(p, rate);
        out["lambda_eff"] = json_number(rate);
        out["var_x"] = json_number(a.var_x);
        out["var_p"] = json_number(a.var_p);
        out["gamma_eq_re"] = json_number(a.gamma_eq.real());
        out["gamma_eq_im"] = json_number(a.gamma_eq.imag());
        out["residual"] = json_number(a.residual);
        out["gamma_iter_re"] = json_number(a.gamma_iter.real());
        out["gamma_iter_im"] = json_number(a.gamma_iter.imag());
        out["doublings"] = a.doublings;
        out["product_ratio"] = json_number(a.product_ratio);
        out["var_x_discriminant"] = json_number(d.var_x);
        out["var_p_discriminant"] = json_number(d.var_p);
    } else if (kind == "transfer") {
        const GaussianState s = state_from_options(o, p);
        const TransferChecks t = momentum_transfer_checks(s, p);
        out["dp_dt_quadrature"] = json_number(t.dp_dt_quadrature);
        out["dp_dt_closed"] = json_number(t.dp_dt_closed);
        out["dh_dt_quadrature"] = json_number(t.dh_dt_quadrature);
        out["dh_dt_closed"] = json_number(t.dh_dt_closed);
    } else if (kind == "collisional") {
        const CollisionalTable t = collisional_correspondence(p);
        out["lambda_th"] = json_number(t.lambda_th);
        out["v_mp"] = json_number(t.v_mp);
        out["coupling"] = t.coupling;
    } else {
        throw std::invalid_argument("unknown oracle kind: " + kind);
    }
    write_text(cfg.out_csv, out.dump(2) + "\n");
}

void run_grid_born(const RunConfig& cfg) {
    const json& o = cfg.options;
    const ModelParams& p = cfg.params;
    SuperpositionConfig sc;
    sc.alpha = opt_num(o, "alpha", 10.0 * p.r_c);
    sc.gamma = opt_num(o, "gamma", 0.01 * p.r_c * p.r_c);
    const double wp = opt_num(o, "cplus2", 0.5);
    if (!(wp > 0.0) || !(wp < 1.0))
        throw std::invalid_argument("cplus2 must lie strictly between 0 and 1");
    sc.c_plus = std::sqrt(wp);
    sc.c_minus = std::sqrt(1.0 - wp);
    sc.n_samples = static_cast<std::size_t>(cfg.n_traj);
    sc.seed = cfg.seed;
    sc.grid_n = static_cast<std::size_t>(opt_num(o, "grid_n", 4096.0));
    const SuperpositionResult r = superposition_experiment(sc, p);
    json out;
    out["n_samples"] = sc.n_samples;
    out["n_plus"] = r.n_plus;
    out["n_minus"] = r.n_minus;
    out["n_undecided"] = r.n_undecided;
    out["freq_plus"] = json_number(r.freq_plus);
    out["freq_se"] = json_number(r.freq_se);
    out["weight_plus"] = json_number(r.weight_plus);
    out["z_score"] = json_number((r.freq_plus - r.weight_plus) / r.freq_se);
    write_text(cfg.out_csv, out.dump(2) + "\n");
}

void run_amplify(const RunConfig& cfg) {
    const json& o = cfg.options;
    const ModelParams& p = cfg.params;
    if (o.is_object() && o.contains("body")) {
        const BodySpec b = load_body_spec(o.at("body").get<std::string>());
        const ModelParams reduced = rigid_body_reduce(b, p.v_eta, p.r_c);
        json out;
        out["params"] = params_to_json(reduced);
        out["derived"] = derived_to_json(derive_params(reduced));
        write_text(cfg.out_csv, out.dump(2) + "\n");
        return;
    }
    TwoParticleGaussian tp;
    tp.gamma_cm = req_num(o, "gamma_cm");
    tp.gamma_rel = req_num(o, "gamma_rel");
    tp.alpha_rel = req_num(o, "alpha_rel");
    std::vector<double> ys;
    if (o.contains("y")) {
        for (const auto& v : o.at("y")) ys.push_back(number_from_json(v, "y"));
    } else {
        const double c = tp.alpha_rel / 2.0;
        ys = {c - p.r_c, c, c + p.r_c};
    }
    std::ostringstream ss;
    ss << "y,observable,value\n";
    char buf[40];
    auto row = [&](double y, const char* name, double v) {
        auto num = [&](double x) {
            if (std::isnan(x)) {
                ss << "nan";
                return;
            }
            std::snprintf(buf, sizeof buf, "%.17g", x);
            ss << buf;
        };
        num(y);
        ss << ',' << name << ',';
        num(v);
        ss << '\n';
    };
    for (double y : ys) {
        const TwoParticleMeans exact = two_particle_jump_means(tp, y, p);
        const TwoParticleMeans wide = two_particle_jump_means_wide(tp, y, p);
        row(y, "mean_x_cm", exact.mean_x_cm);
        row(y, "mean_x_rel", exact.mean_x_rel);
        row(y, "mean_x_cm_wide", wide.mean_x_cm);
        row(y, "mean_x_rel_wide", wide.mean_x_rel);
    }
    const TwoParticleAfter after = two_particle_post_variances(tp, p);
    const double nn = std::numeric_limits<double>::quiet_NaN();
    row(nn, "var_cm", after.var_cm);
    row(nn, "var_rel", after.var_rel);
    row(nn, "density_mean", after.density.mean);
    row(nn, "density_variance", after.density.variance);
    row(nn, "regime_valid", after.regime_valid ? 1.0 : 0.0);
    const EnergyKick kick = energy_kick_estimate(tp.gamma_rel, tp.gamma_rel, p);
    row(nn, "delta_e", kick.delta_e);
    row(nn, "level_spacing", kick.level_spacing);
    row(nn, "delta_e_ratio", kick.ratio);
    write_text(cfg.out_csv, ss.str());
}

} // namespace

void run_command(const RunConfig& cfg) {
    derive_params(cfg.params); // fail fast on bad parameters
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.subcommand == "params") run_params(cfg);
    else if (cfg.subcommand == "ensemble") run_ensemble(cfg);
    else if (cfg.subcommand == "variance") run_variance(cfg, false);
    else if (cfg.subcommand == "fig2") run_variance(cfg, true);
    else if (cfg.subcommand == "oracle") run_oracle(cfg);
    else if (cfg.subcommand == "grid-born") run_grid_born(cfg);
    else if (cfg.subcommand == "amplify") run_amplify(cfg);
    else throw std::invalid_argument("unknown subcommand: " + cfg.subcommand);
    const auto t1 = std::chrono::steady_clock::now();
    write_manifest(cfg, std::chrono::duration<double>(t1 - t0).count());
}

RunConfig config_from_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open manifest: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("manifest is not valid JSON: ") + e.what());
    }
    RunConfig cfg;
    cfg.subcommand = j.at("subcommand").get<std::string>();
    cfg.params = params_from_json(j.at("params"));
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.n_traj = j.at("n_traj").get<std::uint64_t>();
    const json& tg = j.at("t_grid");
    cfg.t_grid.start = number_from_json(tg.at("start"), "t_grid.start");
    cfg.t_grid.stop = number_from_json(tg.at("stop"), "t_grid.stop");
    cfg.t_grid.points = tg.at("points").get<int>();
    cfg.t_grid.log_spacing = tg.at("spacing").get<std::string>() == "log";
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("options")) cfg.options = j.at("options");
    if (j.contains("outputs") && j.at("outputs").contains("csv"))
        cfg.out_csv = j.at("outputs").at("csv").get<std::string>();
    return cfg;
}

} // namespace dgrw
