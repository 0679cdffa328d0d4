#include "dgrw/errors.hpp"
#include "dgrw/params.hpp"
#include "dgrw/run.hpp"
#include "dgrw/units.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

namespace {

using dgrw::RunConfig;
using nlohmann::json;

// shared parameter flags; precedence preset < config file < explicit values
struct ParamFlags {
    std::string preset;
    std::string config_file;
    std::optional<double> lambda_rate, r_c, mass;
    std::optional<std::string> v_eta;
    bool nondim = false;
    std::optional<double> k, eps_hat;
};

double parse_v_eta(const std::string& s) {
    if (s == "inf" || s == "+inf" || s == "infinity")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("v_eta: expected a number or 'inf'");
    }
}

void add_param_flags(CLI::App* cmd, ParamFlags& f) {
    cmd->add_option("--preset", f.preset, "named parameter set");
    cmd->add_option("--params-file", f.config_file, "key=value parameter file");
    cmd->add_option("--lambda", f.lambda_rate, "jump rate [1/s]");
    cmd->add_option("--r-c", f.r_c, "localization length [m]");
    cmd->add_option("--v-eta", f.v_eta, "dissipation velocity [m/s] or 'inf'");
    cmd->add_option("--mass", f.mass, "particle mass [kg]");
    cmd->add_flag("--nondim", f.nondim, "dimensionless units: hbar = r_c = lambda = 1");
    cmd->add_option("--k", f.k, "dissipation parameter (with --nondim)");
    cmd->add_option("--eps-hat", f.eps_hat, "spreading per waiting time (with --nondim)");
}

dgrw::ModelParams resolve_params(const ParamFlags& f) {
    if (f.nondim) {
        if (!f.preset.empty() || !f.config_file.empty() || f.lambda_rate || f.r_c || f.mass ||
            f.v_eta)
            throw std::invalid_argument("--nondim replaces the physical parameter flags");
        return dgrw::make_nondim_params(f.k.value_or(0.0), f.eps_hat.value_or(1.0));
    }
    if (f.k || f.eps_hat)
        throw std::invalid_argument("--k/--eps-hat need --nondim");
    dgrw::ModelParams p;
    if (!f.preset.empty()) p = dgrw::preset_params(f.preset);
    if (!f.config_file.empty()) {
        if (!f.preset.empty())
            throw std::invalid_argument("give either --preset or --params-file, not both");
        p = dgrw::load_params_file(f.config_file);
    }
    if (f.lambda_rate) p.lambda_rate = *f.lambda_rate;
    if (f.r_c) p.r_c = *f.r_c;
    if (f.mass) p.mass = *f.mass;
    if (f.v_eta) p.v_eta = parse_v_eta(*f.v_eta);
    return p;
}

struct GridFlags {
    double start = 0.0, stop = 0.0;
    int points = 0;
    std::string spacing;
};

void add_grid_flags(CLI::App* cmd, GridFlags& g, double start, double stop, int points,
                    const std::string& spacing) {
    g.start = start;
    g.stop = stop;
    g.points = points;
    g.spacing = spacing;
    cmd->add_option("--t-start", g.start, "first grid time");
    cmd->add_option("--t-stop", g.stop, "last grid time");
    cmd->add_option("--t-points", g.points, "number of grid times");
    cmd->add_option("--spacing", g.spacing, "log or linear")
        ->check(CLI::IsMember({"log", "linear"}));
}

dgrw::TimeGridSpec to_grid(const GridFlags& g) {
    dgrw::TimeGridSpec t;
    t.start = g.start;
    t.stop = g.stop;
    t.points = g.points;
    t.log_spacing = g.spacing == "log";
    return t;
}

int dispatch(const RunConfig& cfg) {
    try {
        dgrw::run_command(cfg);
        return 0;
    } catch (const dgrw::io_error& e) {
        std::cerr << json{{"error", {{"type", "io"}, {"message", e.what()}}}}.dump() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dissipative localization model: trajectories, ensembles, closed forms"};
    app.require_subcommand(1);

    ParamFlags pf_params, pf_ens, pf_var, pf_oracle, pf_born, pf_amp;
    GridFlags gf_ens, gf_var, gf_fig2;

    // params
    auto* c_params = app.add_subcommand("params", "print parameters and derived quantities");
    add_param_flags(c_params, pf_params);
    std::string params_out;
    c_params->add_option("--out", params_out, "write JSON here instead of stdout");

    // ensemble
    auto* c_ens = app.add_subcommand("ensemble", "trajectory ensemble statistics as CSV");
    add_param_flags(c_ens, pf_ens);
    add_grid_flags(c_ens, gf_ens, 0.0, 0.0, 0, "linear");
    std::uint64_t ens_n = 1000, ens_seed = 1;
    int ens_threads = 0;
    double ens_alpha_re = 0.0, ens_alpha_im = 0.0, ens_beta = 0.0;
    std::optional<double> ens_gamma_re;
    double ens_gamma_im = 0.0;
    bool ens_no_drift = false;
    std::string ens_out, ens_manifest;
    c_ens->add_option("--n-traj", ens_n, "trajectories");
    c_ens->add_option("--seed", ens_seed, "base seed; trajectory i uses seed+i");
    c_ens->add_option("--threads", ens_threads, "worker threads (0: DGRW_THREADS or hardware)");
    c_ens->add_option("--alpha-re", ens_alpha_re, "initial mean position");
    c_ens->add_option("--alpha-im", ens_alpha_im, "initial alpha imaginary part");
    c_ens->add_option("--beta", ens_beta, "initial mean momentum");
    c_ens->add_option("--gamma-re", ens_gamma_re, "initial width Re (default r_c^2)");
    c_ens->add_option("--gamma-im", ens_gamma_im, "initial width Im");
    c_ens->add_flag("--no-drift", ens_no_drift, "freeze the between-jump evolution");
    c_ens->add_option("--out", ens_out, "CSV path (default stdout)");
    c_ens->add_option("--manifest", ens_manifest, "manifest JSON path");

    // variance
    auto* c_var = app.add_subcommand("variance", "expected wavefunction variance (fast path)");
    add_param_flags(c_var, pf_var);
    add_grid_flags(c_var, gf_var, 0.0, 0.0, 0, "linear");
    std::uint64_t var_n = 10000, var_seed = 1;
    int var_threads = 0;
    std::optional<double> var_gamma_re;
    double var_gamma_im = 0.0;
    bool var_free_ref = false;
    std::string var_out, var_manifest;
    c_var->add_option("--n-traj", var_n, "trajectories");
    c_var->add_option("--seed", var_seed, "base seed");
    c_var->add_option("--threads", var_threads, "worker threads");
    c_var->add_option("--gamma-re", var_gamma_re, "initial width Re (default r_c^2)");
    c_var->add_option("--gamma-im", var_gamma_im, "initial width Im");
    c_var->add_flag("--free-reference", var_free_ref, "add free-spreading rows");
    c_var->add_option("--out", var_out, "CSV path (default stdout)");
    c_var->add_option("--manifest", var_manifest, "manifest JSON path");

    // fig2
    auto* c_fig2 = app.add_subcommand(
        "fig2", "expected variance vs free spreading, four standard panels, dimensionless");
    std::string fig2_panel = "a";
    std::uint64_t fig2_n = 100000, fig2_seed = 1;
    int fig2_threads = 0;
    std::string fig2_out, fig2_manifest;
    c_fig2->add_option("--panel", fig2_panel, "a|b: single nucleon; c|d: 1 g rigid body")
        ->check(CLI::IsMember({"a", "b", "c", "d"}));
    c_fig2->add_option("--n-traj", fig2_n, "trajectories");
    c_fig2->add_option("--seed", fig2_seed, "base seed");
    c_fig2->add_option("--threads", fig2_threads, "worker threads");
    add_grid_flags(c_fig2, gf_fig2, -1.0, -1.0, 0, "");
    c_fig2->add_option("--out", fig2_out, "CSV path (default stdout)");
    c_fig2->add_option("--manifest", fig2_manifest, "manifest JSON path");

    // oracle
    auto* c_oracle = app.add_subcommand("oracle", "closed-form predictions as JSON");
    add_param_flags(c_oracle, pf_oracle);
    std::string oracle_kind, oracle_out;
    double oracle_t = 0.0, oracle_p0 = 0.0, oracle_h0 = 0.0, oracle_nu = 0.0, oracle_mu = 0.0;
    std::optional<double> oracle_lambda_eff, oracle_gamma_re;
    double oracle_gamma_im = 0.0, oracle_alpha_re = 0.0, oracle_alpha_im = 0.0,
           oracle_beta = 0.0;
    c_oracle
        ->add_option("--kind", oracle_kind,
                     "mean_momentum|mean_energy|heating_rate|var_x_rho|chi|asymptotic|"
                     "transfer|collisional")
        ->required();
    c_oracle->add_option("--t", oracle_t, "time [s]");
    c_oracle->add_option("--p0", oracle_p0, "initial mean momentum");
    c_oracle->add_option("--h0", oracle_h0, "initial mean energy");
    c_oracle->add_option("--nu", oracle_nu, "momentum-like argument");
    c_oracle->add_option("--mu", oracle_mu, "length-like argument");
    c_oracle->add_option("--lambda-eff", oracle_lambda_eff, "effective rate (asymptotic)");
    c_oracle->add_option("--gamma-re", oracle_gamma_re, "state width Re");
    c_oracle->add_option("--gamma-im", oracle_gamma_im, "state width Im");
    c_oracle->add_option("--alpha-re", oracle_alpha_re, "state mean position");
    c_oracle->add_option("--alpha-im", oracle_alpha_im, "state alpha imaginary part");
    c_oracle->add_option("--beta", oracle_beta, "state mean momentum");
    c_oracle->add_option("--out", oracle_out, "write JSON here instead of stdout");

    // grid-born
    auto* c_born = app.add_subcommand("grid-born",
                                      "two-peak collapse statistics on the grid (JSON)");
    add_param_flags(c_born, pf_born);
    std::uint64_t born_n = 10000, born_seed = 1;
    double born_cplus2 = 0.5;
    std::optional<double> born_alpha, born_gamma;
    std::uint64_t born_grid_n = 4096;
    std::string born_out, born_manifest;
    c_born->add_option("--n-samples", born_n, "jump samples");
    c_born->add_option("--seed", born_seed, "seed");
    c_born->add_option("--cplus2", born_cplus2, "weight of the + peak, in (0,1)");
    c_born->add_option("--alpha", born_alpha, "peak position (default 10 r_c)");
    c_born->add_option("--gamma", born_gamma, "peak width (default 0.01 r_c^2)");
    c_born->add_option("--grid-n", born_grid_n, "grid points (power of two)");
    c_born->add_option("--out", born_out, "write JSON here instead of stdout");
    c_born->add_option("--manifest", born_manifest, "manifest JSON path");

    // amplify
    auto* c_amp = app.add_subcommand("amplify", "composite-body reduction and pair tables");
    add_param_flags(c_amp, pf_amp);
    std::string amp_body, amp_out;
    std::optional<double> amp_gamma_cm, amp_gamma_rel, amp_alpha_rel;
    std::vector<double> amp_y;
    c_amp->add_option("--body", amp_body, "body spec file: reduce to effective parameters");
    c_amp->add_option("--gamma-cm", amp_gamma_cm, "pair: center-of-mass width [m^2]");
    c_amp->add_option("--gamma-rel", amp_gamma_rel, "pair: relative width [m^2]");
    c_amp->add_option("--alpha-rel", amp_alpha_rel, "pair: relative mean [m]");
    c_amp->add_option("--y", amp_y, "pair: jump centers (repeatable)");
    c_amp->add_option("--out", amp_out, "output path (default stdout)");

    // rerun
    auto* c_rerun = app.add_subcommand("rerun", "re-execute a manifest");
    std::string rerun_manifest, rerun_out, rerun_manifest_out;
    c_rerun->add_option("--manifest", rerun_manifest, "manifest JSON to replay")->required();
    c_rerun->add_option("--out", rerun_out, "override the CSV path");
    c_rerun->add_option("--manifest-out", rerun_manifest_out, "write the replayed manifest here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    }

    try {
        RunConfig cfg;
        if (app.got_subcommand(c_params)) {
            cfg.subcommand = "params";
            cfg.params = resolve_params(pf_params);
            cfg.out_csv = params_out;
        } else if (app.got_subcommand(c_ens)) {
            cfg.subcommand = "ensemble";
            cfg.params = resolve_params(pf_ens);
            cfg.seed = ens_seed;
            cfg.n_traj = ens_n;
            cfg.threads = ens_threads;
            cfg.t_grid = to_grid(gf_ens);
            cfg.out_csv = ens_out;
            cfg.out_manifest = ens_manifest;
            cfg.options["alpha_re"] = ens_alpha_re;
            cfg.options["alpha_im"] = ens_alpha_im;
            cfg.options["beta"] = ens_beta;
            cfg.options["gamma_re"] =
                ens_gamma_re ? *ens_gamma_re : cfg.params.r_c * cfg.params.r_c;
            cfg.options["gamma_im"] = ens_gamma_im;
            if (ens_no_drift) cfg.options["free_evolution"] = 0.0;
        } else if (app.got_subcommand(c_var)) {
            cfg.subcommand = "variance";
            cfg.params = resolve_params(pf_var);
            cfg.seed = var_seed;
            cfg.n_traj = var_n;
            cfg.threads = var_threads;
            cfg.t_grid = to_grid(gf_var);
            cfg.out_csv = var_out;
            cfg.out_manifest = var_manifest;
            cfg.options["gamma_re"] =
                var_gamma_re ? *var_gamma_re : cfg.params.r_c * cfg.params.r_c;
            cfg.options["gamma_im"] = var_gamma_im;
            if (var_free_ref) cfg.options["free_reference"] = 1.0;
        } else if (app.got_subcommand(c_fig2)) {
            cfg.subcommand = "fig2";
            const bool micro = fig2_panel == "a" || fig2_panel == "b";
            cfg.params =
                dgrw::nondimensional_params(dgrw::preset_params(micro ? "nucleon" : "macro_1g"));
            double gamma0 = 1.0;
            if (fig2_panel == "b") gamma0 = 1e-6;
            if (fig2_panel == "c") gamma0 = 1e6;
            if (fig2_panel == "d") gamma0 = 1e12;
            cfg.seed = fig2_seed;
            cfg.n_traj = fig2_n;
            cfg.threads = fig2_threads;
            cfg.t_grid = micro ? dgrw::TimeGridSpec{1e-11, 0.1, 21, true}
                               : dgrw::TimeGridSpec{0.0, 20.0, 26, false};
            if (c_fig2->count("--t-start")) cfg.t_grid.start = gf_fig2.start;
            if (c_fig2->count("--t-stop")) cfg.t_grid.stop = gf_fig2.stop;
            if (c_fig2->count("--t-points")) cfg.t_grid.points = gf_fig2.points;
            if (c_fig2->count("--spacing")) cfg.t_grid.log_spacing = gf_fig2.spacing == "log";
            cfg.out_csv = fig2_out;
            cfg.out_manifest = fig2_manifest;
            cfg.options["panel"] = fig2_panel;
            cfg.options["gamma_re"] = gamma0;
            cfg.options["gamma_im"] = 0.0;
        } else if (app.got_subcommand(c_oracle)) {
            cfg.subcommand = "oracle";
            cfg.params = resolve_params(pf_oracle);
            cfg.out_csv = oracle_out;
            cfg.options["kind"] = oracle_kind;
            cfg.options["t"] = oracle_t;
            cfg.options["p0"] = oracle_p0;
            cfg.options["h0"] = oracle_h0;
            cfg.options["nu"] = oracle_nu;
            cfg.options["mu"] = oracle_mu;
            if (oracle_lambda_eff) cfg.options["lambda_eff"] = *oracle_lambda_eff;
            if (oracle_gamma_re) cfg.options["gamma_re"] = *oracle_gamma_re;
            cfg.options["gamma_im"] = oracle_gamma_im;
            cfg.options["alpha_re"] = oracle_alpha_re;
            cfg.options["alpha_im"] = oracle_alpha_im;
            cfg.options["beta"] = oracle_beta;
        } else if (app.got_subcommand(c_born)) {
            cfg.subcommand = "grid-born";
            cfg.params = resolve_params(pf_born);
            cfg.seed = born_seed;
            cfg.n_traj = born_n;
            cfg.out_csv = born_out;
            cfg.out_manifest = born_manifest;
            cfg.options["cplus2"] = born_cplus2;
            if (born_alpha) cfg.options["alpha"] = *born_alpha;
            if (born_gamma) cfg.options["gamma"] = *born_gamma;
            cfg.options["grid_n"] = static_cast<double>(born_grid_n);
        } else if (app.got_subcommand(c_amp)) {
            cfg.subcommand = "amplify";
            cfg.params = resolve_params(pf_amp);
            cfg.out_csv = amp_out;
            if (!amp_body.empty()) {
                cfg.options["body"] = amp_body;
            } else {
                if (!amp_gamma_cm || !amp_gamma_rel || !amp_alpha_rel)
                    throw std::invalid_argument(
                        "amplify needs --body or all of --gamma-cm --gamma-rel --alpha-rel");
                cfg.options["gamma_cm"] = *amp_gamma_cm;
                cfg.options["gamma_rel"] = *amp_gamma_rel;
                cfg.options["alpha_rel"] = *amp_alpha_rel;
                if (!amp_y.empty()) cfg.options["y"] = amp_y;
            }
        } else if (app.got_subcommand(c_rerun)) {
            cfg = dgrw::config_from_manifest(rerun_manifest);
            if (!rerun_out.empty()) cfg.out_csv = rerun_out;
            cfg.out_manifest = rerun_manifest_out;
        }
        return dispatch(cfg);
    } catch (const dgrw::io_error& e) {
        std::cerr << json{{"error", {{"type", "io"}, {"message", e.what()}}}}.dump() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"type", "numerical"}, {"message", e.what()}}}}.dump()
                  << "\n";
        return 3;
    }
}
