#include "dgrw/amplify.hpp"

#include "dgrw/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dgrw {

ModelParams rigid_body_reduce(const BodySpec& b, double v_eta, double r_c) {
    if (!b.rigid)
        throw std::invalid_argument("only rigid bodies reduce to a single center-of-mass rate");
    if (b.groups.empty())
        throw std::invalid_argument("body spec has no particle groups");
    double mass = 0.0, rate = 0.0;
    for (const ParticleGroup& g : b.groups) {
        if (!(g.count > 0.0) || !(g.mass > 0.0) || !(g.lambda_rate > 0.0))
            throw std::invalid_argument("particle group needs positive count, mass, rate");
        mass += g.count * g.mass;
        rate += g.count * g.lambda_rate;
    }
    ModelParams p;
    p.lambda_rate = rate;
    p.mass = mass;
    p.r_c = r_c;
    p.v_eta = v_eta;
    derive_params(p);
    return p;
}

BodySpec load_body_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open body spec: " + path);
    BodySpec b;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string eq;
        ls >> eq;
        if (eq != "=")
            throw std::invalid_argument("body spec line " + std::to_string(lineno) +
                                        ": expected 'key = ...'");
        if (key == "rigid") {
            std::string v;
            ls >> v;
            if (v == "true") b.rigid = true;
            else if (v == "false") b.rigid = false;
            else
                throw std::invalid_argument("body spec line " + std::to_string(lineno) +
                                            ": rigid must be true or false");
        } else if (key == "group") {
            ParticleGroup g;
            if (!(ls >> g.count >> g.mass >> g.lambda_rate))
                throw std::invalid_argument("body spec line " + std::to_string(lineno) +
                                            ": group needs count mass lambda");
            b.groups.push_back(g);
        } else {
            throw std::invalid_argument("body spec line " + std::to_string(lineno) +
                                        ": unknown key " + key);
        }
    }
    return b;
}

namespace {

void check_pair(const TwoParticleGaussian& s) {
    if (!(s.gamma_cm > 0.0) || !(s.gamma_rel > 0.0))
        throw std::invalid_argument("pair state needs positive widths");
}

} // namespace

TwoParticleMeans two_particle_jump_means(const TwoParticleGaussian& s, double y,
                                         const ModelParams& p) {
    check_pair(s);
    const double k = derive_params(p).k;
    const double rc2 = p.r_c * p.r_c;
    const double a = s.alpha_rel;
    const double g = s.gamma_cm;
    const double gp = s.gamma_rel;
    const double den = 4.0 * (1.0 - k) * (1.0 - k) * rc2 + 4.0 * g + gp;
    TwoParticleMeans m{};
    m.mean_x_cm = 2.0 * (a - 2.0 * y) * ((1.0 - k) * k * rc2 - g) / den;
    m.mean_x_rel =
        (4.0 * a * ((1.0 - k) * rc2 + g) - 2.0 * y * (4.0 * (1.0 - k) * k * rc2 - gp)) / den;
    return m;
}

TwoParticleMeans two_particle_jump_means_wide(const TwoParticleGaussian& s, double y,
                                              const ModelParams& p) {
    check_pair(s);
    const double k = derive_params(p).k;
    TwoParticleMeans m{};
    m.mean_x_cm = k * (s.alpha_rel - 2.0 * y) / (2.0 - 2.0 * k);
    m.mean_x_rel = (s.alpha_rel - 2.0 * k * y) / (1.0 - k);
    return m;
}

TwoParticleAfter two_particle_post_variances(const TwoParticleGaussian& s,
                                             const ModelParams& p) {
    check_pair(s);
    const double k = derive_params(p).k;
    const double rc2 = p.r_c * p.r_c;
    TwoParticleAfter out{};
    out.var_cm = s.gamma_cm / 2.0 + k * k * s.gamma_rel / 8.0;
    out.var_rel = s.gamma_rel / 2.0 + 2.0 * k * k * s.gamma_cm;
    out.density.mean = s.alpha_rel / 2.0;
    out.density.variance = rc2 * (1.0 - k) * (1.0 - k) / 2.0;
    out.regime_valid = k * rc2 >= 100.0 * std::max(s.gamma_cm, s.gamma_rel);
    return out;
}

EnergyKick energy_kick_estimate(double gamma, double gamma_bound, const ModelParams& p) {
    if (!(gamma > 0.0) || !(gamma_bound > 0.0))
        throw std::invalid_argument("widths must be positive");
    const double k = derive_params(p).k;
    EnergyKick out{};
    out.delta_e = p.hbar * p.hbar * k / (p.mass * gamma);
    out.level_spacing = p.hbar * p.hbar / (p.mass * gamma_bound);
    out.ratio = out.delta_e / out.level_spacing;
    out.regime_valid = p.r_c * p.r_c >= 100.0 * gamma;
    return out;
}

} // namespace dgrw
