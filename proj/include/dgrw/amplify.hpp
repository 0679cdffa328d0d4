#pragma once

#include "dgrw/gaussian.hpp"
#include "dgrw/params.hpp"

#include <string>
#include <vector>

namespace dgrw {

struct ParticleGroup {
    double count = 1.0;
    double mass = 0.0;        // per particle [kg]
    double lambda_rate = 0.0; // per particle [1/s]
};

struct BodySpec {
    std::vector<ParticleGroup> groups;
    bool rigid = true;
};

// Center-of-mass parameters of a rigid composite: rates and masses add,
// the dissipation parameter follows from the total mass. Refuses non-rigid
// bodies; nothing here applies to them.
ModelParams rigid_body_reduce(const BodySpec& b, double v_eta, double r_c = 1e-7);

// key=value file with one "group = count mass lambda" line per group,
// optional "rigid = true|false".
BodySpec load_body_spec(const std::string& path);

// Equal-mass pair, center-of-mass width gamma_cm, relative width gamma_rel,
// relative mean alpha_rel, both momenta zero. p.mass is the single-particle
// mass; the jump acts on particle 1 alone.
struct TwoParticleGaussian {
    double gamma_cm = 0.0;  // [m^2]
    double gamma_rel = 0.0; // [m^2]
    double alpha_rel = 0.0; // [m]
};

struct TwoParticleMeans {
    double mean_x_cm;
    double mean_x_rel;
};

// Post-jump means, exact for this family.
TwoParticleMeans two_particle_jump_means(const TwoParticleGaussian& s, double y,
                                         const ModelParams& p);

// The simple limit k r_c^2 >> gamma_cm, gamma_rel:
// <X_CM> = k (alpha - 2y) / (2 - 2k),  <X_REL> = (alpha - 2 k y) / (1 - k).
TwoParticleMeans two_particle_jump_means_wide(const TwoParticleGaussian& s, double y,
                                              const ModelParams& p);

struct TwoParticleAfter {
    double var_cm;          // approx gamma_cm/2 + k^2 gamma_rel / 8
    double var_rel;         // approx gamma_rel/2 + 2 k^2 gamma_cm
    GaussianDensity density; // jump centers: mean alpha/2, width r_c(1-k)/sqrt(2)
    bool regime_valid;      // k r_c^2 >= 100 max(gamma_cm, gamma_rel)
};

TwoParticleAfter two_particle_post_variances(const TwoParticleGaussian& s,
                                             const ModelParams& p);

struct EnergyKick {
    double delta_e;       // average energy a jump injects, ~ hbar^2 k / (mass gamma) [J]
    double level_spacing; // hbar^2 / (mass gamma_bound) [J]
    double ratio;         // delta_e / level_spacing
    bool regime_valid;    // requires r_c^2 >= 100 gamma
};

// How the jump-induced energy exchange compares with the level spacing of a
// bound state of width gamma_bound.
EnergyKick energy_kick_estimate(double gamma, double gamma_bound, const ModelParams& p);

} // namespace dgrw
