#pragma once

#include "dgrw/params.hpp"

#include <complex>

namespace dgrw {

// Gaussian wavepacket psi(X) = C exp(-(X-alpha)^2/(2 gamma)) exp(i beta (X-alpha)/hbar).
// alpha may be complex (free flight after a jump makes it so), beta is real,
// Re(gamma) > 0. The normalization C is not stored; it is a function of the
// three parameters and gets recomputed wherever amplitudes are needed.
struct GaussianState {
    std::complex<double> alpha{0.0, 0.0}; // [m]
    double beta = 0.0;                    // [kg m/s]
    std::complex<double> gamma{0.0, 0.0}; // [m^2]
};

struct Observables {
    double mean_x;         // [m]
    double var_x;          // [m^2]
    double mean_p;         // [kg m/s]
    double var_p;          // [(kg m/s)^2]
    double kinetic_energy; // [J], (var_p + mean_p^2) / (2 mass)
};

// Gaussian probability law, used for the jump position.
struct GaussianDensity {
    double mean;     // [m]
    double variance; // [m^2]
};

// Free-particle propagation for time dt: alpha += beta dt / mass,
// gamma += i hbar dt / mass, beta unchanged.
GaussianState free_evolve(const GaussianState& s, double dt, const ModelParams& p);

// Scale factor g_gamma that mixes alpha toward the jump center y.
std::complex<double> jump_scale(std::complex<double> gamma, double k, double r_c);

// Post-jump width. Computed through the reciprocal width so it stays
// accurate when |gamma| >> r_c^2.
std::complex<double> jump_width_map(std::complex<double> gamma, double k, double r_c);

// Localization jump centered at y. Gaussian family is closed under it:
// alpha' = g alpha + (1-g) y, beta' = beta (1-k)/(1+k), gamma' as above.
GaussianState apply_jump(const GaussianState& s, double y, const ModelParams& p);

// Probability density of the next jump center given the current state:
// normal with mean <X> and variance Var(X) + (1-k)^2 r_c^2 / 2.
GaussianDensity jump_position_density(const GaussianState& s, const ModelParams& p);

Observables observables(const GaussianState& s, const ModelParams& p);

// Normalization constant C (real, positive) and pointwise amplitudes.
double normalization_constant(const GaussianState& s, const ModelParams& p);
std::complex<double> wavefunction_value(const GaussianState& s, double x, const ModelParams& p);

} // namespace dgrw
