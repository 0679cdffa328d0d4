#pragma once

#include <string>

namespace dgrw {

// Physical inputs of the model. Defaults are the historical proton-mass
// choice; the "nucleon" preset rounds the mass to 1e-27 kg, which makes
// the dissipation parameter k come out at exactly 5e-5.
//
// v_eta = +infinity disables dissipation entirely (k = 0).
struct ModelParams {
    double lambda_rate = 1e-16;        // jump rate per particle [1/s]
    double r_c = 1e-7;                 // localization length [m]
    double v_eta = 1.054571817e4;      // dissipation velocity scale [m/s]
    double mass = 1.67262192369e-27;   // particle mass [kg]
    double hbar = 1.054571817e-34;     // [J s]
    double k_boltzmann = 1.380649e-23; // [J/K]
};

// Quantities fixed by the inputs.
struct DerivedParams {
    double k;           // dissipation parameter, dimensionless, in [0, 1)
    double gamma_thr;   // width threshold 4 k r_c^2 [m^2]
    double xi;          // energy relaxation rate 4 lambda k / (1+k)^2 [1/s]
    double h_as;        // asymptotic mean energy [J] (+inf when k = 0)
    double temperature; // effective temperature [K] (+inf when k = 0)
    double epsilon;     // hbar / (mass * lambda_rate) [m^2]
    double eps_hat;     // epsilon / r_c^2
};

// The conventional scale for v_eta: 1e31 * hbar / r_c per kilogram,
// about 1.05e4 m/s at the default r_c.
double default_v_eta(double r_c, double hbar = 1.054571817e-34);

// Validates and derives. Throws std::invalid_argument on non-positive
// lambda_rate / r_c / mass, on v_eta <= 0, or if the resulting k >= 1.
DerivedParams derive_params(const ModelParams& p);

// Named parameter sets: "grw1986", "adler2007", "nucleon", "macro_1g".
// Throws std::invalid_argument for unknown names.
ModelParams preset_params(const std::string& name);

// key=value file, '#' comments. Keys: preset, lambda_rate, r_c, v_eta,
// mass. Explicit keys override the preset regardless of ordering.
// "inf" (any case) is accepted for v_eta.
ModelParams load_params_file(const std::string& path);

} // namespace dgrw
