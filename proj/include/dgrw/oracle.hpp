#pragma once

#include "dgrw/gaussian.hpp"
#include "dgrw/params.hpp"

#include <complex>
#include <string>

namespace dgrw {

// Ensemble mean momentum: p0 exp(-2 k lambda t / (k+1)).
double mean_momentum(double p0, double t, const ModelParams& p);

// Ensemble mean energy: relaxes to h_as at rate xi; at k = 0 it grows
// linearly with slope grw_heating_rate.
double mean_energy(double h0, double t, const ModelParams& p);

// hbar^2 lambda / (4 mass r_c^2), the k = 0 heating slope [J/s].
double grw_heating_rate(const ModelParams& p);

// Var(X) of a free packet of initial width gamma0 after time t.
double free_position_variance(std::complex<double> gamma0, double t, const ModelParams& p);

// Ensemble position variance to lowest order in k:
// free spreading + 2 k^2 r_c^2 lambda t + hbar^2 lambda t^3 / (6 r_c^2 (1+k)^2 m^2).
// The truncation error grows like k (lambda t)^3, so the formula holds to a
// few parts in 1e3 only while lambda t stays below ~0.3 at percent-level k.
double var_x_rho(double free_var, double t, const ModelParams& p);

// chi(nu, mu, t) = Tr[rho_t exp(i (nu X + mu P)/hbar)] for a Gaussian initial
// state, solved from the small-k master equation along characteristics.
// nu carries momentum units, mu length units.
std::complex<double> characteristic_function(double nu, double mu, double t,
                                             const GaussianState& s0, const ModelParams& p);

// Complex square root assembled from half-angle magnitudes with the sign
// pattern of (Re z, Im z). Coincides with the principal branch; kept as an
// independent cross-check of the branch used by equilibrium_gamma.
std::complex<double> quadrant_sqrt(std::complex<double> z);

// Stationary width of the width recursion gamma -> jump(gamma + i eps_hat),
// in units of r_c^2. eps_hat = hbar / (mass * rate * r_c^2) measures free
// spreading per mean waiting time. Exact closed form, arranged so neither
// eps_hat >> 1 nor eps_hat << 1 loses digits.
std::complex<double> equilibrium_gamma(double k, double eps_hat);

struct AsymptoticVariances {
    double var_x;                    // [m^2]
    double var_p;                    // [(kg m/s)^2]
    std::complex<double> gamma_eq;   // equilibrium width [m^2]
    double residual;                 // |map(gamma_eq) - gamma_eq| / |gamma_eq|
    std::complex<double> gamma_iter; // iterated-map cross-check [m^2]
    int doublings;                   // squarings used by the iteration
    double product_ratio;            // var_x var_p / (hbar/2)^2
};

// Late-time position/momentum spreads of a single trajectory, where jumps
// at rate lambda_eff balance free spreading. Throws if the closed form
// fails its own fixed-point check (residual > 1e-10).
AsymptoticVariances asymptotic_variances(const ModelParams& p, double lambda_eff);

struct DiscriminantVariances {
    double var_x;
    double var_p;
};

// The same two spreads computed through the discriminant form. Agrees with
// asymptotic_variances; kept separate because the naive transcription
// cancels badly and this one is rearranged term by term.
DiscriminantVariances asymptotic_variances_discriminant(const ModelParams& p,
                                                        double lambda_eff);

struct TransferChecks {
    double dp_dt_quadrature; // [kg m/s^2]
    double dp_dt_closed;
    double dh_dt_quadrature; // [J/s]
    double dh_dt_closed;
};

// Instantaneous drift of <P> and <H> for a Gaussian momentum distribution,
// once via the momentum-transfer kernel (nested quadrature), once via the
// closed-form rates. The two must agree to ~1e-6 relative.
TransferChecks momentum_transfer_checks(const GaussianState& s, const ModelParams& p);

struct CollisionalTable {
    double lambda_th;     // thermal wavelength matching 4 sqrt(pi) r_c [m]
    double v_mp;          // most probable gas velocity = v_eta [m/s]
    std::string coupling; // rate identification, informational
};

// Parameter dictionary matching the model to collisional decoherence.
CollisionalTable collisional_correspondence(const ModelParams& p);

} // namespace dgrw
