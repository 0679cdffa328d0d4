#include "dgrw/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace dgrw {

namespace {

void check_width(const std::complex<double>& gamma) {
    if (!(gamma.real() > 0.0))
        throw std::domain_error("gaussian state needs Re(gamma) > 0");
}

} // namespace

GaussianState free_evolve(const GaussianState& s, double dt, const ModelParams& p) {
    GaussianState r = s;
    r.alpha += s.beta * dt / p.mass;
    r.gamma += std::complex<double>(0.0, p.hbar * dt / p.mass);
    return r;
}

std::complex<double> jump_scale(std::complex<double> gamma, double k, double r_c) {
    // g = (1-k) gamma' / ((1+k) gamma), rearranged so nothing cancels when
    // |gamma| is large compared to r_c^2.
    const double rc2 = r_c * r_c;
    return 1.0 / (gamma / (rc2 * (1.0 - k * k)) + (1.0 - k) / (1.0 + k));
}

std::complex<double> jump_width_map(std::complex<double> gamma, double k, double r_c) {
    const double w = 1.0 + k;
    const double s = 1.0 - k;
    const std::complex<double> recip = 1.0 / gamma;
    return (w * w) / (s * s * recip + 1.0 / (r_c * r_c));
}

GaussianState apply_jump(const GaussianState& s, double y, const ModelParams& p) {
    check_width(s.gamma);
    const double k = derive_params(p).k;
    GaussianState r;
    const std::complex<double> g = jump_scale(s.gamma, k, p.r_c);
    r.alpha = g * s.alpha + (1.0 - g) * y;
    r.beta = s.beta * (1.0 - k) / (1.0 + k);
    r.gamma = jump_width_map(s.gamma, k, p.r_c);
    return r;
}

GaussianDensity jump_position_density(const GaussianState& s, const ModelParams& p) {
    check_width(s.gamma);
    const double k = derive_params(p).k;
    const Observables o = observables(s, p);
    const double extra = (1.0 - k) * (1.0 - k) * p.r_c * p.r_c / 2.0;
    return GaussianDensity{o.mean_x, o.var_x + extra};
}

Observables observables(const GaussianState& s, const ModelParams& p) {
    check_width(s.gamma);
    const double gr = s.gamma.real();
    const double gi = s.gamma.imag();
    const double ai = s.alpha.imag();
    Observables o{};
    o.mean_x = s.alpha.real() + (gi / gr) * ai;
    o.var_x = std::norm(s.gamma) / (2.0 * gr);
    o.mean_p = s.beta + p.hbar * ai / gr;
    o.var_p = p.hbar * p.hbar / (2.0 * gr);
    o.kinetic_energy = (o.var_p + o.mean_p * o.mean_p) / (2.0 * p.mass);
    return o;
}

double normalization_constant(const GaussianState& s, const ModelParams& p) {
    check_width(s.gamma);
    const double gr = s.gamma.real();
    const double ai = s.alpha.imag();
    const double quartic = M_PI * std::norm(s.gamma) / gr;
    return std::pow(quartic, -0.25) *
           std::exp(-ai * ai / (2.0 * gr) - s.beta * ai / p.hbar);
}

std::complex<double> wavefunction_value(const GaussianState& s, double x, const ModelParams& p) {
    const double c = normalization_constant(s, p);
    const std::complex<double> dx = x - s.alpha;
    const std::complex<double> arg =
        -dx * dx / (2.0 * s.gamma) + std::complex<double>(0.0, s.beta / p.hbar) * dx;
    return c * std::exp(arg);
}

} // namespace dgrw
