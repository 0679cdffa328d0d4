#pragma once

#include "dgrw/gaussian.hpp"
#include "dgrw/params.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>

namespace testutil {

inline double gk(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-13) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

inline std::complex<double> gk_complex(const std::function<std::complex<double>(double)>& f,
                                       double a, double b, double tol = 1e-13) {
    const double re = gk([&](double x) { return f(x).real(); }, a, b, tol);
    const double im = gk([&](double x) { return f(x).imag(); }, a, b, tol);
    return {re, im};
}

// P(chi2 >= observed) for the given degrees of freedom.
inline double chi_square_pvalue(double chi2, double dof) {
    return boost::math::gamma_q(dof / 2.0, chi2 / 2.0);
}

// d/dx of the Gaussian wavepacket amplitude, analytic.
inline std::complex<double> wavefunction_derivative(const dgrw::GaussianState& s, double x,
                                                    const dgrw::ModelParams& p) {
    const std::complex<double> i(0.0, 1.0);
    return dgrw::wavefunction_value(s, x, p) *
           (-(x - s.alpha) / s.gamma + i * s.beta / p.hbar);
}

struct NumericMoments {
    double norm_sq;
    double mean_x;
    double var_x;
    double mean_p;
    double var_p;
};

// Position and momentum moments of the parametric state by quadrature only.
inline NumericMoments quadrature_moments(const dgrw::GaussianState& s,
                                         const dgrw::ModelParams& p) {
    const auto ob = dgrw::observables(s, p);
    const double w = std::sqrt(ob.var_x);
    const double lo = ob.mean_x - 15.0 * w;
    const double hi = ob.mean_x + 15.0 * w;
    auto density = [&](double x) { return std::norm(dgrw::wavefunction_value(s, x, p)); };
    NumericMoments m{};
    m.norm_sq = gk(density, lo, hi);
    m.mean_x = gk([&](double x) { return x * density(x); }, lo, hi) / m.norm_sq;
    m.var_x = gk([&](double x) { return (x - m.mean_x) * (x - m.mean_x) * density(x); }, lo,
                 hi) /
              m.norm_sq;
    m.mean_p = p.hbar *
               gk(
                   [&](double x) {
                       return std::imag(std::conj(dgrw::wavefunction_value(s, x, p)) *
                                        wavefunction_derivative(s, x, p));
                   },
                   lo, hi) /
               m.norm_sq;
    const double p2 = p.hbar * p.hbar *
                      gk([&](double x) { return std::norm(wavefunction_derivative(s, x, p)); },
                         lo, hi) /
                      m.norm_sq;
    m.var_p = p2 - m.mean_p * m.mean_p;
    return m;
}

// The localization operator applied pointwise, for quadrature cross-checks.
inline std::complex<double> jump_kernel_value(const dgrw::GaussianState& s, double y, double x,
                                              const dgrw::ModelParams& p, double k) {
    const double w = 1.0 + k;
    const double sc = (1.0 - k) / (1.0 + k);
    const double u = 2.0 * k / (1.0 + k);
    const double pref = std::pow(M_PI * p.r_c * p.r_c * w * w, -0.25);
    const double g = std::exp(-(x - y) * (x - y) / (2.0 * p.r_c * p.r_c * w * w));
    return pref * g * dgrw::wavefunction_value(s, sc * x + u * y, p);
}

// Integration window covering both the envelope and the resampled packet.
inline void jump_window(const dgrw::GaussianState& s, double y, const dgrw::ModelParams& p,
                        double k, double& lo, double& hi) {
    const auto ob = dgrw::observables(s, p);
    const double sc = (1.0 - k) / (1.0 + k);
    const double u = 2.0 * k / (1.0 + k);
    const double c1 = y, r1 = p.r_c * (1.0 + k);
    const double c2 = (ob.mean_x - u * y) / sc, r2 = std::sqrt(ob.var_x) / sc;
    lo = std::min(c1 - 15.0 * r1, c2 - 15.0 * r2);
    hi = std::max(c1 + 15.0 * r1, c2 + 15.0 * r2);
}

inline double jump_prenorm_quadrature(const dgrw::GaussianState& s, double y,
                                      const dgrw::ModelParams& p, double k) {
    double lo, hi;
    jump_window(s, y, p, k, lo, hi);
    return gk([&](double x) { return std::norm(jump_kernel_value(s, y, x, p, k)); }, lo, hi);
}

} // namespace testutil
