#include "dgrw/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>

namespace dgrw {

namespace {

using boost::math::quadrature::gauss_kronrod;

void check_rate(double lambda_eff) {
    if (!(lambda_eff > 0.0) || !std::isfinite(lambda_eff))
        throw std::invalid_argument("effective rate must be positive and finite");
}

} // namespace

double mean_momentum(double p0, double t, const ModelParams& p) {
    const DerivedParams d = derive_params(p);
    return p0 * std::exp(-2.0 * d.k * p.lambda_rate * t / (d.k + 1.0));
}

double mean_energy(double h0, double t, const ModelParams& p) {
    const DerivedParams d = derive_params(p);
    if (d.k == 0.0) return h0 + grw_heating_rate(p) * t;
    return d.h_as + (h0 - d.h_as) * std::exp(-d.xi * t);
}

double grw_heating_rate(const ModelParams& p) {
    derive_params(p);
    return p.hbar * p.hbar * p.lambda_rate / (4.0 * p.mass * p.r_c * p.r_c);
}

double free_position_variance(std::complex<double> gamma0, double t, const ModelParams& p) {
    if (!(gamma0.real() > 0.0))
        throw std::invalid_argument("gamma0 needs a positive real part");
    const std::complex<double> g = gamma0 + std::complex<double>(0.0, p.hbar * t / p.mass);
    return std::norm(g) / (2.0 * gamma0.real());
}

double var_x_rho(double free_var, double t, const ModelParams& p) {
    const DerivedParams d = derive_params(p);
    const double w = 1.0 + d.k;
    const double lt = p.lambda_rate * t;
    return free_var + 2.0 * d.k * d.k * p.r_c * p.r_c * lt +
           p.hbar * p.hbar * p.lambda_rate * t * t * t /
               (6.0 * p.r_c * p.r_c * w * w * p.mass * p.mass);
}

std::complex<double> characteristic_function(double nu, double mu, double t,
                                             const GaussianState& s0, const ModelParams& p) {
    const DerivedParams d = derive_params(p);
    if (!(t >= 0.0) || !std::isfinite(t))
        throw std::invalid_argument("t must be finite and >= 0");

    // dimensionless throughout: lengths in r_c, momenta in hbar/r_c
    const double nu_h = nu * p.r_c / p.hbar;
    const double mu_h = mu / p.r_c;
    const double t_h = p.lambda_rate * t;
    const double eps = d.eps_hat;
    const double k = d.k;
    const double w = 1.0 + k;

    const Observables o = observables(s0, p);
    const double x0 = o.mean_x / p.r_c;
    const double p0 = o.mean_p * p.r_c / p.hbar;
    const double sxx = o.var_x / (p.r_c * p.r_c);
    const double spp = o.var_p * (p.r_c / p.hbar) * (p.r_c / p.hbar);
    const double sxp = s0.gamma.imag() / (2.0 * s0.gamma.real()); // hbar gi/(2 gr) / hbar

    auto chi0 = [&](double nu_v, double mu_v) {
        const double re = -0.5 * (nu_v * nu_v * sxx + 2.0 * nu_v * mu_v * sxp + mu_v * mu_v * spp);
        const double im = nu_v * x0 + mu_v * p0;
        return std::polar(std::exp(re), im);
    };

    // exp(-lambda int_0^t (1 - Phi) ), Phi evaluated along the free flow
    auto one_minus_phi = [&](double tau) {
        const double m = mu_h + nu_h * eps * tau;
        const double a = nu_h * nu_h * k * k + m * m / (4.0 * w * w);
        return -std::expm1(-a);
    };
    double integral = 0.0;
    if (t_h > 0.0)
        integral = gauss_kronrod<double, 61>::integrate(one_minus_phi, 0.0, t_h, 15, 1e-12);
    return chi0(nu_h, mu_h + nu_h * eps * t_h) * std::exp(-integral);
}

std::complex<double> quadrant_sqrt(std::complex<double> z) {
    const double zr = z.real();
    const double zi = z.imag();
    const double az = std::hypot(zr, zi);
    if (az == 0.0) return {0.0, 0.0};
    const double a = std::sqrt(0.5 + std::abs(zr) / (2.0 * az));
    // the other half-angle factor through the product identity a b = |zi|/(2 az);
    // the direct 0.5 - |zr|/(2 az) form cancels near the real axis
    const double b = zi == 0.0 ? 0.0 : std::abs(zi) / (2.0 * az * a);
    double sgn;
    if (zr * zi != 0.0) sgn = zr * zi > 0.0 ? 1.0 : -1.0;
    else sgn = zi >= 0.0 ? 1.0 : -1.0; // axis cases: continuity with the principal root
    std::complex<double> root(a, sgn * b);
    if (zr < 0.0)
        root *= zi >= 0.0 ? std::complex<double>(0.0, 1.0) : std::complex<double>(0.0, -1.0);
    return std::sqrt(az) * root;
}

std::complex<double> equilibrium_gamma(double k, double eps_hat) {
    if (!(k >= 0.0) || k >= 1.0)
        throw std::invalid_argument("k must lie in [0, 1)");
    if (!(eps_hat > 0.0) || !std::isfinite(eps_hat))
        throw std::invalid_argument("eps_hat must be positive and finite");

    const double g = 4.0 * k; // threshold width in r_c^2 units
    const double zr = (g - eps_hat) * (g + eps_hat);
    const double zi = 4.0 * eps_hat * (1.0 + k * k);
    const double az = std::hypot(zr, zi);

    // principal sqrt of z, computed from the half-angle identities on the
    // side that adds magnitudes instead of cancelling them
    double sr, si;
    if (zr >= 0.0) {
        sr = std::sqrt(0.5 * (az + zr));
        si = zi / (2.0 * sr);
    } else {
        si = std::sqrt(0.5 * (az - zr));
        sr = zi / (2.0 * si);
    }

    const double gamma_r = 0.5 * (g + sr);
    // (si - eps_hat)/2 loses everything when eps_hat dominates; use
    // |z|^2 - (g^2 + eps^2)^2 = 16 eps^2 (1 - k^2)^2 exactly
    const double omk2 = 1.0 - k * k;
    const double gamma_i = 4.0 * eps_hat * eps_hat * omk2 * omk2 /
                           ((az + g * g + eps_hat * eps_hat) * (si + eps_hat));
    return {gamma_r, gamma_i};
}

namespace {

// width recursion as a Moebius map: gamma -> (gamma + i eps) applied to
// G(x) = w^2 x / ((1-k)^2 + x), i.e. matrix [[1, i eps], [W, s^2 + i eps W]]
// with W = 1/w^2, s = (1-k)/(1+k). Repeated squaring reaches the attracting
// fixed point in ~log2 of the step count a plain iteration would need.
struct Moebius {
    std::complex<double> a, b, c, d;

    Moebius square() const {
        Moebius r{a * a + b * c, a * b + b * d, c * a + d * c, c * b + d * d};
        const double m = std::max(std::max(std::abs(r.a), std::abs(r.b)),
                                  std::max(std::abs(r.c), std::abs(r.d)));
        if (m > 0.0) {
            r.a /= m;
            r.b /= m;
            r.c /= m;
            r.d /= m;
        }
        return r;
    }

    std::complex<double> apply(std::complex<double> z) const { return (a * z + b) / (c * z + d); }
};

std::complex<double> iterate_width_map(double k, double eps_hat, int& doublings) {
    const double w = 1.0 + k;
    const double s = (1.0 - k) / w;
    const double W = 1.0 / (w * w);
    Moebius m{{1.0, 0.0},
              {0.0, eps_hat},
              {W, 0.0},
              {s * s, eps_hat * W}};
    std::complex<double> prev = m.apply(1.0);
    doublings = 0;
    for (int j = 0; j < 200; ++j) {
        m = m.square();
        const std::complex<double> cur = m.apply(1.0);
        ++doublings;
        if (std::abs(cur - prev) <= 1e-14 * std::abs(cur)) return cur;
        prev = cur;
    }
    return prev;
}

} // namespace

AsymptoticVariances asymptotic_variances(const ModelParams& p, double lambda_eff) {
    const DerivedParams d = derive_params(p);
    check_rate(lambda_eff);
    const double eps_hat = p.hbar / (p.mass * lambda_eff * p.r_c * p.r_c);

    AsymptoticVariances out{};
    const std::complex<double> ge = equilibrium_gamma(d.k, eps_hat);

    // the closed form must reproduce itself under one more jump+drift step
    const double w = 1.0 + d.k;
    const double s2 = (1.0 - d.k) * (1.0 - d.k);
    const std::complex<double> fed = ge + std::complex<double>(0.0, eps_hat);
    const std::complex<double> mapped = w * w * fed / (s2 + fed);
    out.residual = std::abs(mapped - ge) / std::abs(ge);
    if (out.residual > 1e-10)
        throw std::runtime_error("equilibrium width failed its fixed-point check");

    int doublings = 0;
    const std::complex<double> gi = iterate_width_map(d.k, eps_hat, doublings);
    out.doublings = doublings;

    const double rc2 = p.r_c * p.r_c;
    out.gamma_eq = ge * rc2;
    out.gamma_iter = gi * rc2;
    out.var_x = std::norm(ge) / (2.0 * ge.real()) * rc2;
    out.var_p = p.hbar * p.hbar / (2.0 * ge.real() * rc2);
    out.product_ratio = out.var_x * out.var_p / (0.25 * p.hbar * p.hbar);
    return out;
}

DiscriminantVariances asymptotic_variances_discriminant(const ModelParams& p,
                                                        double lambda_eff) {
    const DerivedParams d = derive_params(p);
    check_rate(lambda_eff);
    const double eps_hat = p.hbar / (p.mass * lambda_eff * p.r_c * p.r_c);
    const double k = d.k;
    const double g = 4.0 * k;
    const double w = 1.0 + k;

    const double G = (g / eps_hat) * (g / eps_hat);
    // g^2 - 8 g w^2 + 8 w^4 = g^2 + 8 w^2 (1-k)^2: every term positive
    const double C = g * g + 8.0 * w * w * (1.0 - k) * (1.0 - k);
    const double chi = std::sqrt(G * G + 2.0 * C / (eps_hat * eps_hat) + 1.0);
    const double chi_minus_G = (2.0 * C / (eps_hat * eps_hat) + 1.0) / (chi + G);
    const double chi_minus_1 = (G * G + 2.0 * C / (eps_hat * eps_hat)) / (chi + 1.0);

    DiscriminantVariances out{};
    const double rc2 = p.r_c * p.r_c;
    out.var_x = w * w * rc2 / (1.0 + std::sqrt(0.5 * (chi_minus_G + 1.0)));
    const double eps_si = eps_hat * rc2;
    out.var_p =
        p.hbar * p.hbar / (d.gamma_thr + eps_si * std::sqrt(0.5 * (G + chi_minus_1)));
    return out;
}

TransferChecks momentum_transfer_checks(const GaussianState& s, const ModelParams& p) {
    const DerivedParams d = derive_params(p);
    const Observables o = observables(s, p);
    const double k = d.k;
    const double w = 1.0 + k;

    const double pbar = o.mean_p * p.r_c / p.hbar;
    const double sp = std::sqrt(o.var_p) * p.r_c / p.hbar;

    // u = w Q + 2 k P leaves a fixed exp(-u^2) kernel
    auto inner = [&](double P, auto&& f) {
        auto h = [&](double u) {
            const double Q = (u - 2.0 * k * P) / w;
            return std::exp(-u * u) * f(P, Q);
        };
        return gauss_kronrod<double, 31>::integrate(h, -12.0, 12.0, 10, 1e-11) / w;
    };
    const double inv_norm = 1.0 / (sp * std::sqrt(2.0 * M_PI));
    auto outer = [&](auto&& f) {
        auto h = [&](double P) {
            const double z = (P - pbar) / sp;
            return inv_norm * std::exp(-0.5 * z * z) * inner(P, f);
        };
        return gauss_kronrod<double, 31>::integrate(h, pbar - 10.0 * sp, pbar + 10.0 * sp, 10,
                                                    1e-11);
    };

    const double pref = w / std::sqrt(M_PI); // rate prefactor, nondim time
    const double dp_hat =
        pref * outer([](double, double Q) { return Q; });
    const double dh_hat =
        pref * outer([](double P, double Q) { return 0.5 * (Q * Q + 2.0 * P * Q); });

    TransferChecks out{};
    const double p_rate = (p.hbar / p.r_c) * p.lambda_rate;
    const double e_rate = p.hbar * p.lambda_rate; // energy scale eps_hat rc^2 ... = hbar lambda
    out.dp_dt_quadrature = dp_hat * p_rate;
    out.dp_dt_closed = -2.0 * k / (k + 1.0) * p.lambda_rate * o.mean_p;
    out.dh_dt_quadrature = dh_hat * d.eps_hat * e_rate;
    out.dh_dt_closed =
        p.hbar * p.hbar * p.lambda_rate / (4.0 * p.mass * p.r_c * p.r_c * w * w) -
        d.xi * o.kinetic_energy;
    return out;
}

CollisionalTable collisional_correspondence(const ModelParams& p) {
    derive_params(p);
    CollisionalTable t;
    t.lambda_th = 4.0 * std::sqrt(M_PI) * p.r_c;
    t.v_mp = p.v_eta;
    t.coupling = "lambda = 16 pi K^2 n_gas m / hbar^3";
    return t;
}

} // namespace dgrw
