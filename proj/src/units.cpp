#include "dgrw/units.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dgrw {

double unit_scale(const ModelParams& p, Quantity kind) {
    switch (kind) {
        case Quantity::length: return p.r_c;
        case Quantity::time: return 1.0 / p.lambda_rate;
        case Quantity::momentum: return p.hbar / p.r_c;
        case Quantity::energy: return p.hbar * p.hbar / (p.mass * p.r_c * p.r_c);
        case Quantity::variance: return p.r_c * p.r_c;
    }
    throw std::invalid_argument("unknown quantity kind");
}

double nondimensionalize(const ModelParams& p, double value, Quantity kind) {
    return value / unit_scale(p, kind);
}

double dimensionalize(const ModelParams& p, double value, Quantity kind) {
    return value * unit_scale(p, kind);
}

ModelParams nondimensional_params(const ModelParams& p) {
    DerivedParams d = derive_params(p);
    return make_nondim_params(d.k, d.eps_hat);
}

ModelParams make_nondim_params(double k, double eps_hat) {
    if (!(k >= 0.0) || k >= 1.0)
        throw std::invalid_argument("k must lie in [0, 1)");
    if (!(eps_hat > 0.0) || !std::isfinite(eps_hat))
        throw std::invalid_argument("eps_hat must be positive and finite");
    ModelParams q;
    q.hbar = 1.0;
    q.r_c = 1.0;
    q.lambda_rate = 1.0;
    q.mass = 1.0 / eps_hat;
    // k = hbar / (2 mass v_eta r_c)  =>  v_eta = eps_hat / (2 k)
    q.v_eta = k > 0.0 ? eps_hat / (2.0 * k)
                      : std::numeric_limits<double>::infinity();
    q.k_boltzmann = 1.0;
    return q;
}

Quantity quantity_from_string(const std::string& name) {
    if (name == "length") return Quantity::length;
    if (name == "time") return Quantity::time;
    if (name == "momentum") return Quantity::momentum;
    if (name == "energy") return Quantity::energy;
    if (name == "variance") return Quantity::variance;
    throw std::invalid_argument("unknown quantity kind: " + name);
}

} // namespace dgrw
