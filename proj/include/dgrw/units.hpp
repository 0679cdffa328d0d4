#pragma once

#include "dgrw/params.hpp"

#include <string>

namespace dgrw {

// Unit system used internally: lengths in r_c, times in 1/lambda_rate,
// momenta in hbar/r_c, energies in hbar^2/(mass r_c^2), variances in r_c^2.
enum class Quantity { length, time, momentum, energy, variance };

// SI value of one internal unit of the given kind.
double unit_scale(const ModelParams& p, Quantity kind);

double nondimensionalize(const ModelParams& p, double value, Quantity kind);
double dimensionalize(const ModelParams& p, double value, Quantity kind);

// The same physics with hbar = r_c = lambda_rate = 1. Only two numbers
// survive: k (via v_eta) and eps_hat (via mass = 1/eps_hat).
ModelParams nondimensional_params(const ModelParams& p);

// Build a dimensionless parameter set directly from (k, eps_hat).
ModelParams make_nondim_params(double k, double eps_hat);

Quantity quantity_from_string(const std::string& name);

} // namespace dgrw
