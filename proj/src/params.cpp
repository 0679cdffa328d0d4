#include "dgrw/params.hpp"

#include "dgrw/errors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dgrw {

double default_v_eta(double r_c, double hbar) {
    return 1e31 * hbar / r_c;
}

DerivedParams derive_params(const ModelParams& p) {
    if (!(p.lambda_rate > 0.0) || !std::isfinite(p.lambda_rate))
        throw std::invalid_argument("lambda_rate must be positive and finite");
    if (!(p.r_c > 0.0) || !std::isfinite(p.r_c))
        throw std::invalid_argument("r_c must be positive and finite");
    if (!(p.mass > 0.0) || !std::isfinite(p.mass))
        throw std::invalid_argument("mass must be positive and finite");
    if (!(p.v_eta > 0.0)) // +inf allowed: no dissipation
        throw std::invalid_argument("v_eta must be positive (or +inf)");
    if (!(p.hbar > 0.0) || !std::isfinite(p.hbar))
        throw std::invalid_argument("hbar must be positive and finite");

    DerivedParams d{};
    const double inf = std::numeric_limits<double>::infinity();
    d.k = std::isinf(p.v_eta) ? 0.0 : p.hbar / (2.0 * p.mass * p.v_eta * p.r_c);
    if (d.k >= 1.0)
        throw std::invalid_argument("dissipation parameter k >= 1; increase v_eta or mass");
    d.gamma_thr = 4.0 * d.k * p.r_c * p.r_c;
    const double w = 1.0 + d.k;
    d.xi = 4.0 * p.lambda_rate * d.k / (w * w);
    d.h_as = d.k > 0.0
                 ? p.hbar * p.hbar / (16.0 * p.mass * p.r_c * p.r_c * d.k)
                 : inf;
    d.temperature = d.k > 0.0
                        ? p.hbar * p.hbar / (8.0 * p.k_boltzmann * p.mass * p.r_c * p.r_c * d.k)
                        : inf;
    d.epsilon = p.hbar / (p.mass * p.lambda_rate);
    d.eps_hat = d.epsilon / (p.r_c * p.r_c);
    return d;
}

ModelParams preset_params(const std::string& name) {
    ModelParams p;
    const double inf = std::numeric_limits<double>::infinity();
    if (name == "grw1986") {
        p.lambda_rate = 1e-16;
        p.r_c = 1e-7;
        p.mass = 1.67262192369e-27;
        p.v_eta = inf;
    } else if (name == "adler2007") {
        p.lambda_rate = 2.2e-8;
        p.r_c = 1e-7;
        p.mass = 1.67262192369e-27;
        p.v_eta = inf;
    } else if (name == "nucleon") {
        p.lambda_rate = 1e-16;
        p.r_c = 1e-7;
        p.mass = 1e-27;
        p.v_eta = default_v_eta(p.r_c, p.hbar);
    } else if (name == "macro_1g") {
        p.lambda_rate = 1e7;
        p.r_c = 1e-7;
        p.mass = 1e-3;
        p.v_eta = default_v_eta(p.r_c, p.hbar);
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return p;
}

namespace {

double parse_value(const std::string& key, const std::string& text) {
    std::string t = text;
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "inf" || t == "+inf" || t == "infinity")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        double v = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad numeric value for " + key + ": '" + text + "'");
    }
}

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

ModelParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open params file: " + path);

    // Two passes so "preset=" applies first and explicit keys always win.
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = strip(line);
        if (s.empty() || s[0] == '#') continue;
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("params file line " + std::to_string(lineno) +
                                        ": expected key=value");
        kv.emplace_back(strip(s.substr(0, eq)), strip(s.substr(eq + 1)));
    }

    ModelParams p;
    for (const auto& [key, val] : kv)
        if (key == "preset") p = preset_params(val);
    for (const auto& [key, val] : kv) {
        if (key == "preset") continue;
        if (key == "lambda_rate") p.lambda_rate = parse_value(key, val);
        else if (key == "r_c") p.r_c = parse_value(key, val);
        else if (key == "v_eta") p.v_eta = parse_value(key, val);
        else if (key == "mass") p.mass = parse_value(key, val);
        else throw std::invalid_argument("unknown params key: " + key);
    }
    return p;
}

} // namespace dgrw
