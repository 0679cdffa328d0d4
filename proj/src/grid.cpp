#include "dgrw/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace dgrw {

namespace {

std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// FFTW plan creation is not thread safe; execution on the planned arrays is.
void fft_inplace(std::vector<std::complex<double>>& a, int sign) {
    auto* d = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(a.size()), d, d, sign, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fftw plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(plan);
    }
}

void check_same_grid(const GridSpec& a, const GridSpec& b) {
    if (a.n != b.n || a.x0 != b.x0 || a.dx != b.dx)
        throw std::invalid_argument("grids do not match");
}

void check_grid(const GridSpec& g) {
    if (g.n < 8 || !(g.dx > 0.0))
        throw std::invalid_argument("grid needs n >= 8 and dx > 0");
}

} // namespace

double norm_squared(const GridWavefunction& psi) {
    double s = 0.0;
    for (const auto& a : psi.amp) s += std::norm(a);
    return s * psi.grid.dx;
}

void renormalize(GridWavefunction& psi) {
    const double n2 = norm_squared(psi);
    if (!(n2 > 0.0)) throw std::runtime_error("cannot renormalize a null wavefunction");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : psi.amp) a *= inv;
}

double distance_up_to_phase(const GridWavefunction& a, const GridWavefunction& b) {
    check_same_grid(a.grid, b.grid);
    double na = 0.0, nb = 0.0;
    std::complex<double> ip{0.0, 0.0};
    for (std::size_t i = 0; i < a.amp.size(); ++i) {
        na += std::norm(a.amp[i]);
        nb += std::norm(b.amp[i]);
        ip += std::conj(a.amp[i]) * b.amp[i];
    }
    const double dx = a.grid.dx;
    const double d2 = na * dx + nb * dx - 2.0 * std::abs(ip) * dx;
    return std::sqrt(std::max(0.0, d2));
}

GridWavefunction evaluate_on_grid(const GaussianState& s, const GridSpec& grid,
                                  const ModelParams& p) {
    check_grid(grid);
    GridWavefunction psi;
    psi.grid = grid;
    psi.amp.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i)
        psi.amp[i] = wavefunction_value(s, grid.x0 + static_cast<double>(i) * grid.dx, p);
    const double n2 = norm_squared(psi);
    if (std::abs(n2 - 1.0) > 1e-6)
        throw std::runtime_error("grid too narrow or too coarse for this state");
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : psi.amp) a *= inv;
    return psi;
}

GridObservables grid_observables(const GridWavefunction& psi, const ModelParams& p) {
    check_grid(psi.grid);
    const std::size_t n = psi.grid.n;
    const double dx = psi.grid.dx;

    GridObservables o{};
    o.norm_sq = norm_squared(psi);

    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mx += (psi.grid.x0 + static_cast<double>(i) * dx) * std::norm(psi.amp[i]);
    mx *= dx / o.norm_sq;
    double vx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = psi.grid.x0 + static_cast<double>(i) * dx - mx;
        vx += d * d * std::norm(psi.amp[i]);
    }
    vx *= dx / o.norm_sq;
    o.mean_x = mx;
    o.var_x = vx;

    std::vector<std::complex<double>> ft = psi.amp;
    fft_inplace(ft, FFTW_FORWARD);
    const double dk = 2.0 * M_PI * p.hbar / (static_cast<double>(n) * dx);
    double w = 0.0, mp = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double freq = j < n / 2 ? static_cast<double>(j)
                                      : static_cast<double>(j) - static_cast<double>(n);
        const double pj = freq * dk;
        const double wj = std::norm(ft[j]);
        w += wj;
        mp += pj * wj;
        m2 += pj * pj * wj;
    }
    mp /= w;
    m2 /= w;
    o.mean_p = mp;
    o.var_p = std::max(0.0, m2 - mp * mp);
    o.kinetic_energy = m2 / (2.0 * p.mass);
    return o;
}

namespace {

std::complex<double> resample(const GridWavefunction& psi, double x, Interpolation interp,
                              bool& outside) {
    const double t = (x - psi.grid.x0) / psi.grid.dx;
    const auto n = static_cast<std::ptrdiff_t>(psi.grid.n);
    const auto j = static_cast<std::ptrdiff_t>(std::floor(t));
    const double f = t - static_cast<double>(j);
    outside = false;
    if (j < 0 || j + 1 >= n) {
        outside = true;
        return {0.0, 0.0};
    }
    if (interp == Interpolation::cubic && j >= 1 && j + 2 < n) {
        const double w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        const double w1 = (f * f - 1.0) * (f - 2.0) / 2.0;
        const double w2 = -f * (f + 1.0) * (f - 2.0) / 2.0;
        const double w3 = f * (f * f - 1.0) / 6.0;
        return w0 * psi.amp[j - 1] + w1 * psi.amp[j] + w2 * psi.amp[j + 1] +
               w3 * psi.amp[j + 2];
    }
    return (1.0 - f) * psi.amp[j] + f * psi.amp[j + 1];
}

} // namespace

JumpGridResult apply_jump_grid(const GridWavefunction& psi, double y, const ModelParams& p,
                               Interpolation interp) {
    check_grid(psi.grid);
    const double k = derive_params(p).k;
    const double w = 1.0 + k;
    const double scale = (1.0 - k) / w;
    const double mix = 2.0 * k / w;
    const double width = p.r_c * w; // envelope standard width
    const double prefac = std::pow(M_PI * width * width, -0.25);

    JumpGridResult r;
    r.psi.grid = psi.grid;
    r.psi.amp.resize(psi.grid.n);
    r.prenorm_sq = 0.0;
    r.truncated_mass = 0.0;

    const double edge_lo = std::norm(psi.amp.front());
    const double edge_hi = std::norm(psi.amp.back());
    for (std::size_t i = 0; i < psi.grid.n; ++i) {
        const double x = psi.grid.x0 + static_cast<double>(i) * psi.grid.dx;
        const double d = x - y;
        const double env = prefac * std::exp(-d * d / (2.0 * width * width));
        bool outside = false;
        const std::complex<double> v = resample(psi, scale * x + mix * y, interp, outside);
        if (outside) {
            // estimate what the envelope would have picked up there
            const double edge = scale * x + mix * y < psi.grid.x0 ? edge_lo : edge_hi;
            r.truncated_mass += env * env * edge * psi.grid.dx;
        }
        r.psi.amp[i] = env * v;
        r.prenorm_sq += std::norm(r.psi.amp[i]);
    }
    r.prenorm_sq *= psi.grid.dx;
    r.truncated = r.truncated_mass > 1e-10;
    if (!(r.prenorm_sq > 0.0))
        throw std::runtime_error("jump annihilated the grid state; grid too narrow");
    const double inv = 1.0 / std::sqrt(r.prenorm_sq);
    for (auto& a : r.psi.amp) a *= inv;
    return r;
}

FreeGridResult free_evolve_grid(const GridWavefunction& psi, double dt, const ModelParams& p) {
    check_grid(psi.grid);
    const std::size_t n = psi.grid.n;
    FreeGridResult r;
    r.psi.grid = psi.grid;
    r.psi.amp = psi.amp;
    fft_inplace(r.psi.amp, FFTW_FORWARD);

    const double dk = 2.0 * M_PI * p.hbar / (static_cast<double>(n) * psi.grid.dx);
    double total = 0.0, outer = 0.0;
    const double band = 0.45 * static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double freq = j < n / 2 ? static_cast<double>(j)
                                      : static_cast<double>(j) - static_cast<double>(n);
        const double pj = freq * dk;
        const double wj = std::norm(r.psi.amp[j]);
        total += wj;
        if (std::abs(freq) >= band) outer += wj;
        const double phase = -pj * pj * dt / (2.0 * p.mass * p.hbar);
        r.psi.amp[j] *= std::complex<double>(std::cos(phase), std::sin(phase));
    }
    fft_inplace(r.psi.amp, FFTW_BACKWARD);
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& a : r.psi.amp) a *= inv;
    r.nyquist_mass = total > 0.0 ? outer / total : 0.0;
    r.aliasing = r.nyquist_mass > 1e-10;
    return r;
}

JumpDensityGrid jump_density_grid(const GridWavefunction& psi, double y0, double dy,
                                  std::size_t m, const ModelParams& p) {
    check_grid(psi.grid);
    if (m < 2 || !(dy > 0.0))
        throw std::invalid_argument("density grid needs m >= 2 and dy > 0");
    JumpDensityGrid d;
    d.y0 = y0;
    d.dy = dy;
    d.p.resize(m);

    // Same construction as apply_jump_grid, but only the squared norm is kept.
    const double k = derive_params(p).k;
    const double w = 1.0 + k;
    const double scale = (1.0 - k) / w;
    const double mix = 2.0 * k / w;
    const double width = p.r_c * w;
    const double prefac = std::pow(M_PI * width * width, -0.25);

    for (std::size_t l = 0; l < m; ++l) {
        const double y = y0 + static_cast<double>(l) * dy;
        double acc = 0.0;
        for (std::size_t i = 0; i < psi.grid.n; ++i) {
            const double x = psi.grid.x0 + static_cast<double>(i) * psi.grid.dx;
            const double dxy = x - y;
            const double env = prefac * std::exp(-dxy * dxy / (2.0 * width * width));
            if (env == 0.0) continue;
            bool outside = false;
            const std::complex<double> v =
                resample(psi, scale * x + mix * y, Interpolation::cubic, outside);
            acc += env * env * std::norm(v);
        }
        d.p[l] = acc * psi.grid.dx;
    }
    d.total_mass = 0.0;
    for (double v : d.p) d.total_mass += v;
    d.total_mass *= dy;
    if (std::abs(d.total_mass - 1.0) > 1e-3)
        throw std::runtime_error("jump density mass escapes the y range");
    d.deficient = std::abs(d.total_mass - 1.0) > 1e-4;
    return d;
}

double sample_from_density(const JumpDensityGrid& d, Rng& rng) {
    const double u = rng.uniform_open() * d.total_mass;
    double c = 0.0;
    for (std::size_t l = 0; l < d.p.size(); ++l) {
        const double step = d.p[l] * d.dy;
        if (c + step >= u) {
            const double frac = step > 0.0 ? (u - c) / step : 0.5;
            return d.y0 + (static_cast<double>(l) + frac - 0.5) * d.dy;
        }
        c += step;
    }
    return d.y0 + static_cast<double>(d.p.size() - 1) * d.dy;
}

GridSpec choose_grid(double center, double half_extent, std::size_t n) {
    if (n < 8 || (n & (n - 1)) != 0)
        throw std::invalid_argument("grid size must be a power of two >= 8");
    GridSpec g;
    g.n = n;
    g.dx = 2.0 * half_extent / static_cast<double>(n);
    g.x0 = center - half_extent;
    return g;
}

GridWavefunction superposition_on_grid(const SuperpositionConfig& cfg, const GridSpec& grid,
                                       const ModelParams& p) {
    check_grid(grid);
    (void)p;
    if (!(cfg.gamma > 0.0))
        throw std::invalid_argument("superposition width gamma must be positive");
    GridWavefunction psi;
    psi.grid = grid;
    psi.amp.resize(grid.n);
    double peak = 0.0;
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x0 + static_cast<double>(i) * grid.dx;
        const double dp = x - cfg.alpha;
        const double dm = x + cfg.alpha;
        psi.amp[i] = cfg.c_plus * std::exp(-dp * dp / (2.0 * cfg.gamma)) +
                     cfg.c_minus * std::exp(-dm * dm / (2.0 * cfg.gamma));
        peak = std::max(peak, std::abs(psi.amp[i]));
    }
    if (std::abs(psi.amp.front()) > 1e-9 * peak || std::abs(psi.amp.back()) > 1e-9 * peak)
        throw std::runtime_error("grid too narrow for the superposition");
    renormalize(psi);
    return psi;
}

SuperpositionResult superposition_experiment(const SuperpositionConfig& cfg,
                                             const ModelParams& p) {
    if (!(cfg.alpha != 0.0))
        throw std::invalid_argument("superposition needs alpha != 0");
    const double a2 = cfg.alpha * cfg.alpha;
    if (a2 < 100.0 * cfg.gamma || a2 < 100.0 * p.r_c * p.r_c)
        throw std::invalid_argument(
            "peaks not separated enough: need alpha^2 >= 100 gamma and >= 100 r_c^2");
    if (cfg.n_samples == 0)
        throw std::invalid_argument("n_samples must be positive");

    const GridSpec grid = choose_grid(0.0, 2.0 * std::abs(cfg.alpha), cfg.grid_n);
    const GridWavefunction psi = superposition_on_grid(cfg, grid, p);

    // Jump centers live within a few r_c of either peak; the grid extent
    // covers them with room to spare.
    const JumpDensityGrid density =
        jump_density_grid(psi, grid.x0, grid.dx, grid.n, p);

    Rng rng(cfg.seed);
    SuperpositionResult out;
    const double wp = std::norm(cfg.c_plus) / (std::norm(cfg.c_plus) + std::norm(cfg.c_minus));
    out.weight_plus = wp;
    for (std::size_t s = 0; s < cfg.n_samples; ++s) {
        const double y = sample_from_density(density, rng);
        const JumpGridResult jump = apply_jump_grid(psi, y, p);
        double plus = 0.0, total = 0.0;
        for (std::size_t i = 0; i < grid.n; ++i) {
            const double x = grid.x0 + static_cast<double>(i) * grid.dx;
            const double m = std::norm(jump.psi.amp[i]);
            total += m;
            if (x > 0.0) plus += m;
        }
        const double frac = plus / total;
        if (frac >= 0.99) ++out.n_plus;
        else if (frac <= 0.01) ++out.n_minus;
        else ++out.n_undecided;
    }
    if (static_cast<double>(out.n_undecided) > 1e-3 * static_cast<double>(cfg.n_samples))
        throw std::runtime_error("too many ambiguous collapse outcomes");
    const double decided = static_cast<double>(out.n_plus + out.n_minus);
    out.freq_plus = static_cast<double>(out.n_plus) / decided;
    out.freq_se = std::sqrt(wp * (1.0 - wp) / decided);
    return out;
}

} // namespace dgrw
