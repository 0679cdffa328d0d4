#include "dgrw/trajectory.hpp"

#include "dgrw/moments.hpp"
#include "dgrw/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace dgrw {

namespace {

GaussianState drift(const GaussianState& s, double dt, const ModelParams& p,
                    const TrajectoryOptions& opts) {
    return opts.free_evolution ? free_evolve(s, dt, p) : s;
}

// The jump chain. on_grid(index, state_at_grid_time) fires for every grid
// time in order; on_jump(t, y, post_state) for every jump. Grid times that
// coincide with a jump see the pre-jump state. Returns the state at t_final.
//
// Times accumulate raw exponential waits; the recorded double is exactly the
// double the replay subtracts, which is what makes replays bit-identical.
template <class OnGrid, class OnJump>
GaussianState walk(const ModelParams& p, const GaussianState& s0, double t_final,
                   const double* grid, std::size_t n_grid, const TrajectoryOptions& opts,
                   Rng& rng, OnGrid&& on_grid, OnJump&& on_jump) {
    GaussianState st = s0;
    double t_run = 0.0;
    double t_raw = 0.0;
    std::size_t gi = 0;
    const double mean_wait = 1.0 / p.lambda_rate;
    for (;;) {
        t_raw += rng.exponential() * mean_wait;
        const double t_jump = t_raw;
        if (!(t_jump < t_final)) break;
        while (gi < n_grid && grid[gi] <= t_jump) {
            on_grid(gi, drift(st, grid[gi] - t_run, p, opts));
            ++gi;
        }
        const GaussianState pre = drift(st, t_jump - t_run, p, opts);
        const GaussianDensity den = jump_position_density(pre, p);
        const double y = den.mean + std::sqrt(den.variance) * rng.normal();
        st = apply_jump(pre, y, p);
        on_jump(t_jump, y, st);
        t_run = t_jump;
    }
    while (gi < n_grid) {
        on_grid(gi, drift(st, grid[gi] - t_run, p, opts));
        ++gi;
    }
    return drift(st, t_final - t_run, p, opts);
}

void check_time_grid(const std::vector<double>& t_grid) {
    if (t_grid.empty())
        throw std::invalid_argument("time grid is empty");
    if (!(t_grid.front() >= 0.0))
        throw std::invalid_argument("time grid starts before 0");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1]))
            throw std::invalid_argument("time grid must be strictly increasing");
}

} // namespace

SampledTrajectory sample_trajectory(const ModelParams& p, const GaussianState& s0,
                                    double t_final, std::uint64_t seed,
                                    const TrajectoryOptions& opts) {
    derive_params(p);
    if (!(t_final >= 0.0) || !std::isfinite(t_final))
        throw std::invalid_argument("t_final must be finite and >= 0");
    SampledTrajectory out;
    out.record.seed = seed;
    out.record.t_final = t_final;
    Rng rng(seed);
    out.final_state = walk(
        p, s0, t_final, nullptr, 0, opts, rng, [](std::size_t, const GaussianState&) {},
        [&](double t, double y, const GaussianState& post) {
            out.record.events.push_back(JumpEvent{t, y});
            out.event_observables.push_back(observables(post, p));
        });
    return out;
}

GaussianState resolve_trajectory(const ModelParams& p, const GaussianState& s0,
                                 const TrajectoryRecord& rec, const TrajectoryOptions& opts) {
    derive_params(p);
    GaussianState st = s0;
    double t_run = 0.0;
    for (const JumpEvent& ev : rec.events) {
        if (!(ev.t >= t_run) || !(ev.t < rec.t_final))
            throw std::invalid_argument("trajectory events out of order or beyond t_final");
        st = apply_jump(drift(st, ev.t - t_run, p, opts), ev.y, p);
        t_run = ev.t;
    }
    return drift(st, rec.t_final - t_run, p, opts);
}

int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DGRW_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<int>(std::min<long>(v, 1024));
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

struct PointAcc {
    MomentAccumulator m;       // <X>
    MomentAccumulator p;       // <P>
    MomentAccumulator e;       // <H>
    MomentAccumulator v;       // Var_psi(X)
    MomentAccumulator q;       // Var_psi(X) + <X>^2
    CovarianceAccumulator qm;  // (q, <X>)

    void merge(const PointAcc& b) {
        m.merge(b.m);
        p.merge(b.p);
        e.merge(b.e);
        v.merge(b.v);
        q.merge(b.q);
        qm.merge(b.qm);
    }
};

constexpr std::uint64_t kBlock = 64;

// Fixed 64-trajectory blocks merged strictly in block order: the result is
// one specific summation order, independent of how many threads ran it.
void run_blocks(std::uint64_t n_traj, std::size_t n_points, int threads,
                const std::function<void(std::uint64_t, std::vector<PointAcc>&)>& item,
                std::vector<PointAcc>& global) {
    const std::uint64_t n_blocks = (n_traj + kBlock - 1) / kBlock;
    global.assign(n_points, PointAcc{});
    const int n_workers =
        static_cast<int>(std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), n_blocks));

    auto fill_block = [&](std::uint64_t b, std::vector<PointAcc>& blk) {
        blk.assign(n_points, PointAcc{});
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi = std::min(n_traj, lo + kBlock);
        for (std::uint64_t i = lo; i < hi; ++i) item(i, blk);
    };

    if (n_workers <= 1) {
        std::vector<PointAcc> blk;
        for (std::uint64_t b = 0; b < n_blocks; ++b) {
            fill_block(b, blk);
            for (std::size_t pt = 0; pt < n_points; ++pt) global[pt].merge(blk[pt]);
        }
        return;
    }

    std::atomic<std::uint64_t> next{0};
    std::mutex mx;
    std::map<std::uint64_t, std::vector<PointAcc>> pending;
    std::uint64_t merge_next = 0;
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            std::vector<PointAcc> blk;
            for (;;) {
                const std::uint64_t b = next.fetch_add(1);
                if (b >= n_blocks) return;
                try {
                    fill_block(b, blk);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mx);
                    if (!failure) failure = std::current_exception();
                    return;
                }
                std::lock_guard<std::mutex> lock(mx);
                pending.emplace(b, std::move(blk));
                while (!pending.empty() && pending.begin()->first == merge_next) {
                    const auto& ready = pending.begin()->second;
                    for (std::size_t pt = 0; pt < n_points; ++pt) global[pt].merge(ready[pt]);
                    pending.erase(pending.begin());
                    ++merge_next;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

double delta_var_rho_se(const PointAcc& a) {
    // var_x_rho = mean(q) - mean(m)^2; first-order error propagation in
    // (mean(q), mean(m)) with the sample covariance.
    if (a.m.n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(a.m.n);
    const double mbar = a.m.mean;
    const double var_q = a.q.variance();
    const double var_m = a.m.variance();
    const double cov_qm = a.qm.covariance();
    const double v = (var_q + 4.0 * mbar * mbar * var_m - 4.0 * mbar * cov_qm) / n;
    return std::sqrt(std::max(0.0, v));
}

} // namespace

EnsembleSeries ensemble_statistics(const ModelParams& p, const GaussianState& s0,
                                   const std::vector<double>& t_grid, std::uint64_t n_traj,
                                   std::uint64_t base_seed, const EnsembleOptions& opts) {
    derive_params(p);
    check_time_grid(t_grid);
    if (n_traj == 0)
        throw std::invalid_argument("n_traj must be positive");

    const double t_final = t_grid.back();
    const std::size_t n_points = t_grid.size();
    std::vector<PointAcc> acc;
    auto item = [&](std::uint64_t i, std::vector<PointAcc>& blk) {
        Rng rng(base_seed + i);
        walk(
            p, s0, t_final, t_grid.data(), n_points, opts.trajectory, rng,
            [&](std::size_t gi, const GaussianState& g) {
                const Observables o = observables(g, p);
                const double q = o.var_x + o.mean_x * o.mean_x;
                blk[gi].m.add(o.mean_x);
                blk[gi].p.add(o.mean_p);
                blk[gi].e.add(o.kinetic_energy);
                blk[gi].v.add(o.var_x);
                blk[gi].q.add(q);
                blk[gi].qm.add(q, o.mean_x);
            },
            [](double, double, const GaussianState&) {});
    };
    run_blocks(n_traj, n_points, resolve_thread_count(opts.threads), item, acc);

    EnsembleSeries out;
    out.t_grid = t_grid;
    out.n_traj = n_traj;
    auto sized = [&](SeriesColumn& c) {
        c.estimate.resize(n_points);
        c.std_error.resize(n_points);
    };
    sized(out.mean_x);
    sized(out.mean_p);
    sized(out.energy);
    sized(out.var_x_psi);
    sized(out.var_x_rho);
    sized(out.var_traj_mean_x);
    for (std::size_t i = 0; i < n_points; ++i) {
        const PointAcc& a = acc[i];
        out.mean_x.estimate[i] = a.m.mean;
        out.mean_x.std_error[i] = a.m.mean_std_error();
        out.mean_p.estimate[i] = a.p.mean;
        out.mean_p.std_error[i] = a.p.mean_std_error();
        out.energy.estimate[i] = a.e.mean;
        out.energy.std_error[i] = a.e.mean_std_error();
        out.var_x_psi.estimate[i] = a.v.mean;
        out.var_x_psi.std_error[i] = a.v.mean_std_error();
        out.var_x_rho.estimate[i] = a.q.mean - a.m.mean * a.m.mean;
        out.var_x_rho.std_error[i] = delta_var_rho_se(a);
        const double n = static_cast<double>(a.m.n);
        out.var_traj_mean_x.estimate[i] = a.m.m2 / n;
        out.var_traj_mean_x.std_error[i] = a.m.variance_std_error();
    }
    return out;
}

VarianceSeries expected_variance_timeonly(const ModelParams& p, std::complex<double> gamma0,
                                          const std::vector<double>& t_grid,
                                          std::uint64_t n_traj, std::uint64_t base_seed,
                                          const EnsembleOptions& opts) {
    const DerivedParams d = derive_params(p);
    check_time_grid(t_grid);
    if (n_traj == 0)
        throw std::invalid_argument("n_traj must be positive");
    if (!(gamma0.real() > 0.0))
        throw std::invalid_argument("gamma0 needs a positive real part");

    const double t_final = t_grid.back();
    const std::size_t n_points = t_grid.size();
    const double mean_wait = 1.0 / p.lambda_rate;
    const double ihm = p.hbar / p.mass;
    const bool drifting = opts.trajectory.free_evolution;

    std::vector<PointAcc> acc;
    auto item = [&](std::uint64_t i, std::vector<PointAcc>& blk) {
        Rng rng(base_seed + i);
        std::complex<double> g = gamma0;
        double t_run = 0.0, t_raw = 0.0;
        std::size_t gi = 0;
        auto widened = [&](std::complex<double> base, double dt) {
            return drifting ? base + std::complex<double>(0.0, ihm * dt) : base;
        };
        auto record = [&](std::complex<double> gg) {
            blk[gi].v.add(std::norm(gg) / (2.0 * gg.real()));
        };
        for (;;) {
            t_raw += rng.exponential() * mean_wait;
            if (!(t_raw < t_final)) break;
            while (gi < n_points && t_grid[gi] <= t_raw) {
                record(widened(g, t_grid[gi] - t_run));
                ++gi;
            }
            g = jump_width_map(widened(g, t_raw - t_run), d.k, p.r_c);
            t_run = t_raw;
        }
        while (gi < n_points) {
            record(widened(g, t_grid[gi] - t_run));
            ++gi;
        }
    };
    run_blocks(n_traj, n_points, resolve_thread_count(opts.threads), item, acc);

    VarianceSeries out;
    out.t_grid = t_grid;
    out.n_traj = n_traj;
    out.var_x_psi.estimate.resize(n_points);
    out.var_x_psi.std_error.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        out.var_x_psi.estimate[i] = acc[i].v.mean;
        out.var_x_psi.std_error[i] = acc[i].v.mean_std_error();
    }
    return out;
}

void write_csv_header(std::ostream& os) {
    os << "t,observable,estimate,std_error\n";
}

namespace {

void format_double(std::ostream& os, double v) {
    if (std::isnan(v)) {
        os << "nan";
        return;
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

} // namespace

void write_csv_row(std::ostream& os, double t, std::string_view observable, double estimate,
                   double std_error) {
    format_double(os, t);
    os << ',' << observable << ',';
    format_double(os, estimate);
    os << ',';
    format_double(os, std_error);
    os << '\n';
}

void write_series_csv(std::ostream& os, const EnsembleSeries& s) {
    write_csv_header(os);
    const struct {
        const char* name;
        const SeriesColumn* col;
    } cols[] = {
        {"mean_x", &s.mean_x},
        {"mean_p", &s.mean_p},
        {"energy", &s.energy},
        {"var_x_psi", &s.var_x_psi},
        {"var_x_rho", &s.var_x_rho},
        {"var_traj_mean_x", &s.var_traj_mean_x},
    };
    for (std::size_t i = 0; i < s.t_grid.size(); ++i)
        for (const auto& c : cols)
            write_csv_row(os, s.t_grid[i], c.name, c.col->estimate[i], c.col->std_error[i]);
}

void write_series_csv(std::ostream& os, const VarianceSeries& s) {
    write_csv_header(os);
    for (std::size_t i = 0; i < s.t_grid.size(); ++i)
        write_csv_row(os, s.t_grid[i], "var_x_psi", s.var_x_psi.estimate[i],
                      s.var_x_psi.std_error[i]);
}

} // namespace dgrw
