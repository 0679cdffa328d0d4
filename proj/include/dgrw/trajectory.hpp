#pragma once

#include "dgrw/gaussian.hpp"
#include "dgrw/params.hpp"

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace dgrw {

struct JumpEvent {
    double t; // [s]
    double y; // [m]
};

// Everything needed to replay a trajectory deterministically.
struct TrajectoryRecord {
    std::uint64_t seed = 0;
    double t_final = 0.0;
    std::vector<JumpEvent> events;
};

struct TrajectoryOptions {
    // false freezes the deterministic drift between jumps; the jump chain
    // itself is untouched. Used to expose the pure localization dynamics.
    bool free_evolution = true;
};

struct SampledTrajectory {
    TrajectoryRecord record;
    GaussianState final_state;
    std::vector<Observables> event_observables; // post-jump, one per event
};

// One piecewise-deterministic trajectory: waiting times exponential with
// rate lambda_rate, jump centers drawn from the state's own density.
// All randomness comes from the seed.
SampledTrajectory sample_trajectory(const ModelParams& p, const GaussianState& s0,
                                    double t_final, std::uint64_t seed,
                                    const TrajectoryOptions& opts = {});

// Replays a record through the same state updates the sampler used, so the
// result is bit-identical to the sampled final state. Throws on events that
// are out of order or outside [0, t_final).
GaussianState resolve_trajectory(const ModelParams& p, const GaussianState& s0,
                                 const TrajectoryRecord& rec,
                                 const TrajectoryOptions& opts = {});

struct SeriesColumn {
    std::vector<double> estimate;
    std::vector<double> std_error;
};

// Ensemble averages on a fixed time grid. var_x_psi is the mean wavefunction
// variance, var_x_rho the total position variance (law of total variance adds
// var_traj_mean_x, the spread of per-trajectory means).
struct EnsembleSeries {
    std::vector<double> t_grid;
    std::uint64_t n_traj = 0;
    SeriesColumn mean_x;
    SeriesColumn mean_p;
    SeriesColumn energy;
    SeriesColumn var_x_psi;
    SeriesColumn var_x_rho;
    SeriesColumn var_traj_mean_x;
};

struct EnsembleOptions {
    TrajectoryOptions trajectory;
    // 0 = take DGRW_THREADS from the environment, else hardware concurrency.
    int threads = 0;
};

// Trajectory i uses seed base_seed + i, so any member can be re-run alone
// with sample_trajectory. Results are independent of the thread count:
// trajectories are accumulated in fixed blocks of 64 and the blocks are
// merged in index order. Grid times must be strictly increasing, >= 0;
// the run ends at t_grid.back(). Statistics at a grid time never consume
// the pending waiting time (the process is memoryless, sampling it mid-flight
// is exact). With n_traj = 1 every std_error is NaN.
EnsembleSeries ensemble_statistics(const ModelParams& p, const GaussianState& s0,
                                   const std::vector<double>& t_grid, std::uint64_t n_traj,
                                   std::uint64_t base_seed, const EnsembleOptions& opts = {});

struct VarianceSeries {
    std::vector<double> t_grid;
    std::uint64_t n_traj = 0;
    SeriesColumn var_x_psi;
};

// Fast path for the expected wavefunction variance: only jump times matter
// for the width, so nothing else is simulated. Same seeding and blocking
// rules as ensemble_statistics, but a different draw pattern, so it agrees
// with the full ensemble in distribution, not sample by sample.
VarianceSeries expected_variance_timeonly(const ModelParams& p, std::complex<double> gamma0,
                                          const std::vector<double>& t_grid,
                                          std::uint64_t n_traj, std::uint64_t base_seed,
                                          const EnsembleOptions& opts = {});

// CSV in long format: t,observable,estimate,std_error with %.17g values
// and a plain "nan" for missing errors.
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, double t, std::string_view observable, double estimate,
                   double std_error);
void write_series_csv(std::ostream& os, const EnsembleSeries& s);
void write_series_csv(std::ostream& os, const VarianceSeries& s);

int resolve_thread_count(int requested);

} // namespace dgrw
