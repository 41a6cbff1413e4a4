#pragma once

#include "qa2sat/problem.hpp"
#include "qa2sat/rng.hpp"

namespace qa2sat {

// Geometric cooling schedule: sweep k (1-based) runs at t0 * ratio^(k-1),
// so after k sweeps the temperature has dropped to t0 * ratio^k.
struct SASchedule {
    double t0 = 10.0;
    double ratio = 0.7847;
    int sweeps = 100;
    long trajectories = 64000;
};

// One Metropolis sweep: every spin is proposed once, in index order.
// Returns the updated energy.  At t <= 0 only downhill moves are taken.
int metropolis_sweep(const Problem& p, const VarClauses& vc, SpinConfig& s,
                     int energy, double t, Rng& rng);

// One trajectory from a fresh random configuration; success means zero
// violated clauses at the end of the schedule.
bool sa_trajectory(const Problem& p, const VarClauses& vc,
                   const SASchedule& sched, Rng& rng);

struct SAMetrics {
    double p_success = 0.0;
    double std_err = 0.0;
    double tau_sa = 0.0;  // spin updates to reach p_target = 1/2
    long trajectories = 0;
};

// Expected total work, in single-spin updates, to reach success
// probability p_target by independent restarts of `sweeps`-sweep runs:
// ln(1 - p_target) / ln(1 - p_success) * sweeps * n.
double sa_runtime(double p_success, int n, double p_target = 0.5,
                  int sweeps = 100);

// Success statistics over many independent trajectories.  The estimate is
// clamped to [1/(2T), 1 - 1/(2T)] so downstream logs stay finite; each
// trajectory draws its own generator derived from `rng`, which makes the
// result independent of how trajectories are scheduled.
SAMetrics sa_success(const Problem& p, const SASchedule& sched, Rng& rng,
                     int workers = 1);

}  // namespace qa2sat
