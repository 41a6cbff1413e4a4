#include "qa2sat/sa.hpp"

#include <cmath>
#include <numeric>

#include "qa2sat/errors.hpp"
#include "qa2sat/parallel.hpp"

namespace qa2sat {

int metropolis_sweep(const Problem& p, const VarClauses& vc, SpinConfig& s,
                     int energy, double t, Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int v = 0; v < p.n; ++v) {
        int de = 0;
        for (int j : vc.by_var[v]) de -= clause_energy(p.clauses[j], s);
        s[v] = static_cast<std::int8_t>(-s[v]);
        for (int j : vc.by_var[v]) de += clause_energy(p.clauses[j], s);
        bool accept = de <= 0;
        if (!accept && t > 0.0) accept = u01(rng) < std::exp(-de / t);
        if (accept)
            energy += de;
        else
            s[v] = static_cast<std::int8_t>(-s[v]);
    }
    return energy;
}

bool sa_trajectory(const Problem& p, const VarClauses& vc,
                   const SASchedule& sched, Rng& rng) {
    SpinConfig s = random_config(p.n, rng);
    int e = problem_energy(p, s);
    double t = sched.t0;
    for (int k = 0; k < sched.sweeps; ++k) {
        e = metropolis_sweep(p, vc, s, e, t, rng);
        t *= sched.ratio;
    }
    return e == 0;
}

double sa_runtime(double p_success, int n, double p_target, int sweeps) {
    if (!(p_success > 0.0 && p_success < 1.0))
        throw DomainError("sa_runtime: p_success must be strictly inside (0, 1)");
    if (!(p_target > 0.0 && p_target < 1.0))
        throw DomainError("sa_runtime: p_target must be strictly inside (0, 1)");
    if (n < 1 || sweeps < 1)
        throw ArgumentError("sa_runtime: n and sweeps must be positive");
    const double restarts = std::log1p(-p_target) / std::log1p(-p_success);
    return restarts * static_cast<double>(sweeps) * static_cast<double>(n);
}

SAMetrics sa_success(const Problem& p, const SASchedule& sched, Rng& rng,
                     int workers) {
    if (sched.trajectories < 1)
        throw ArgumentError("sa_success: needs at least one trajectory");
    const VarClauses vc = make_var_clauses(p);
    const std::uint64_t base = rng();

    const long nt = sched.trajectories;
    std::vector<std::uint8_t> hit(nt, 0);
    parallel_for(static_cast<std::size_t>(nt), workers, [&](std::size_t i) {
        Rng tr = make_rng(base, "sa-trajectory", i);
        hit[i] = sa_trajectory(p, vc, sched, tr) ? 1 : 0;
    });
    const long wins = std::accumulate(hit.begin(), hit.end(), 0L);

    SAMetrics m;
    m.trajectories = nt;
    double ps = static_cast<double>(wins) / static_cast<double>(nt);
    const double clamp = 1.0 / (2.0 * static_cast<double>(nt));
    ps = std::min(std::max(ps, clamp), 1.0 - clamp);
    m.p_success = ps;
    m.std_err = std::sqrt(ps * (1.0 - ps) / static_cast<double>(nt));
    m.tau_sa = sa_runtime(ps, p.n, 0.5, sched.sweeps);
    return m;
}

}  // namespace qa2sat
