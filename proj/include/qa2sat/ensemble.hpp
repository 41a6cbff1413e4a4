#pragma once

#include <cstdint>
#include <vector>

#include "qa2sat/dos.hpp"
#include "qa2sat/errors.hpp"
#include "qa2sat/problem.hpp"
#include "qa2sat/rng.hpp"

#include <json.hpp>

namespace qa2sat {

// Multicanonical weights over mu = number of satisfying assignments.
// Exact integer bins up to linear_cut, then geometric bins so the table
// stays small when mu ranges over several orders of magnitude.
// Weights are W(mu) = -ln g(mu) up to a constant; the chain acceptance
// uses only differences.
struct WeightTable {
    std::uint64_t mu_max = 0;
    int linear_cut = 32;
    int bins_per_octave = 4;
    std::vector<double> w;

    static WeightTable flat(std::uint64_t mu_max, int linear_cut = 32,
                            int bins_per_octave = 4);

    int n_bins() const { return static_cast<int>(w.size()); }
    int bin_of(std::uint64_t mu) const;  // mu in [1, mu_max]
    double weight(std::uint64_t mu) const { return w[bin_of(mu)]; }

    nlohmann::json to_json() const;
    static WeightTable from_json(const nlohmann::json& j);
};

struct MucaCounters {
    std::uint64_t steps = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected_unsat = 0;    // proposal had mu = 0
    std::uint64_t rejected_domain = 0;   // proposal had mu > mu_max
    std::uint64_t rejected_weight = 0;   // Metropolis rejection
};

// Markov chain over satisfiable problems at fixed (n, m).  One step
// replaces a uniformly chosen clause by a fresh random clause; the
// proposal is symmetric, so min(1, exp(W' - W)) gives stationary
// density exp(W(mu)), which is ~ 1/g(mu) once W has been learned.
struct MucaState {
    Problem current;
    DOSVector dos;        // exact density of states of current
    std::uint64_t mu = 0; // dos[0]
    WeightTable weights;
    bool learning = false;
    double mod_factor = 0.0;               // Wang-Landau ln f, used iff learning
    std::vector<std::uint64_t> histogram;  // per-bin visit counts
    std::vector<std::uint8_t> attained;    // bins seen at least once
    MucaCounters counters;
    bool distinct_vars = true;
};

MucaState make_muca_state(Problem start, WeightTable weights,
                          bool learning = false, double mod_factor = 0.0);

struct StepResult {
    bool accepted = false;
    std::uint64_t proposed_mu = 0;
};

StepResult muca_step(MucaState& st, Rng& rng);

// Wang-Landau learning schedule.  m_clauses = 0 means n + 1.
struct LearnSchedule {
    int m_clauses = 0;
    double f0 = 0.6931471805599453;  // ln 2
    double f_floor = 1e-3;
    double flatness_ratio = 5.0;     // max/min visit ratio over attained bins
    std::uint64_t pilot_steps = 20000;
    std::uint64_t check_interval = 0;  // 0: derived from bin count
    std::uint64_t max_total_steps = 50'000'000;
    int linear_cut = 32;
    int bins_per_octave = 4;
    bool distinct_vars = true;
};

struct LearnResult {
    WeightTable weights;
    std::uint64_t steps = 0;
    int passes = 0;
    nlohmann::json diagnostics;
};

struct WeightLearnError : SolverError {
    WeightLearnError(const std::string& msg, WeightTable partial_)
        : SolverError(msg), partial(std::move(partial_)) {}
    WeightTable partial;
};

// Flat-weight pilot to bound the mu range, then Wang-Landau passes with
// the modification factor halved whenever the visit histogram over
// attained bins is flat.  Throws WeightLearnError (with the partial
// table) if the step budget runs out first.
LearnResult learn_weights(int n, const LearnSchedule& sched, Rng& rng);

struct HardInstance {
    Problem problem;
    DOSVector dos;
};

struct HardEnsemble {
    int n = 0;
    int m = 0;
    std::uint64_t spacing = 0;
    std::vector<HardInstance> instances;
    nlohmann::json provenance;
};

struct HarvestOptions {
    int m_clauses = 0;          // 0: n + 1
    std::uint64_t spacing = 0;  // accepted moves between harvests; 0: 10 * m
    std::uint64_t max_steps = 0;  // 0: derived from count and table size
    bool distinct_vars = true;
};

struct PartialEnsembleError : SolverError {
    PartialEnsembleError(const std::string& msg, HardEnsemble partial_)
        : SolverError(msg), partial(std::move(partial_)) {}
    HardEnsemble partial;
};

// Run the weighted chain and record the current problem whenever mu = 1
// and at least `spacing` accepted moves have passed since the previous
// record.  Every harvested instance has a unique satisfying assignment.
HardEnsemble harvest(int n, std::size_t count, const WeightTable& weights,
                     const HarvestOptions& opts, Rng& rng);

}  // namespace qa2sat
