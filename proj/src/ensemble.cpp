#include "qa2sat/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "qa2sat/two_sat.hpp"
#include "qa2sat/version.hpp"

namespace qa2sat {

WeightTable WeightTable::flat(std::uint64_t mu_max, int linear_cut,
                              int bins_per_octave) {
    if (mu_max < 1) throw ArgumentError("WeightTable: mu_max < 1");
    if (linear_cut < 1 || bins_per_octave < 1)
        throw ArgumentError("WeightTable: bad binning parameters");
    WeightTable t;
    t.mu_max = mu_max;
    t.linear_cut = linear_cut;
    t.bins_per_octave = bins_per_octave;
    int bins;
    if (mu_max <= static_cast<std::uint64_t>(linear_cut)) {
        bins = static_cast<int>(mu_max);
    } else {
        const double span = std::log2(static_cast<double>(mu_max)) -
                            std::log2(static_cast<double>(linear_cut));
        bins = linear_cut + static_cast<int>(span * bins_per_octave) + 1;
    }
    t.w.assign(bins, 0.0);
    return t;
}

int WeightTable::bin_of(std::uint64_t mu) const {
    if (mu < 1 || mu > mu_max) throw ArgumentError("WeightTable: mu outside table");
    if (mu <= static_cast<std::uint64_t>(linear_cut))
        return static_cast<int>(mu) - 1;
    const double span = std::log2(static_cast<double>(mu)) -
                        std::log2(static_cast<double>(linear_cut));
    const int b = linear_cut + static_cast<int>(span * bins_per_octave);
    return std::min(b, n_bins() - 1);
}

nlohmann::json WeightTable::to_json() const {
    return {{"mu_max", mu_max},
            {"linear_cut", linear_cut},
            {"bins_per_octave", bins_per_octave},
            {"w", w}};
}

WeightTable WeightTable::from_json(const nlohmann::json& j) {
    WeightTable t = flat(j.at("mu_max").get<std::uint64_t>(),
                         j.at("linear_cut").get<int>(),
                         j.at("bins_per_octave").get<int>());
    const auto w = j.at("w").get<std::vector<double>>();
    if (w.size() != t.w.size())
        throw ArgumentError("WeightTable::from_json: weight vector size mismatch");
    t.w = w;
    return t;
}

MucaState make_muca_state(Problem start, WeightTable weights, bool learning,
                          double mod_factor) {
    MucaState st;
    st.dos = enumerate_dos(start);
    st.mu = st.dos[0];
    if (st.mu == 0) throw ArgumentError("make_muca_state: start problem unsatisfiable");
    if (st.mu > weights.mu_max)
        throw ArgumentError("make_muca_state: start mu above table range");
    st.current = std::move(start);
    st.weights = std::move(weights);
    st.learning = learning;
    st.mod_factor = mod_factor;
    st.histogram.assign(st.weights.n_bins(), 0);
    st.attained.assign(st.weights.n_bins(), 0);
    st.attained[st.weights.bin_of(st.mu)] = 1;
    return st;
}

StepResult muca_step(MucaState& st, Rng& rng) {
    st.counters.steps++;
    StepResult res;

    std::uniform_int_distribution<std::size_t> pick(0, st.current.clauses.size() - 1);
    const std::size_t j = pick(rng);
    const Clause old = st.current.clauses[j];
    const Clause fresh = random_clause(st.current.n, rng, st.distinct_vars);

    st.current.clauses[j] = fresh;
    const DOSVector dos_new = enumerate_dos(st.current);
    const std::uint64_t mu_new = dos_new[0];
    res.proposed_mu = mu_new;

    bool accept = false;
    if (mu_new == 0) {
        st.counters.rejected_unsat++;
    } else if (mu_new > st.weights.mu_max) {
        st.counters.rejected_domain++;
    } else {
        const double dw = st.weights.weight(mu_new) - st.weights.weight(st.mu);
        if (dw >= 0) {
            accept = true;
        } else {
            std::uniform_real_distribution<double> u01(0.0, 1.0);
            accept = u01(rng) < std::exp(dw);
        }
        if (!accept) st.counters.rejected_weight++;
    }

    if (accept) {
        st.dos = dos_new;
        st.mu = mu_new;
        st.counters.accepted++;
    } else {
        st.current.clauses[j] = old;
    }
    res.accepted = accept;

    // Visit bookkeeping always applies to the post-decision state.
    const int b = st.weights.bin_of(st.mu);
    st.histogram[b]++;
    st.attained[b] = 1;
    if (st.learning) st.weights.w[b] -= st.mod_factor;
    return res;
}

namespace {

Problem random_satisfiable_problem(int n, int m, bool distinct, Rng& rng) {
    for (int tries = 0; tries < 100000; ++tries) {
        Problem p = random_problem(n, m, rng, distinct);
        if (implication_satisfiable(p).satisfiable) return p;
    }
    throw SolverError("random_satisfiable_problem: no satisfiable draw in budget");
}

// Flatness over attained bins: every attained bin visited, and
// max/min visit count <= ratio.
bool is_flat(const std::vector<std::uint64_t>& hist,
             const std::vector<std::uint8_t>& attained, double ratio) {
    std::uint64_t lo = 0, hi = 0;
    bool any = false;
    for (std::size_t b = 0; b < hist.size(); ++b) {
        if (!attained[b]) continue;
        if (hist[b] == 0) return false;
        if (!any) {
            lo = hi = hist[b];
            any = true;
        } else {
            lo = std::min(lo, hist[b]);
            hi = std::max(hi, hist[b]);
        }
    }
    return any && static_cast<double>(hi) <= ratio * static_cast<double>(lo);
}

}  // namespace

LearnResult learn_weights(int n, const LearnSchedule& sched, Rng& rng) {
    if (n < 2) throw ArgumentError("learn_weights: n < 2");
    const int m = sched.m_clauses > 0 ? sched.m_clauses : n + 1;

    // Pilot with uniform weights over an unbounded range: accept every
    // satisfiable proposal and record the mu values the chain reaches.
    Problem cur = random_satisfiable_problem(n, m, sched.distinct_vars, rng);
    std::uint64_t mu = enumerate_dos(cur)[0];
    std::uint64_t mu_seen = mu;
    std::uniform_int_distribution<int> pick(0, m - 1);
    for (std::uint64_t s = 0; s < sched.pilot_steps; ++s) {
        const int j = pick(rng);
        const Clause old = cur.clauses[j];
        cur.clauses[j] = random_clause(n, rng, sched.distinct_vars);
        const std::uint64_t mu_new = enumerate_dos(cur)[0];
        if (mu_new == 0) {
            cur.clauses[j] = old;
        } else {
            mu = mu_new;
            mu_seen = std::max(mu_seen, mu);
        }
    }

    WeightTable table =
        WeightTable::flat(mu_seen, sched.linear_cut, sched.bins_per_octave);
    MucaState st = make_muca_state(std::move(cur), std::move(table), true, sched.f0);

    const std::uint64_t check =
        sched.check_interval > 0
            ? sched.check_interval
            : std::max<std::uint64_t>(2000, 50ull * st.weights.n_bins());

    LearnResult out;
    std::uint64_t steps = 0;
    int passes = 0;
    std::vector<std::uint64_t> pass_lengths;
    std::uint64_t pass_start = 0;
    while (st.mod_factor >= sched.f_floor) {
        for (std::uint64_t s = 0; s < check; ++s) {
            muca_step(st, rng);
            ++steps;
        }
        if (steps > sched.max_total_steps)
            throw WeightLearnError("learn_weights: step budget exhausted",
                                   st.weights);
        if (is_flat(st.histogram, st.attained, sched.flatness_ratio)) {
            passes++;
            pass_lengths.push_back(steps - pass_start);
            pass_start = steps;
            st.mod_factor *= 0.5;
            std::fill(st.histogram.begin(), st.histogram.end(), 0);
        }
    }

    // Anchor W(mu = 1) = 0; only differences matter.
    const double w1 = st.weights.weight(1);
    for (double& w : st.weights.w) w -= w1;

    out.weights = std::move(st.weights);
    out.steps = steps;
    out.passes = passes;
    out.diagnostics = {{"n", n},
                       {"m", m},
                       {"mu_max", out.weights.mu_max},
                       {"bins", out.weights.n_bins()},
                       {"passes", passes},
                       {"steps", steps},
                       {"pass_lengths", pass_lengths},
                       {"final_mod_factor", st.mod_factor},
                       {"version", kVersion}};
    return out;
}

HardEnsemble harvest(int n, std::size_t count, const WeightTable& weights,
                     const HarvestOptions& opts, Rng& rng) {
    if (count == 0) throw ArgumentError("harvest: count = 0");
    const int m = opts.m_clauses > 0 ? opts.m_clauses : n + 1;
    const std::uint64_t spacing =
        opts.spacing > 0 ? opts.spacing : 10ull * static_cast<std::uint64_t>(m);
    const std::uint64_t nb = weights.n_bins();
    const std::uint64_t max_steps =
        opts.max_steps > 0
            ? opts.max_steps
            : count * (20ull * spacing + 50ull * nb * nb) + 1'000'000ull;

    Problem start = random_satisfiable_problem(n, m, opts.distinct_vars, rng);
    // The random start can sit above the learned table's range; pull it
    // inside by accepting only in-range proposals first.
    MucaState st = [&] {
        for (int tries = 0;; ++tries) {
            const std::uint64_t mu0 = enumerate_dos(start)[0];
            if (mu0 >= 1 && mu0 <= weights.mu_max)
                return make_muca_state(std::move(start), weights, false, 0.0);
            if (tries > 100000)
                throw SolverError("harvest: cannot reach the weight table's mu range");
            std::uniform_int_distribution<int> pick(0, m - 1);
            const int j = pick(rng);
            const Clause old = start.clauses[j];
            start.clauses[j] = random_clause(n, rng, opts.distinct_vars);
            const std::uint64_t mu_new = enumerate_dos(start)[0];
            if (mu_new == 0 || mu_new > mu0) start.clauses[j] = old;
        }
    }();
    st.distinct_vars = opts.distinct_vars;

    HardEnsemble ens;
    ens.n = n;
    ens.m = m;
    ens.spacing = spacing;

    std::uint64_t accepted_since = 0;
    std::uint64_t steps = 0;
    while (ens.instances.size() < count) {
        if (steps >= max_steps) {
            ens.provenance = {{"complete", false}, {"steps", steps}};
            throw PartialEnsembleError(
                "harvest: step budget exhausted with " +
                    std::to_string(ens.instances.size()) + "/" +
                    std::to_string(count) + " instances",
                std::move(ens));
        }
        const StepResult r = muca_step(st, rng);
        ++steps;
        if (r.accepted) ++accepted_since;
        if (st.mu == 1 && accepted_since >= spacing) {
            ens.instances.push_back({st.current, st.dos});
            accepted_since = 0;
        }
    }

    ens.provenance = {{"complete", true},
                      {"steps", steps},
                      {"accepted", st.counters.accepted},
                      {"rejected_unsat", st.counters.rejected_unsat},
                      {"rejected_domain", st.counters.rejected_domain},
                      {"rejected_weight", st.counters.rejected_weight},
                      {"spacing", spacing},
                      {"m", m},
                      {"version", kVersion}};
    return ens;
}

}  // namespace qa2sat
