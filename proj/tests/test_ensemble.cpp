#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "oracles.hpp"
#include "qa2sat/ensemble.hpp"
#include "qa2sat/errors.hpp"
#include "qa2sat/problem.hpp"
#include "qa2sat/rng.hpp"

using namespace qa2sat;

namespace {

// Frequencies of mu over uniformly random satisfiable problems,
// the reference measure the reweighted chain is checked against.
std::map<std::uint64_t, double> direct_mu_freq(int n, int m, std::size_t count,
                                               Rng& rng) {
    std::map<std::uint64_t, std::uint64_t> hist;
    std::size_t kept = 0;
    while (kept < count) {
        const Problem p = random_problem(n, m, rng, true);
        const std::uint64_t mu = oracles::dos(p)[0];
        if (mu == 0) continue;
        hist[mu]++;
        ++kept;
    }
    std::map<std::uint64_t, double> freq;
    for (auto& [mu, c] : hist)
        freq[mu] = static_cast<double>(c) / static_cast<double>(count);
    return freq;
}

double total_variation(const std::map<std::uint64_t, double>& a,
                       const std::map<std::uint64_t, double>& b) {
    std::set<std::uint64_t> keys;
    for (auto& [k, v] : a) keys.insert(k);
    for (auto& [k, v] : b) keys.insert(k);
    double tv = 0.0;
    for (auto k : keys) {
        const double pa = a.count(k) ? a.at(k) : 0.0;
        const double pb = b.count(k) ? b.at(k) : 0.0;
        tv += std::abs(pa - pb);
    }
    return 0.5 * tv;
}

const LearnResult& learned_n6() {
    static const LearnResult r = [] {
        Rng rng = make_rng(31, "ensemble-learn", 6);
        return learn_weights(6, LearnSchedule{}, rng);
    }();
    return r;
}

}  // namespace

TEST_CASE("weight table uses exact integer bins below the cut") {
    const WeightTable t = WeightTable::flat(10);
    CHECK(t.n_bins() == 10);
    for (std::uint64_t mu = 1; mu <= 10; ++mu)
        CHECK(t.bin_of(mu) == static_cast<int>(mu) - 1);
}

TEST_CASE("weight table geometric bins are monotone and cover every bin") {
    const WeightTable t = WeightTable::flat(1000, 32, 4);
    std::set<int> hit;
    int prev = -1;
    for (std::uint64_t mu = 1; mu <= 1000; ++mu) {
        const int b = t.bin_of(mu);
        REQUIRE(b >= 0);
        REQUIRE(b < t.n_bins());
        CHECK(b >= prev);
        CHECK(b - prev <= 1);  // no bin skipped as mu sweeps upward
        prev = b;
        hit.insert(b);
    }
    CHECK(static_cast<int>(hit.size()) == t.n_bins());
    CHECK(t.bin_of(1000) == t.n_bins() - 1);
}

TEST_CASE("weight table rejects out-of-range mu and bad parameters") {
    const WeightTable t = WeightTable::flat(100);
    CHECK_THROWS_AS(t.bin_of(0), ArgumentError);
    CHECK_THROWS_AS(t.bin_of(101), ArgumentError);
    CHECK_THROWS_AS(WeightTable::flat(0), ArgumentError);
    CHECK_THROWS_AS(WeightTable::flat(10, 0), ArgumentError);
}

TEST_CASE("weight table json round trip") {
    WeightTable t = WeightTable::flat(500, 16, 8);
    Rng rng = make_rng(32, "ensemble");
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (double& w : t.w) w = u(rng);
    const WeightTable back = WeightTable::from_json(t.to_json());
    CHECK(back.mu_max == t.mu_max);
    CHECK(back.linear_cut == t.linear_cut);
    CHECK(back.bins_per_octave == t.bins_per_octave);
    CHECK(back.w == t.w);
}

TEST_CASE("state construction validates the starting problem") {
    const WeightTable t = WeightTable::flat(4);
    // Unsatisfiable start: contradictory units.
    Problem unsat{2, {{0, 0, 1, 1}, {0, 0, -1, -1}, {1, 1, 1, 1}}};
    CHECK_THROWS_AS(make_muca_state(unsat, t), ArgumentError);
    // mu above the table range: the free problem has mu = 4 > 2.
    Problem loose{2, {{0, 1, 1, 1}}};
    CHECK_THROWS_AS(make_muca_state(loose, WeightTable::flat(2)), ArgumentError);
}

TEST_CASE("flat-weight chain reproduces the uniform satisfiable ensemble") {
    const int n = 5, m = 6;
    Rng rng = make_rng(33, "ensemble");
    const auto ref = direct_mu_freq(n, m, 200000, rng);

    MucaState st = [&] {
        for (;;) {
            Problem p = random_problem(n, m, rng, true);
            if (oracles::dos(p)[0] > 0)
                return make_muca_state(std::move(p), WeightTable::flat(32));
        }
    }();
    std::map<std::uint64_t, std::uint64_t> hist;
    const std::size_t steps = 200000;
    for (std::size_t s = 0; s < steps; ++s) {
        muca_step(st, rng);
        hist[st.mu]++;
    }
    std::map<std::uint64_t, double> freq;
    for (auto& [mu, c] : hist)
        freq[mu] = static_cast<double>(c) / static_cast<double>(steps);
    CHECK(total_variation(ref, freq) < 0.02);

    const auto& c = st.counters;
    CHECK(c.steps == steps);
    CHECK(c.accepted + c.rejected_unsat + c.rejected_domain + c.rejected_weight ==
          c.steps);
    CHECK(c.rejected_weight == 0);  // flat weights never reject in-range moves
    CHECK(c.rejected_domain == 0);  // mu_max = 2^n covers everything
}

TEST_CASE("weighted chain reaches the reweighted stationary distribution") {
    const int n = 5, m = 6;
    Rng rng = make_rng(34, "ensemble");
    const auto base = direct_mu_freq(n, m, 200000, rng);

    // W(mu) = -ln mu biases the chain toward small mu; the stationary
    // frequencies must be base[mu] * exp(W) renormalized.
    WeightTable t = WeightTable::flat(32);
    for (std::uint64_t mu = 1; mu <= 32; ++mu)
        t.w[t.bin_of(mu)] = -std::log(static_cast<double>(mu));

    std::map<std::uint64_t, double> ref;
    double z = 0.0;
    for (auto& [mu, q] : base) {
        const double v = q * std::exp(t.weight(mu));
        ref[mu] = v;
        z += v;
    }
    for (auto& [mu, v] : ref) v /= z;

    MucaState st = [&] {
        for (;;) {
            Problem p = random_problem(n, m, rng, true);
            if (oracles::dos(p)[0] > 0) return make_muca_state(std::move(p), t);
        }
    }();
    std::map<std::uint64_t, std::uint64_t> hist;
    const std::size_t steps = 400000;
    for (std::size_t s = 0; s < steps; ++s) {
        muca_step(st, rng);
        hist[st.mu]++;
    }
    std::map<std::uint64_t, double> freq;
    for (auto& [mu, c] : hist)
        freq[mu] = static_cast<double>(c) / static_cast<double>(steps);
    CHECK(total_variation(ref, freq) < 0.02);
    CHECK(st.counters.rejected_weight > 0);
}

TEST_CASE("learning halves the modification factor down to the floor") {
    const LearnResult& res = learned_n6();
    // ln2 / 2^k drops below 1e-3 at k = 10, one halving per flat pass.
    CHECK(res.passes == 10);
    CHECK(res.weights.weight(1) == doctest::Approx(0.0));
    CHECK(res.weights.mu_max >= 16);  // pilot must explore well above mu = 1
    CHECK(res.diagnostics.at("passes").get<int>() == 10);
    CHECK(res.diagnostics.at("final_mod_factor").get<double>() < 1e-3);
}

TEST_CASE("learned weights flatten the visit histogram") {
    const LearnResult& res = learned_n6();
    Rng rng = make_rng(35, "ensemble-measure");
    MucaState st = [&] {
        for (;;) {
            Problem p = random_problem(6, 7, rng, true);
            const std::uint64_t mu = oracles::dos(p)[0];
            if (mu >= 1 && mu <= res.weights.mu_max)
                return make_muca_state(std::move(p), res.weights);
        }
    }();
    for (std::size_t s = 0; s < 300000; ++s) muca_step(st, rng);

    std::uint64_t lo = 0, hi = 0;
    bool any = false;
    for (int b = 0; b < st.weights.n_bins(); ++b) {
        if (!st.attained[b]) continue;
        if (!any) {
            lo = hi = st.histogram[b];
            any = true;
        } else {
            lo = std::min(lo, st.histogram[b]);
            hi = std::max(hi, st.histogram[b]);
        }
    }
    REQUIRE(any);
    CHECK(lo > 0);
    // Uniform weights would pile up at large mu by orders of magnitude;
    // the learned table must keep the spread to a small factor.
    CHECK(static_cast<double>(hi) / static_cast<double>(lo) < 12.0);
}

TEST_CASE("learning throws with the partial table when the budget is tiny") {
    LearnSchedule sched;
    sched.pilot_steps = 500;
    sched.max_total_steps = 100;
    Rng rng = make_rng(36, "ensemble");
    try {
        learn_weights(6, sched, rng);
        FAIL("expected WeightLearnError");
    } catch (const WeightLearnError& e) {
        CHECK(e.partial.n_bins() > 0);
    }
}

TEST_CASE("harvested instances all have exactly one satisfying assignment") {
    const LearnResult& res = learned_n6();
    Rng rng = make_rng(37, "ensemble-harvest");
    const HardEnsemble ens = harvest(6, 50, res.weights, HarvestOptions{}, rng);
    REQUIRE(ens.instances.size() == 50);
    CHECK(ens.n == 6);
    CHECK(ens.m == 7);
    CHECK(ens.spacing == 70);
    for (const auto& inst : ens.instances) {
        CHECK(inst.problem.n == 6);
        CHECK(inst.problem.clauses.size() == 7);
        const auto d = oracles::dos(inst.problem);
        CHECK(d[0] == 1);
        REQUIRE(inst.dos.size() == d.size());
        for (std::size_t e = 0; e < d.size(); ++e) CHECK(inst.dos[e] == d[e]);
    }
    CHECK(ens.provenance.at("complete").get<bool>());
}

TEST_CASE("harvest is deterministic in the seed") {
    const LearnResult& res = learned_n6();
    Rng a = make_rng(38, "ensemble-harvest");
    Rng b = make_rng(38, "ensemble-harvest");
    const HardEnsemble e1 = harvest(6, 10, res.weights, HarvestOptions{}, a);
    const HardEnsemble e2 = harvest(6, 10, res.weights, HarvestOptions{}, b);
    REQUIRE(e1.instances.size() == e2.instances.size());
    for (std::size_t i = 0; i < e1.instances.size(); ++i)
        CHECK(instance_id(e1.instances[i].problem) ==
              instance_id(e2.instances[i].problem));
}

TEST_CASE("consecutive harvested instances decorrelate") {
    const LearnResult& res = learned_n6();
    Rng rng = make_rng(39, "ensemble-harvest");
    const HardEnsemble ens = harvest(6, 200, res.weights, HarvestOptions{}, rng);
    std::vector<double> x;
    for (const auto& inst : ens.instances)
        x.push_back(std::log(static_cast<double>(inst.dos[1])));
    const std::size_t nn = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(nn);
    double var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < nn; ++i) {
        var += (x[i] - mean) * (x[i] - mean);
        if (i + 1 < nn) cov += (x[i] - mean) * (x[i + 1] - mean);
    }
    REQUIRE(var > 0.0);
    const double rho1 = cov / var;
    CHECK(std::abs(rho1) < 0.35);
}

TEST_CASE("harvest throws with the partial ensemble when steps run out") {
    const LearnResult& res = learned_n6();
    HarvestOptions opts;
    opts.max_steps = 40;
    Rng rng = make_rng(40, "ensemble-harvest");
    try {
        harvest(6, 1000, res.weights, opts, rng);
        FAIL("expected PartialEnsembleError");
    } catch (const PartialEnsembleError& e) {
        CHECK(e.partial.instances.size() < 1000);
        CHECK(!e.partial.provenance.at("complete").get<bool>());
    }
}

TEST_CASE("harvest rejects a zero count") {
    const WeightTable t = WeightTable::flat(4);
    Rng rng = make_rng(41, "ensemble");
    CHECK_THROWS_AS(harvest(4, 0, t, HarvestOptions{}, rng), ArgumentError);
}
