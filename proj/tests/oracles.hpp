#pragma once

// Independent reference implementations for the test suite.  Everything
// here is deliberately written the slow, obvious way, sharing no code
// with the library paths it checks.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qa2sat/problem.hpp"

namespace oracles {

// Boolean semantics, spelled out: a literal with sign e on variable v is
// true when (e = +1 and the variable is true) or (e = -1 and it is
// false); a clause contributes energy 1 when neither literal is true.
inline int energy(const qa2sat::Problem& p, const qa2sat::SpinConfig& s) {
    int e = 0;
    for (const auto& c : p.clauses) {
        const bool xa = s[c.a] == 1;
        const bool xb = s[c.b] == 1;
        const bool lit_a = c.sa == 1 ? xa : !xa;
        const bool lit_b = c.sb == 1 ? xb : !xb;
        if (!(lit_a || lit_b)) ++e;
    }
    return e;
}

inline qa2sat::SpinConfig config_from_index(int n, std::uint64_t idx) {
    qa2sat::SpinConfig s(n);
    for (int i = 0; i < n; ++i)
        s[i] = (idx >> i) & 1 ? -1 : 1;  // bit set means spin down
    return s;
}

inline std::vector<std::uint64_t> dos(const qa2sat::Problem& p) {
    std::vector<std::uint64_t> out(p.clauses.size() + 1, 0);
    const std::uint64_t total = std::uint64_t{1} << p.n;
    for (std::uint64_t idx = 0; idx < total; ++idx)
        out[energy(p, config_from_index(p.n, idx))]++;
    return out;
}

inline bool satisfiable(const qa2sat::Problem& p) { return dos(p)[0] > 0; }

// Dense interpolated Hamiltonian in the same basis convention as the
// library: bit i of the index set means spin i is -1; the transverse
// part has matrix element +1 between configurations one flip apart.
inline Eigen::MatrixXd dense_hqac(const qa2sat::Problem& p, double lambda) {
    const std::size_t dim = std::size_t{1} << p.n;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        h(i, i) = lambda * energy(p, config_from_index(p.n, i));
        for (int b = 0; b < p.n; ++b)
            h(i, i ^ (std::size_t{1} << b)) += 1.0 - lambda;
    }
    return h;
}

struct DensePair {
    double e0, e1;
};

inline DensePair dense_lowest_two(const qa2sat::Problem& p, double lambda) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hqac(p, lambda));
    return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

// Inverse-CDF samplers for the two extreme-value families.
inline double sample_weibull(double k, double x0, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = u(rng);
    while (v <= 0.0 || v >= 1.0) v = u(rng);
    return x0 * std::pow(-std::log1p(-v), 1.0 / k);
}

inline double sample_frechet(double k, double x0, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = u(rng);
    while (v <= 0.0 || v >= 1.0) v = u(rng);
    return x0 * std::pow(-std::log(v), -1.0 / k);
}

}  // namespace oracles
