#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qa2sat/rng.hpp"

#include <json.hpp>

namespace qa2sat {

// One 2-clause over spin variables.  Variables are 0-based indices, signs
// are +1 (plain literal) or -1 (negated).  a == b is legal and gives the
// degenerate one-variable clauses (x OR x), (x OR ~x).
struct Clause {
    int a = 0;
    int b = 0;
    std::int8_t sa = 1;
    std::int8_t sb = 1;

    bool operator==(const Clause&) const = default;
};

// Spin assignment, one entry per variable, values +1 or -1.
// s = +1 means the boolean variable is true.
using SpinConfig = std::vector<std::int8_t>;

struct Problem {
    int n = 0;
    std::vector<Clause> clauses;

    bool operator==(const Problem&) const = default;
};

// Energy of a single clause: 1 if violated, 0 if satisfied.  A clause is
// violated exactly when both signed spins sa*s_a and sb*s_b are -1.
inline int clause_energy(const Clause& c, const SpinConfig& s) {
    return (c.sa * s[c.a] == -1 && c.sb * s[c.b] == -1) ? 1 : 0;
}

// Number of violated clauses.
int problem_energy(const Problem& p, const SpinConfig& s);

// For each variable, the indices of the clauses that touch it.  A clause
// with a == b appears once in that variable's list.
struct VarClauses {
    std::vector<std::vector<int>> by_var;
};

VarClauses make_var_clauses(const Problem& p);

// Uniform random clause.  With distinct_vars the two variables are drawn
// without replacement (requires n >= 2); otherwise fully independently.
Clause random_clause(int n, Rng& rng, bool distinct_vars = true);

// m independent uniform clauses over n variables.
Problem random_problem(int n, int m, Rng& rng, bool distinct_vars = true);

SpinConfig random_config(int n, Rng& rng);

// JSON wire format: {"n": N, "clauses": [[var_a, sign_a, var_b, sign_b], ...]}
// with 1-based variables and signs +-1.  from_json validates ranges.
nlohmann::json to_json(const Problem& p);
Problem problem_from_json(const nlohmann::json& j);

// Stable content hash of the canonical serialization, as 16 hex digits.
// Used as the instance id in the results store.
std::string instance_id(const Problem& p);

}  // namespace qa2sat
