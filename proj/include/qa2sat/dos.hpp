#pragma once

#include <cstdint>
#include <vector>

#include "qa2sat/problem.hpp"

namespace qa2sat {

// dos[e] = number of spin configurations with exactly e violated clauses,
// e = 0 .. m.  Sum over e is 2^n.
using DOSVector = std::vector<std::uint64_t>;

// Exact density of states by Gray-code enumeration: one spin flip per
// visited configuration, so the cost is O(2^n * avg clause degree).
// Refuses n above the cap (memory/time guard), default 24.
DOSVector enumerate_dos(const Problem& p, int n_cap = 24);

// Convenience: number of ground states and ground-state energy.
struct GroundInfo {
    std::uint64_t degeneracy = 0;
    int energy = 0;
};
GroundInfo ground_info(const DOSVector& dos);

}  // namespace qa2sat
