#pragma once

#include <optional>
#include <vector>

#include "qa2sat/problem.hpp"

namespace qa2sat {

// Satisfiability via the implication graph: nodes are literals, each
// clause (l OR m) contributes ~l -> m and ~m -> l.  The formula is
// satisfiable iff no variable shares a strongly connected component with
// its negation; a witness follows from the reverse topological order of
// the condensation.  Linear in n + m.
struct SatResult {
    bool satisfiable = false;
    std::optional<SpinConfig> witness;  // set iff satisfiable
};

SatResult implication_satisfiable(const Problem& p);

}  // namespace qa2sat
