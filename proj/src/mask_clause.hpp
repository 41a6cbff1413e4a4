#pragma once

#include <cstdint>

#include "qa2sat/problem.hpp"

namespace qa2sat {

// Clause test against a bit mask where bit i = 1 means s_i = -1.
// A literal with sign e on variable v is false iff bit_v == (e > 0).
struct MaskClause {
    std::uint32_t mask_a, val_a, mask_b, val_b;

    static MaskClause from(const Clause& c) {
        MaskClause m;
        m.mask_a = 1u << c.a;
        m.val_a = (c.sa > 0 ? 1u : 0u) << c.a;
        m.mask_b = 1u << c.b;
        m.val_b = (c.sb > 0 ? 1u : 0u) << c.b;
        return m;
    }

    int violated(std::uint32_t bits) const {
        return ((bits & mask_a) == val_a && (bits & mask_b) == val_b) ? 1 : 0;
    }
};

}  // namespace qa2sat
