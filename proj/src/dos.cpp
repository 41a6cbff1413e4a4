#include "qa2sat/dos.hpp"

#include <bit>

#include "qa2sat/errors.hpp"
#include "mask_clause.hpp"

namespace qa2sat {

DOSVector enumerate_dos(const Problem& p, int n_cap) {
    if (p.n < 1) throw ArgumentError("enumerate_dos: n < 1");
    if (p.n > n_cap) throw CapacityError("enumerate_dos: n exceeds enumeration cap");

    const int m = static_cast<int>(p.clauses.size());
    std::vector<MaskClause> mc;
    mc.reserve(m);
    for (const Clause& c : p.clauses) mc.push_back(MaskClause::from(c));

    const VarClauses vc = make_var_clauses(p);

    DOSVector dos(m + 1, 0);
    std::uint32_t bits = 0;  // all spins +1
    int e = 0;
    for (const MaskClause& c : mc) e += c.violated(bits);
    dos[e]++;

    const std::uint64_t total = std::uint64_t{1} << p.n;
    for (std::uint64_t g = 1; g < total; ++g) {
        const int v = std::countr_zero(g);  // Gray code: flip lowest set bit of g
        const std::uint32_t flip = 1u << v;
        for (int j : vc.by_var[v]) e -= mc[j].violated(bits);
        bits ^= flip;
        for (int j : vc.by_var[v]) e += mc[j].violated(bits);
        dos[e]++;
    }
    return dos;
}

GroundInfo ground_info(const DOSVector& dos) {
    for (int e = 0; e < static_cast<int>(dos.size()); ++e)
        if (dos[e] > 0) return {dos[e], e};
    throw ArgumentError("ground_info: empty density of states");
}

}  // namespace qa2sat
