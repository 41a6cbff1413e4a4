#include "qa2sat/two_sat.hpp"

#include <cstdint>

namespace qa2sat {

namespace {

// Literal node id: 2v for the plain literal, 2v+1 for the negation.
inline int node_of(int var, int sign) { return 2 * var + (sign < 0 ? 1 : 0); }

}  // namespace

SatResult implication_satisfiable(const Problem& p) {
    const int nodes = 2 * p.n;
    // Edges in CSR form; clause (l OR m) gives ~l -> m and ~m -> l.
    std::vector<int> head(nodes + 1, 0), dst(2 * p.clauses.size());
    for (const Clause& c : p.clauses) {
        head[node_of(c.a, -c.sa) + 1]++;
        head[node_of(c.b, -c.sb) + 1]++;
    }
    for (int i = 0; i < nodes; ++i) head[i + 1] += head[i];
    {
        std::vector<int> fill = head;
        for (const Clause& c : p.clauses) {
            dst[fill[node_of(c.a, -c.sa)]++] = node_of(c.b, c.sb);
            dst[fill[node_of(c.b, -c.sb)]++] = node_of(c.a, c.sa);
        }
    }

    // Iterative Tarjan.  Component ids come out in reverse topological
    // order of the condensation (sinks first).
    constexpr int kUnvisited = -1;
    std::vector<int> index(nodes, kUnvisited), low(nodes, 0), comp(nodes, kUnvisited);
    std::vector<std::uint8_t> onstack(nodes, 0);
    std::vector<int> stk;
    stk.reserve(nodes);
    int next_index = 0, next_comp = 0;

    struct Frame {
        int node;
        int edge;
    };
    std::vector<Frame> call;
    call.reserve(nodes);

    for (int root = 0; root < nodes; ++root) {
        if (index[root] != kUnvisited) continue;
        call.push_back({root, head[root]});
        index[root] = low[root] = next_index++;
        stk.push_back(root);
        onstack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge < head[f.node + 1]) {
                const int w = dst[f.edge++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = next_index++;
                    stk.push_back(w);
                    onstack[w] = 1;
                    call.push_back({w, head[w]});
                } else if (onstack[w] && index[w] < low[f.node]) {
                    low[f.node] = index[w];
                }
            } else {
                const int v = f.node;
                if (low[v] == index[v]) {
                    int w;
                    do {
                        w = stk.back();
                        stk.pop_back();
                        onstack[w] = 0;
                        comp[w] = next_comp;
                    } while (w != v);
                    next_comp++;
                }
                call.pop_back();
                if (!call.empty() && low[v] < low[call.back().node])
                    low[call.back().node] = low[v];
            }
        }
    }

    SatResult r;
    for (int v = 0; v < p.n; ++v)
        if (comp[2 * v] == comp[2 * v + 1]) return r;  // x and ~x entangled
    r.satisfiable = true;
    SpinConfig s(p.n);
    // Lower component id = later in topological order; take the literal
    // whose component comes later, i.e. the smaller id.
    for (int v = 0; v < p.n; ++v) s[v] = (comp[2 * v] < comp[2 * v + 1]) ? 1 : -1;
    r.witness = std::move(s);
    return r;
}

}  // namespace qa2sat
