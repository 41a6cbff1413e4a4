#include "qa2sat/problem.hpp"

#include <cstdio>

#include "qa2sat/errors.hpp"

namespace qa2sat {

int problem_energy(const Problem& p, const SpinConfig& s) {
    if (static_cast<int>(s.size()) != p.n)
        throw ArgumentError("problem_energy: config size != n");
    int e = 0;
    for (const Clause& c : p.clauses) e += clause_energy(c, s);
    return e;
}

VarClauses make_var_clauses(const Problem& p) {
    VarClauses vc;
    vc.by_var.resize(p.n);
    for (int j = 0; j < static_cast<int>(p.clauses.size()); ++j) {
        const Clause& c = p.clauses[j];
        vc.by_var[c.a].push_back(j);
        if (c.b != c.a) vc.by_var[c.b].push_back(j);
    }
    return vc;
}

Clause random_clause(int n, Rng& rng, bool distinct_vars) {
    if (n < 1 || (distinct_vars && n < 2))
        throw ArgumentError("random_clause: n too small");
    std::uniform_int_distribution<int> var(0, n - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    Clause c;
    c.a = var(rng);
    c.b = var(rng);
    if (distinct_vars)
        while (c.b == c.a) c.b = var(rng);
    c.sa = coin(rng) ? 1 : -1;
    c.sb = coin(rng) ? 1 : -1;
    return c;
}

Problem random_problem(int n, int m, Rng& rng, bool distinct_vars) {
    if (m < 0) throw ArgumentError("random_problem: m < 0");
    Problem p;
    p.n = n;
    p.clauses.reserve(m);
    for (int j = 0; j < m; ++j) p.clauses.push_back(random_clause(n, rng, distinct_vars));
    return p;
}

SpinConfig random_config(int n, Rng& rng) {
    std::uniform_int_distribution<int> coin(0, 1);
    SpinConfig s(n);
    for (int i = 0; i < n; ++i) s[i] = coin(rng) ? 1 : -1;
    return s;
}

nlohmann::json to_json(const Problem& p) {
    nlohmann::json j;
    j["n"] = p.n;
    auto arr = nlohmann::json::array();
    for (const Clause& c : p.clauses)
        arr.push_back({c.a + 1, static_cast<int>(c.sa), c.b + 1, static_cast<int>(c.sb)});
    j["clauses"] = std::move(arr);
    return j;
}

Problem problem_from_json(const nlohmann::json& j) {
    Problem p;
    p.n = j.at("n").get<int>();
    if (p.n < 1) throw ArgumentError("problem_from_json: n < 1");
    for (const auto& e : j.at("clauses")) {
        if (!e.is_array() || e.size() != 4)
            throw ArgumentError("problem_from_json: clause entry is not [var, sign, var, sign]");
        Clause c;
        int va = e[0].get<int>(), sa = e[1].get<int>();
        int vb = e[2].get<int>(), sb = e[3].get<int>();
        if (va < 1 || va > p.n || vb < 1 || vb > p.n)
            throw ArgumentError("problem_from_json: variable index out of range");
        if ((sa != 1 && sa != -1) || (sb != 1 && sb != -1))
            throw ArgumentError("problem_from_json: sign must be +-1");
        c.a = va - 1;
        c.b = vb - 1;
        c.sa = static_cast<std::int8_t>(sa);
        c.sb = static_cast<std::int8_t>(sb);
        p.clauses.push_back(c);
    }
    return p;
}

std::string instance_id(const Problem& p) {
    const std::string canon = to_json(p).dump();
    std::uint64_t h = hash_str(canon);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace qa2sat
