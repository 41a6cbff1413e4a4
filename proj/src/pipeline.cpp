#include "qa2sat/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>

#include "qa2sat/dos.hpp"
#include "qa2sat/ensemble.hpp"
#include "qa2sat/errors.hpp"
#include "qa2sat/parallel.hpp"
#include "qa2sat/stats.hpp"
#include "qa2sat/store.hpp"
#include "qa2sat/version.hpp"

namespace qa2sat {

namespace fs = std::filesystem;

nlohmann::json RunConfig::to_json() const {
    return {
        {"seed", seed},
        {"out", out},
        {"workers", workers},
        {"n_values", n_values},
        {"count", count},
        {"spacing", spacing},
        {"distinct_vars", distinct_vars},
        {"scan",
         {{"coarse_spacing", scan.coarse_spacing},
          {"refine_factor", scan.refine_factor},
          {"critical_r", scan.critical_r},
          {"min_points_critical", scan.min_points_critical},
          {"max_passes", scan.max_passes},
          {"max_new_per_pass", scan.max_new_per_pass},
          {"tol", scan.tol}}},
        {"lz",
         {{"critical_r", lz.critical_r},
          {"sigma", lz.sigma},
          {"min_points", lz.min_points},
          {"stability_rel", lz.stability_rel}}},
        {"spectrum_limit", spectrum_limit},
        {"spectrum_nmax", spectrum_nmax},
        {"sa",
         {{"t0", sa.t0},
          {"ratio", sa.ratio},
          {"sweeps", sa.sweeps},
          {"trajectories", sa.trajectories}}},
        {"report_nmin", report_nmin},
    };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.workers = j.value("workers", c.workers);
    c.n_values = j.value("n_values", c.n_values);
    c.count = j.value("count", c.count);
    c.spacing = j.value("spacing", c.spacing);
    c.distinct_vars = j.value("distinct_vars", c.distinct_vars);
    if (j.contains("scan")) {
        const auto& s = j.at("scan");
        c.scan.coarse_spacing = s.value("coarse_spacing", c.scan.coarse_spacing);
        c.scan.refine_factor = s.value("refine_factor", c.scan.refine_factor);
        c.scan.critical_r = s.value("critical_r", c.scan.critical_r);
        c.scan.min_points_critical =
            s.value("min_points_critical", c.scan.min_points_critical);
        c.scan.max_passes = s.value("max_passes", c.scan.max_passes);
        c.scan.max_new_per_pass =
            s.value("max_new_per_pass", c.scan.max_new_per_pass);
        c.scan.tol = s.value("tol", c.scan.tol);
    }
    if (j.contains("lz")) {
        const auto& s = j.at("lz");
        c.lz.critical_r = s.value("critical_r", c.lz.critical_r);
        c.lz.sigma = s.value("sigma", c.lz.sigma);
        c.lz.min_points = s.value("min_points", c.lz.min_points);
        c.lz.stability_rel = s.value("stability_rel", c.lz.stability_rel);
    }
    c.spectrum_limit = j.value("spectrum_limit", c.spectrum_limit);
    c.spectrum_nmax = j.value("spectrum_nmax", c.spectrum_nmax);
    if (j.contains("sa")) {
        const auto& s = j.at("sa");
        c.sa.t0 = s.value("t0", c.sa.t0);
        c.sa.ratio = s.value("ratio", c.sa.ratio);
        c.sa.sweeps = s.value("sweeps", c.sa.sweeps);
        c.sa.trajectories = s.value("trajectories", c.sa.trajectories);
    }
    c.report_nmin = j.value("report_nmin", c.report_nmin);
    return c;
}

namespace {

std::string n_tag(int n) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "N%02d", n);
    return std::string(buf);
}

fs::path ensemble_dir(const RunConfig& cfg, int n) {
    return fs::path(cfg.out) / "ensembles" / n_tag(n);
}
fs::path spectra_dir(const RunConfig& cfg, int n) {
    return fs::path(cfg.out) / "spectra" / n_tag(n);
}
fs::path sa_dir(const RunConfig& cfg, int n) {
    return fs::path(cfg.out) / "sa" / n_tag(n);
}
fs::path report_dir(const RunConfig& cfg) {
    return fs::path(cfg.out) / "report";
}

std::uint64_t effective_spacing(const RunConfig& cfg, int m) {
    return cfg.spacing > 0 ? cfg.spacing : 10ull * static_cast<std::uint64_t>(m);
}

// A stage directory remembers the config it was produced with; running
// again with a different one is refused instead of silently mixing data.
void check_stage_config(const fs::path& dir, const nlohmann::json& cfgj) {
    const fs::path p = dir / "config.json";
    const std::string h = json_hash(cfgj);
    if (fs::exists(p)) {
        const auto prev = read_json_file(p);
        if (prev.value("hash", "") != h)
            throw ArgumentError("stage config changed for " + dir.string() +
                                "; use a fresh --out or matching options");
        return;
    }
    nlohmann::json rec = {{"hash", h}, {"config", cfgj}, {"version", kVersion}};
    write_json_atomic(p, rec);
}

struct EnsembleData {
    int n = 0, m = 0;
    std::vector<std::string> ids;  // chain order, repeats possible
    std::map<std::string, HardInstance> instances;

    std::vector<std::string> unique_ids() const {
        std::vector<std::string> u;
        std::set<std::string> seen;
        for (const auto& id : ids)
            if (seen.insert(id).second) u.push_back(id);
        return u;
    }
};

std::optional<EnsembleData> load_ensemble(const RunConfig& cfg, int n) {
    const fs::path mpath = ensemble_dir(cfg, n) / "manifest.json";
    if (!fs::exists(mpath)) return std::nullopt;
    const auto mj = read_json_file(mpath);
    if (!mj.value("complete", false)) return std::nullopt;
    EnsembleData d;
    d.n = mj.at("n").get<int>();
    d.m = mj.at("m").get<int>();
    d.ids = mj.at("ids").get<std::vector<std::string>>();
    for (const auto& id : d.unique_ids()) {
        const auto ij = read_json_file(ensemble_dir(cfg, n) / "instances" /
                                       (id + ".json"));
        HardInstance hi;
        hi.problem = problem_from_json(ij.at("problem"));
        hi.dos = ij.at("dos").get<DOSVector>();
        d.instances.emplace(id, std::move(hi));
    }
    return d;
}

void write_ensemble(const RunConfig& cfg, int n, const HardEnsemble& ens,
                    const LearnResult& lr, const nlohmann::json& stage_cfg,
                    bool complete) {
    const fs::path dir = ensemble_dir(cfg, n);
    fs::create_directories(dir / "instances");
    std::vector<std::string> ids;
    ids.reserve(ens.instances.size());
    for (const auto& hi : ens.instances) {
        const std::string id = instance_id(hi.problem);
        ids.push_back(id);
        const fs::path ip = dir / "instances" / (id + ".json");
        if (!fs::exists(ip)) {
            nlohmann::json rec = {{"id", id},
                                  {"n", ens.n},
                                  {"problem", to_json(hi.problem)},
                                  {"dos", hi.dos}};
            write_json_atomic(ip, rec);
        }
    }
    nlohmann::json manifest = {{"n", ens.n},
                               {"m", ens.m},
                               {"spacing", ens.spacing},
                               {"count", ids.size()},
                               {"ids", ids},
                               {"complete", complete},
                               {"config", stage_cfg},
                               {"config_hash", json_hash(stage_cfg)},
                               {"weights", lr.weights.to_json()},
                               {"learn", lr.diagnostics},
                               {"harvest", ens.provenance},
                               {"version", kVersion}};
    write_json_atomic(dir / "manifest.json", manifest);
}

}  // namespace

int cmd_generate(const RunConfig& cfg, std::ostream& log) {
    for (int n : cfg.n_values) {
        if (n < 2) throw ArgumentError("generate: n must be at least 2");
        const int m = n + 1;
        const std::uint64_t spacing = effective_spacing(cfg, m);
        const nlohmann::json stage_cfg = {{"n", n},
                                          {"m", m},
                                          {"count", cfg.count},
                                          {"spacing", spacing},
                                          {"distinct_vars", cfg.distinct_vars},
                                          {"seed", cfg.seed}};
        const fs::path mpath = ensemble_dir(cfg, n) / "manifest.json";
        if (fs::exists(mpath)) {
            const auto mj = read_json_file(mpath);
            if (mj.value("config_hash", "") != json_hash(stage_cfg))
                throw ArgumentError("generate: " + mpath.string() +
                                    " was produced with a different config");
            if (mj.value("complete", false)) {
                log << n_tag(n) << " already complete, skipping\n";
                continue;
            }
            log << n_tag(n) << " incomplete store found, regenerating\n";
        }

        Rng lrng = make_rng(cfg.seed, "learn-weights", n);
        LearnSchedule ls;
        ls.m_clauses = m;
        ls.distinct_vars = cfg.distinct_vars;
        const LearnResult lr = learn_weights(n, ls, lrng);
        log << n_tag(n) << " weights: bins=" << lr.weights.n_bins()
            << " mu_max=" << lr.weights.mu_max << " passes=" << lr.passes
            << " steps=" << lr.steps << "\n";

        Rng hrng = make_rng(cfg.seed, "harvest", n);
        HarvestOptions ho;
        ho.m_clauses = m;
        ho.spacing = cfg.spacing;
        ho.distinct_vars = cfg.distinct_vars;
        try {
            const HardEnsemble ens = harvest(
                n, static_cast<std::size_t>(cfg.count), lr.weights, ho, hrng);
            write_ensemble(cfg, n, ens, lr, stage_cfg, true);
            log << n_tag(n) << " harvested " << ens.instances.size()
                << " instances in " << ens.provenance.value("steps", 0ull)
                << " steps\n";
        } catch (const PartialEnsembleError& e) {
            write_ensemble(cfg, n, e.partial, lr, stage_cfg, false);
            log << n_tag(n) << " PARTIAL: " << e.what()
                << "; rerun generate with the same config to retry\n";
            return 3;
        }
    }
    return 0;
}

int cmd_spectrum(const RunConfig& cfg, std::ostream& log) {
    std::mutex log_mu;
    for (int n : cfg.n_values) {
        if (cfg.spectrum_nmax > 0 && n > cfg.spectrum_nmax) {
            log << n_tag(n) << " above spectrum_nmax, skipping\n";
            continue;
        }
        const auto ens = load_ensemble(cfg, n);
        if (!ens)
            throw DependencyError("spectrum: no complete ensemble for " +
                                  n_tag(n) + "; run generate first");
        const fs::path dir = spectra_dir(cfg, n);
        fs::create_directories(dir);
        nlohmann::json stage_cfg = cfg.to_json();
        stage_cfg = {{"scan", stage_cfg.at("scan")},
                     {"lz", stage_cfg.at("lz")},
                     {"spectrum_limit", cfg.spectrum_limit}};
        check_stage_config(dir, stage_cfg);

        std::vector<std::string> ids = ens->unique_ids();
        if (cfg.spectrum_limit > 0 &&
            ids.size() > static_cast<std::size_t>(cfg.spectrum_limit))
            ids.resize(cfg.spectrum_limit);
        std::vector<std::string> todo;
        for (const auto& id : ids)
            if (!fs::exists(dir / (id + ".json")) &&
                !fs::exists(dir / (id + ".failed.json")))
                todo.push_back(id);

        std::size_t failures = 0;
        parallel_for(todo.size(), cfg.workers, [&](std::size_t i) {
            const std::string& id = todo[i];
            const Problem& prob = ens->instances.at(id).problem;
            try {
                const GapProfile prof = scan_gap(prob, cfg.scan);
                const LZFit fit = fit_lz(prof, cfg.lz);
                const QAMetrics qa = qa_metrics(fit);
                nlohmann::json rec = {{"instance_id", id},
                                      {"n", n},
                                      {"lambda", prof.lambda},
                                      {"e0", prof.e0},
                                      {"e1", prof.e1},
                                      {"gap_min", fit.gap_min},
                                      {"gap_min_err", fit.gap_min_err},
                                      {"lambda_c", fit.lambda_c},
                                      {"lambda_c_err", fit.lambda_c_err},
                                      {"slope", fit.slope},
                                      {"slope_err", fit.slope_err},
                                      {"chi2_dof", fit.chi2_dof},
                                      {"halfwin_drift", fit.halfwin_drift},
                                      {"window", {fit.window[0], fit.window[1]}},
                                      {"n_fit_points", fit.n_points},
                                      {"solver_tol", prof.solver_tol},
                                      {"xi_gap", qa.xi_gap},
                                      {"tau_qa", qa.tau_qa},
                                      {"xi_lz", qa.xi_lz},
                                      {"version", kVersion}};
                write_json_atomic(dir / (id + ".json"), rec);
                std::lock_guard<std::mutex> lk(log_mu);
                log << n_tag(n) << " " << id << " gap_min=" << fit.gap_min
                    << " xi_gap=" << qa.xi_gap << " points=" << prof.lambda.size()
                    << "\n";
            } catch (const Error& e) {
                nlohmann::json rec = {{"instance_id", id},
                                      {"n", n},
                                      {"failed", true},
                                      {"error", e.what()},
                                      {"version", kVersion}};
                write_json_atomic(dir / (id + ".failed.json"), rec);
                std::lock_guard<std::mutex> lk(log_mu);
                ++failures;
                log << n_tag(n) << " " << id << " FAILED: " << e.what() << "\n";
            }
        });

        std::size_t done = 0, failed = 0;
        for (const auto& id : ids) {
            if (fs::exists(dir / (id + ".json"))) ++done;
            if (fs::exists(dir / (id + ".failed.json"))) ++failed;
        }
        log << n_tag(n) << " spectra: " << done << " ok, " << failed
            << " failed, of " << ids.size() << "\n";
        if (done == 0 && !ids.empty())
            throw SolverError("spectrum: every instance failed for " + n_tag(n));
    }
    return 0;
}

int cmd_sa(const RunConfig& cfg, std::ostream& log) {
    std::mutex log_mu;
    for (int n : cfg.n_values) {
        const auto ens = load_ensemble(cfg, n);
        if (!ens)
            throw DependencyError("sa: no complete ensemble for " + n_tag(n) +
                                  "; run generate first");
        const fs::path dir = sa_dir(cfg, n);
        fs::create_directories(dir);
        const nlohmann::json stage_cfg = {{"t0", cfg.sa.t0},
                                          {"ratio", cfg.sa.ratio},
                                          {"sweeps", cfg.sa.sweeps},
                                          {"trajectories", cfg.sa.trajectories},
                                          {"seed", cfg.seed}};
        check_stage_config(dir, stage_cfg);

        const std::vector<std::string> ids = ens->unique_ids();
        std::vector<std::string> todo;
        for (const auto& id : ids)
            if (!fs::exists(dir / (id + ".json"))) todo.push_back(id);

        parallel_for(todo.size(), cfg.workers, [&](std::size_t i) {
            const std::string& id = todo[i];
            const Problem& prob = ens->instances.at(id).problem;
            Rng rng = make_rng(cfg.seed, "sa-instance", n, hash_str(id));
            const SAMetrics m = sa_success(prob, cfg.sa, rng, 1);
            nlohmann::json rec = {{"instance_id", id},
                                  {"n", n},
                                  {"p_success", m.p_success},
                                  {"std_err", m.std_err},
                                  {"tau_sa", m.tau_sa},
                                  {"trajectories", m.trajectories},
                                  {"seed", cfg.seed},
                                  {"version", kVersion}};
            write_json_atomic(dir / (id + ".json"), rec);
            std::lock_guard<std::mutex> lk(log_mu);
            log << n_tag(n) << " " << id << " p=" << m.p_success
                << " tau_sa=" << m.tau_sa << "\n";
        });
        log << n_tag(n) << " sa: " << ids.size() << " instances done\n";
    }
    return 0;
}

namespace {

struct StageData {
    std::map<int, EnsembleData> ens;
    std::map<int, std::map<std::string, nlohmann::json>> spectra;  // ok records
    std::map<int, std::map<std::string, nlohmann::json>> sa;
};

std::map<std::string, nlohmann::json> load_records(const fs::path& dir) {
    std::map<std::string, nlohmann::json> recs;
    if (!fs::exists(dir)) return recs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        if (name == "config.json" || name.ends_with(".failed.json") ||
            !name.ends_with(".json"))
            continue;
        auto j = read_json_file(e.path());
        recs.emplace(j.at("instance_id").get<std::string>(), std::move(j));
    }
    return recs;
}

std::vector<double> column(const std::map<std::string, nlohmann::json>& recs,
                           const char* key) {
    std::vector<double> v;
    v.reserve(recs.size());
    for (const auto& [id, j] : recs) v.push_back(j.at(key).get<double>());
    return v;
}

// Rate fit of per-n summary values (already positive) with given errors;
// returns nothing if fewer than 3 sizes qualify.
std::optional<RateFit> rate_of(const std::map<int, double>& val,
                               const std::map<int, double>& err, int nmin) {
    std::vector<double> ns, ys, es;
    for (const auto& [n, y] : val) {
        if (n < nmin) continue;
        ns.push_back(n);
        ys.push_back(y);
        es.push_back(err.at(n));
    }
    if (ns.size() < 3) return std::nullopt;
    return fit_rate(ns, ys, es);
}

// Each growth-rate observable has its own smallest trustworthy size.
// Degeneracy medians are clean from n = 10 up; annealing runtimes are
// compressed below n = 12 where typical per-run success is near 1 (the
// success clamp saturates half the instances at n = 8); gap scales carry
// strong transients below n = 14.
constexpr int kNminDos = 10;
constexpr int kNminSa = 12;
constexpr int kNminGap = 14;

// Transients below the observable's floor are excluded from the
// straight-line fit; stores that do not reach 3 sizes above the floor
// fall back to the configured minimum so small runs still report a
// rate. Returns the n_min used.
std::optional<RateFit> rate_floored(const std::map<int, double>& val,
                                    const std::map<int, double>& err,
                                    int cfg_nmin, int floor, int& used) {
    used = std::max(cfg_nmin, floor);
    if (auto f = rate_of(val, err, used)) return f;
    used = cfg_nmin;
    return rate_of(val, err, used);
}

}  // namespace

int cmd_report(const RunConfig& cfg, std::ostream& log) {
    const fs::path rdir = report_dir(cfg);
    fs::create_directories(rdir);

    StageData data;
    for (int n : cfg.n_values) {
        if (auto e = load_ensemble(cfg, n)) data.ens.emplace(n, std::move(*e));
        auto sp = load_records(spectra_dir(cfg, n));
        if (!sp.empty()) data.spectra.emplace(n, std::move(sp));
        auto sa = load_records(sa_dir(cfg, n));
        if (!sa.empty()) data.sa.emplace(n, std::move(sa));
    }
    if (data.ens.empty())
        throw DependencyError("report: no complete ensembles found under " +
                              cfg.out + "; run generate first");

    std::vector<std::string> refused;
    nlohmann::json summary;
    summary["version"] = kVersion;
    summary["config"] = cfg.to_json();
    const int nmin = cfg.report_nmin;

    // Degeneracy-of-first-excited-level statistics and their growth rates.
    {
        std::vector<std::vector<double>> rows;
        std::map<int, std::array<double, 9>> dec;
        std::map<int, std::array<double, 9>> dec_err;
        for (const auto& [n, e] : data.ens) {
            std::vector<double> ln_om1;
            for (const auto& id : e.ids) {
                const auto& dos = e.instances.at(id).dos;
                const double om1 = dos.size() > 1 ? static_cast<double>(dos[1]) : 0.0;
                if (om1 > 0) ln_om1.push_back(std::log(om1));
            }
            if (ln_om1.size() < 10) continue;
            dec[n] = deciles(ln_om1);
            for (int d = 0; d < 9; ++d)
                dec_err[n][d] = bootstrap_se_quantile(
                    ln_om1, (d + 1) / 10.0, 200, mix64(cfg.seed ^ (n * 16 + d)));
            std::vector<double> row{static_cast<double>(n),
                                    static_cast<double>(ln_om1.size())};
            for (int d = 0; d < 9; ++d) row.push_back(dec[n][d]);
            rows.push_back(row);
        }
        write_text_atomic(
            rdir / "dos_deciles.tsv",
            tsv_table({"n", "count", "d1", "d2", "d3", "d4", "d5", "d6", "d7",
                       "d8", "d9"},
                      rows));

        nlohmann::json rates = nlohmann::json::array();
        for (int d = 0; d < 9; ++d) {
            std::map<int, double> v, err;
            for (const auto& [n, arr] : dec) {
                v[n] = std::exp(arr[d]);
                err[n] = dec_err[n][d] * v[n];
            }
            int used = nmin;
            if (auto f = rate_floored(v, err, nmin, kNminDos, used)) {
                rates.push_back({{"decile", d + 1},
                                 {"rate", f->rate},
                                 {"rate_err", f->rate_err},
                                 {"chi2_dof", f->chi2_dof},
                                 {"n_points", f->n_points},
                                 {"n_min", used}});
                if (d == 4) {
                    summary["r_dos"] = {{"rate", f->rate},
                                        {"rate_err", f->rate_err},
                                        {"chi2_dof", f->chi2_dof},
                                        {"n_min", used}};
                }
            }
        }
        summary["dos_decile_rates"] = rates;
    }

    // Annealing runtime statistics.
    if (!data.sa.empty()) {
        std::vector<std::vector<double>> rows;
        std::map<int, std::array<double, 9>> dec, dec_err;
        for (const auto& [n, recs] : data.sa) {
            std::vector<double> ln_tau;
            for (const auto& [id, j] : recs)
                ln_tau.push_back(std::log(j.at("tau_sa").get<double>()));
            if (ln_tau.size() < 10) continue;
            dec[n] = deciles(ln_tau);
            for (int d = 0; d < 9; ++d)
                dec_err[n][d] = bootstrap_se_quantile(
                    ln_tau, (d + 1) / 10.0, 200,
                    mix64(cfg.seed ^ (n * 32 + d + 1)));
            std::vector<double> row{static_cast<double>(n),
                                    static_cast<double>(ln_tau.size())};
            for (int d = 0; d < 9; ++d) row.push_back(dec[n][d]);
            rows.push_back(row);
        }
        write_text_atomic(
            rdir / "sa_deciles.tsv",
            tsv_table({"n", "count", "d1", "d2", "d3", "d4", "d5", "d6", "d7",
                       "d8", "d9"},
                      rows));
        nlohmann::json rates = nlohmann::json::array();
        for (int d = 0; d < 9; ++d) {
            std::map<int, double> v, err;
            for (const auto& [n, arr] : dec) {
                v[n] = std::exp(arr[d]);
                err[n] = dec_err[n][d] * v[n];
            }
            int used = nmin;
            if (auto f = rate_floored(v, err, nmin, kNminSa, used)) {
                rates.push_back({{"decile", d + 1},
                                 {"rate", f->rate},
                                 {"rate_err", f->rate_err},
                                 {"chi2_dof", f->chi2_dof},
                                 {"n_min", used}});
                if (d == 4)
                    summary["r_sa"] = {{"rate", f->rate},
                                       {"rate_err", f->rate_err},
                                       {"chi2_dof", f->chi2_dof},
                                       {"n_min", used}};
            }
        }
        summary["sa_decile_rates"] = rates;

        // Runtime against first-level degeneracy, instance by instance at
        // the largest size with both stages (a pooled fit across sizes
        // would measure the size scaling, not the per-instance relation).
        const int ntop = std::prev(data.sa.end())->first;
        std::vector<double> lx, ly;
        if (const auto it = data.ens.find(ntop); it != data.ens.end()) {
            for (const auto& [id, j] : data.sa.at(ntop)) {
                const auto& dos = it->second.instances.at(id).dos;
                if (dos.size() < 2 || dos[1] == 0) continue;
                lx.push_back(std::log(static_cast<double>(dos[1])));
                ly.push_back(std::log(j.at("tau_sa").get<double>()));
            }
        }
        if (lx.size() >= 3) {
            std::vector<std::vector<double>> srows;
            for (std::size_t i = 0; i < lx.size(); ++i)
                srows.push_back({lx[i], ly[i]});
            write_text_atomic(rdir / "sa_vs_dos.tsv",
                              tsv_table({"ln_omega1", "ln_tau_sa"}, srows));
            // Unweighted log-log line: per-instance scaling exponent.
            std::vector<double> expy(ly.size());
            for (std::size_t i = 0; i < ly.size(); ++i) expy[i] = std::exp(ly[i]);
            try {
                const RateFit line = fit_rate(lx, expy, {});
                summary["sa_vs_dos_exponent"] = {{"alpha", line.rate},
                                                 {"alpha_err", line.rate_err},
                                                 {"n", ntop}};
            } catch (const Error& e) {
                log << "runtime exponent skipped: " << e.what() << "\n";
            }
        }
    } else {
        refused.push_back("sa_deciles: needs the sa stage");
    }

    // Spectrum statistics: per-size extreme-value fits and growth rates.
    if (!data.spectra.empty()) {
        std::vector<std::vector<double>> wrows;
        std::map<int, double> med_gap, med_gap_err, med_lz, med_lz_err;
        for (const auto& [n, recs] : data.spectra) {
            const std::vector<double> xi_gap = column(recs, "xi_gap");
            const std::vector<double> xi_lz = column(recs, "xi_lz");
            if (xi_gap.size() < 20) continue;
            for (auto [vals, which] :
                 {std::pair{&xi_gap, 0}, std::pair{&xi_lz, 1}}) {
                const Histogram h = histogram_normalized(*vals, 12);
                try {
                    const PdfFit f = fit_pdf(h, PdfFamily::weibull);
                    wrows.push_back({static_cast<double>(n),
                                     static_cast<double>(which),
                                     static_cast<double>(vals->size()), f.k,
                                     f.k_err, f.x0, f.x0_err, f.chi2_dof});
                } catch (const Error& e) {
                    log << "weibull fit failed for " << n_tag(n)
                        << (which ? " xi_lz: " : " xi_gap: ") << e.what() << "\n";
                }
            }
            med_gap[n] = median(xi_gap);
            med_gap_err[n] = bootstrap_se_quantile(xi_gap, 0.5, 200,
                                                   mix64(cfg.seed ^ (n * 64)));
            med_lz[n] = median(xi_lz);
            med_lz_err[n] = bootstrap_se_quantile(xi_lz, 0.5, 200,
                                                  mix64(cfg.seed ^ (n * 64 + 1)));
        }
        write_text_atomic(rdir / "spectrum_weibull.tsv",
                          tsv_table({"n", "is_xi_lz", "count", "k", "k_err",
                                     "x0_norm", "x0_err", "chi2_dof"},
                                    wrows));

        int used = nmin;
        if (auto f = rate_floored(med_gap, med_gap_err, nmin, kNminGap, used))
            summary["r_gap"] = {{"rate", f->rate},
                                {"rate_err", f->rate_err},
                                {"chi2_dof", f->chi2_dof},
                                {"n_min", used}};
        if (auto f = rate_floored(med_lz, med_lz_err, nmin, kNminGap, used)) {
            summary["r_lz"] = {{"rate", f->rate},
                               {"rate_err", f->rate_err},
                               {"chi2_dof", f->chi2_dof},
                               {"n_min", used}};
            summary["r_qa"] = {{"rate", 2.0 * f->rate},
                               {"rate_err", 2.0 * f->rate_err}};
        }

        // Per-size decile tables of both length scales.
        std::vector<std::vector<double>> grow, lrows;
        for (const auto& [n, recs] : data.spectra) {
            const std::vector<double> xi_gap = column(recs, "xi_gap");
            const std::vector<double> xi_lz = column(recs, "xi_lz");
            if (xi_gap.size() < 10) continue;
            std::vector<double> lg(xi_gap.size()), ll(xi_lz.size());
            for (std::size_t i = 0; i < xi_gap.size(); ++i)
                lg[i] = std::log(xi_gap[i]);
            for (std::size_t i = 0; i < xi_lz.size(); ++i)
                ll[i] = std::log(xi_lz[i]);
            const auto dg = deciles(lg);
            const auto dl = deciles(ll);
            std::vector<double> row{static_cast<double>(n),
                                    static_cast<double>(lg.size())};
            for (double d : dg) row.push_back(d);
            grow.push_back(row);
            row = {static_cast<double>(n), static_cast<double>(ll.size())};
            for (double d : dl) row.push_back(d);
            lrows.push_back(row);
        }
        const std::vector<std::string> dech{"n",  "count", "d1", "d2", "d3",
                                            "d4", "d5",    "d6", "d7", "d8",
                                            "d9"};
        write_text_atomic(rdir / "gap_deciles.tsv", tsv_table(dech, grow));
        write_text_atomic(rdir / "lz_deciles.tsv", tsv_table(dech, lrows));

        // Largest size with spectra: instance-level joins and the runtime
        // versus gap-length curve.
        const int nmax = data.spectra.rbegin()->first;
        const auto& recs = data.spectra.at(nmax);
        if (data.ens.count(nmax)) {
            std::vector<std::vector<double>> rows;
            for (const auto& [id, j] : recs) {
                const auto& dos = data.ens.at(nmax).instances.at(id).dos;
                if (dos.size() < 2) continue;
                rows.push_back({static_cast<double>(dos[1]),
                                j.at("xi_gap").get<double>(),
                                j.at("xi_lz").get<double>()});
            }
            write_text_atomic(rdir / "gap_vs_dos.tsv",
                              tsv_table({"omega1", "xi_gap", "xi_lz"}, rows));
        }
        {
            const std::vector<double> xi = column(recs, "xi_gap");
            const std::vector<double> tau = column(recs, "tau_qa");
            std::vector<std::vector<double>> rows;
            for (std::size_t i = 0; i < xi.size(); ++i)
                rows.push_back({std::log(xi[i]), std::log(tau[i])});
            write_text_atomic(rdir / "tau_vs_xi.tsv",
                              tsv_table({"ln_xi_gap", "ln_tau_qa"}, rows));
            try {
                const CubicLogFit cf = log_cubic_fit(xi, tau);
                std::vector<std::vector<double>> crow;
                for (int i = 0; i <= 40; ++i) {
                    const double lx =
                        cf.min_lnx + (cf.max_lnx - cf.min_lnx) * i / 40.0;
                    crow.push_back({lx, cf.value_at(lx), cf.slope_at(lx)});
                }
                write_text_atomic(
                    rdir / "tau_vs_xi_fit.tsv",
                    tsv_table({"ln_xi_gap", "ln_tau_fit", "slope"}, crow));
                summary["tau_vs_xi_cubic"] = {
                    {"center", cf.center},
                    {"coeff", {cf.c[0], cf.c[1], cf.c[2], cf.c[3]}},
                    {"n", nmax}};
            } catch (const Error& e) {
                log << "runtime-curve fit skipped: " << e.what() << "\n";
            }
        }

        // Folded success densities and plain histograms per size.
        for (const auto& [n, recs2] : data.spectra) {
            const std::vector<double> xi_lz = column(recs2, "xi_lz");
            const std::vector<double> xi_gap = column(recs2, "xi_gap");
            if (xi_lz.size() < 20) continue;
            const Histogram hl = histogram_normalized(xi_lz, 12);
            const Histogram hg = histogram_normalized(xi_gap, 12);
            std::vector<std::vector<double>> hrow;
            for (std::size_t b = 0; b < hl.count.size(); ++b)
                hrow.push_back({0.5 * (hl.edges[b] + hl.edges[b + 1]),
                                hl.count[b], hl.err[b], hg.count[b],
                                hg.err[b]});
            write_text_atomic(
                rdir / ("hist_" + n_tag(n) + ".tsv"),
                tsv_table({"center", "xi_lz_count", "xi_lz_err",
                           "xi_gap_count", "xi_gap_err"},
                          hrow));
            try {
                const PdfFit f = fit_pdf(hl, PdfFamily::weibull);
                std::vector<double> norm(xi_lz.size());
                for (std::size_t i = 0; i < xi_lz.size(); ++i)
                    norm[i] = xi_lz[i] / hl.norm;
                const double r = tune_r(norm, TuneMode::xi);
                const auto grid = make_p_grid(401, 1e-4);
                const SuccessPdf sp = fold_success_pdf(f, r, grid);
                std::vector<std::vector<double>> frow;
                for (std::size_t i = 0; i < sp.p.size(); ++i)
                    frow.push_back({sp.p[i], sp.density[i]});
                write_text_atomic(rdir / ("fold_" + n_tag(n) + ".tsv"),
                                  tsv_table({"p", "density"}, frow));
            } catch (const Error& e) {
                log << "fold skipped for " << n_tag(n) << ": " << e.what()
                    << "\n";
            }
        }
    } else {
        refused.push_back("spectrum_weibull: needs the spectrum stage");
        refused.push_back("gap_deciles: needs the spectrum stage");
    }

    // Joint success-probability grids need both dynamic stages.
    {
        bool wrote_grid = false;
        for (const auto& [n, sarecs] : data.sa) {
            const auto it = data.spectra.find(n);
            if (it == data.spectra.end()) continue;
            std::vector<double> psa, xi;
            for (const auto& [id, j] : sarecs) {
                const auto jt = it->second.find(id);
                if (jt == it->second.end()) continue;
                psa.push_back(j.at("p_success").get<double>());
                xi.push_back(jt->second.at("xi_lz").get<double>());
            }
            if (psa.size() < 20) continue;
            try {
                const double r_sa = tune_r(psa, TuneMode::success);
                const double r_qa = tune_r(xi, TuneMode::xi);
                std::vector<double> a(psa.size()), b(xi.size());
                for (std::size_t i = 0; i < psa.size(); ++i) {
                    a[i] = -std::expm1(r_sa * std::log1p(-psa[i]));
                    b[i] = lz_success(xi[i], r_qa);
                }
                const Grid2D g = double_histogram(a, b, 12);
                std::vector<std::vector<double>> rows;
                for (int i = 0; i < g.bins; ++i)
                    for (int j2 = 0; j2 < g.bins; ++j2)
                        rows.push_back({(i + 0.5) / g.bins, (j2 + 0.5) / g.bins,
                                        g.at(i, j2)});
                write_text_atomic(
                    rdir / ("success_grid_" + n_tag(n) + ".tsv"),
                    tsv_table({"p_sa", "p_qa", "weight"}, rows));
                wrote_grid = true;
            } catch (const Error& e) {
                log << "success grid skipped for " << n_tag(n) << ": "
                    << e.what() << "\n";
            }
        }
        if (!wrote_grid && (data.sa.empty() || data.spectra.empty()))
            refused.push_back("success_grid: needs both sa and spectrum stages");
    }

    summary["refused"] = refused;
    write_json_atomic(rdir / "report.json", summary);
    log << "report written to " << rdir.string();
    if (!refused.empty()) {
        log << " (" << refused.size() << " artifacts refused)";
        for (const auto& r : refused) log << "\n  missing dependency: " << r;
        log << "\n";
        return 2;
    }
    log << "\n";
    return 0;
}

int exit_code_for_current_exception() {
    try {
        throw;
    } catch (const DependencyError&) {
        return 2;
    } catch (const SolverError&) {
        return 3;
    } catch (const FitError&) {
        return 3;
    } catch (const DomainError&) {
        return 3;
    } catch (const Error&) {
        return 1;
    } catch (const std::exception&) {
        return 1;
    }
}

}  // namespace qa2sat
