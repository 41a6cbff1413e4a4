#include "qa2sat/spectrum.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <gsl/gsl_matrix.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

#include "qa2sat/errors.hpp"
#include "mask_clause.hpp"

namespace qa2sat {

HqacOperator::HqacOperator(const Problem& p, int n_cap) {
    if (p.n < 1) throw ArgumentError("HqacOperator: n < 1");
    if (p.n > n_cap || p.n > 20)
        throw CapacityError("HqacOperator: n exceeds the dense-vector cap");
    if (p.clauses.size() > 0xffff)
        throw CapacityError("HqacOperator: too many clauses for the diagonal type");
    n_ = p.n;
    const std::size_t dim = std::size_t{1} << n_;
    diag_.assign(dim, 0);

    std::vector<MaskClause> mc;
    mc.reserve(p.clauses.size());
    for (const Clause& c : p.clauses) mc.push_back(MaskClause::from(c));
    const VarClauses vc = make_var_clauses(p);

    // Same Gray-code walk as the exact density of states: each step flips
    // one spin and touches only the clauses on that variable.
    std::uint32_t bits = 0;
    int e = 0;
    for (const MaskClause& c : mc) e += c.violated(bits);
    diag_[0] = static_cast<std::uint16_t>(e);
    for (std::size_t g = 1; g < dim; ++g) {
        const int v = std::countr_zero(g);
        for (int j : vc.by_var[v]) e -= mc[j].violated(bits);
        bits ^= 1u << v;
        for (int j : vc.by_var[v]) e += mc[j].violated(bits);
        diag_[bits] = static_cast<std::uint16_t>(e);
    }
}

void HqacOperator::apply(double lambda, std::span<const double> x,
                         std::span<double> y) const {
    const std::size_t dim = diag_.size();
    if (x.size() != dim || y.size() != dim)
        throw ArgumentError("HqacOperator::apply: vector size mismatch");
    if (x.data() == y.data())
        throw ArgumentError("HqacOperator::apply: aliasing input and output");

    for (std::size_t i = 0; i < dim; ++i) y[i] = lambda * diag_[i] * x[i];

    const double c = 1.0 - lambda;
    for (int b = 0; b < n_; ++b) {
        const std::size_t bit = std::size_t{1} << b;
        for (std::size_t base = 0; base < dim; base += 2 * bit) {
            for (std::size_t off = 0; off < bit; ++off) {
                const std::size_t i0 = base + off, i1 = i0 + bit;
                y[i0] += c * x[i1];
                y[i1] += c * x[i0];
            }
        }
    }
}

std::vector<double> apply_hqac(const Problem& p, double lambda,
                               std::span<const double> v) {
    HqacOperator op(p);
    std::vector<double> y(op.dim());
    op.apply(lambda, v, y);
    return y;
}

std::size_t GapProfile::min_index() const {
    if (gap.empty()) throw ArgumentError("GapProfile: empty profile");
    return static_cast<std::size_t>(
        std::min_element(gap.begin(), gap.end()) - gap.begin());
}

namespace {

struct CritWindow {
    std::size_t imin = 0;
    double lam_star = 0.0;
    double gap_star = 0.0;
    double slope_est = 0.0;  // 0 when no usable neighbor
    double width = 1.0;      // critical_r * gap / slope, capped at 1
};

// Invert the avoided-crossing form against the neighbors of the grid
// minimum: |d gap^2/d lambda| = 2 s^2 |lambda - c| gives
// s ~ sqrt(gap^2 - gap*^2) / |lambda - lambda*|.
CritWindow estimate_window(const std::vector<double>& lam,
                           const std::vector<double>& gap, double critical_r) {
    CritWindow w;
    w.imin = static_cast<std::size_t>(
        std::min_element(gap.begin(), gap.end()) - gap.begin());
    w.lam_star = lam[w.imin];
    w.gap_star = gap[w.imin];
    auto side = [&](std::size_t j) {
        const double dl = std::abs(lam[j] - w.lam_star);
        if (dl <= 0.0) return 0.0;
        const double d2 = gap[j] * gap[j] - w.gap_star * w.gap_star;
        return d2 > 0.0 ? std::sqrt(d2) / dl : 0.0;
    };
    if (w.imin > 0) w.slope_est = std::max(w.slope_est, side(w.imin - 1));
    if (w.imin + 1 < lam.size()) w.slope_est = std::max(w.slope_est, side(w.imin + 1));
    if (w.slope_est > 0.0 && w.gap_star > 0.0)
        w.width = std::min(1.0, critical_r * w.gap_star / w.slope_est);
    return w;
}

// Flag profiles with more than one significant dip: adjacent local minima
// separated by a barrier clearly above both.
bool has_multiple_minima(const std::vector<double>& gap, double prominence) {
    std::vector<std::size_t> mins;
    for (std::size_t i = 1; i + 1 < gap.size(); ++i)
        if (gap[i] < gap[i - 1] && gap[i] <= gap[i + 1]) mins.push_back(i);
    for (std::size_t k = 1; k < mins.size(); ++k) {
        const std::size_t a = mins[k - 1], b = mins[k];
        double barrier = 0.0;
        for (std::size_t i = a + 1; i < b; ++i) barrier = std::max(barrier, gap[i]);
        if (barrier - std::max(gap[a], gap[b]) > prominence) return true;
    }
    return false;
}

}  // namespace

GapProfile scan_gap(const GapFn& eval, const ScanPolicy& pol) {
    if (!(pol.coarse_spacing > 0.0 && pol.coarse_spacing <= 0.5))
        throw ArgumentError("scan_gap: coarse_spacing outside (0, 0.5]");
    if (pol.refine_factor < 2) throw ArgumentError("scan_gap: refine_factor < 2");
    if (pol.min_points_critical < 4)
        throw ArgumentError("scan_gap: min_points_critical < 4");

    GapProfile prof;
    prof.solver_tol = pol.tol;

    auto add_point = [&](double lam) {
        const auto it = std::lower_bound(prof.lambda.begin(), prof.lambda.end(), lam);
        const std::size_t pos = static_cast<std::size_t>(it - prof.lambda.begin());
        const auto [e0, e1] = eval(lam);
        prof.lambda.insert(prof.lambda.begin() + pos, lam);
        prof.e0.insert(prof.e0.begin() + pos, e0);
        prof.e1.insert(prof.e1.begin() + pos, e1);
        prof.gap.insert(prof.gap.begin() + pos, e1 - e0);
    };

    const int coarse = static_cast<int>(std::lround(1.0 / pol.coarse_spacing));
    for (int k = 0; k <= coarse; ++k)
        add_point(static_cast<double>(k) / coarse);

    for (int pass = 0;; ++pass) {
        const CritWindow w = estimate_window(prof.lambda, prof.gap, pol.critical_r);
        const double lo = std::max(0.0, w.lam_star - w.width / 2);
        const double hi = std::min(1.0, w.lam_star + w.width / 2);
        int inside = 0;
        for (double l : prof.lambda)
            if (l >= lo && l <= hi) ++inside;
        if (inside >= pol.min_points_critical) break;
        if (pass >= pol.max_passes)
            throw SolverError("scan_gap: refinement did not converge on the window");

        // Local spacing at the minimum, then subdivide.
        double h = 1.0;
        if (w.imin > 0) h = std::min(h, w.lam_star - prof.lambda[w.imin - 1]);
        if (w.imin + 1 < prof.lambda.size())
            h = std::min(h, prof.lambda[w.imin + 1] - w.lam_star);
        double h_new = h / pol.refine_factor;

        std::vector<double> cand;
        for (int shrink = 0; shrink < 6 && cand.empty(); ++shrink) {
            if (h_new < 1e-15)
                throw SolverError("scan_gap: window narrower than resolvable");
            const int kmax = static_cast<int>(
                std::ceil(std::max(w.width / 2, h) / h_new));
            for (int k = 1; k <= kmax && static_cast<int>(cand.size()) <
                                             pol.max_new_per_pass; ++k) {
                for (const double l : {w.lam_star - k * h_new, w.lam_star + k * h_new}) {
                    if (l <= 0.0 || l >= 1.0) continue;
                    const auto it =
                        std::lower_bound(prof.lambda.begin(), prof.lambda.end(), l);
                    bool dup = false;
                    if (it != prof.lambda.end() && *it - l < 0.45 * h_new) dup = true;
                    if (it != prof.lambda.begin() && l - *(it - 1) < 0.45 * h_new)
                        dup = true;
                    for (double c : cand)
                        if (std::abs(c - l) < 0.45 * h_new) dup = true;
                    if (!dup) cand.push_back(l);
                }
            }
            if (cand.empty()) h_new /= pol.refine_factor;
        }
        if (cand.empty())
            throw SolverError("scan_gap: cannot place further points in the window");
        std::sort(cand.begin(), cand.end());
        for (double l : cand) add_point(l);
    }

    const double floor = std::max(50.0 * pol.tol, 1e-9);
    if (has_multiple_minima(prof.gap, floor)) {
        prof.anomalous = true;
        prof.note = "multiple significant gap minima";
    }
    if (prof.gap[prof.min_index()] <= 0.0) {
        prof.anomalous = true;
        prof.note = prof.note.empty() ? "vanishing gap" : prof.note + "; vanishing gap";
    }
    return prof;
}

GapProfile scan_gap(const Problem& p, const ScanPolicy& pol) {
    HqacOperator op(p);
    LanczosOptions lopt;
    lopt.tol = pol.tol;

    // Warm starts: the scan is evaluated in ascending-lambda batches, so
    // the previous point's eigenvectors are good initial guesses.
    std::vector<double> warm0, warm1;
    bool has_warm = false;
    GapFn eval = [&](double lam) -> std::pair<double, double> {
        const LowestTwo lt =
            lowest_two(op, lam, lopt, has_warm ? &warm0 : nullptr,
                       has_warm ? &warm1 : nullptr);
        warm0 = lt.v0;
        warm1 = lt.v1;
        has_warm = true;
        return {lt.e0, lt.e1};
    };
    return scan_gap(eval, pol);
}

namespace {

struct LzData {
    const double* x;
    const double* y;
    std::size_t n;
    double sigma;
};

int lz_f(const gsl_vector* p, void* params, gsl_vector* f) {
    const auto* d = static_cast<const LzData*>(params);
    const double G = gsl_vector_get(p, 0);
    const double c = gsl_vector_get(p, 1);
    const double S = gsl_vector_get(p, 2);
    for (std::size_t i = 0; i < d->n; ++i) {
        const double u = (d->x[i] - c) * S;
        const double g = std::sqrt(G * G + u * u);
        gsl_vector_set(f, i, (g - d->y[i]) / d->sigma);
    }
    return GSL_SUCCESS;
}

int lz_df(const gsl_vector* p, void* params, gsl_matrix* J) {
    const auto* d = static_cast<const LzData*>(params);
    const double G = gsl_vector_get(p, 0);
    const double c = gsl_vector_get(p, 1);
    const double S = gsl_vector_get(p, 2);
    for (std::size_t i = 0; i < d->n; ++i) {
        const double dx = d->x[i] - c;
        const double u = dx * S;
        double g = std::sqrt(G * G + u * u);
        if (g < 1e-300) g = 1e-300;
        gsl_matrix_set(J, i, 0, G / g / d->sigma);
        gsl_matrix_set(J, i, 1, -S * S * dx / g / d->sigma);
        gsl_matrix_set(J, i, 2, S * dx * dx / g / d->sigma);
    }
    return GSL_SUCCESS;
}

struct LzSolved {
    double G, c, S;
    double eG, ec, eS;
    double chi2;
    std::size_t n;
};

LzSolved solve_lz(const std::vector<double>& xs, const std::vector<double>& ys,
                  double sigma, double G0, double c0, double S0) {
    LzData data{xs.data(), ys.data(), xs.size(), sigma};

    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = lz_f;
    fdf.df = lz_df;
    fdf.n = data.n;
    fdf.p = 3;
    fdf.params = &data;

    gsl_multifit_nlinear_parameters params =
        gsl_multifit_nlinear_default_parameters();
    gsl_multifit_nlinear_workspace* w = gsl_multifit_nlinear_alloc(
        gsl_multifit_nlinear_trust, &params, data.n, 3);
    if (!w) throw FitError("fit_lz: workspace allocation failed");

    double p0[3] = {G0, c0, S0};
    gsl_vector_view pv = gsl_vector_view_array(p0, 3);
    gsl_multifit_nlinear_init(&pv.vector, &fdf, w);

    int info = 0;
    const int status =
        gsl_multifit_nlinear_driver(400, 1e-14, 1e-14, 0.0, nullptr, nullptr,
                                    &info, w);

    LzSolved out{};
    out.n = data.n;
    out.G = std::abs(gsl_vector_get(w->x, 0));
    out.c = gsl_vector_get(w->x, 1);
    out.S = std::abs(gsl_vector_get(w->x, 2));

    double chi2 = 0.0;
    gsl_vector* r = gsl_multifit_nlinear_residual(w);
    for (std::size_t i = 0; i < data.n; ++i) {
        const double ri = gsl_vector_get(r, i);
        chi2 += ri * ri;
    }
    out.chi2 = chi2;

    gsl_matrix* covar = gsl_matrix_alloc(3, 3);
    gsl_multifit_nlinear_covar(gsl_multifit_nlinear_jac(w), 0.0, covar);
    const double dof = static_cast<double>(data.n) - 3.0;
    const double scale = (dof > 0 && chi2 > 0) ? chi2 / dof : 1.0;
    out.eG = std::sqrt(std::max(0.0, gsl_matrix_get(covar, 0, 0)) * scale);
    out.ec = std::sqrt(std::max(0.0, gsl_matrix_get(covar, 1, 1)) * scale);
    out.eS = std::sqrt(std::max(0.0, gsl_matrix_get(covar, 2, 2)) * scale);
    gsl_matrix_free(covar);
    gsl_multifit_nlinear_free(w);

    if (status != GSL_SUCCESS && status != GSL_EMAXITER)
        throw FitError("fit_lz: nonlinear solver failed");
    if (!std::isfinite(out.G) || !std::isfinite(out.c) || !std::isfinite(out.S))
        throw FitError("fit_lz: non-finite parameters");
    return out;
}

}  // namespace

LZFit fit_lz(const GapProfile& prof, const FitLzOptions& opt) {
    const std::size_t npts = prof.lambda.size();
    if (npts < static_cast<std::size_t>(opt.min_points))
        throw ArgumentError("fit_lz: profile has too few points");
    if (prof.anomalous)
        throw FitError("fit_lz: profile flagged anomalous: " + prof.note);

    const CritWindow w = estimate_window(prof.lambda, prof.gap, opt.critical_r);
    if (w.gap_star <= 0.0) throw FitError("fit_lz: non-positive minimum gap");
    const double lo = std::max(0.0, w.lam_star - w.width / 2);
    const double hi = std::min(1.0, w.lam_star + w.width / 2);

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < npts; ++i) {
        if (prof.lambda[i] < lo || prof.lambda[i] > hi) continue;
        if (prof.gap[i] <= 0.0)
            throw FitError("fit_lz: non-positive gap inside the window");
        xs.push_back(prof.lambda[i]);
        ys.push_back(prof.gap[i]);
    }
    if (xs.size() < static_cast<std::size_t>(opt.min_points))
        throw FitError("fit_lz: too few points inside the critical window");

    const double sigma =
        opt.sigma > 0 ? opt.sigma : 2.0 * std::max(prof.solver_tol, 1e-12);

    // Slope seed: symmetric secant from the window edges.
    double s0 = 0.0;
    int sides = 0;
    if (xs.front() < w.lam_star) {
        s0 += (ys.front() - w.gap_star) / (w.lam_star - xs.front());
        ++sides;
    }
    if (xs.back() > w.lam_star) {
        s0 += (ys.back() - w.gap_star) / (xs.back() - w.lam_star);
        ++sides;
    }
    s0 = sides > 0 ? s0 / sides : 1.0;
    if (!(s0 > 0.0)) s0 = w.slope_est > 0 ? w.slope_est : 1.0;

    const LzSolved full = solve_lz(xs, ys, sigma, w.gap_star, w.lam_star, s0);
    if (full.c < lo - w.width || full.c > hi + w.width)
        throw FitError("fit_lz: fitted center escaped the window");
    if (full.G <= 0.0 || full.S <= 0.0)
        throw FitError("fit_lz: degenerate fitted parameters");

    // Stability: refit on the half-width window around the fitted center;
    // the minimum gap must not move materially.
    std::vector<double> xh, yh;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(xs[i] - full.c) > w.width / 4) continue;
        xh.push_back(xs[i]);
        yh.push_back(ys[i]);
    }
    double drift = 0.0;
    if (xh.size() >= 5) {
        const LzSolved half = solve_lz(xh, yh, sigma, full.G, full.c, full.S);
        drift = std::abs(half.G - full.G) / full.G;
        if (drift > opt.stability_rel)
            throw FitError("fit_lz: gap_min unstable under window halving "
                           "(drift " +
                           std::to_string(drift) + ")");
    } else {
        throw FitError("fit_lz: too few points for the stability check");
    }

    LZFit fit;
    fit.halfwin_drift = drift;
    fit.gap_min = full.G;
    fit.lambda_c = full.c;
    fit.slope = full.S;
    fit.gap_min_err = full.eG;
    fit.lambda_c_err = full.ec;
    fit.slope_err = full.eS;
    const double dof = static_cast<double>(full.n) - 3.0;
    fit.chi2_dof = dof > 0 ? full.chi2 / dof : 0.0;
    fit.window = {lo, hi};
    fit.n_points = static_cast<int>(full.n);
    return fit;
}

QAMetrics qa_metrics(const LZFit& fit) {
    if (!(fit.gap_min > 0.0) || !(fit.slope > 0.0))
        throw DomainError("qa_metrics: needs positive gap_min and slope");
    QAMetrics m;
    m.xi_gap = 1.0 / fit.gap_min;
    m.tau_qa = fit.slope / (fit.gap_min * fit.gap_min);
    m.xi_lz = std::sqrt(m.tau_qa);
    return m;
}

}  // namespace qa2sat
