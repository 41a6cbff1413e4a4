#include "qa2sat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <gsl/gsl_matrix.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

#include "qa2sat/errors.hpp"

namespace qa2sat {

double quantile(std::span<const double> v, double q) {
    if (v.empty()) throw ArgumentError("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile: q outside [0, 1]");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const double h = (static_cast<double>(s.size()) - 1.0) * q;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return s[lo] + frac * (s[hi] - s[lo]);
}

double median(std::span<const double> v) { return quantile(v, 0.5); }

std::array<double, 9> deciles(std::span<const double> v) {
    std::array<double, 9> d{};
    for (int i = 1; i <= 9; ++i) d[i - 1] = quantile(v, i / 10.0);
    return d;
}

Histogram histogram_range(std::span<const double> v, double lo, double hi,
                          int bins) {
    if (bins < 1) throw ArgumentError("histogram: bins < 1");
    if (!(hi > lo)) throw ArgumentError("histogram: empty range");
    Histogram h;
    h.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        h.edges[b] = lo + (hi - lo) * b / static_cast<double>(bins);
    h.count.assign(bins, 0.0);
    const double w = (hi - lo) / bins;
    for (double x : v) {
        if (x < lo || x > hi) continue;
        int b = static_cast<int>((x - lo) / w);
        b = std::clamp(b, 0, bins - 1);
        h.count[b] += 1.0;
    }
    h.err.resize(bins);
    for (int b = 0; b < bins; ++b) h.err[b] = std::sqrt(std::max(h.count[b], 1.0));
    return h;
}

Histogram histogram_normalized(std::span<const double> v, int bins) {
    if (v.empty()) throw ArgumentError("histogram_normalized: empty sample");
    const double med = median(v);
    if (!(med > 0.0))
        throw ArgumentError("histogram_normalized: non-positive median");
    std::vector<double> scaled(v.size());
    double mx = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        scaled[i] = v[i] / med;
        mx = std::max(mx, scaled[i]);
    }
    if (!(mx > 0.0))
        throw ArgumentError("histogram_normalized: all samples non-positive");
    Histogram h = histogram_range(scaled, 0.0, mx * (1.0 + 1e-9), bins);
    h.norm = med;
    return h;
}

namespace {

struct Wls {
    double a = 0.0, b = 0.0;       // y = a + b x
    double ea = 0.0, eb = 0.0;
    double chi2 = 0.0;
    int n = 0;
};

// Accumulates around the weighted mean of x: the textbook normal-equations
// determinant sw*swxx - swx^2 cancels to zero when one point carries nearly
// all the weight, while sum w (x - xbar)^2 stays exact.
Wls wls_line(std::span<const double> x, std::span<const double> y,
             std::span<const double> sigma) {
    double sw = 0, swx = 0, swy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / (sigma[i] * sigma[i]);
        sw += w;
        swx += w * x[i];
        swy += w * y[i];
    }
    if (!(sw > 0) || !std::isfinite(sw))
        throw FitError("fit_rate: weights are zero or non-finite");
    const double xb = swx / sw;
    const double yb = swy / sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = 1.0 / (sigma[i] * sigma[i]);
        sxx += w * (x[i] - xb) * (x[i] - xb);
        sxy += w * (x[i] - xb) * (y[i] - yb);
    }
    if (!(sxx > 0))
        throw FitError("fit_rate: singular design (all n equal?)");
    Wls f;
    f.n = static_cast<int>(x.size());
    f.b = sxy / sxx;
    f.a = yb - f.b * xb;
    f.eb = std::sqrt(1.0 / sxx);
    f.ea = std::sqrt(1.0 / sw + xb * xb / sxx);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = (y[i] - f.a - f.b * x[i]) / sigma[i];
        f.chi2 += r * r;
    }
    return f;
}

}  // namespace

RateFit fit_rate(std::span<const double> n, std::span<const double> y,
                 std::span<const double> yerr) {
    if (n.size() != y.size() || (!yerr.empty() && yerr.size() != y.size()))
        throw ArgumentError("fit_rate: size mismatch");
    if (n.size() < 3) throw ArgumentError("fit_rate: needs at least 3 points");

    std::vector<double> ln(y.size()), sig(y.size(), 1.0);
    bool weighted = !yerr.empty();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(y[i] > 0.0)) throw ArgumentError("fit_rate: y must be positive");
        ln[i] = std::log(y[i]);
        // A zero or underflowing error bar is degenerate information, not
        // an infinitely precise point; fall back to unit weights.
        if (weighted && !(yerr[i] > 0.0 &&
                          std::isfinite(y[i] / (yerr[i] * yerr[i]) * y[i])))
            weighted = false;
    }
    if (weighted)
        for (std::size_t i = 0; i < y.size(); ++i) sig[i] = yerr[i] / y[i];

    const Wls full = wls_line(n, ln, sig);

    // Jackknife over distinct n levels.
    std::vector<double> levels(n.begin(), n.end());
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double rate_err = full.eb;
    if (levels.size() >= 3) {
        std::vector<double> rates;
        for (double lvl : levels) {
            std::vector<double> xs, ys, ss;
            for (std::size_t i = 0; i < n.size(); ++i) {
                if (n[i] == lvl) continue;
                xs.push_back(n[i]);
                ys.push_back(ln[i]);
                ss.push_back(sig[i]);
            }
            rates.push_back(wls_line(xs, ys, ss).b);
        }
        const double mean =
            std::accumulate(rates.begin(), rates.end(), 0.0) / rates.size();
        double var = 0.0;
        for (double r : rates) var += (r - mean) * (r - mean);
        const double jn = static_cast<double>(rates.size());
        rate_err = std::sqrt(var * (jn - 1.0) / jn);
    }

    RateFit out;
    out.rate = full.b;
    out.rate_err = rate_err;
    out.intercept = full.a;
    out.intercept_err = full.ea;
    out.n_points = full.n;
    out.chi2_dof = full.n > 2 ? full.chi2 / (full.n - 2) : 0.0;
    return out;
}

double weibull_log_shape(double x, double k, double x0) {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    const double t = std::log(x / x0);
    return (k - 1.0) * t - std::exp(k * t);
}

double frechet_log_shape(double x, double k, double x0) {
    if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
    const double t = std::log(x / x0);
    return -(k + 1.0) * t - std::exp(-k * t);
}

namespace {

struct PdfData {
    const Histogram* h;
    PdfFamily family;
};

// CDF value and its derivatives with respect to ln k and ln x0 at one bin
// edge.  Fitting integrated bin contents instead of the density at bin
// centers keeps wide-bin histograms unbiased where the density is curved.
struct EdgeCdf {
    double F = 0.0, dlnk = 0.0, dlnx0 = 0.0;
};

EdgeCdf edge_cdf(PdfFamily family, double x, double k, double x0) {
    EdgeCdf e;
    if (!(x > 0.0)) return e;  // both families have support x > 0
    const double t = std::log(x / x0);
    if (family == PdfFamily::weibull) {
        if (k * t > 700.0) return {1.0, 0.0, 0.0};
        const double u = std::exp(k * t);  // (x/x0)^k
        const double eu = std::exp(-u);
        e.F = -std::expm1(-u);
        e.dlnk = k * t * u * eu;
        e.dlnx0 = -k * u * eu;
    } else {
        if (-k * t > 700.0) return e;
        const double s = std::exp(-k * t);  // (x0/x)^k
        const double es = std::exp(-s);
        e.F = es;
        e.dlnk = k * t * s * es;
        e.dlnx0 = -k * s * es;
    }
    return e;
}

// Parameters are theta = (ln k, ln x0, ln A); the model for the content
// of bin b is A * (F(edge_{b+1}) - F(edge_b)).
int pdf_f(const gsl_vector* th, void* params, gsl_vector* f) {
    const auto* d = static_cast<const PdfData*>(params);
    const double k = std::exp(gsl_vector_get(th, 0));
    const double x0 = std::exp(gsl_vector_get(th, 1));
    const double A = std::exp(gsl_vector_get(th, 2));
    EdgeCdf prev = edge_cdf(d->family, d->h->edges[0], k, x0);
    for (std::size_t b = 0; b < d->h->count.size(); ++b) {
        const EdgeCdf cur = edge_cdf(d->family, d->h->edges[b + 1], k, x0);
        const double m = A * (cur.F - prev.F);
        gsl_vector_set(f, b, (m - d->h->count[b]) / d->h->err[b]);
        prev = cur;
    }
    return GSL_SUCCESS;
}

int pdf_df(const gsl_vector* th, void* params, gsl_matrix* J) {
    const auto* d = static_cast<const PdfData*>(params);
    const double k = std::exp(gsl_vector_get(th, 0));
    const double x0 = std::exp(gsl_vector_get(th, 1));
    const double A = std::exp(gsl_vector_get(th, 2));
    EdgeCdf prev = edge_cdf(d->family, d->h->edges[0], k, x0);
    for (std::size_t b = 0; b < d->h->count.size(); ++b) {
        const EdgeCdf cur = edge_cdf(d->family, d->h->edges[b + 1], k, x0);
        gsl_matrix_set(J, b, 0, A * (cur.dlnk - prev.dlnk) / d->h->err[b]);
        gsl_matrix_set(J, b, 1, A * (cur.dlnx0 - prev.dlnx0) / d->h->err[b]);
        gsl_matrix_set(J, b, 2, A * (cur.F - prev.F) / d->h->err[b]);
        prev = cur;
    }
    return GSL_SUCCESS;
}

struct PdfSolved {
    double k, x0, A, ek, ex0, chi2;
    bool ok = false;
};

PdfSolved solve_pdf(PdfData& data, double k0, double x00, double A0) {
    gsl_multifit_nlinear_fdf fdf{};
    fdf.f = pdf_f;
    fdf.df = pdf_df;
    fdf.n = data.h->count.size();
    fdf.p = 3;
    fdf.params = &data;

    gsl_multifit_nlinear_parameters params =
        gsl_multifit_nlinear_default_parameters();
    gsl_multifit_nlinear_workspace* w = gsl_multifit_nlinear_alloc(
        gsl_multifit_nlinear_trust, &params, fdf.n, 3);
    if (!w) throw FitError("fit_pdf: workspace allocation failed");

    double th0[3] = {std::log(k0), std::log(x00), std::log(A0)};
    gsl_vector_view tv = gsl_vector_view_array(th0, 3);
    gsl_multifit_nlinear_init(&tv.vector, &fdf, w);

    int info = 0;
    const int status = gsl_multifit_nlinear_driver(500, 1e-12, 1e-12, 0.0,
                                                   nullptr, nullptr, &info, w);

    PdfSolved out{};
    out.k = std::exp(gsl_vector_get(w->x, 0));
    out.x0 = std::exp(gsl_vector_get(w->x, 1));
    out.A = std::exp(gsl_vector_get(w->x, 2));

    gsl_vector* r = gsl_multifit_nlinear_residual(w);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < fdf.n; ++i) {
        const double ri = gsl_vector_get(r, i);
        chi2 += ri * ri;
    }
    out.chi2 = chi2;

    gsl_matrix* covar = gsl_matrix_alloc(3, 3);
    gsl_multifit_nlinear_covar(gsl_multifit_nlinear_jac(w), 0.0, covar);
    const double dof = static_cast<double>(fdf.n) - 3.0;
    const double scale = (dof > 0 && chi2 > 0) ? std::max(chi2 / dof, 1.0) : 1.0;
    // Errors on ln-parameters convert to relative errors.
    out.ek = out.k * std::sqrt(std::max(0.0, gsl_matrix_get(covar, 0, 0)) * scale);
    out.ex0 = out.x0 * std::sqrt(std::max(0.0, gsl_matrix_get(covar, 1, 1)) * scale);
    gsl_matrix_free(covar);
    gsl_multifit_nlinear_free(w);

    out.ok = (status == GSL_SUCCESS || status == GSL_EMAXITER) &&
             std::isfinite(out.k) && std::isfinite(out.x0) &&
             std::isfinite(out.A) && std::isfinite(out.chi2);
    return out;
}

// Approximate quantile of the histogram by walking the cumulative counts.
double hist_quantile(const Histogram& h, double q) {
    const double total = std::accumulate(h.count.begin(), h.count.end(), 0.0);
    if (!(total > 0.0)) throw ArgumentError("fit_pdf: empty histogram");
    double target = q * total, cum = 0.0;
    for (std::size_t b = 0; b < h.count.size(); ++b) {
        if (cum + h.count[b] >= target) {
            const double frac = h.count[b] > 0 ? (target - cum) / h.count[b] : 0.5;
            return h.edges[b] + frac * (h.edges[b + 1] - h.edges[b]);
        }
        cum += h.count[b];
    }
    return h.edges.back();
}

}  // namespace

PdfFit fit_pdf(const Histogram& h, PdfFamily family) {
    const int bins = static_cast<int>(h.count.size());
    if (bins < 5) throw ArgumentError("fit_pdf: too few bins");

    PdfData data;
    data.h = &h;
    data.family = family;

    // Quantile-ratio guess for k: both families give
    // x(3/4) / x(1/4) = (ln 4 / ln(4/3))^(1/k) up to the inversion of the
    // tail direction, which only flips the ratio.
    const double q25 = hist_quantile(h, 0.25);
    const double q50 = hist_quantile(h, 0.50);
    const double q75 = hist_quantile(h, 0.75);
    double k0 = 1.5;
    if (q75 > q25 && q25 > 0.0)
        k0 = std::clamp(1.5726122 / std::log(q75 / q25), 0.2, 25.0);
    const double ln2e = std::pow(std::log(2.0), 1.0 / k0);
    double x00 = family == PdfFamily::weibull ? q50 / ln2e : q50 * ln2e;
    if (!(x00 > 0.0)) x00 = std::max(q50, 1e-6);

    auto amp_for = [&](double k, double x0) {
        const double span = edge_cdf(family, h.edges.back(), k, x0).F -
                            edge_cdf(family, h.edges.front(), k, x0).F;
        const double csum = std::accumulate(h.count.begin(), h.count.end(), 0.0);
        return span > 1e-12 ? std::max(csum / span, 1e-12) : csum;
    };

    PdfSolved best{};
    best.chi2 = std::numeric_limits<double>::infinity();
    for (double kg : {k0, 0.8, 1.2, 2.0, 3.0}) {
        const PdfSolved s = solve_pdf(data, kg, x00, amp_for(kg, x00));
        if (s.ok && s.chi2 < best.chi2) best = s;
    }
    if (!best.ok || !std::isfinite(best.chi2))
        throw FitError("fit_pdf: no converged fit from any start");

    PdfFit out;
    out.family = family;
    out.k = best.k;
    out.x0 = best.x0;
    out.amp = best.A;
    out.k_err = best.ek;
    out.x0_err = best.ex0;
    out.n_points = bins;
    out.chi2_dof = bins > 3 ? best.chi2 / (bins - 3) : 0.0;
    return out;
}

double lz_success(double xi, double r) {
    if (!(xi > 0.0)) throw ArgumentError("lz_success: xi must be positive");
    if (!(r > 0.0)) throw ArgumentError("lz_success: r must be positive");
    return -std::expm1(-r / (xi * xi));
}

double lz_xi_from_success(double p, double r) {
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("lz_xi_from_success: p must be strictly inside (0, 1)");
    if (!(r > 0.0)) throw ArgumentError("lz_xi_from_success: r must be positive");
    return std::sqrt(-r / std::log1p(-p));
}

std::vector<double> make_p_grid(int npts, double eps) {
    if (npts < 2 || !(eps > 0.0 && eps < 0.5))
        throw ArgumentError("make_p_grid: bad grid request");
    std::vector<double> g(npts);
    for (int i = 0; i < npts; ++i)
        g[i] = eps + (1.0 - 2.0 * eps) * i / static_cast<double>(npts - 1);
    return g;
}

SuccessPdf fold_success_pdf(const std::function<double(double)>& log_shape,
                            double r, std::span<const double> p_grid) {
    if (!(r > 0.0)) throw ArgumentError("fold_success_pdf: r must be positive");
    if (p_grid.size() < 2)
        throw ArgumentError("fold_success_pdf: grid too small");
    for (double p : p_grid)
        if (!(p > 0.0 && p < 1.0))
            throw ArgumentError("fold_success_pdf: grid must lie inside (0, 1)");

    SuccessPdf out;
    out.r_used = r;
    out.p.assign(p_grid.begin(), p_grid.end());
    const std::size_t n = out.p.size();
    std::vector<double> ld(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double p = out.p[i];
        const double xi = lz_xi_from_success(p, r);
        // |d xi / d p| = xi^3 / (2 r (1 - p))
        ld[i] = log_shape(xi) + 3.0 * std::log(xi) - std::log(2.0 * r) -
                std::log1p(-p);
        peak = std::max(peak, ld[i]);
    }
    if (!std::isfinite(peak))
        throw DomainError("fold_success_pdf: density vanishes on the whole grid");

    out.density.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.density[i] = std::exp(ld[i] - peak);
    double z = 0.0;
    for (std::size_t i = 1; i < n; ++i)
        z += 0.5 * (out.density[i] + out.density[i - 1]) *
             (out.p[i] - out.p[i - 1]);
    if (!(z > 0.0)) throw DomainError("fold_success_pdf: zero normalization");
    for (double& d : out.density) d /= z;
    return out;
}

SuccessPdf fold_success_pdf(const PdfFit& fit, double r,
                            std::span<const double> p_grid) {
    const PdfFit f = fit;
    return fold_success_pdf(
        [f](double x) {
            return f.family == PdfFamily::weibull
                       ? weibull_log_shape(x, f.k, f.x0)
                       : frechet_log_shape(x, f.k, f.x0);
        },
        r, p_grid);
}

double tune_r(std::span<const double> values, TuneMode mode, double target) {
    if (values.empty()) throw ArgumentError("tune_r: empty sample");
    if (!(target > 0.0 && target < 1.0))
        throw ArgumentError("tune_r: target outside (0, 1)");
    bool movable = false;
    for (double v : values) {
        if (mode == TuneMode::xi) {
            if (!(v > 0.0)) throw ArgumentError("tune_r: xi must be positive");
            movable = true;
        } else {
            if (!(v >= 0.0 && v <= 1.0))
                throw ArgumentError("tune_r: p outside [0, 1]");
            if (v > 0.0 && v < 1.0) movable = true;
        }
    }
    if (!movable)
        throw DomainError("tune_r: mean success is pinned by degenerate inputs");

    const auto mean_at = [&](double lr) {
        const double r = std::exp(lr);
        double s = 0.0;
        for (double v : values) {
            if (mode == TuneMode::xi)
                s += -std::expm1(-r / (v * v));
            else if (v <= 0.0)
                s += 0.0;
            else if (v >= 1.0)
                s += 1.0;
            else
                s += -std::expm1(r * std::log1p(-v));
        }
        return s / static_cast<double>(values.size());
    };

    double lo = -80.0, hi = 80.0;
    if (!(mean_at(lo) < target && mean_at(hi) > target))
        throw DomainError("tune_r: target not bracketed");
    for (int it = 0; it < 500; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f = mean_at(mid);
        if (std::abs(f - target) <= 1e-10) return std::exp(mid);
        (f < target ? lo : hi) = mid;
        if (hi - lo < 1e-14) break;
    }
    return std::exp(0.5 * (lo + hi));
}

double CubicLogFit::value_at(double lnx) const {
    const double z = lnx - center;
    return c[0] + z * (c[1] + z * (c[2] + z * c[3]));
}

double CubicLogFit::slope_at(double lnx) const {
    const double z = lnx - center;
    return c[1] + z * (2.0 * c[2] + z * 3.0 * c[3]);
}

CubicLogFit log_cubic_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ArgumentError("log_cubic_fit: size mismatch");
    if (x.size() < 20) throw ArgumentError("log_cubic_fit: needs at least 20 points");
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw ArgumentError("log_cubic_fit: inputs must be positive");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    const auto [mn, mx] = std::minmax_element(lx.begin(), lx.end());
    if (*mx - *mn < std::log(10.0))
        throw ArgumentError("log_cubic_fit: x must span at least a decade");

    CubicLogFit fit;
    fit.min_lnx = *mn;
    fit.max_lnx = *mx;
    fit.center = std::accumulate(lx.begin(), lx.end(), 0.0) / n;

    Eigen::MatrixXd A(n, 4);
    Eigen::VectorXd b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = lx[i] - fit.center;
        A(i, 0) = 1.0;
        A(i, 1) = z;
        A(i, 2) = z * z;
        A(i, 3) = z * z * z;
        b(i) = ly[i];
    }
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
    for (int j = 0; j < 4; ++j) fit.c[j] = sol(j);
    return fit;
}

Grid2D double_histogram(std::span<const double> a, std::span<const double> b,
                        int bins) {
    if (a.size() != b.size()) throw ArgumentError("double_histogram: size mismatch");
    if (a.empty()) throw ArgumentError("double_histogram: empty sample");
    if (bins < 1) throw ArgumentError("double_histogram: bins < 1");
    Grid2D g;
    g.bins = bins;
    g.v.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i] >= 0.0 && a[i] <= 1.0 && b[i] >= 0.0 && b[i] <= 1.0))
            throw ArgumentError("double_histogram: samples outside [0, 1]");
        const int ia = std::min(static_cast<int>(a[i] * bins), bins - 1);
        const int ib = std::min(static_cast<int>(b[i] * bins), bins - 1);
        g.v[static_cast<std::size_t>(ia) * bins + ib] += 1.0;
    }
    const double mx = *std::max_element(g.v.begin(), g.v.end());
    if (mx > 0)
        for (double& x : g.v) x /= mx;
    return g;
}

double autocorr(std::span<const double> series, int lag) {
    if (lag < 0) throw ArgumentError("autocorr: negative lag");
    const std::size_t n = series.size();
    if (n <= static_cast<std::size_t>(lag) + 1)
        throw ArgumentError("autocorr: series shorter than lag");
    const double mean =
        std::accumulate(series.begin(), series.end(), 0.0) / n;
    double var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = series[i] - mean;
        var += d * d;
    }
    if (!(var > 0.0)) return 0.0;
    for (std::size_t i = 0; i + lag < n; ++i)
        cov += (series[i] - mean) * (series[i + lag] - mean);
    return cov / var;
}

double bootstrap_se_quantile(std::span<const double> v, double q,
                             int resamples, std::uint64_t seed) {
    if (v.empty()) throw ArgumentError("bootstrap_se_quantile: empty sample");
    if (resamples < 2) throw ArgumentError("bootstrap_se_quantile: resamples < 2");
    Rng rng = make_rng(seed, "bootstrap-quantile");
    std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
    std::vector<double> stat(resamples);
    std::vector<double> tmp(v.size());
    for (int r = 0; r < resamples; ++r) {
        for (auto& t : tmp) t = v[pick(rng)];
        stat[r] = quantile(tmp, q);
    }
    const double mean =
        std::accumulate(stat.begin(), stat.end(), 0.0) / resamples;
    double var = 0.0;
    for (double s : stat) var += (s - mean) * (s - mean);
    return std::sqrt(var / (resamples - 1));
}

}  // namespace qa2sat
