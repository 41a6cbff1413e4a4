#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qa2sat/rng.hpp"

namespace qa2sat {

// Quantile with linear interpolation between order statistics (the
// convention most statistics packages default to).
double quantile(std::span<const double> v, double q);
double median(std::span<const double> v);
std::array<double, 9> deciles(std::span<const double> v);

struct Histogram {
    std::vector<double> edges;  // bins + 1, uniform
    std::vector<double> count;
    std::vector<double> err;  // sqrt(count), floored at 1 for empty bins
    double norm = 1.0;        // divisor applied to the samples (the median)
};

// Equal-width bins over [0, max * (1 + 1e-9)] of the median-normalized
// sample, so histograms of different system sizes share one scale.
Histogram histogram_normalized(std::span<const double> v, int bins = 12);
Histogram histogram_range(std::span<const double> v, double lo, double hi,
                          int bins);

struct RateFit {
    double rate = 0.0, rate_err = 0.0;
    double intercept = 0.0, intercept_err = 0.0;
    double chi2_dof = 0.0;
    int n_points = 0;
};

// Weighted least squares of ln y against n; y errors propagate as
// sigma_ln = err / y.  rate_err is a leave-one-n-out jackknife over the
// distinct n values (falls back to the WLS error below 3 levels).
RateFit fit_rate(std::span<const double> n, std::span<const double> y,
                 std::span<const double> yerr);

enum class PdfFamily { weibull, frechet };

// Unnormalized log shapes: (k-1) ln(x/x0) - (x/x0)^k and
// -(k+1) ln(x/x0) - (x0/x)^k.
double weibull_log_shape(double x, double k, double x0);
double frechet_log_shape(double x, double k, double x0);

struct PdfFit {
    PdfFamily family = PdfFamily::weibull;
    double k = 0.0, x0 = 0.0, amp = 0.0;  // amp: fitted total count
    double k_err = 0.0, x0_err = 0.0;
    double chi2_dof = 0.0;
    int n_points = 0;
};

// Least-squares fit of amp * (CDF(hi edge) - CDF(lo edge)) to histogram
// bin counts with sqrt-count errors, parameterized in logs so k, x0, amp
// stay positive.  Integrating the model over each bin keeps wide bins
// unbiased where the density is curved.  Moment-free initial guesses come
// from histogram quantiles, with a small multistart fallback.
PdfFit fit_pdf(const Histogram& h, PdfFamily family);

// Success probability of a single run against the crossing-time scale:
// p = 1 - exp(-r / xi^2), and its inverse for fixed r.
double lz_success(double xi, double r);
double lz_xi_from_success(double p, double r);

struct SuccessPdf {
    std::vector<double> p;
    std::vector<double> density;  // normalized to unit integral over p
    double r_used = 0.0;
};

std::vector<double> make_p_grid(int npts = 1001, double eps = 1e-4);

// Push a density of xi through p = 1 - exp(-r/xi^2).  log_shape is the
// (unnormalized) log density of xi; evaluation and normalization happen
// in log space to survive the exp(r/xi^2) Jacobian factor.
SuccessPdf fold_success_pdf(const std::function<double(double)>& log_shape,
                            double r, std::span<const double> p_grid);
SuccessPdf fold_success_pdf(const PdfFit& fit, double r,
                            std::span<const double> p_grid);

enum class TuneMode { xi, success };

// r such that the mean mapped success probability is `target`:
// xi mode uses p_i = 1 - exp(-r/xi_i^2), success mode p_i = 1 - (1-p_i)^r.
// Bisection on ln r; throws DomainError if the target is unreachable.
double tune_r(std::span<const double> values, TuneMode mode,
              double target = 0.5);

struct CubicLogFit {
    double center = 0.0;            // mean of ln x
    std::array<double, 4> c{};      // ln y = sum c_j z^j, z = ln x - center
    double value_at(double lnx) const;
    double slope_at(double lnx) const;
    double min_lnx = 0.0, max_lnx = 0.0;
};

// Cubic fit of ln y on ln x, centered for conditioning.  Requires at
// least 20 points spanning a decade in x.
CubicLogFit log_cubic_fit(std::span<const double> x, std::span<const double> y);

struct Grid2D {
    int bins = 0;
    std::vector<double> v;  // row-major, normalized so the peak cell is 1
    double at(int i, int j) const { return v[static_cast<std::size_t>(i) * bins + j]; }
};

// Joint histogram of two success-probability samples on [0,1]^2.
Grid2D double_histogram(std::span<const double> a, std::span<const double> b,
                        int bins = 12);

// Lag autocorrelation of a series (mean removed, unit lag-0).
double autocorr(std::span<const double> series, int lag);

// Bootstrap standard error of a sample quantile; deterministic for a
// fixed seed.
double bootstrap_se_quantile(std::span<const double> v, double q,
                             int resamples, std::uint64_t seed);

}  // namespace qa2sat
