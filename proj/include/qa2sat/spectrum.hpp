#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qa2sat/problem.hpp"

namespace qa2sat {

// H(lambda) = (1 - lambda) * sum_i sigma^x_i + lambda * H_problem,
// acting on the 2^n computational basis where bit i of the index set
// means spin i is -1.  H_problem is diagonal and counts violated clauses;
// sigma^x_i flips bit i with matrix element +1.
class HqacOperator {
  public:
    explicit HqacOperator(const Problem& p, int n_cap = 20);

    std::size_t dim() const { return diag_.size(); }
    int n() const { return n_; }
    double diag(std::size_t idx) const { return diag_[idx]; }

    // y = H(lambda) x; x and y must not alias.
    void apply(double lambda, std::span<const double> x, std::span<double> y) const;

  private:
    int n_ = 0;
    std::vector<std::uint16_t> diag_;
};

// One-shot convenience used by tests and small callers.
std::vector<double> apply_hqac(const Problem& p, double lambda,
                               std::span<const double> v);

struct LanczosOptions {
    double tol = 1e-10;   // residual norm ||H x - theta x||
    int max_basis = 140;
    int max_restarts = 60;
    int check_every = 4;
    std::uint64_t seed = 0x51a7c3d2e9b4f860ULL;  // start vector, if none given
};

struct LanczosResult {
    double value = 0.0;
    std::vector<double> vector;
    double residual = 0.0;
    std::uint64_t matvecs = 0;
};

using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

// Lowest eigenpair in the orthogonal complement of `deflate` by Lanczos
// with full reorthogonalization and thick restarts from the best Ritz
// vector.  Convergence is declared on the explicit residual, not the
// tridiagonal estimate.
LanczosResult lanczos_lowest(const ApplyFn& apply, std::size_t dim,
                             const std::vector<double>* start,
                             std::span<const std::vector<double>> deflate,
                             const LanczosOptions& opt);

struct LowestTwo {
    double e0 = 0.0, e1 = 0.0;
    std::vector<double> v0, v1;
    double residual0 = 0.0, residual1 = 0.0;
};

// Two lowest levels of H(lambda): ground state first, then the first
// excited state from a second run with the ground vector deflated.  If
// the two values land within 10*tol of each other the pair is recomputed
// once at a 100x tighter tolerance.
LowestTwo lowest_two(const HqacOperator& op, double lambda,
                     const LanczosOptions& opt,
                     const std::vector<double>* warm0 = nullptr,
                     const std::vector<double>* warm1 = nullptr);

struct GapProfile {
    std::vector<double> lambda;  // strictly increasing, spans [0, 1]
    std::vector<double> e0, e1, gap;
    double solver_tol = 0.0;
    bool anomalous = false;  // more than one significant gap minimum
    std::string note;

    std::size_t min_index() const;
};

struct ScanPolicy {
    double coarse_spacing = 1.0 / 128;
    int refine_factor = 4;
    double critical_r = 10.0;  // window width = critical_r * gap / slope
    int min_points_critical = 20;
    int max_passes = 48;
    int max_new_per_pass = 96;
    double tol = 1e-10;
};

using GapFn = std::function<std::pair<double, double>(double)>;  // (e0, e1)

// Coarse scan of [0, 1] followed by local refinement around the gap
// minimum until at least min_points_critical points lie inside the
// critical window.  The solver form takes any (e0, e1) evaluator; the
// Problem form wraps lowest_two with warm starts marched along lambda.
GapProfile scan_gap(const GapFn& eval, const ScanPolicy& pol);
GapProfile scan_gap(const Problem& p, const ScanPolicy& pol);

inline double lz_gap(double lambda, double gap_min, double lambda_c, double slope) {
    const double u = (lambda - lambda_c) * slope;
    return std::sqrt(gap_min * gap_min + u * u);
}

struct LZFit {
    double gap_min = 0.0, lambda_c = 0.0, slope = 0.0;
    double gap_min_err = 0.0, lambda_c_err = 0.0, slope_err = 0.0;
    double chi2_dof = 0.0;
    std::array<double, 2> window{0.0, 0.0};
    int n_points = 0;
    double halfwin_drift = 0.0;  // |gap_min change| / gap_min, window halved
};

struct FitLzOptions {
    double critical_r = 10.0;
    double sigma = 0.0;  // per-point error; 0 means 2 * profile solver_tol
    int min_points = 10;
    // Allowed relative drift of gap_min when the fit window is halved.
    // The default assumes the asymptotic avoided-crossing regime (window
    // edge gap well below every other spectral scale).  Small systems sit
    // outside it: their profiles deviate from the ideal form by a few
    // percent, so callers working at n <~ 14 must loosen this knob.
    double stability_rel = 1e-3;
};

// Least-squares fit of sqrt(gap_min^2 + slope^2 (lambda - lambda_c)^2)
// to the profile restricted to the critical window, with an internal
// stability check against window halving.
LZFit fit_lz(const GapProfile& prof, const FitLzOptions& opt);

struct QAMetrics {
    double xi_gap = 0.0;  // 1 / gap_min
    double tau_qa = 0.0;  // slope / gap_min^2
    double xi_lz = 0.0;   // sqrt(tau_qa)
};

QAMetrics qa_metrics(const LZFit& fit);

}  // namespace qa2sat
