#include <Eigen/Dense>
#include <cmath>

#include "qa2sat/errors.hpp"
#include "qa2sat/rng.hpp"
#include "qa2sat/spectrum.hpp"

namespace qa2sat {

namespace {

using Eigen::Map;
using Eigen::VectorXd;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return Map<const VectorXd>(a.data(), a.size())
        .dot(Map<const VectorXd>(b.data(), b.size()));
}

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    Map<VectorXd>(y.data(), y.size()) +=
        alpha * Map<const VectorXd>(x.data(), x.size());
}

double norm(const std::vector<double>& a) {
    return Map<const VectorXd>(a.data(), a.size()).norm();
}

void normalize(std::vector<double>& a) {
    Map<VectorXd>(a.data(), a.size()).normalize();
}

// Two classical Gram-Schmidt passes against the given sets; enough to
// restore orthogonality to machine precision in practice.
void orthogonalize(std::vector<double>& w,
                   std::span<const std::vector<double>> deflate,
                   const std::vector<std::vector<double>>& basis,
                   std::size_t basis_count) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& d : deflate) axpy(-dot(d, w), d, w);
        for (std::size_t i = 0; i < basis_count; ++i)
            axpy(-dot(basis[i], w), basis[i], w);
    }
}

std::vector<double> random_start(std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    return v;
}

struct RitzPair {
    double theta;
    VectorXd s;
};

// Lowest eigenpair of the symmetric tridiagonal matrix built so far.
RitzPair lowest_ritz(const std::vector<double>& alpha,
                     const std::vector<double>& beta) {
    const int k = static_cast<int>(alpha.size());
    Map<const VectorXd> d(alpha.data(), k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    if (k == 1) {
        VectorXd s(1);
        s[0] = 1.0;
        return {alpha[0], s};
    }
    Map<const VectorXd> e(beta.data(), k - 1);
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

}  // namespace

LanczosResult lanczos_lowest(const ApplyFn& apply, std::size_t dim,
                             const std::vector<double>* start,
                             std::span<const std::vector<double>> deflate,
                             const LanczosOptions& opt) {
    if (dim == 0) throw ArgumentError("lanczos_lowest: empty space");
    if (deflate.size() >= dim)
        throw ArgumentError("lanczos_lowest: deflation space fills the domain");

    LanczosResult out;

    // The complement of the deflation space has this dimension; the basis
    // can never usefully exceed it.
    const std::size_t complement = dim - deflate.size();
    const std::size_t max_basis =
        std::min<std::size_t>(std::max(opt.max_basis, 2), complement);

    std::vector<double> v0;
    if (start) {
        v0 = *start;
        if (v0.size() != dim) throw ArgumentError("lanczos_lowest: start size mismatch");
    }
    for (std::uint64_t attempt = 0; ; ++attempt) {
        if (!start || attempt > 0) v0 = random_start(dim, opt.seed + attempt);
        orthogonalize(v0, deflate, {}, 0);
        const double nv = norm(v0);
        if (nv > 1e-8) {
            Map<VectorXd>(v0.data(), dim) /= nv;
            break;
        }
        if (attempt > 8)
            throw SolverError("lanczos_lowest: cannot build a start vector");
    }

    std::vector<std::vector<double>> basis;
    basis.reserve(max_basis);
    std::vector<double> alpha, beta;
    std::vector<double> w(dim), ritz(dim), hx(dim);

    auto form_ritz = [&](const RitzPair& rp) {
        std::fill(ritz.begin(), ritz.end(), 0.0);
        for (std::size_t i = 0; i < alpha.size(); ++i) axpy(rp.s[i], basis[i], ritz);
        normalize(ritz);
    };

    // Explicit residual of (theta, ritz), measured inside the complement.
    auto true_residual = [&](double theta) {
        apply(ritz, hx);
        out.matvecs++;
        axpy(-theta, ritz, hx);
        for (const auto& d : deflate) axpy(-dot(d, hx), d, hx);
        return norm(hx);
    };

    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        basis.clear();
        alpha.clear();
        beta.clear();
        basis.push_back(v0);

        for (std::size_t j = 0; j < max_basis; ++j) {
            apply(basis[j], w);
            out.matvecs++;
            const double a = dot(basis[j], w);
            alpha.push_back(a);
            axpy(-a, basis[j], w);
            if (j > 0) axpy(-beta[j - 1], basis[j - 1], w);
            orthogonalize(w, deflate, basis, basis.size());
            const double b = norm(w);

            double scale = std::abs(a);
            for (double x : alpha) scale = std::max(scale, std::abs(x));
            const bool breakdown = b <= 1e-14 * std::max(1.0, scale);

            const bool check = breakdown || j + 1 == max_basis ||
                               (static_cast<int>(j) % opt.check_every == opt.check_every - 1);
            if (check) {
                const RitzPair rp = lowest_ritz(alpha, beta);
                const double est = breakdown ? 0.0 : b * std::abs(rp.s[alpha.size() - 1]);
                if (est <= opt.tol || breakdown) {
                    form_ritz(rp);
                    const double r = true_residual(rp.theta);
                    if (r <= opt.tol || breakdown) {
                        out.value = rp.theta;
                        out.vector = ritz;
                        out.residual = r;
                        return out;
                    }
                }
            }
            if (breakdown) break;  // invariant subspace exhausted
            beta.push_back(b);
            if (j + 1 < max_basis) {
                Map<VectorXd>(w.data(), dim) /= b;
                basis.push_back(w);
            }
        }

        // Restart from the current best Ritz vector.
        const RitzPair rp = lowest_ritz(alpha, beta);
        form_ritz(rp);
        v0 = ritz;
        orthogonalize(v0, deflate, {}, 0);
        const double nv = norm(v0);
        if (nv <= 1e-12)
            throw SolverError("lanczos_lowest: restart vector collapsed");
        Map<VectorXd>(v0.data(), dim) /= nv;
    }
    throw SolverError("lanczos_lowest: no convergence within restart budget");
}

LowestTwo lowest_two(const HqacOperator& op, double lambda,
                     const LanczosOptions& opt,
                     const std::vector<double>* warm0,
                     const std::vector<double>* warm1) {
    const std::size_t dim = op.dim();
    ApplyFn apply = [&](std::span<const double> x, std::span<double> y) {
        op.apply(lambda, x, y);
    };

    auto solve_pair = [&](const LanczosOptions& o) {
        LowestTwo lt;
        LanczosResult g = lanczos_lowest(apply, dim, warm0, {}, o);
        std::vector<std::vector<double>> defl{g.vector};
        LanczosOptions o1 = o;
        o1.seed = mix64(o.seed);
        LanczosResult e = lanczos_lowest(apply, dim, warm1, defl, o1);
        lt.e0 = g.value;
        lt.e1 = e.value;
        lt.v0 = std::move(g.vector);
        lt.v1 = std::move(e.vector);
        lt.residual0 = g.residual;
        lt.residual1 = e.residual;
        return lt;
    };

    LowestTwo lt = solve_pair(opt);
    if (lt.e1 - lt.e0 < 10.0 * opt.tol && dim > 1) {
        LanczosOptions tight = opt;
        tight.tol = std::max(opt.tol / 100.0, 1e-14);
        warm0 = &lt.v0;
        warm1 = &lt.v1;
        LowestTwo lt2 = solve_pair(tight);
        lt = std::move(lt2);
    }
    if (lt.e1 < lt.e0) {
        std::swap(lt.e0, lt.e1);
        std::swap(lt.v0, lt.v1);
        std::swap(lt.residual0, lt.residual1);
    }
    return lt;
}

}  // namespace qa2sat
