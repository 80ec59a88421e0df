#pragma once

// Maximum-likelihood and method-of-moments estimation of the front-end
// parameter F and the channel power sigma_h^2 from the sufficient statistics
// (Y1, Y2). The likelihood concentrates onto a single scalar
// mu = sigma_h^2 (1 + |F|^2); the ML estimate maximizes
//
//     eta(mu) - sigma^2 sum_k ln(mu lambda_k + sigma^2)
//
// where eta(mu) is the top eigenvalue of the weighted 2x2 sample covariance
// S(mu), and the top unit eigenvector (E1, E2) of S(mu_hat) yields
// F_hat = E2/E1 and sigma_h2_hat = |E1|^2 mu_hat.

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "impest/channel.hpp"
#include "impest/errors.hpp"
#include "impest/linalg.hpp"
#include "impest/signal.hpp"

namespace impest {

enum class EstStatus {
    Ok,
    FInfinite,        // |E1| ~ 0 with mu_hat > 0: likelihood maximized as F -> infinity
    DegenerateZeroMu  // mu_hat = 0: likelihood independent of F; canonical F_hat = 0
};

inline const char* to_string(EstStatus s) {
    switch (s) {
        case EstStatus::Ok: return "Ok";
        case EstStatus::FInfinite: return "FInfinite";
        case EstStatus::DegenerateZeroMu: return "DegenerateZeroMu";
    }
    return "?";
}

struct ThetaEstimate {
    cplx F_hat{0.0, 0.0};
    double sigma_h2_hat = 0.0;
    double mu_hat = 0.0;
    double objective = 0.0;  // concentrated objective value at mu_hat
    EstStatus status = EstStatus::Ok;
};

// Hermitian 2x2 [[s11, conj(s21)], [s21, s22]]; carrier for S(mu), S0 and
// the FIM.
struct Herm2 {
    double s11 = 0.0;
    double s22 = 0.0;
    cplx s21{0.0, 0.0};

    double top_eigenvalue() const {
        return 0.5 * (s11 + s22 + std::hypot(s11 - s22, 2.0 * std::abs(s21)));
    }
    HermEig eig() const { return herm_eig_2x2(s11, s22, s21); }
};

// Spectrum weights w_k = mu lambda_k / (mu lambda_k + sigma^2) in [0, 1),
// nondecreasing in mu.
struct SWeights {
    double mu = 0.0;
    std::vector<double> weights;
};

inline SWeights s_weights(const CorrelationSpec& spec, double sigma2, double mu) {
    if (mu < 0.0) throw InvalidArg("s_weights: mu must be >= 0");
    SWeights w;
    w.mu = mu;
    w.weights.resize(spec.L);
    for (std::size_t k = 0; k < spec.L; ++k) {
        const double ml = mu * spec.eig.values[k];
        w.weights[k] = ml > 0.0 ? ml / (ml + sigma2) : 0.0;
    }
    return w;
}

namespace detail {

// Per-index 2x2 sample covariances in the rotated basis W_i = V^H Y_i:
// t_ij[k] = (1/N) [W_i W_j^H]_{kk}. Caching these makes each objective
// evaluation O(L).
struct ConcCache {
    std::vector<double> lam;
    std::vector<double> t11, t22;
    std::vector<cplx> t21;
    double sigma2 = 0.0;
    std::size_t L = 0;
    std::size_t N = 0;
};

inline ConcCache build_conc_cache(const SufficientStats& stats, const CorrelationSpec& spec) {
    if (stats.L != spec.L)
        throw DimensionMismatch("stats L " + std::to_string(stats.L) + " != spec L " +
                                std::to_string(spec.L));
    ConcCache c;
    c.lam = spec.eig.values;
    c.sigma2 = stats.sigma2;
    c.L = stats.L;
    c.N = stats.N;
    const ComplexMat vh = spec.eig.vectors.adjoint();
    const ComplexMat w1 = vh * stats.Y1;
    const ComplexMat w2 = vh * stats.Y2;
    c.t11.resize(c.L);
    c.t22.resize(c.L);
    c.t21.resize(c.L);
    const double inv_n = 1.0 / static_cast<double>(c.N);
    for (std::size_t k = 0; k < c.L; ++k) {
        double a11 = 0.0, a22 = 0.0;
        cplx a21{0.0, 0.0};
        for (std::size_t t = 0; t < c.N; ++t) {
            a11 += std::norm(w1(k, t));
            a22 += std::norm(w2(k, t));
            a21 += w2(k, t) * std::conj(w1(k, t));
        }
        c.t11[k] = a11 * inv_n;
        c.t22[k] = a22 * inv_n;
        c.t21[k] = a21 * inv_n;
    }
    return c;
}

inline Herm2 s_matrix_cached(const ConcCache& c, double mu) {
    Herm2 s;
    for (std::size_t k = 0; k < c.L; ++k) {
        const double ml = mu * c.lam[k];
        const double w = ml > 0.0 ? ml / (ml + c.sigma2) : 0.0;
        s.s11 += w * c.t11[k];
        s.s22 += w * c.t22[k];
        s.s21 += w * c.t21[k];
    }
    return s;
}

inline double objective_cached(const ConcCache& c, double mu) {
    const Herm2 s = s_matrix_cached(c, mu);
    double logdet = 0.0;
    for (std::size_t k = 0; k < c.L; ++k) logdet += std::log(mu * c.lam[k] + c.sigma2);
    return s.top_eigenvalue() - c.sigma2 * logdet;
}

}  // namespace detail

// S(mu) via the eigen-basis per-index sum. Equals the trace form below.
inline Herm2 s_matrix(const SufficientStats& stats, const CorrelationSpec& spec, double mu) {
    if (mu < 0.0) throw InvalidArg("s_matrix: mu must be >= 0");
    return detail::s_matrix_cached(detail::build_conc_cache(stats, spec), mu);
}

// S(mu) via S_ij = (1/N) Tr[mu C_H (mu C_H + sigma^2 I)^{-1} Y_i Y_j^H],
// evaluated with an LU solve rather than the eigensystem. Kept as an
// independent route for cross-checking s_matrix.
inline Herm2 s_matrix_trace(const SufficientStats& stats, const CorrelationSpec& spec, double mu) {
    if (mu < 0.0) throw InvalidArg("s_matrix_trace: mu must be >= 0");
    if (stats.L != spec.L) throw DimensionMismatch("s_matrix_trace: stats/spec L");
    ComplexMat a = spec.C_H * cplx{mu, 0.0};
    for (std::size_t i = 0; i < stats.L; ++i) a(i, i) += stats.sigma2;
    const ComplexMat z1 = spec.C_H * lu_solve(a, stats.Y1) * cplx{mu, 0.0};
    const ComplexMat z2 = spec.C_H * lu_solve(a, stats.Y2) * cplx{mu, 0.0};
    const double inv_n = 1.0 / static_cast<double>(stats.N);
    Herm2 s;
    s.s11 = trace_of_product_adjoint(z1, stats.Y1).real() * inv_n;
    s.s22 = trace_of_product_adjoint(z2, stats.Y2).real() * inv_n;
    s.s21 = trace_of_product_adjoint(z2, stats.Y1) * inv_n;
    return s;
}

// Concentrated objective eta(mu) - sigma^2 sum_k ln(mu lambda_k + sigma^2).
inline double ml_objective(const SufficientStats& stats, const CorrelationSpec& spec, double mu) {
    if (mu < 0.0) throw InvalidArg("ml_objective: mu must be >= 0");
    return detail::objective_cached(detail::build_conc_cache(stats, spec), mu);
}

struct MlOptions {
    double bracket_factor = 1e4;  // search [mu_seed/bf, mu_seed*bf]
    double tol = 1e-10;           // relative tolerance on mu_hat
    int max_iters = 200;          // golden-section iteration budget
};

namespace detail {

inline constexpr double kE1Threshold = 1e-9;

// Map the top eigenvector of S(mu_hat) to the estimate.
inline ThetaEstimate finish_estimate(const Herm2& s, double mu_hat, double objective) {
    ThetaEstimate est;
    est.mu_hat = mu_hat;
    est.objective = objective;
    const HermEig e = s.eig();
    const cplx e1 = e.vectors(0, 0);
    const cplx e2 = e.vectors(1, 0);
    if (std::abs(e1) < kE1Threshold) {
        est.status = EstStatus::FInfinite;
        est.F_hat = cplx{std::numeric_limits<double>::infinity(), 0.0};
        est.sigma_h2_hat = std::norm(e1) * mu_hat;
        return est;
    }
    est.status = EstStatus::Ok;
    est.F_hat = e2 / e1;
    est.sigma_h2_hat = std::norm(e1) * mu_hat;
    return est;
}

inline ThetaEstimate degenerate_estimate(double objective) {
    ThetaEstimate est;
    est.status = EstStatus::DegenerateZeroMu;
    est.F_hat = cplx{0.0, 0.0};
    est.sigma_h2_hat = 0.0;
    est.mu_hat = 0.0;
    est.objective = objective;
    return est;
}

}  // namespace detail

// Method-of-moments estimator: the closed-form i.i.d.-fading ML estimator
// applied regardless of correlation. S0 = (1/N)[Tr(Y_i Y_j^H)],
// mu_hat = max(eta0/L - sigma^2, 0), then the usual eigenvector map.
inline ThetaEstimate estimate_mm(const SufficientStats& stats) {
    const double inv_n = 1.0 / static_cast<double>(stats.N);
    Herm2 s0;
    s0.s11 = trace_of_product_adjoint(stats.Y1, stats.Y1).real() * inv_n;
    s0.s22 = trace_of_product_adjoint(stats.Y2, stats.Y2).real() * inv_n;
    s0.s21 = trace_of_product_adjoint(stats.Y2, stats.Y1) * inv_n;
    const double eta0 = s0.top_eigenvalue();
    const double sigma2 = stats.sigma2;
    const double ell = static_cast<double>(stats.L);
    const double mu_hat = std::max(eta0 / ell - sigma2, 0.0);
    const auto iid_objective = [&](double mu) {
        const double w = mu > 0.0 ? mu / (mu + sigma2) : 0.0;
        return w * eta0 - sigma2 * ell * std::log(mu + sigma2);
    };
    if (mu_hat == 0.0) return detail::degenerate_estimate(iid_objective(0.0));
    return detail::finish_estimate(s0, mu_hat, iid_objective(mu_hat));
}

// ML estimator: golden-section line search on u = ln(mu), seeded from the MM
// estimate, after a 64-probe coarse scan of the bracket; the mu = 0 boundary
// is compared explicitly against the interior optimum.
inline ThetaEstimate estimate_ml(const SufficientStats& stats, const CorrelationSpec& spec,
                                 const MlOptions& opts = {}) {
    const detail::ConcCache cache = detail::build_conc_cache(stats, spec);
    const ThetaEstimate mm = estimate_mm(stats);
    const double mu_seed = mm.mu_hat > 0.0 ? mm.mu_hat : stats.sigma2;

    const double lo = std::log(mu_seed / opts.bracket_factor);
    const double hi = std::log(mu_seed * opts.bracket_factor);
    constexpr int kCoarseProbes = 64;
    const double step = (hi - lo) / (kCoarseProbes - 1);

    double best_u = lo;
    double best_f = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kCoarseProbes; ++i) {
        const double u = lo + step * i;
        const double f = detail::objective_cached(cache, std::exp(u));
        if (f > best_f) {
            best_f = f;
            best_u = u;
        }
    }

    double a = std::max(lo, best_u - step);
    double b = std::min(hi, best_u + step);
    constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5)-1)/2
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = detail::objective_cached(cache, std::exp(c));
    double fd = detail::objective_cached(cache, std::exp(d));
    const auto track = [&](double u, double f) {
        if (f > best_f) {
            best_f = f;
            best_u = u;
        }
    };
    track(c, fc);
    track(d, fd);
    int iters = 0;
    while (b - a > opts.tol) {
        if (++iters > opts.max_iters)
            throw OptimizerFailure("estimate_ml: line search exceeded " +
                                   std::to_string(opts.max_iters) + " iterations");
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = detail::objective_cached(cache, std::exp(c));
            track(c, fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = detail::objective_cached(cache, std::exp(d));
            track(d, fd);
        }
    }

    const double mu_star = std::exp(best_u);
    double logdet0 = 0.0;
    for (std::size_t k = 0; k < cache.L; ++k) logdet0 += std::log(cache.sigma2);
    const double f_zero = -cache.sigma2 * logdet0;  // eta(0) = 0
    if (f_zero >= best_f) return detail::degenerate_estimate(f_zero);
    return detail::finish_estimate(detail::s_matrix_cached(cache, mu_star), mu_star, best_f);
}

// Exact joint log-density of (Y1, Y2) at theta = (F, sigma_h2). In the
// rotated basis the L per-index pairs are independent 2N-variate zero-mean
// complex Gaussians with covariance C_k (x) I_N, where
//   C_k = [[sh2 lam_k + s2, sh2 conj(F) lam_k], [sh2 F lam_k, sh2 |F|^2 lam_k + s2]].
inline double loglik_direct(const SufficientStats& stats, const CorrelationSpec& spec, cplx F,
                            double sigma_h2) {
    if (sigma_h2 < 0.0) throw InvalidArg("loglik_direct: sigma_h2 must be >= 0");
    if (stats.L != spec.L) throw DimensionMismatch("loglik_direct: stats/spec L");
    const ComplexMat vh = spec.eig.vectors.adjoint();
    const ComplexMat w1 = vh * stats.Y1;
    const ComplexMat w2 = vh * stats.Y2;
    const double s2 = stats.sigma2;
    const double n = static_cast<double>(stats.N);
    const double f2 = std::norm(F);
    double total = 0.0;
    for (std::size_t k = 0; k < stats.L; ++k) {
        const double a = sigma_h2 * spec.eig.values[k];
        const Mat2 ck{cplx{a + s2, 0.0}, a * std::conj(F), a * F, cplx{a * f2 + s2, 0.0}};
        const double det = ck.det().real();
        if (det <= 0.0) throw SingularCovariance("loglik_direct: det C_k <= 0");
        const Mat2 ci = ck.inverse();
        double quad = 0.0;
        for (std::size_t t = 0; t < stats.N; ++t) {
            const cplx z1 = w1(k, t);
            const cplx z2 = w2(k, t);
            quad += ci.m11.real() * std::norm(z1) + ci.m22.real() * std::norm(z2) +
                    2.0 * (std::conj(z1) * ci.m12 * z2).real();
        }
        total += -2.0 * n * std::log(std::numbers::pi) - n * std::log(det) - quad;
    }
    return total;
}

}  // namespace impest
