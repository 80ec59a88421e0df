#pragma once

// Fisher information for theta = [F, sigma_h2] and the Cramer-Rao bound as
// its inverse. Two routes: the closed form (sum over the correlation
// spectrum of a rank-structured 2x2) and the general per-index trace formula
// with analytic Wirtinger derivatives of C_k. Index convention throughout:
// (1,1) <-> F, (2,2) <-> sigma_h2.

#include <cmath>
#include <cstddef>
#include <limits>

#include "impest/channel.hpp"
#include "impest/errors.hpp"
#include "impest/estimators.hpp"
#include "impest/linalg.hpp"

namespace impest {

struct FimResult {
    Herm2 fim;
    Herm2 crb;             // fim^{-1} when valid
    double crb_F = 0.0;    // bound on E|F_hat - F|^2
    double crb_sigma = 0.0;  // bound on var(sigma_h2_hat)
    bool valid = false;    // false when the FIM is singular
};

// Per-index covariance of the rotated statistics pair:
// C_k = [[a + s2, a conj(F)], [a F, a |F|^2 + s2]] with a = sigma_h2 lambda_k.
inline Mat2 ck_matrix(cplx F, double sigma_h2, double lambda_k, double sigma2) {
    const double a = sigma_h2 * lambda_k;
    return {cplx{a + sigma2, 0.0}, a * std::conj(F), a * F, cplx{a * std::norm(F) + sigma2, 0.0}};
}

// Wirtinger derivative dC_k/dF (F and F* treated as independent).
inline Mat2 ck_deriv_F(cplx F, double sigma_h2, double lambda_k) {
    const double a = sigma_h2 * lambda_k;
    return {cplx{0.0, 0.0}, cplx{0.0, 0.0}, cplx{a, 0.0}, a * std::conj(F)};
}

// Wirtinger derivative dC_k/dF*.
inline Mat2 ck_deriv_Fstar(cplx F, double sigma_h2, double lambda_k) {
    const double a = sigma_h2 * lambda_k;
    return {cplx{0.0, 0.0}, cplx{a, 0.0}, cplx{0.0, 0.0}, a * F};
}

// dC_k/d sigma_h2 (real parameter).
inline Mat2 ck_deriv_sigma_h2(cplx F, double lambda_k) {
    return {cplx{lambda_k, 0.0}, lambda_k * std::conj(F), lambda_k * F,
            cplx{lambda_k * std::norm(F), 0.0}};
}

namespace detail {

inline FimResult invert_fim(Herm2 fim) {
    FimResult r;
    r.fim = fim;
    const double det = fim.s11 * fim.s22 - std::norm(fim.s21);
    if (!(det > 0.0) || !std::isfinite(det)) {
        r.valid = false;
        return r;
    }
    r.crb.s11 = fim.s22 / det;
    r.crb.s22 = fim.s11 / det;
    r.crb.s21 = -fim.s21 / det;
    r.crb_F = r.crb.s11;
    r.crb_sigma = r.crb.s22;
    r.valid = true;
    return r;
}

}  // namespace detail

// Closed-form FIM: sum_k N (1+|F|^2) lambda_k^2 / (lambda_k sigma_h2 (1+|F|^2) + sigma^2)^2
// times F_k = [[sigma_h2^2 (lambda_k sigma_h2 / sigma^2 + 1), F sigma_h2],
//              [conj(F) sigma_h2, 1 + |F|^2]].
inline FimResult fim_closed(cplx F, double sigma_h2, const CorrelationSpec& spec, std::size_t N,
                            double sigma2) {
    if (sigma_h2 < 0.0) throw InvalidArg("fim_closed: sigma_h2 must be >= 0");
    if (!(sigma2 > 0.0)) throw InvalidArg("fim_closed: sigma2 must be > 0");
    const double f2 = std::norm(F);
    const double n = static_cast<double>(N);
    Herm2 fim;
    for (double lam : spec.eig.values) {
        const double denom = lam * sigma_h2 * (1.0 + f2) + sigma2;
        const double pref = n * (1.0 + f2) * lam * lam / (denom * denom);
        fim.s11 += pref * sigma_h2 * sigma_h2 * (lam * sigma_h2 / sigma2 + 1.0);
        fim.s22 += pref * (1.0 + f2);
        fim.s21 += pref * sigma_h2 * std::conj(F);
    }
    return detail::invert_fim(fim);
}

// General FIM via [I]_ij = N sum_k Tr[C_k^{-1} dC_k/dtheta_i* C_k^{-1} dC_k/dtheta_j].
inline FimResult fim_general(cplx F, double sigma_h2, const CorrelationSpec& spec, std::size_t N,
                             double sigma2) {
    if (sigma_h2 < 0.0) throw InvalidArg("fim_general: sigma_h2 must be >= 0");
    if (!(sigma2 > 0.0)) throw InvalidArg("fim_general: sigma2 must be > 0");
    const double n = static_cast<double>(N);
    Herm2 fim;
    for (double lam : spec.eig.values) {
        const Mat2 ck = ck_matrix(F, sigma_h2, lam, sigma2);
        if (ck.det().real() <= 0.0) throw SingularCovariance("fim_general: C_k singular");
        const Mat2 ci = ck.inverse();
        const Mat2 d_f = ck_deriv_F(F, sigma_h2, lam);
        const Mat2 d_fs = ck_deriv_Fstar(F, sigma_h2, lam);
        const Mat2 d_s = ck_deriv_sigma_h2(F, lam);
        fim.s11 += n * (ci * d_fs * ci * d_f).trace().real();
        fim.s22 += n * (ci * d_s * ci * d_s).trace().real();
        fim.s21 += n * (ci * d_s * ci * d_f).trace();
    }
    return detail::invert_fim(fim);
}

// sqrt(crb_F) / |F|: the CRB counterpart of the relative RMSE metric.
inline double relative_crb_F(cplx F, double sigma_h2, const CorrelationSpec& spec, std::size_t N,
                             double sigma2) {
    if (std::abs(F) == 0.0) throw InvalidArg("relative_crb_F: F must be nonzero");
    const FimResult r = fim_closed(F, sigma_h2, spec, N, sigma2);
    if (!r.valid) return std::numeric_limits<double>::infinity();
    return std::sqrt(r.crb_F) / std::abs(F);
}

}  // namespace impest
