#pragma once

// Clarke's-model temporal correlation across packets and sampling of the
// correlated Rayleigh channel matrix H (L packets x N transmit antennas,
// i.i.d. across space, correlated across time).

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "impest/errors.hpp"
#include "impest/linalg.hpp"
#include "impest/rng.hpp"

namespace impest {

inline constexpr double kDefaultSpeedOfLight = 2.998e8;  // m/s

// Maximum Doppler frequency v * f_c / c.
inline double doppler_freq(double v_mps, double f_c_hz, double c_mps = kDefaultSpeedOfLight) {
    if (!(f_c_hz > 0.0)) throw InvalidArg("doppler_freq: carrier frequency must be > 0");
    if (!(c_mps > 0.0)) throw InvalidArg("doppler_freq: wave speed must be > 0");
    if (v_mps < 0.0) throw InvalidArg("doppler_freq: speed must be >= 0");
    return v_mps * f_c_hz / c_mps;
}

// Bessel function of the first kind, order zero. Power series for |x| <= 12,
// 12-term Hankel asymptotic expansion beyond; absolute error <= 1e-10 on
// |x| <= 1e4 (worst near the regime switch).
inline double bessel_j0(double x) {
    const double ax = std::abs(x);
    if (ax <= 12.0) {
        const double q = -0.25 * x * x;
        double term = 1.0;
        double acc = 1.0;
        for (int m = 1; m <= 60; ++m) {
            term *= q / (static_cast<double>(m) * static_cast<double>(m));
            acc += term;
            if (std::abs(term) < 1e-20 * std::abs(acc)) break;
        }
        return acc;
    }
    // J0(x) ~ sqrt(2/(pi x)) [P cos(x - pi/4) - Q sin(x - pi/4)],
    // a_k = prod_{j=1..k} (2j-1)^2 / (k! 8^k).
    constexpr int kTerms = 12;
    double a[kTerms];
    a[0] = 1.0;
    for (int k = 1; k < kTerms; ++k) {
        const double odd = 2.0 * k - 1.0;
        a[k] = a[k - 1] * odd * odd / (8.0 * k);
    }
    double p = 0.0, q = 0.0;
    double xpow = 1.0;
    for (int k = 0; k < kTerms; ++k) {
        const double t = a[k] / xpow;
        if (k % 2 == 0)
            p += ((k / 2) % 2 == 0) ? t : -t;
        else
            q -= (((k - 1) / 2) % 2 == 0) ? t : -t;
        xpow *= ax;
    }
    const double chi = ax - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * ax)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Known L x L normalized temporal correlation of the channel, plus its cached
// eigensystem and PSD square root (used by the sampler).
struct CorrelationSpec {
    std::size_t L = 0;
    double f_d = 0.0;  // Hz; 0 for the i.i.d. construction
    double T_s = 0.0;  // s
    bool iid = false;
    ComplexMat C_H;
    HermEig eig;        // eigenvalues clamped to >= 0
    ComplexMat sqrt_C;  // sqrt_C * sqrt_C^H = C_H
};

namespace detail {

inline CorrelationSpec finish_spec(CorrelationSpec spec) {
    spec.eig = herm_eig(spec.C_H);
    const double lmax = spec.eig.values.empty() ? 0.0 : std::max(spec.eig.values.front(), 0.0);
    for (double& l : spec.eig.values) {
        if (l < -1e-9 * lmax)
            throw NotPSD("correlation spec: eigenvalue " + std::to_string(l) + " below clamp");
        if (l < 0.0) l = 0.0;
    }
    spec.sqrt_C = psd_sqrt(spec.C_H, 1e-9);
    return spec;
}

}  // namespace detail

// [C_H]_{kj} = J0(2 pi f_d T_s (k - j)). f_d = 0 degenerates to the all-ones
// (fully coherent) matrix.
inline CorrelationSpec clarke_correlation(std::size_t L, double f_d, double T_s) {
    if (L == 0) throw InvalidArg("clarke_correlation: L must be >= 1");
    if (!(T_s > 0.0)) throw InvalidArg("clarke_correlation: T_s must be > 0");
    if (f_d < 0.0) throw InvalidArg("clarke_correlation: f_d must be >= 0");
    CorrelationSpec spec;
    spec.L = L;
    spec.f_d = f_d;
    spec.T_s = T_s;
    spec.C_H = ComplexMat(L, L);
    std::vector<double> row(L);
    for (std::size_t d = 0; d < L; ++d)
        row[d] = bessel_j0(2.0 * std::numbers::pi * f_d * T_s * static_cast<double>(d));
    for (std::size_t k = 0; k < L; ++k)
        for (std::size_t j = 0; j < L; ++j)
            spec.C_H(k, j) = row[k >= j ? k - j : j - k];
    return detail::finish_spec(std::move(spec));
}

// Explicit i.i.d. limit: C_H = I_L.
inline CorrelationSpec iid_correlation(std::size_t L) {
    if (L == 0) throw InvalidArg("iid_correlation: L must be >= 1");
    CorrelationSpec spec;
    spec.L = L;
    spec.iid = true;
    spec.C_H = ComplexMat::identity(L);
    return detail::finish_spec(std::move(spec));
}

// Diagnostic: number of eigenvalues above frac * lambda_1.
inline std::size_t significant_eigs(const CorrelationSpec& spec, double frac = 0.01) {
    std::size_t n = 0;
    if (spec.eig.values.empty()) return 0;
    const double thresh = frac * spec.eig.values.front();
    for (double l : spec.eig.values)
        if (l > thresh) ++n;
    return n;
}

struct ChannelDraw {
    ComplexMat H;  // L x N path gains
    double sigma_h2 = 0.0;
};

// H = sqrt(sigma_h2) * sqrt(C_H) * G with G i.i.d. CN(0,1), drawn row-major.
// Columns of H are i.i.d. CN(0, sigma_h2 * C_H).
inline ChannelDraw sample_channel(const CorrelationSpec& spec, std::size_t N, double sigma_h2,
                                  Rng& rng) {
    if (!(sigma_h2 > 0.0)) throw InvalidArg("sample_channel: sigma_h2 must be > 0");
    const std::size_t L = spec.L;
    ComplexMat g(L, N);
    for (std::size_t r = 0; r < L; ++r)
        for (std::size_t c = 0; c < N; ++c) g(r, c) = rng.complex_gaussian();
    ChannelDraw draw;
    draw.sigma_h2 = sigma_h2;
    draw.H = spec.sqrt_C * g * cplx{std::sqrt(sigma_h2), 0.0};
    return draw;
}

}  // namespace impest
