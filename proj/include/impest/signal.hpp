#pragma once

// Training construction, two-segment observation synthesis (the receiver
// front-end shifts halfway through each training sequence), and reduction of
// the raw observations to the sufficient statistics (Y1, Y2).

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>

#include "impest/channel.hpp"
#include "impest/errors.hpp"
#include "impest/linalg.hpp"
#include "impest/rng.hpp"

namespace impest {

// Per-segment training matrices with X1 X1^H = X2 X2^H = (P K / 2N) I_N.
struct TrainingPair {
    ComplexMat X1;  // N x K/2
    ComplexMat X2;  // N x K/2
    double P = 0.0;
    std::size_t K = 0;
};

// N rows of the (K/2)-point unitary DFT matrix, scaled by sqrt(P K / 2N).
// The same sequence is reused for both segments; the model only constrains
// each segment's Gram matrix.
inline TrainingPair make_training(std::size_t N, std::size_t K, double P) {
    if (K % 2 != 0) throw InvalidArg("make_training: K must be even");
    if (K / 2 < N) throw InvalidArg("make_training: need K/2 >= N");
    if (!(P > 0.0)) throw InvalidArg("make_training: P must be > 0");
    const std::size_t M = K / 2;
    const double scale = std::sqrt(P * static_cast<double>(K) /
                                   (2.0 * static_cast<double>(N) * static_cast<double>(M)));
    ComplexMat x(N, M);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t t = 0; t < M; ++t) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(n) *
                               static_cast<double>(t) / static_cast<double>(M);
            x(n, t) = scale * cplx{std::cos(ang), std::sin(ang)};
        }
    return TrainingPair{x, x, P, K};
}

struct ObservationBatch {
    ComplexMat U1;  // L x K/2
    ComplexMat U2;  // L x K/2
    struct Truth {
        cplx F;
        double sigma_h2;
        ComplexMat H;
    } truth;
};

// U1 = H X1 + N1, U2 = F H X2 + N2 with unit-variance circular complex
// Gaussian noise. zero_noise skips the noise draw entirely (exact-recovery
// test mode); it must not be used to emulate high SNR in experiments.
inline ObservationBatch synthesize(const ChannelDraw& chan, cplx F, const TrainingPair& pair,
                                   Rng& rng, bool zero_noise = false) {
    if (chan.H.cols() != pair.X1.rows())
        throw DimensionMismatch("synthesize: H cols " + std::to_string(chan.H.cols()) +
                                " != training rows " + std::to_string(pair.X1.rows()));
    ObservationBatch batch;
    batch.truth = {F, chan.sigma_h2, chan.H};
    batch.U1 = chan.H * pair.X1;
    batch.U2 = (chan.H * pair.X2) * F;
    if (!zero_noise) {
        for (cplx& u : batch.U1.data()) u += rng.complex_gaussian();
        for (cplx& u : batch.U2.data()) u += rng.complex_gaussian();
    }
    return batch;
}

// The only inputs the estimators may touch.
struct SufficientStats {
    ComplexMat Y1;  // L x N
    ComplexMat Y2;  // L x N
    double sigma2 = 0.0;  // 2N / (P K), the post-reduction noise variance
    std::size_t N = 0;
    std::size_t L = 0;
};

// Y1 = sigma^2 U1 X1^H, Y2 = sigma^2 U2 X2^H, sigma^2 = 2N / (P K).
// Y1 - H and Y2 - F H are then i.i.d. CN(0, sigma^2).
inline SufficientStats sufficient_stats(const ObservationBatch& batch, const TrainingPair& pair) {
    const std::size_t N = pair.X1.rows();
    if (batch.U1.cols() != pair.X1.cols() || batch.U2.cols() != pair.X2.cols())
        throw DimensionMismatch("sufficient_stats: observation/training length");
    if (batch.U1.rows() != batch.U2.rows()) throw DimensionMismatch("sufficient_stats: U1/U2 rows");
    SufficientStats stats;
    stats.sigma2 = 2.0 * static_cast<double>(N) / (pair.P * static_cast<double>(pair.K));
    const ComplexMat x1h = pair.X1.adjoint();
    const ComplexMat x2h = pair.X2.adjoint();
    stats.Y1 = (batch.U1 * x1h) * cplx{stats.sigma2, 0.0};
    stats.Y2 = (batch.U2 * x2h) * cplx{stats.sigma2, 0.0};
    stats.N = N;
    stats.L = batch.U1.rows();
    return stats;
}

}  // namespace impest
