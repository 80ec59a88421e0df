#pragma once

// Minimal dense complex linear algebra: row-major complex matrices, a
// closed-form 2x2 Hermitian eigensolver, a cyclic-Jacobi Hermitian
// eigensolver for small L, a PSD square root, and an LU solver.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "impest/errors.hpp"

namespace impest {

using cplx = std::complex<double>;

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Dense complex matrix, row-major.
class ComplexMat {
public:
    ComplexMat() = default;

    ComplexMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, cplx{0.0, 0.0}) {}

    ComplexMat(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), a_(std::move(entries)) {
        if (a_.size() != rows_ * cols_)
            throw InvalidArg("ComplexMat: entry count " + std::to_string(a_.size()) +
                             " != rows*cols " + std::to_string(rows_ * cols_));
        for (const cplx& z : a_)
            if (!is_finite(z)) throw InvalidArg("ComplexMat: non-finite entry");
    }

    static ComplexMat identity(std::size_t n) {
        ComplexMat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    ComplexMat adjoint() const {
        ComplexMat m(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) m(c, r) = std::conj((*this)(r, c));
        return m;
    }

    ComplexMat operator*(const ComplexMat& rhs) const {
        if (cols_ != rhs.rows_)
            throw DimensionMismatch("matmul: " + std::to_string(cols_) + " vs " +
                                    std::to_string(rhs.rows_));
        ComplexMat out(rows_, rhs.cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = 0; k < cols_; ++k) {
                const cplx v = (*this)(r, k);
                if (v == cplx{0.0, 0.0}) continue;
                for (std::size_t c = 0; c < rhs.cols_; ++c) out(r, c) += v * rhs(k, c);
            }
        return out;
    }

    ComplexMat operator*(cplx s) const {
        ComplexMat out = *this;
        for (cplx& z : out.a_) z *= s;
        return out;
    }

    ComplexMat operator+(const ComplexMat& rhs) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionMismatch("matrix add shape");
        ComplexMat out = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] += rhs.a_[i];
        return out;
    }

    ComplexMat operator-(const ComplexMat& rhs) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw DimensionMismatch("matrix sub shape");
        ComplexMat out = *this;
        for (std::size_t i = 0; i < a_.size(); ++i) out.a_[i] -= rhs.a_[i];
        return out;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const cplx& z : a_) s += std::norm(z);
        return std::sqrt(s);
    }

    cplx trace() const {
        cplx s = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
        return s;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> a_;
};

// Tr(A B^H) = sum_{rc} A_rc * conj(B_rc); A and B must have equal shape.
inline cplx trace_of_product_adjoint(const ComplexMat& a, const ComplexMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("trace_of_product_adjoint shape");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * std::conj(b.data()[i]);
    return s;
}

// 2x2 complex matrix, kept separate from ComplexMat so the per-packet
// covariance algebra stays allocation-free.
struct Mat2 {
    cplx m11, m12, m21, m22;

    Mat2 operator*(const Mat2& r) const {
        return {m11 * r.m11 + m12 * r.m21, m11 * r.m12 + m12 * r.m22,
                m21 * r.m11 + m22 * r.m21, m21 * r.m12 + m22 * r.m22};
    }
    Mat2 operator+(const Mat2& r) const {
        return {m11 + r.m11, m12 + r.m12, m21 + r.m21, m22 + r.m22};
    }
    Mat2 operator*(cplx s) const { return {m11 * s, m12 * s, m21 * s, m22 * s}; }
    cplx det() const { return m11 * m22 - m12 * m21; }
    cplx trace() const { return m11 + m22; }
    Mat2 inverse() const {
        const cplx d = det();
        if (d == cplx{0.0, 0.0}) throw SingularCovariance("Mat2: singular");
        const cplx id = 1.0 / d;
        return {m22 * id, -m12 * id, -m21 * id, m11 * id};
    }
};

// Eigensystem of a Hermitian matrix. Eigenvalues descending, eigenvectors the
// unit-norm columns of `vectors`, phase fixed so the largest-magnitude
// component of each column is real and nonnegative.
struct HermEig {
    std::vector<double> values;
    ComplexMat vectors;
};

namespace detail {

// Multiply column by a unit phase making its largest-|.| component real >= 0.
inline void fix_column_phase(ComplexMat& v, std::size_t col) {
    std::size_t imax = 0;
    double best = -1.0;
    for (std::size_t r = 0; r < v.rows(); ++r) {
        const double m = std::abs(v(r, col));
        if (m > best) {
            best = m;
            imax = r;
        }
    }
    if (best <= 0.0) return;
    const cplx phase = std::conj(v(imax, col)) / best;
    for (std::size_t r = 0; r < v.rows(); ++r) v(r, col) *= phase;
}

inline void sort_descending(HermEig& e) {
    const std::size_t n = e.values.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return e.values[i] > e.values[j]; });
    std::vector<double> vals(n);
    ComplexMat vecs(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        vals[c] = e.values[idx[c]];
        for (std::size_t r = 0; r < n; ++r) vecs(r, c) = e.vectors(r, idx[c]);
    }
    e.values = std::move(vals);
    e.vectors = std::move(vecs);
}

}  // namespace detail

// Closed-form eigensystem of [[s11, conj(s12)], [s12, s22]].
// Eigenvalues (s11+s22 +- sqrt((s11-s22)^2 + 4|s12|^2))/2, descending.
inline HermEig herm_eig_2x2(double s11, double s22, cplx s12) {
    if (!std::isfinite(s11) || !std::isfinite(s22) || !is_finite(s12))
        throw InvalidArg("herm_eig_2x2: non-finite input");
    const double half_sum = 0.5 * (s11 + s22);
    const double disc = std::hypot(s11 - s22, 2.0 * std::abs(s12));
    HermEig e;
    e.values = {half_sum + 0.5 * disc, half_sum - 0.5 * disc};
    e.vectors = ComplexMat(2, 2);

    if (disc == 0.0 || std::abs(s12) == 0.0) {
        // Diagonal (or fully degenerate): canonical basis ordered by eigenvalue.
        const bool first_is_top = s11 >= s22;
        e.vectors(0, 0) = first_is_top ? 1.0 : 0.0;
        e.vectors(1, 0) = first_is_top ? 0.0 : 1.0;
        e.vectors(0, 1) = first_is_top ? 0.0 : 1.0;
        e.vectors(1, 1) = first_is_top ? 1.0 : 0.0;
        return e;
    }

    const double eta = e.values[0];
    // Two algebraically equivalent forms of the top eigenvector; pick the one
    // whose leading component is the larger gap for numerical stability.
    cplx v0, v1;
    if (s11 - s22 >= 0.0) {
        v0 = cplx{eta - s22, 0.0};
        v1 = s12;
    } else {
        v0 = std::conj(s12);
        v1 = cplx{eta - s11, 0.0};
    }
    const double nv = std::sqrt(std::norm(v0) + std::norm(v1));
    v0 /= nv;
    v1 /= nv;
    e.vectors(0, 0) = v0;
    e.vectors(1, 0) = v1;
    // Orthogonal complement is the other eigenvector.
    e.vectors(0, 1) = -std::conj(v1);
    e.vectors(1, 1) = std::conj(v0);
    detail::fix_column_phase(e.vectors, 0);
    detail::fix_column_phase(e.vectors, 1);
    return e;
}

// Cyclic Jacobi eigensolver for an L x L Hermitian matrix. Deterministic
// sweep order (p ascending, q ascending), so identical inputs give identical
// outputs. Throws NotHermitian if ||C - C^H||_F > tol * ||C||_F and
// NoConvergence if the off-diagonal norm fails to reach tol * ||C||_F.
inline HermEig herm_eig(const ComplexMat& c, double tol = 1e-13) {
    const std::size_t n = c.rows();
    if (n != c.cols()) throw InvalidArg("herm_eig: matrix not square");
    const double cnorm = c.frobenius_norm();

    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) asym += std::norm(c(i, j) - std::conj(c(j, i)));
    if (std::sqrt(asym) > tol * cnorm && std::sqrt(asym) > 0.0)
        throw NotHermitian("herm_eig: asymmetry " + std::to_string(std::sqrt(asym)));

    // Work on the Hermitian part; diagonal kept real.
    ComplexMat a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (c(i, j) + std::conj(c(j, i)));
    ComplexMat v = ComplexMat::identity(n);

    const auto off_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += std::norm(a(i, j));
        return std::sqrt(s);
    };

    const int max_sweeps = 60;
    int sweep = 0;
    while (off_norm() > tol * cnorm) {
        if (++sweep > max_sweeps)
            throw NoConvergence("herm_eig: no convergence after " + std::to_string(max_sweeps) +
                                " sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = a(p, q);
                const double r = std::abs(apq);
                if (r == 0.0) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                // Unitary rotation J with J(p,p)=cs, J(q,p)=s, J(p,q)=-conj(s),
                // J(q,q)=cs zeroing (J^H A J)_{pq}: theta from
                // tan(2 theta) = 2|apq| / (app - aqq), s = sin(theta) e^{-i arg(apq)}.
                const double theta = 0.5 * std::atan2(2.0 * r, app - aqq);
                const double cs = std::cos(theta);
                const cplx s = std::sin(theta) * std::conj(apq) / r;

                for (std::size_t i = 0; i < n; ++i) {  // A <- A J
                    const cplx aip = a(i, p), aiq = a(i, q);
                    a(i, p) = cs * aip + s * aiq;
                    a(i, q) = -std::conj(s) * aip + cs * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {  // A <- J^H A
                    const cplx apj = a(p, j), aqj = a(q, j);
                    a(p, j) = cs * apj + std::conj(s) * aqj;
                    a(q, j) = -s * apj + cs * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {  // V <- V J
                    const cplx vip = v(i, p), viq = v(i, q);
                    v(i, p) = cs * vip + s * viq;
                    v(i, q) = -std::conj(s) * vip + cs * viq;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = cplx{a(p, p).real(), 0.0};
                a(q, q) = cplx{a(q, q).real(), 0.0};
            }
        }
    }

    HermEig e;
    e.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) e.values[i] = a(i, i).real();
    e.vectors = std::move(v);
    detail::sort_descending(e);
    for (std::size_t col = 0; col < n; ++col) {
        double s = 0.0;
        for (std::size_t rr = 0; rr < n; ++rr) s += std::norm(e.vectors(rr, col));
        const double inv = 1.0 / std::sqrt(s);
        for (std::size_t rr = 0; rr < n; ++rr) e.vectors(rr, col) *= inv;
        detail::fix_column_phase(e.vectors, col);
    }
    return e;
}

// Hermitian PSD square root: M with M M^H = C. Eigenvalues below
// -clamp_tol * lambda_max raise NotPSD; eigenvalues below
// 1e-12 * lambda_max in magnitude are eigensolver dust and snap to zero, so
// sqrt() cannot amplify them into ~1e-8 artifacts on rank-deficient inputs.
// Either clamp perturbs M M^H by well under 1e-10 * ||C||_F.
inline ComplexMat psd_sqrt(const ComplexMat& c, double clamp_tol = 1e-9) {
    HermEig e = herm_eig(c);
    const std::size_t n = c.rows();
    const double lmax = e.values.empty() ? 0.0 : std::max(e.values.front(), 0.0);
    for (double& l : e.values) {
        if (l < -clamp_tol * lmax)
            throw NotPSD("psd_sqrt: eigenvalue " + std::to_string(l) + " below clamp");
        if (l < 1e-12 * lmax) l = 0.0;
    }
    // M = V diag(sqrt(lambda)) V^H
    ComplexMat m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                s += e.vectors(i, k) * std::sqrt(e.values[k]) * std::conj(e.vectors(j, k));
            m(i, j) = s;
        }
    return m;
}

// Solve A X = B by Gaussian elimination with partial pivoting. A is n x n,
// B is n x m; returns X.
inline ComplexMat lu_solve(ComplexMat a, ComplexMat b) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw InvalidArg("lu_solve: A not square");
    if (b.rows() != n) throw DimensionMismatch("lu_solve: B rows");
    const std::size_t m = b.cols();

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            const double mag = std::abs(a(r, col));
            if (mag > best) {
                best = mag;
                piv = r;
            }
        }
        if (best == 0.0) throw SingularCovariance("lu_solve: singular matrix");
        if (piv != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(col, j), b(piv, j));
        }
        const cplx inv = 1.0 / a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const cplx f = a(r, col) * inv;
            if (f == cplx{0.0, 0.0}) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < m; ++j) b(r, j) -= f * b(col, j);
        }
    }
    for (std::size_t col = n; col-- > 0;) {
        const cplx inv = 1.0 / a(col, col);
        for (std::size_t j = 0; j < m; ++j) {
            cplx s = b(col, j);
            for (std::size_t k = col + 1; k < n; ++k) s -= a(col, k) * b(k, j);
            b(col, j) = s * inv;
        }
    }
    return b;
}

}  // namespace impest
