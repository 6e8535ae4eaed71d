#include "nonortho/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "nonortho/error.hpp"

namespace nonortho {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_finite(const ComplexMatrix& m, const char* who) {
    if (m.empty()) throw Error(ErrorCode::BadShape, std::string(who) + ": empty matrix");
    if (!m.all_finite()) throw Error(ErrorCode::NonFinite, std::string(who) + ": non-finite entry");
}

void require_hermitian(const ComplexMatrix& m, const char* who) {
    require_finite(m, who);
    if (!is_hermitian(m)) throw Error(ErrorCode::NotHermitian, std::string(who) + ": matrix is not Hermitian");
}

/// Plane rotation G = [[c, s], [-conj(s), c]] with real c, chosen so that
/// G * [x; y] = [r; 0].
struct Givens {
    double c = 1.0;
    Complex s = 0.0;

    static Givens make(Complex x, Complex y) {
        if (y == Complex{}) return {};
        if (x == Complex{}) return {0.0, std::conj(y) / std::abs(y)};
        const double ax = std::abs(x);
        const double rho = std::hypot(ax, std::abs(y));
        const double c = ax / rho;
        return {c, c * std::conj(y) / std::conj(x)};
    }

    // rows p,q of m, columns [c0, c1)
    void apply_left(ComplexMatrix& m, std::size_t p, std::size_t q, std::size_t c0, std::size_t c1) const {
        for (std::size_t j = c0; j < c1; ++j) {
            const Complex a = m(p, j), b = m(q, j);
            m(p, j) = c * a + s * b;
            m(q, j) = -std::conj(s) * a + c * b;
        }
    }

    // columns p,q of m times G^dagger, rows [r0, r1)
    void apply_right_adjoint(ComplexMatrix& m, std::size_t p, std::size_t q, std::size_t r0, std::size_t r1) const {
        for (std::size_t i = r0; i < r1; ++i) {
            const Complex a = m(i, p), b = m(i, q);
            m(i, p) = a * c + b * std::conj(s);
            m(i, q) = -a * s + b * c;
        }
    }
};

/// Householder reduction to upper Hessenberg form, a = q * h * q^dagger.
void hessenberg(ComplexMatrix& h, ComplexMatrix& q) {
    const std::size_t n = h.dim();
    q = ComplexMatrix::identity(n);
    if (n < 3) return;
    CVector v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double xnorm = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) xnorm += std::norm(h(i, k));
        xnorm = std::sqrt(xnorm);
        if (xnorm == 0.0) continue;
        const Complex x0 = h(k + 1, k);
        const Complex phase = std::abs(x0) == 0.0 ? Complex(1.0) : x0 / std::abs(x0);
        const Complex alpha = -phase * xnorm;

        std::fill(v.begin(), v.end(), Complex{});
        for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
        v[k + 1] -= alpha;
        const double vn = norm(v);
        if (vn == 0.0) continue;
        for (auto& z : v) z /= vn;

        // h <- (I - 2vv^dagger) h
        for (std::size_t j = 0; j < n; ++j) {
            Complex s = 0.0;
            for (std::size_t i = k + 1; i < n; ++i) s += std::conj(v[i]) * h(i, j);
            s *= 2.0;
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= v[i] * s;
        }
        // h <- h (I - 2vv^dagger), q <- q (I - 2vv^dagger)
        for (ComplexMatrix* target : {&h, &q}) {
            ComplexMatrix& t = *target;
            for (std::size_t i = 0; i < n; ++i) {
                Complex s = 0.0;
                for (std::size_t j = k + 1; j < n; ++j) s += t(i, j) * v[j];
                s *= 2.0;
                for (std::size_t j = k + 1; j < n; ++j) t(i, j) -= s * std::conj(v[j]);
            }
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
}

/// Wilkinson shift: eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
Complex wilkinson_shift(const ComplexMatrix& t, std::size_t iu) {
    const Complex a = t(iu - 1, iu - 1), b = t(iu - 1, iu), c = t(iu, iu - 1), d = t(iu, iu);
    const Complex half_tr = 0.5 * (a + d);
    const Complex disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
    const Complex l1 = half_tr + disc, l2 = half_tr - disc;
    return std::abs(l1 - d) < std::abs(l2 - d) ? l1 : l2;
}

/// Shifted QR iteration on a Hessenberg matrix. On exit t is upper
/// triangular and z accumulates the unitary transformations.
void schur_from_hessenberg(ComplexMatrix& t, ComplexMatrix& z) {
    const std::size_t n = t.dim();
    const double anorm = std::max(t.frobenius_norm(), std::numeric_limits<double>::min());
    const std::size_t max_iter_per_eig = 30;
    std::size_t iu = n - 1;
    std::size_t iter = 0;
    std::size_t total = 0;

    while (iu > 0) {
        std::size_t il = iu;
        while (il > 0) {
            const double scale = std::abs(t(il - 1, il - 1)) + std::abs(t(il, il));
            const double sub = std::abs(t(il, il - 1));
            if (sub <= kEps * (scale == 0.0 ? anorm : scale)) {
                t(il, il - 1) = 0.0;
                break;
            }
            --il;
        }
        if (il == iu) {
            --iu;
            iter = 0;
            continue;
        }
        ++iter;
        ++total;
        if (iter > max_iter_per_eig * 10 || total > max_iter_per_eig * n * 10)
            throw Error(ErrorCode::NonConvergence, "complex QR iteration did not converge");

        Complex shift;
        if (iter == 10 || iter == 30) {
            shift = std::abs(t(iu, iu - 1).real()) + (iu >= 2 ? std::abs(t(iu - 1, iu - 2).real()) : 0.0);
            shift += t(iu, iu);
        } else {
            shift = wilkinson_shift(t, iu);
        }

        Givens g = Givens::make(t(il, il) - shift, t(il + 1, il));
        g.apply_left(t, il, il + 1, il, n);
        g.apply_right_adjoint(t, il, il + 1, 0, std::min(il + 3, iu + 1));
        g.apply_right_adjoint(z, il, il + 1, 0, n);

        for (std::size_t k = il + 1; k < iu; ++k) {
            g = Givens::make(t(k, k - 1), t(k + 1, k - 1));
            g.apply_left(t, k, k + 1, k - 1, n);
            t(k + 1, k - 1) = 0.0;
            g.apply_right_adjoint(t, k, k + 1, 0, std::min(k + 3, iu + 1));
            g.apply_right_adjoint(z, k, k + 1, 0, n);
        }
    }
    for (std::size_t r = 1; r < n; ++r)
        for (std::size_t c = 0; c < r; ++c) t(r, c) = 0.0;
}

/// Scale so the largest-magnitude component is real and positive.
void fix_phase(CVector& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best]) * (1.0 + 1e-12)) best = i;
    const double a = std::abs(v[best]);
    if (a == 0.0) return;
    const Complex ph = std::conj(v[best]) / a;
    for (auto& x : v) x *= ph;
}

}  // namespace

bool is_hermitian(const ComplexMatrix& m, double rel_tol) {
    return m.hermiticity_defect() <= rel_tol * std::max(1.0, m.frobenius_norm());
}

Spectrum eig_general(const ComplexMatrix& m) {
    require_finite(m, "eig_general");
    const std::size_t n = m.dim();

    ComplexMatrix t = m;
    ComplexMatrix z;
    hessenberg(t, z);
    schur_from_hessenberg(t, z);

    const double smin = std::max(kEps * t.frobenius_norm(), std::numeric_limits<double>::min());

    // Right eigenvectors of T by back substitution, left ones from T^dagger
    // by forward substitution; both mapped back through z.
    std::vector<CVector> right(n), left(n);
    CVector x(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Complex lambda = t(k, k);

        std::fill(x.begin(), x.end(), Complex{});
        x[k] = 1.0;
        for (std::size_t ii = k; ii-- > 0;) {
            Complex s = 0.0;
            for (std::size_t j = ii + 1; j <= k; ++j) s += t(ii, j) * x[j];
            Complex d = t(ii, ii) - lambda;
            if (std::abs(d) < smin) d = smin;
            x[ii] = -s / d;
        }
        right[k] = normalized(z * std::span<const Complex>(x));

        std::fill(x.begin(), x.end(), Complex{});
        x[k] = 1.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            Complex s = 0.0;
            for (std::size_t j = k; j < i; ++j) s += std::conj(t(j, i)) * x[j];
            Complex d = std::conj(t(i, i)) - std::conj(lambda);
            if (std::abs(d) < smin) d = smin;
            x[i] = -s / d;
        }
        left[k] = normalized(z * std::span<const Complex>(x));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Complex ea = t(a, a), eb = t(b, b);
        if (ea.real() != eb.real()) return ea.real() < eb.real();
        return ea.imag() < eb.imag();
    });

    Spectrum out;
    out.eigenvalues.reserve(n);
    for (std::size_t idx : order) {
        const Complex e = t(idx, idx);
        CVector r = std::move(right[idx]);
        CVector l = std::move(left[idx]);
        fix_phase(r);
        fix_phase(l);
        const CVector hr = m * std::span<const Complex>(r);
        out.residual_norm.push_back(norm(axpy(-e, r, hr)));
        if (std::abs(dot(l, r)) < kDefectiveThreshold) out.defective = true;
        out.eigenvalues.push_back(e);
        out.right.push_back(std::move(r));
        out.left.push_back(std::move(l));
    }
    return out;
}

HermitianEigen eig_hermitian(const ComplexMatrix& m) {
    require_hermitian(m, "eig_hermitian");
    const std::size_t n = m.dim();
    ComplexMatrix a = m;
    // Symmetrize exactly so the rotations act on a truly Hermitian matrix.
    for (std::size_t r = 0; r < n; ++r) {
        a(r, r) = a(r, r).real();
        for (std::size_t c = r + 1; c < n; ++c) {
            const Complex avg = 0.5 * (a(r, c) + std::conj(a(c, r)));
            a(r, c) = avg;
            a(c, r) = std::conj(avg);
        }
    }
    ComplexMatrix w = ComplexMatrix::identity(n);

    const double total = std::max(a.frobenius_norm(), std::numeric_limits<double>::min());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += std::norm(a(p, q));
        if (std::sqrt(off) <= 1e-15 * total) break;
        if (sweep == 99) throw Error(ErrorCode::NonConvergence, "Jacobi sweeps did not converge");

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double beta = std::abs(a(p, q));
                if (beta == 0.0) continue;
                const Complex phase = a(p, q) / beta;  // e^{i phi}
                const double tau = (a(q, q).real() - a(p, p).real()) / (2.0 * beta);
                const double tt = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + tt * tt);
                const double s = tt * c;
                // V = diag(1, conj(phase)) * [[c, s], [-s, c]] on the (p, q) plane
                const Complex vpp = c, vpq = s;
                const Complex vqp = -s * std::conj(phase), vqq = c * std::conj(phase);
                for (ComplexMatrix* target : {&a, &w}) {
                    ComplexMatrix& t = *target;
                    for (std::size_t i = 0; i < n; ++i) {
                        const Complex x = t(i, p), y = t(i, q);
                        t(i, p) = x * vpp + y * vqp;
                        t(i, q) = x * vpq + y * vqq;
                    }
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const Complex x = a(p, j), y = a(q, j);
                    a(p, j) = std::conj(vpp) * x + std::conj(vqp) * y;
                    a(q, j) = std::conj(vpq) * x + std::conj(vqq) * y;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
    HermitianEigen out;
    for (std::size_t idx : order) {
        out.values.push_back(a(idx, idx).real());
        CVector v = w.column(idx);
        fix_phase(v);
        out.vectors.push_back(std::move(v));
    }
    return out;
}

std::size_t numerical_rank(const ComplexMatrix& m, double rel_tol) {
    if (!(rel_tol > 0.0)) throw Error(ErrorCode::BadSpec, "numerical_rank: rel_tol must be positive");
    const auto eig = eig_hermitian(m);
    double biggest = 0.0;
    for (double v : eig.values) biggest = std::max(biggest, std::abs(v));
    if (biggest == 0.0) return 0;
    return static_cast<std::size_t>(
        std::count_if(eig.values.begin(), eig.values.end(), [&](double v) { return std::abs(v) > rel_tol * biggest; }));
}

bool is_positive_semidefinite(const ComplexMatrix& m, double tol) {
    const auto eig = eig_hermitian(m);
    double biggest = 0.0;
    for (double v : eig.values) biggest = std::max(biggest, std::abs(v));
    return eig.values.front() >= -tol * std::max(1.0, biggest);
}

ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b) {
    const std::size_t n = a.dim();
    if (b.dim() != n) throw Error(ErrorCode::BadShape, "solve: dim mismatch");
    ComplexMatrix lu = a;
    ComplexMatrix x = b;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
        if (lu(piv, k) == Complex{}) throw Error(ErrorCode::NonFinite, "solve: singular matrix");
        if (piv != k)
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(lu(k, j), lu(piv, j));
                std::swap(x(k, j), x(piv, j));
            }
        for (std::size_t i = k + 1; i < n; ++i) {
            const Complex f = lu(i, k) / lu(k, k);
            if (f == Complex{}) continue;
            for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
            for (std::size_t j = 0; j < n; ++j) x(i, j) -= f * x(k, j);
        }
    }
    for (std::size_t col = 0; col < n; ++col)
        for (std::size_t ii = n; ii-- > 0;) {
            Complex s = x(ii, col);
            for (std::size_t j = ii + 1; j < n; ++j) s -= lu(ii, j) * x(j, col);
            x(ii, col) = s / lu(ii, ii);
        }
    return x;
}

// Scaling and squaring with a degree-13 Pade approximant (Higham 2005).
ComplexMatrix expm(const ComplexMatrix& m) {
    require_finite(m, "expm");
    const double norm1 = m.one_norm();
    if (norm1 > kExpmNormCap)
        throw Error(ErrorCode::OverflowRisk, "expm: 1-norm " + std::to_string(norm1) + " exceeds cap");

    static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                   1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                   670442572800.0,      33522128640.0,       1323241920.0,
                                   40840800.0,          960960.0,            16380.0,
                                   182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    int s = 0;
    if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
    const ComplexMatrix a = m * Complex(std::ldexp(1.0, -s));
    const std::size_t n = m.dim();
    const ComplexMatrix id = ComplexMatrix::identity(n);
    const ComplexMatrix a2 = a * a;
    const ComplexMatrix a4 = a2 * a2;
    const ComplexMatrix a6 = a4 * a2;

    const ComplexMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                                  b[3] * a2 + b[1] * id;
    const ComplexMatrix u = a * u_inner;
    const ComplexMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
                            b[0] * id;
    ComplexMatrix r = solve(v - u, v + u);
    for (int i = 0; i < s; ++i) r = r * r;
    return r;
}

}  // namespace nonortho
