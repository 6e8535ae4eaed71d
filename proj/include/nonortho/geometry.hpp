#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nonortho/complex_matrix.hpp"
#include "nonortho/linalg.hpp"

namespace nonortho {

/// Eigenvalues above the real axis by at most this much are treated as real.
inline constexpr double kHalfPlaneClamp = 1e-12;

/// A point of the closed lower half-plane (complex energy, frequency or
/// wavenumber of a decaying state).
class HalfPlanePoint {
public:
    /// Throws Error{UpperHalfPlaneEigenvalue} for Im e > kHalfPlaneClamp.
    explicit HalfPlanePoint(Complex e);

    Complex value() const noexcept { return e_; }

private:
    Complex e_;
};

/// sqrt(1 - |<a|b>|^2) for unit vectors. Throws Error{NotNormalized}.
double d_hs(std::span<const Complex> psi1, std::span<const Complex> psi2);

/// |e1 - e2| / |e1* - e2|. Throws Error{DegenerateDenominator} when both
/// points sit on the same spot of the real axis.
double d_ph(HalfPlanePoint e1, HalfPlanePoint e2);

/// 2 artanh(d_ph). Throws Error{InfiniteDistance} when d_ph reaches 1.
double d_poincare(HalfPlanePoint e1, HalfPlanePoint e2);

struct PairMargin {
    std::size_t l = 0;
    std::size_t j = 0;
    double d_hs = 0.0;
    double d_ph = 0.0;
    double tanh_half_dp = 0.0;  // tanh(d_P / 2); 1 when d_P is infinite
    double margin = 0.0;        // d_hs - d_ph
};

struct DistanceCheck {
    bool holds = true;
    std::vector<PairMargin> margins;
    /// Pairs skipped because both eigenvalues coincide on the real axis.
    std::size_t skipped = 0;
};

/// d_HS(psi_l, psi_j) >= d_ph(E_l, E_j) for every pair of right eigenvectors.
/// Throws Error{UpperHalfPlaneEigenvalue}.
DistanceCheck check_distance_inequality(const Spectrum& spectrum, double tol = 1e-8);

struct PolygonResult {
    double lhs_sum = 0.0;  // Hilbert-space course length; doubles as the EP-search cost
    double rhs_sum = 0.0;  // energy-space course length
    bool holds = true;
};

/// Throws Error{BadOrdering} for fewer than two, repeated, or out-of-range indices.
PolygonResult polygon_inequality(const Spectrum& spectrum, std::span<const std::size_t> ordering, double tol = 1e-8);

/// Ascending real part, i.e. the spectrum's own order.
std::vector<std::size_t> default_ordering(const Spectrum& spectrum);

}  // namespace nonortho
