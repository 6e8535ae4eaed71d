#include "nonortho/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nonortho/error.hpp"

namespace nonortho {

HalfPlanePoint::HalfPlanePoint(Complex e) : e_(e) {
    if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
        throw Error(ErrorCode::NonFinite, "half-plane point is not finite");
    if (e.imag() > kHalfPlaneClamp)
        throw Error(ErrorCode::UpperHalfPlaneEigenvalue, "point lies in the upper half-plane");
    if (e.imag() > 0.0) e_ = Complex(e.real(), 0.0);
}

double d_hs(std::span<const Complex> psi1, std::span<const Complex> psi2) {
    if (std::abs(norm(psi1) - 1.0) > 1e-10 || std::abs(norm(psi2) - 1.0) > 1e-10)
        throw Error(ErrorCode::NotNormalized, "d_hs expects unit vectors");
    const double ov = std::abs(dot(psi1, psi2));
    return std::sqrt(std::clamp(1.0 - ov * ov, 0.0, 1.0));
}

double d_ph(HalfPlanePoint p1, HalfPlanePoint p2) {
    const Complex e1 = p1.value(), e2 = p2.value();
    const double den = std::abs(std::conj(e1) - e2);
    if (den == 0.0) throw Error(ErrorCode::DegenerateDenominator, "both points coincide on the real axis");
    return std::min(1.0, std::abs(e1 - e2) / den);
}

double d_poincare(HalfPlanePoint e1, HalfPlanePoint e2) {
    const double x = d_ph(e1, e2);
    if (x >= 1.0) throw Error(ErrorCode::InfiniteDistance, "pseudo-hyperbolic distance is 1");
    return 2.0 * std::atanh(x);
}

namespace {

std::vector<HalfPlanePoint> lower_half_plane(const Spectrum& spectrum) {
    std::vector<HalfPlanePoint> pts;
    pts.reserve(spectrum.size());
    for (const auto& e : spectrum.eigenvalues) pts.emplace_back(e);
    return pts;
}

}  // namespace

DistanceCheck check_distance_inequality(const Spectrum& spectrum, double tol) {
    const auto pts = lower_half_plane(spectrum);
    DistanceCheck out;
    const std::size_t n = spectrum.size();
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = l + 1; j < n; ++j) {
            const Complex el = pts[l].value(), ej = pts[j].value();
            if (std::abs(std::conj(el) - ej) == 0.0) {
                ++out.skipped;
                continue;
            }
            PairMargin pm;
            pm.l = l;
            pm.j = j;
            pm.d_hs = d_hs(spectrum.right[l], spectrum.right[j]);
            pm.d_ph = d_ph(pts[l], pts[j]);
            pm.tanh_half_dp = pm.d_ph < 1.0 ? std::tanh(0.5 * d_poincare(pts[l], pts[j])) : 1.0;
            pm.margin = pm.d_hs - pm.d_ph;
            if (pm.margin < -tol) out.holds = false;
            out.margins.push_back(pm);
        }
    return out;
}

PolygonResult polygon_inequality(const Spectrum& spectrum, std::span<const std::size_t> ordering, double tol) {
    if (ordering.size() < 2) throw Error(ErrorCode::BadOrdering, "ordering needs at least two states");
    std::vector<std::size_t> seen(ordering.begin(), ordering.end());
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw Error(ErrorCode::BadOrdering, "ordering repeats a state");
    if (seen.back() >= spectrum.size()) throw Error(ErrorCode::BadOrdering, "ordering index out of range");

    PolygonResult out;
    for (std::size_t k = 0; k + 1 < ordering.size(); ++k) {
        const std::size_t a = ordering[k], b = ordering[k + 1];
        out.lhs_sum += d_hs(spectrum.right[a], spectrum.right[b]);
        out.rhs_sum += d_ph(HalfPlanePoint(spectrum.eigenvalues[a]), HalfPlanePoint(spectrum.eigenvalues[b]));
    }
    out.holds = out.lhs_sum >= out.rhs_sum - tol;
    return out;
}

std::vector<std::size_t> default_ordering(const Spectrum& spectrum) {
    std::vector<std::size_t> order(spectrum.size());
    std::iota(order.begin(), order.end(), 0);
    return order;
}

}  // namespace nonortho
