#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nonortho/complex_matrix.hpp"

namespace nonortho {

// Units: hbar = 2m = 1 (E = k^2, hbar/m = 2) and c = 1 (omega = k).

enum class WaveMode { Schrodinger, Helmholtz };

/// Open: free space on both sides with outgoing waves.
/// Wall: Dirichlet wall at the first breakpoint (half-line problem, only the
/// right side radiates).
enum class LeftBoundary { Open, Wall };

const char* to_string(WaveMode mode) noexcept;

/// Piecewise-constant potential V (Schrodinger) or permittivity eps
/// (Helmholtz) on [x_0, x_K], free space (V = 0, eps = 1) outside.
/// Absorption is Im V <= 0 resp. Im eps >= 0; the opposite sign is gain.
struct PiecewisePotential {
    WaveMode mode = WaveMode::Schrodinger;
    std::vector<double> breakpoints;
    std::vector<Complex> values;
    LeftBoundary left = LeftBoundary::Open;

    /// Throws Error{BadSpec}.
    void validate() const;
    std::size_t intervals() const noexcept { return values.size(); }
    double support_begin() const { return breakpoints.front(); }
    double support_end() const { return breakpoints.back(); }
    bool has_gain() const;
    bool absorption_free() const;

    bool operator==(const PiecewisePotential&) const = default;
};

/// { "mode": "schrodinger"|"helmholtz", "breakpoints": [...], "values_re": [...],
///   "values_im": [...], "left_boundary": "open"|"wall" (optional) }
PiecewisePotential potential_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PiecewisePotential& p);
PiecewisePotential load_potential(const std::string& path);

/// Integration region Omega = [a, b].
struct Region {
    double a = 0.0;
    double b = 0.0;
};

/// Smallest region containing the potential support.
Region support_region(const PiecewisePotential& p);

/// A decaying solution with outgoing-wave conditions.
///
/// Region r of the wavefunction is 0 = left exterior, 1..K = the potential
/// intervals, K+1 = right exterior. In region r,
///   psi(x) = coeffs[r][0] e^{i q_r (x - x_ref)} + coeffs[r][1] e^{-i q_r (x - x_ref)}
/// with x_ref the left breakpoint of the interval (x_0 for the left exterior,
/// x_K for the right one). Coefficients are scaled so that the largest
/// interior magnitude is 1.
struct QuasiboundState {
    PiecewisePotential potential;
    Complex k;
    Complex energy;  // k^2 (Schrodinger) or omega = k (Helmholtz)
    std::vector<Complex> q;
    std::vector<std::array<Complex, 2>> coeffs;
    Complex zeta_left;   // psi = zeta_left e^{-ikx} for x < x_0
    Complex zeta_right;  // psi = zeta_right e^{ikx} for x > x_K
    double residual = 0.0;
};

/// psi and d psi / dx at x.
struct FieldValue {
    Complex psi;
    Complex dpsi;
};

FieldValue field(const QuasiboundState& s, double x);

/// Local wavenumber on the frozen branch Re q >= 0 (ties: Im q >= 0).
/// Throws Error{BranchAmbiguity} when q vanishes.
Complex local_wavenumber(WaveMode mode, Complex value, Complex k);

/// Maps absolute-phase amplitudes (A, B) of A e^{ikx} + B e^{-ikx} on the
/// far left to those on the far right; identity for V == 0. Ignores
/// LeftBoundary (always the open-system matrix).
std::array<std::array<Complex, 2>, 2> transfer_matrix(const PiecewisePotential& p, Complex k);

/// Vanishes exactly at resonances: M22 for an open system, the incoming
/// right amplitude B_R for the wall geometry.
Complex resonance_function(const PiecewisePotential& p, Complex k);

/// |resonance_function| divided by the product of the magnitudes of the
/// matrices it is assembled from, i.e. relative to the roundoff scale of
/// the product. Thick barriers make that scale large while the result
/// stays O(1), so this is the meaningful relative defect.
double relative_residual(const PiecewisePotential& p, Complex k);

struct SearchBox {
    double re_min = 0.2;
    double re_max = 8.0;
    double im_min = -1.0;
    double im_max = 0.0;
};

struct SearchOptions {
    std::size_t grid_re = 200;
    std::size_t grid_im = 100;
    std::size_t max_states = 64;
    unsigned threads = 1;
};

/// Argument-principle count of zeros of resonance_function inside the box.
int winding_count(const PiecewisePotential& p, const SearchBox& box);

/// Grid scan of |resonance_function| seeding complex Newton, cross-checked
/// (and refined by box subdivision) against winding_count. Sorted by Re k.
/// Throws Error{NoRootsFound}, Error{MaxStatesExceeded}.
std::vector<QuasiboundState> find_resonances(const PiecewisePotential& p, const SearchBox& box,
                                             const SearchOptions& opts = {});

/// Build the state belonging to a known root k (coefficients, far-field amplitudes).
QuasiboundState make_state(const PiecewisePotential& p, Complex k);

/// Newton polish of a resonance starting from a guess.
Complex polish_root(const PiecewisePotential& p, Complex guess);

/// <psi_1|psi_2> on Omega. Schrodinger: int psi_1^* psi_2 dx. Helmholtz: the
/// field-energy form (1/4) int (H_1^* H_2 + Re(eps) E_1^* E_2) dx with
/// H = E' / (i omega). Closed form per interval.
/// Throws Error{RegionTooSmall}.
Complex volume_overlap(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega);

struct HermitianFormParts {
    Complex surface;
    Complex absorption;
    Complex total() const { return surface + absorption; }
};

/// Surface flux term plus the absorption/gain term, such that
/// -i (E_1^* - E_2) <psi_1|psi_2> = (psi_1, psi_2).
HermitianFormParts hermitian_form_parts(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega);
Complex hermitian_form(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega);

/// e^{ikx}, a free Schrodinger wave.
struct PlaneWave {
    Complex k;
};

using Wave = std::variant<PlaneWave, QuasiboundState>;

/// Probability current 2 Im(psi^* psi') of sum_i a_i psi_i (Schrodinger
/// states and plane waves), or the cycle-averaged Poynting flux
/// (1/2) Re(E^* H) when every constituent is a Helmholtz state.
double current(std::span<const Wave> waves, std::span<const Complex> amplitudes, double x);

struct BackflowPoint {
    Complex alpha;
    double x = 0.0;
    double flux = 0.0;  // outward-normal current, negative here by construction
};

/// Outward current of s1 + alpha s2 on every (alpha, x) grid point outside
/// the potential support (normal +1 right of it, -1 left of it); returns
/// the points where it is negative. Grid points inside the support are skipped.
std::vector<BackflowPoint> backflow_scan(const QuasiboundState& s1, const QuasiboundState& s2,
                                         std::span<const Complex> alpha_grid, std::span<const double> x_grid);

struct ModifiedBound {
    double lhs = 0.0;        // |<1|2>|^2 / (<1|1><2|2>) on Omega
    double rhs = 0.0;        // bound from wavenumbers
    double xi_k = 0.0;
    double rhs_energy = 0.0; // bound from E = k^2 (Schrodinger) or omega = k
    double xi_energy = 0.0;
};

/// Throws Error{ZeroRHS} when the wavenumber bound vanishes,
/// Error{BadSpec} for identical states.
ModifiedBound modified_bound_check(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega);

}  // namespace nonortho
