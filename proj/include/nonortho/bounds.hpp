#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nonortho/hamiltonian.hpp"
#include "nonortho/linalg.hpp"

namespace nonortho {

/// Square real table; NaN marks an undefined entry.
class RealMatrix {
public:
    RealMatrix() = default;
    explicit RealMatrix(std::size_t dim, double fill = 0.0) : dim_(dim), data_(dim * dim, fill) {}

    std::size_t dim() const noexcept { return dim_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// How decay rates gamma_j = -2 Im E_j enter the bound. Absolute uses |gamma_j|,
/// the form under which the bound also covers pure-gain (negative
/// semi-definite Gamma) systems.
enum class RateConvention { Signed, Absolute };

/// Rates with |gamma| <= kRateFloor * max(1, max|E|) are treated as exactly zero.
inline constexpr double kRateFloor = 1e-12;
/// Overlaps with |<psi_l|psi_j>| <= kOverlapFloor count as zero when forming 0/0.
inline constexpr double kOverlapFloor = 1e-10;
/// biorth_report refuses spectra with |<L_j|R_j>| below this.
inline constexpr double kEpThreshold = 1e-10;

/// Lee-Wolfenstein bookkeeping for all eigenpairs of one Hamiltonian.
///
/// lw_rhs(l, j) = gamma_l gamma_j / (Delta_lj^2 + (gamma_l + gamma_j)^2 / 4) and
/// xi(l, j) = |overlaps(l, j)|^2 / lw_rhs(l, j). xi is NaN when undefined
/// (0/0) and +inf when the bound is violated with a non-positive right-hand
/// side (gain and loss together, e.g. at an exceptional point).
struct OverlapReport {
    std::size_t dim = 0;
    Spectrum spectrum;
    ComplexMatrix overlaps;
    RealMatrix detunings;
    std::vector<double> rates;
    RealMatrix lw_rhs;
    RealMatrix xi;
    std::size_t gamma_rank = 0;
    /// 1 / |<L_j|R_j>|, the eigenvalue condition number.
    std::vector<double> sensitivity;

    bool xi_defined(std::size_t l, std::size_t j) const { return !std::isnan(xi(l, j)); }
};

OverlapReport overlap_report(const EffectiveHamiltonian& h, RateConvention rates = RateConvention::Signed);

/// Right-hand side of the bound for a single pair; shared by the matrix and
/// wave-system code. Returns +/-inf when the denominator vanishes with a
/// nonzero numerator and 0 for 0/0.
double lw_rhs(double detuning, double rate_l, double rate_j);

struct LwViolation {
    std::size_t l = 0;
    std::size_t j = 0;
    double xi = 0.0;
};

struct LwCheck {
    bool holds = true;
    double max_xi = 0.0;
    std::size_t defined_pairs = 0;
    std::vector<LwViolation> violating_pairs;
};

/// Off-diagonal pairs only; holds iff every defined xi <= 1 + tol.
LwCheck check_lw(const OverlapReport& report, double tol = 1e-8);

struct XiAverage {
    double mean = 0.0;
    std::size_t defined = 0;
    std::size_t undefined = 0;
};

/// Mean of xi over defined pairs l > j. Throws Error{AllUndefined}.
XiAverage xi_average(const OverlapReport& report);

struct SweepRow {
    std::size_t rank = 0;
    double mean_xi = 0.0;
    double std_xi = 0.0;
    double prediction = 0.0;
    std::size_t realizations = 0;
    std::size_t undefined_pairs = 0;
};

/// For each M runs spec.realizations builds of build_fig1 and averages
/// xi_average. Realizations are spread over `threads` workers (0 = hardware
/// concurrency) and aggregated in index order, so results do not depend on it.
std::vector<SweepRow> ensemble_sweep(const EnsembleSpec& spec, const std::vector<std::size_t>& m_values,
                                     unsigned threads = 1);

struct BiorthReport {
    ComplexMatrix o_matrix;
    RealMatrix normalized_o;
    ComplexMatrix right_overlaps;
    ComplexMatrix left_overlaps;
    std::vector<double> sensitivity;
    /// max over pairs of | normalized_o - |<R_l|R_j>||<L_l|L_j>| |
    double identity_defect = 0.0;
};

/// Throws Error{EigenvalueMatchFailure} when some |<L_j|R_j>| < kEpThreshold.
BiorthReport biorth_report(const EffectiveHamiltonian& h);
BiorthReport biorth_report(const Spectrum& spectrum);

struct BiorthCheck {
    bool holds = true;
    double max_excess = 0.0;  // max(normalized_o - lw_rhs) over defined pairs
};

BiorthCheck check_biorth(const BiorthReport& bi, const OverlapReport& report, double tol = 1e-8);

/// <psi|Gamma|psi>
double decay_expectation(const EffectiveHamiltonian& h, std::span<const Complex> psi);

/// Central difference of <psi(t)|psi(t)> at t = 0 with psi(t) = exp(-iHt) psi.
double norm_derivative_fd(const EffectiveHamiltonian& h, std::span<const Complex> psi, double dt = 1e-5);

}  // namespace nonortho
