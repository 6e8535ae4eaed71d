#pragma once

#include <cstddef>
#include <vector>

#include "nonortho/complex_matrix.hpp"

namespace nonortho {

/// Eigen-decomposition of a general complex matrix.
///
/// Eigenpairs are sorted by ascending real part, ties by ascending imaginary
/// part. Right and left vectors are individually unit-normalized; left[j]
/// satisfies <left[j]| m = eigenvalues[j] <left[j]|, and <left[l]|right[j]> = 0
/// for l != j. `defective` is raised when some |<L_j|R_j>| drops below
/// kDefectiveThreshold, i.e. the eigenvector matrix is numerically singular
/// (exceptional-point proximity). Such a spectrum is still returned.
struct Spectrum {
    std::vector<Complex> eigenvalues;
    std::vector<CVector> right;
    std::vector<CVector> left;
    std::vector<double> residual_norm;
    bool defective = false;

    std::size_t size() const noexcept { return eigenvalues.size(); }
};

struct HermitianEigen {
    std::vector<double> values;    // ascending
    std::vector<CVector> vectors;  // orthonormal, vectors[j] belongs to values[j]
};

inline constexpr double kDefectiveThreshold = 1e-6;
inline constexpr double kDefaultRankTol = 1e-10;
/// Relative tolerance ||m - m^dagger||_F <= tol * max(1, ||m||_F) for "Hermitian".
inline constexpr double kHermiticityTol = 1e-10;
/// expm refuses inputs whose 1-norm exceeds this (e^700 is near double overflow).
inline constexpr double kExpmNormCap = 700.0;

/// Throws Error{NonConvergence} when the QR iteration exceeds its cap,
/// Error{NonFinite} on NaN/Inf input.
Spectrum eig_general(const ComplexMatrix& m);

/// Throws Error{NotHermitian}.
HermitianEigen eig_hermitian(const ComplexMatrix& m);

/// Number of eigenvalues with |lambda| > rel_tol * max|lambda|; 0 for the zero matrix.
std::size_t numerical_rank(const ComplexMatrix& m, double rel_tol = kDefaultRankTol);

/// min eigenvalue >= -tol * max(1, max|lambda|)
bool is_positive_semidefinite(const ComplexMatrix& m, double tol = 1e-12);

ComplexMatrix expm(const ComplexMatrix& m);

/// Solve a * x = b (columns of b) by LU with partial pivoting.
ComplexMatrix solve(const ComplexMatrix& a, const ComplexMatrix& b);

bool is_hermitian(const ComplexMatrix& m, double rel_tol = kHermiticityTol);

}  // namespace nonortho
