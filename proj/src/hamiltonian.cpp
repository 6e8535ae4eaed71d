#include "nonortho/hamiltonian.hpp"

#include <cmath>

#include "nonortho/error.hpp"
#include "nonortho/linalg.hpp"
#include "nonortho/rng.hpp"

namespace nonortho {

namespace {
constexpr Complex kI{0.0, 1.0};
}

const char* to_string(BuilderTag tag) noexcept {
    switch (tag) {
        case BuilderTag::RandomFig1: return "RandomFig1";
        case BuilderTag::ChainFig1: return "ChainFig1";
        case BuilderTag::SingleChannel: return "SingleChannel";
        case BuilderTag::PTDimer: return "PTDimer";
        case BuilderTag::RandomPsd: return "RandomPsd";
        case BuilderTag::FromFile: return "FromFile";
    }
    return "Unknown";
}

const char* to_string(HermitianKind kind) noexcept {
    switch (kind) {
        case HermitianKind::UniformRandom: return "random";
        case HermitianKind::TightBindingChain: return "chain";
    }
    return "unknown";
}

EffectiveHamiltonian EffectiveHamiltonian::from_parts(ComplexMatrix hermitian_part, ComplexMatrix gamma,
                                                      BuilderTag tag, std::optional<std::uint64_t> seed) {
    if (hermitian_part.dim() != gamma.dim()) throw Error(ErrorCode::BadShape, "hermitian part and gamma differ in dim");
    EffectiveHamiltonian out;
    out.h = hermitian_part - gamma * Complex(0.0, 0.5);
    out.hermitian_part = std::move(hermitian_part);
    out.gamma = std::move(gamma);
    out.builder = tag;
    out.seed = seed;
    return out;
}

EffectiveHamiltonian EffectiveHamiltonian::from_matrix(ComplexMatrix h, BuilderTag tag) {
    if (h.empty()) throw Error(ErrorCode::BadShape, "empty Hamiltonian");
    if (!h.all_finite()) throw Error(ErrorCode::NonFinite, "Hamiltonian has non-finite entries");
    const ComplexMatrix hd = h.adjoint();
    EffectiveHamiltonian out;
    out.hermitian_part = (h + hd) * Complex(0.5);
    out.gamma = (h - hd) * kI;
    out.h = std::move(h);
    out.builder = tag;
    return out;
}

void EnsembleSpec::validate() const {
    if (dim < 1) throw Error(ErrorCode::BadSpec, "ensemble dim must be positive");
    if (decay_rank > dim) throw Error(ErrorCode::BadSpec, "decay rank exceeds dim");
    if (!(decay_low >= 0.0) || !(decay_high > decay_low))
        throw Error(ErrorCode::BadSpec, "decay interval must satisfy 0 <= low < high");
    if (realizations < 1) throw Error(ErrorCode::BadSpec, "realizations must be positive");
}

ComplexMatrix tight_binding_chain(std::size_t n, double coupling) {
    ComplexMatrix m(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        m(i, i + 1) = coupling;
        m(i + 1, i) = coupling;
    }
    return m;
}

EffectiveHamiltonian build_fig1(const EnsembleSpec& spec, std::size_t realization_index) {
    spec.validate();
    if (realization_index >= spec.realizations)
        throw Error(ErrorCode::BadSpec, "realization index out of range");
    const std::size_t n = spec.dim;
    Rng rng(spec.seed, realization_index);

    ComplexMatrix herm(n);
    BuilderTag tag = BuilderTag::RandomFig1;
    if (spec.hermitian_kind == HermitianKind::UniformRandom) {
        // Real symmetric, independent entries U[0,1) on and above the diagonal.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                const double a = rng.uniform();
                herm(i, j) = a;
                herm(j, i) = a;
            }
    } else {
        herm = tight_binding_chain(n);
        tag = BuilderTag::ChainFig1;
    }

    ComplexMatrix gamma(n);
    for (std::size_t i = 0; i < spec.decay_rank; ++i) gamma(i, i) = rng.uniform_left_open(spec.decay_low, spec.decay_high);

    return EffectiveHamiltonian::from_parts(std::move(herm), std::move(gamma), tag, spec.seed);
}

EffectiveHamiltonian build_single_channel(std::size_t n, const ComplexMatrix& h0, std::span<const Complex> w) {
    if (h0.dim() != n || w.size() != n) throw Error(ErrorCode::BadShape, "single channel: size mismatch");
    if (!h0.all_finite()) throw Error(ErrorCode::NonFinite, "single channel: h0 not finite");
    if (!is_hermitian(h0)) throw Error(ErrorCode::NotHermitian, "single channel: h0 is not Hermitian");
    if (norm(w) == 0.0) throw Error(ErrorCode::ZeroVector, "single channel: coupling vector is zero");
    return EffectiveHamiltonian::from_parts(h0, ComplexMatrix::outer(w, w), BuilderTag::SingleChannel);
}

EffectiveHamiltonian build_pt_dimer(double g, double gamma) {
    if (!(g >= 0.0) || !(gamma >= 0.0)) throw Error(ErrorCode::BadSpec, "PT dimer: g and gamma must be >= 0");
    ComplexMatrix herm{{0.0, g}, {g, 0.0}};
    // h = herm - (i/2) Gamma with Gamma = diag(-gamma, +gamma)
    ComplexMatrix decay{{-gamma, 0.0}, {0.0, gamma}};
    return EffectiveHamiltonian::from_parts(std::move(herm), std::move(decay), BuilderTag::PTDimer);
}

namespace {

CVector gaussian_vector(Rng& rng, std::size_t n) {
    CVector v(n);
    for (auto& z : v) {
        const double re = rng.normal();
        z = Complex(re, rng.normal());
    }
    return v;
}

}  // namespace

EffectiveHamiltonian build_random_psd(std::size_t n, std::size_t rank, std::uint64_t seed, std::uint64_t stream) {
    if (n < 1) throw Error(ErrorCode::BadSpec, "random system needs n >= 1");
    if (rank > n) throw Error(ErrorCode::BadSpec, "decay rank exceeds dim");
    Rng rng(seed, stream);
    ComplexMatrix herm(n);
    for (std::size_t i = 0; i < n; ++i) {
        herm(i, i) = rng.normal();
        for (std::size_t j = i + 1; j < n; ++j) {
            const double re = rng.normal();
            const Complex z(re, rng.normal());
            herm(i, j) = z * std::sqrt(0.5);
            herm(j, i) = std::conj(herm(i, j));
        }
    }
    ComplexMatrix gamma(n);
    for (std::size_t m = 0; m < rank; ++m) {
        const CVector w = gaussian_vector(rng, n);
        gamma += ComplexMatrix::outer(w, w) * Complex(1.0 / static_cast<double>(n));
    }
    return EffectiveHamiltonian::from_parts(std::move(herm), std::move(gamma), BuilderTag::RandomPsd, seed);
}

CVector random_state(std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    return normalized(gaussian_vector(rng, n));
}

EffectiveHamiltonian load_hamiltonian(const std::string& path) {
    return EffectiveHamiltonian::from_matrix(load_matrix(path), BuilderTag::FromFile);
}

void save_hamiltonian(const EffectiveHamiltonian& h, const std::string& path) { save_matrix(h.h, path); }

}  // namespace nonortho
