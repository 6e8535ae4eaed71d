#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "nonortho/complex_matrix.hpp"

namespace nonortho {

enum class BuilderTag { RandomFig1, ChainFig1, SingleChannel, PTDimer, RandomPsd, FromFile };
enum class HermitianKind { UniformRandom, TightBindingChain };

const char* to_string(BuilderTag tag) noexcept;
const char* to_string(HermitianKind kind) noexcept;

/// H together with its Hermitian part and decay matrix Gamma = i(H - H^dagger),
/// so that h == hermitian_part - (i/2) gamma.
struct EffectiveHamiltonian {
    ComplexMatrix h;
    ComplexMatrix hermitian_part;
    ComplexMatrix gamma;
    BuilderTag builder = BuilderTag::FromFile;
    std::optional<std::uint64_t> seed;

    std::size_t dim() const noexcept { return h.dim(); }

    /// Assemble from the Hermitian part and the decay matrix; h is formed from them.
    static EffectiveHamiltonian from_parts(ComplexMatrix hermitian_part, ComplexMatrix gamma, BuilderTag tag,
                                           std::optional<std::uint64_t> seed = std::nullopt);
    /// Derive the Hermitian part and Gamma from an arbitrary H.
    static EffectiveHamiltonian from_matrix(ComplexMatrix h, BuilderTag tag = BuilderTag::FromFile);
};

/// Settings of the rank-sweep ensemble: N x N Hamiltonians written in the
/// eigenbasis of a diagonal Gamma whose first M entries are drawn from
/// (decay_low, decay_high] and whose remaining entries vanish.
struct EnsembleSpec {
    std::size_t dim = 20;
    std::size_t decay_rank = 1;
    HermitianKind hermitian_kind = HermitianKind::UniformRandom;
    double decay_low = 0.0;
    double decay_high = 2.0;
    std::size_t realizations = 50;
    std::uint64_t seed = 20200101;

    /// Throws Error{BadSpec}.
    void validate() const;
};

ComplexMatrix tight_binding_chain(std::size_t n, double coupling = 1.0);

/// Deterministic in (spec, realization_index): the random stream is
/// keyed by both, so realizations can be built in any order or in parallel.
EffectiveHamiltonian build_fig1(const EnsembleSpec& spec, std::size_t realization_index);

/// H = h0 - (i/2) w w^dagger.
EffectiveHamiltonian build_single_channel(std::size_t n, const ComplexMatrix& h0, std::span<const Complex> w);

/// H = [[+i gamma/2, g], [g, -i gamma/2]]: gain on site 0, loss on site 1.
/// The eigenvalues coalesce at zero for g = gamma/2.
EffectiveHamiltonian build_pt_dimer(double g, double gamma);

/// Generic open system: complex Gaussian Hermitian part, Gamma = sum of
/// `rank` projectors w w^dagger onto complex Gaussian vectors (PSD).
EffectiveHamiltonian build_random_psd(std::size_t n, std::size_t rank, std::uint64_t seed, std::uint64_t stream = 0);

/// Unit vector with complex Gaussian components.
CVector random_state(std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

EffectiveHamiltonian load_hamiltonian(const std::string& path);
void save_hamiltonian(const EffectiveHamiltonian& h, const std::string& path);

}  // namespace nonortho
