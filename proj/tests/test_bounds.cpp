#include <doctest.h>

#include <cmath>

#include "nonortho/bounds.hpp"
#include "nonortho/error.hpp"
#include "nonortho/rng.hpp"

using namespace nonortho;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::Io;
}

EffectiveHamiltonian random_single_channel(std::size_t n, std::uint64_t stream) {
    const auto base = build_random_psd(n, 0, 555, stream);
    return build_single_channel(n, base.hermitian_part, random_state(n, 556, stream));
}

}  // namespace

TEST_CASE("bound right-hand side") {
    CHECK(lw_rhs(0.0, 0.7, 0.7) == doctest::Approx(1.0));
    CHECK(lw_rhs(1.0, 1.0, 1.0) == doctest::Approx(0.5));
    CHECK(lw_rhs(0.0, 0.0, 0.0) == 0.0);
    CHECK(lw_rhs(2.0, 0.0, 1.0) == 0.0);
    CHECK(lw_rhs(0.0, 1.0, -1.0) == -INFINITY);
}

TEST_CASE("closed system: every pair undefined") {
    const auto h = EffectiveHamiltonian::from_matrix(tight_binding_chain(5));
    const auto rep = overlap_report(h);
    for (std::size_t j = 0; j < 5; ++j) CHECK(rep.rates[j] == 0.0);
    for (std::size_t l = 0; l < 5; ++l)
        for (std::size_t j = 0; j < 5; ++j) {
            if (l != j) {
                CHECK(std::abs(rep.overlaps(l, j)) <= 1e-12);
                CHECK_FALSE(rep.xi_defined(l, j));
            }
            CHECK(rep.overlaps(l, j) == std::conj(rep.overlaps(j, l)));
        }
    CHECK(check_lw(rep).holds);
    CHECK(check_lw(rep).defined_pairs == 0);
    CHECK(code_of([&] { xi_average(rep); }) == ErrorCode::AllUndefined);
    CHECK(rep.gamma_rank == 0);

    const auto bi = biorth_report(h);
    for (std::size_t l = 0; l < 5; ++l)
        for (std::size_t j = 0; j < 5; ++j) CHECK(bi.normalized_o(l, j) == doctest::Approx(l == j ? 1.0 : 0.0));
}

TEST_CASE("orthogonal decaying modes give xi = 0") {
    const std::vector<Complex> d{Complex(0.0, -1.0), Complex(1.0, -1.0)};
    const auto rep = overlap_report(EffectiveHamiltonian::from_matrix(ComplexMatrix::diagonal(std::span<const Complex>(d))));
    CHECK(rep.xi(0, 1) == 0.0);
    CHECK(xi_average(rep).mean == 0.0);
}

TEST_CASE("2x2 single channel saturates the bound (closed-form oracle)") {
    const ComplexMatrix h0{{0.0, 0.0}, {0.0, 0.3}};
    const CVector w{1.0, 1.0};
    const auto h = build_single_channel(2, h0, w);
    const auto rep = overlap_report(h);

    // oracle: quadratic formula for [[a, b], [c, d]] and eigenvectors (b, lambda - a)
    const Complex a = h.h(0, 0), b = h.h(0, 1), c = h.h(1, 0), d = h.h(1, 1);
    const Complex disc = std::sqrt((a - d) * (a - d) + 4.0 * b * c);
    const Complex e1 = 0.5 * (a + d + disc), e2 = 0.5 * (a + d - disc);
    CVector v1{b, e1 - a}, v2{b, e2 - a};
    v1 = normalized(v1);
    v2 = normalized(v2);
    const double ov2 = std::norm(dot(v1, v2));
    const double rhs = lw_rhs(e1.real() - e2.real(), -2.0 * e1.imag(), -2.0 * e2.imag());
    CHECK(ov2 / rhs == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.xi(0, 1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rep.xi(0, 1) * rep.lw_rhs(0, 1) == doctest::Approx(std::norm(rep.overlaps(0, 1))));

    const auto bi = biorth_report(h);
    CHECK(bi.normalized_o(0, 1) <= rep.lw_rhs(0, 1) + 1e-8);
}

TEST_CASE("rank-1 equality over seeded single-channel systems") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        const std::size_t n = 2 + s % 15;
        const auto rep = overlap_report(random_single_channel(n, s));
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t j = l + 1; j < n; ++j)
                if (rep.xi_defined(l, j)) CHECK(std::abs(rep.xi(l, j) - 1.0) <= 1e-6);
        CHECK(xi_average(rep).mean == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("bound and biorthogonal form hold for PSD decay") {
    for (std::uint64_t s = 0; s < 40; ++s) {
        const std::size_t n = 2 + (s * 7) % 30;
        const auto h = build_random_psd(n, 1 + s % n, 900, s);
        const auto rep = overlap_report(h);
        CHECK(check_lw(rep, 1e-8).holds);
        const auto bi = biorth_report(rep.spectrum);
        CHECK(check_biorth(bi, rep, 1e-8).holds);
        CHECK(bi.identity_defect <= 1e-10);
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(bi.o_matrix(j, j).real() >= 1.0 - 1e-12);
            // <psi_j|Gamma|psi_j> = gamma_j
            CHECK(decay_expectation(h, rep.spectrum.right[j]) == doctest::Approx(rep.rates[j]).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("pure gain satisfies the bound with absolute rates") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto psd = build_random_psd(6, 2, 31, s);
        const auto gain = EffectiveHamiltonian::from_parts(psd.hermitian_part, psd.gamma * Complex(-1.0), BuilderTag::FromFile);
        CHECK(check_lw(overlap_report(gain, RateConvention::Absolute), 1e-8).holds);
    }
}

TEST_CASE("norm decays at rate <psi|Gamma|psi>") {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto h = build_random_psd(7, 3, 77, s);
        const auto psi = random_state(7, 78, s);
        const double fd = norm_derivative_fd(h, psi);
        CHECK(fd <= 0.0);
        CHECK(fd == doctest::Approx(-decay_expectation(h, psi)).epsilon(1e-6));
    }
}

TEST_CASE("gain and loss break the bound past the exceptional point") {
    const auto rep = overlap_report(build_pt_dimer(0.499, 1.0));
    const auto lw = check_lw(rep);
    CHECK_FALSE(lw.holds);
    REQUIRE(lw.violating_pairs.size() == 1);
    CHECK(lw.violating_pairs[0].xi > 1.0);
    CHECK(std::abs(rep.overlaps(0, 1)) == doctest::Approx(0.998).epsilon(1e-9));

    CHECK(code_of([] { biorth_report(EffectiveHamiltonian::from_matrix(ComplexMatrix{{1.0, 1.0}, {0.0, 1.0}})); }) ==
          ErrorCode::EigenvalueMatchFailure);
}

TEST_CASE("ensemble sweep") {
    EnsembleSpec spec;
    spec.dim = 10;
    spec.realizations = 6;
    const auto rows = ensemble_sweep(spec, {1, 3, 10}, 1);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].mean_xi == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rows[0].std_xi <= 1e-8);
    CHECK(rows[2].prediction == doctest::Approx(0.1));
    CHECK(rows[1].realizations == 6);

    const auto threaded = ensemble_sweep(spec, {1, 3, 10}, 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(threaded[i].mean_xi == rows[i].mean_xi);
        CHECK(threaded[i].std_xi == rows[i].std_xi);
    }
    CHECK(code_of([&] { ensemble_sweep(spec, {0}); }) == ErrorCode::BadSpec);
    CHECK(code_of([&] { ensemble_sweep(spec, {11}); }) == ErrorCode::BadSpec);
}
