#include <doctest.h>

#include <filesystem>

#include "nonortho/error.hpp"
#include "nonortho/hamiltonian.hpp"
#include "nonortho/linalg.hpp"

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

}  // namespace

TEST_CASE("parts and full matrix are consistent") {
    const ComplexMatrix herm{{1.0, Complex(0.5, 0.5)}, {Complex(0.5, -0.5), -1.0}};
    const ComplexMatrix gamma{{2.0, 0.0}, {0.0, 0.0}};
    const auto h = EffectiveHamiltonian::from_parts(herm, gamma, BuilderTag::FromFile);
    CHECK(h.h(0, 0) == Complex(1.0, -1.0));
    CHECK(h.h(0, 1) == Complex(0.5, 0.5));

    const auto back = EffectiveHamiltonian::from_matrix(h.h);
    CHECK((back.hermitian_part - herm).max_abs() <= 1e-15);
    CHECK((back.gamma - gamma).max_abs() <= 1e-15);
}

TEST_CASE("rank-sweep builder") {
    EnsembleSpec spec;
    spec.dim = 12;
    spec.decay_rank = 4;
    spec.realizations = 5;

    const auto a = build_fig1(spec, 2);
    const auto b = build_fig1(spec, 2);
    const auto c = build_fig1(spec, 3);
    CHECK(a.h == b.h);
    CHECK_FALSE(a.h == c.h);
    CHECK(a.builder == BuilderTag::RandomFig1);

    for (std::size_t i = 0; i < spec.dim; ++i) {
        const double g = a.gamma(i, i).real();
        if (i < spec.decay_rank) {
            CHECK(g > 0.0);
            CHECK(g <= 2.0);
        } else {
            CHECK(g == 0.0);
        }
        for (std::size_t j = 0; j < spec.dim; ++j) {
            CHECK(a.hermitian_part(i, j) == a.hermitian_part(j, i));
            CHECK(a.hermitian_part(i, j).real() >= 0.0);
            CHECK(a.hermitian_part(i, j).real() < 1.0);
            CHECK(a.hermitian_part(i, j).imag() == 0.0);
        }
    }
    CHECK(numerical_rank(a.gamma) == 4);
    CHECK(is_positive_semidefinite(a.gamma));

    spec.hermitian_kind = HermitianKind::TightBindingChain;
    const auto chain = build_fig1(spec, 0);
    CHECK(chain.hermitian_part == tight_binding_chain(12));
    CHECK(chain.builder == BuilderTag::ChainFig1);

    CHECK(code_of([&] { build_fig1(spec, 5); }) == ErrorCode::BadSpec);
    spec.decay_rank = 13;
    CHECK(code_of([&] { build_fig1(spec, 0); }) == ErrorCode::BadSpec);
    spec.decay_rank = 1;
    spec.decay_high = -1.0;
    CHECK(code_of([&] { build_fig1(spec, 0); }) == ErrorCode::BadSpec);
}

TEST_CASE("single-channel builder") {
    const auto h0 = tight_binding_chain(3);
    const CVector w{1.0, Complex(0.0, 2.0), 0.5};
    const auto h = build_single_channel(3, h0, w);
    CHECK(h.gamma == ComplexMatrix::outer(w, w));
    CHECK(numerical_rank(h.gamma) == 1);

    CHECK(code_of([&] { build_single_channel(4, h0, w); }) == ErrorCode::BadShape);
    CHECK(code_of([&] { build_single_channel(3, h0, CVector(3)); }) == ErrorCode::ZeroVector);
    ComplexMatrix skew = h0;
    skew(0, 1) = Complex(0.0, 1.0);
    CHECK(code_of([&] { build_single_channel(3, skew, w); }) == ErrorCode::NotHermitian);
    ComplexMatrix nan = h0;
    nan(0, 0) = std::nan("");
    CHECK(code_of([&] { build_single_channel(3, nan, w); }) == ErrorCode::NonFinite);
}

TEST_CASE("PT dimer") {
    const auto h = build_pt_dimer(1.0, 1.0);
    CHECK(h.h(0, 0) == Complex(0.0, 0.5));
    CHECK(h.h(1, 1) == Complex(0.0, -0.5));
    const auto sp = eig_general(h.h);
    CHECK(sp.eigenvalues[0].real() == doctest::Approx(-std::sqrt(0.75)).epsilon(1e-12));
    CHECK(std::abs(sp.eigenvalues[1].imag()) <= 1e-12);
    CHECK_FALSE(is_positive_semidefinite(h.gamma));
    CHECK(code_of([] { build_pt_dimer(-0.1, 1.0); }) == ErrorCode::BadSpec);
}

TEST_CASE("random PSD systems") {
    for (std::size_t rank : {0u, 1u, 3u, 6u}) {
        const auto h = build_random_psd(6, rank, 11, rank);
        CHECK(is_hermitian(h.hermitian_part));
        CHECK(is_positive_semidefinite(h.gamma));
        CHECK(numerical_rank(h.gamma) == rank);
    }
    CHECK(build_random_psd(5, 2, 1, 0).h == build_random_psd(5, 2, 1, 0).h);
    CHECK(norm(random_state(7, 3, 4)) == doctest::Approx(1.0));
}

TEST_CASE("file round trip") {
    const auto h = build_random_psd(4, 2, 99);
    const auto path = std::filesystem::temp_directory_path() / "nonortho_h_test.json";
    save_hamiltonian(h, path.string());
    const auto back = load_hamiltonian(path.string());
    std::filesystem::remove(path);
    CHECK(back.h == h.h);
    CHECK(back.builder == BuilderTag::FromFile);
    CHECK((back.gamma - h.gamma).max_abs() <= 1e-14);
}
