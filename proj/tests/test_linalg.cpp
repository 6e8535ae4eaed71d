#include <doctest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "nonortho/complex_matrix.hpp"
#include "nonortho/error.hpp"
#include "nonortho/linalg.hpp"
#include "nonortho/rng.hpp"

using namespace nonortho;

namespace {

ComplexMatrix random_matrix(std::size_t n, std::uint64_t stream, double scale = 1.0) {
    Rng rng(4242, stream);
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double re = rng.normal();
            m(i, j) = Complex(re, rng.normal()) * scale;
        }
    return m;
}

Eigen::MatrixXcd to_eigen(const ComplexMatrix& m) {
    Eigen::MatrixXcd e(m.dim(), m.dim());
    for (std::size_t i = 0; i < m.dim(); ++i)
        for (std::size_t j = 0; j < m.dim(); ++j) e(i, j) = m(i, j);
    return e;
}

bool by_re_im(Complex a, Complex b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); }

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

TEST_CASE("basic matrix algebra") {
    const ComplexMatrix a{{1.0, Complex(0, 2)}, {3.0, 4.0}};
    CHECK(a.adjoint()(0, 1) == 3.0);
    CHECK(a.adjoint()(1, 0) == Complex(0, -2));
    CHECK(a.trace() == Complex(5.0));
    CHECK(a * ComplexMatrix::identity(2) == a);

    const CVector u{1.0, Complex(0, 1)};
    const CVector v{2.0, 1.0};
    const auto o = ComplexMatrix::outer(u, v);
    CHECK(o(1, 0) == Complex(0, 2));
    CHECK(dot(u, u) == Complex(2.0));
    CHECK(sandwich(u, ComplexMatrix::identity(2), u) == Complex(2.0));
    CHECK(code_of([] { normalized(CVector(3)); }) == ErrorCode::ZeroVector);
}

TEST_CASE("json round trip and malformed input") {
    const auto m = random_matrix(4, 1);
    CHECK(matrix_from_json(to_json(m)) == m);

    nlohmann::json bad = to_json(m);
    bad["re"][1].erase(0);
    CHECK(code_of([&] { matrix_from_json(bad); }) == ErrorCode::NotSquare);

    nlohmann::json text = to_json(m);
    text["im"][0][0] = "x";
    CHECK(code_of([&] { matrix_from_json(text); }) == ErrorCode::ParseError);

    const auto path = std::filesystem::temp_directory_path() / "nonortho_matrix_test.json";
    save_matrix(m, path.string());
    CHECK(load_matrix(path.string()) == m);
    std::filesystem::remove(path);
    CHECK(code_of([&] { load_matrix(path.string()); }) == ErrorCode::Io);
}

TEST_CASE("general eigensolver agrees with Eigen") {
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 13u, 21u, 32u, 48u}) {
        CAPTURE(n);
        const auto a = random_matrix(n, 100 + n);
        const Spectrum sp = eig_general(a);
        REQUIRE(sp.size() == n);

        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> oracle(to_eigen(a));
        std::vector<Complex> ref(oracle.eigenvalues().data(), oracle.eigenvalues().data() + n);
        std::sort(ref.begin(), ref.end(), by_re_im);
        const double scale = a.frobenius_norm();
        // compare as multisets: greedy nearest match
        std::vector<bool> used(n, false);
        for (const auto& e : sp.eigenvalues) {
            double best = 1e300;
            std::size_t bi = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (!used[i] && std::abs(ref[i] - e) < best) {
                    best = std::abs(ref[i] - e);
                    bi = i;
                }
            used[bi] = true;
            CHECK(best <= 1e-10 * scale);
        }
        CHECK(std::is_sorted(sp.eigenvalues.begin(), sp.eigenvalues.end(), by_re_im));

        for (std::size_t j = 0; j < n; ++j) {
            const CVector ar = a * sp.right[j];
            const CVector al = a.adjoint() * sp.left[j];
            double rr = 0.0, rl = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                rr += std::norm(ar[i] - sp.eigenvalues[j] * sp.right[j][i]);
                rl += std::norm(al[i] - std::conj(sp.eigenvalues[j]) * sp.left[j][i]);
            }
            CHECK(std::sqrt(rr) <= 1e-10 * scale);
            CHECK(std::sqrt(rl) <= 1e-10 * scale);
            CHECK(norm(sp.right[j]) == doctest::Approx(1.0).epsilon(1e-12));
            for (std::size_t l = 0; l < n; ++l)
                if (l != j) CHECK(std::abs(dot(sp.left[l], sp.right[j])) <= 1e-9);
        }
        CHECK_FALSE(sp.defective);
    }
}

TEST_CASE("diagonal and defective inputs") {
    const std::vector<Complex> d{Complex(3, -1), Complex(-2, 0), Complex(1, 5)};
    const Spectrum sp = eig_general(ComplexMatrix::diagonal(std::span<const Complex>(d)));
    CHECK(sp.eigenvalues[0] == Complex(-2, 0));
    CHECK(sp.eigenvalues[1] == Complex(1, 5));
    CHECK(sp.eigenvalues[2] == Complex(3, -1));

    const ComplexMatrix jordan{{1.0, 1.0}, {0.0, 1.0}};
    CHECK(eig_general(jordan).defective);

    ComplexMatrix bad(2);
    bad(0, 1) = std::nan("");
    CHECK(code_of([&] { eig_general(bad); }) == ErrorCode::NonFinite);
}

TEST_CASE("hermitian eigensolver agrees with Eigen") {
    for (std::size_t n : {1u, 4u, 10u, 33u}) {
        const auto r = random_matrix(n, 300 + n);
        const ComplexMatrix h = (r + r.adjoint()) * Complex(0.5);
        const auto he = eig_hermitian(h);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> oracle(to_eigen(h));
        for (std::size_t i = 0; i < n; ++i) CHECK(he.values[i] == doctest::Approx(oracle.eigenvalues()(i)).epsilon(1e-10));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                CHECK(std::abs(dot(he.vectors[i], he.vectors[j]) - (i == j ? 1.0 : 0.0)) <= 1e-12);
    }
    CHECK(code_of([] { eig_hermitian(random_matrix(3, 9)); }) == ErrorCode::NotHermitian);
}

TEST_CASE("rank and positivity") {
    ComplexMatrix g(6);
    for (std::uint64_t s = 0; s < 3; ++s) {
        const auto col = random_matrix(6, 500 + s).column(0);
        g += ComplexMatrix::outer(col, col);
    }
    CHECK(numerical_rank(g) == 3);
    CHECK(is_positive_semidefinite(g));
    CHECK_FALSE(is_positive_semidefinite(g * Complex(-1.0)));
    CHECK(numerical_rank(ComplexMatrix(4)) == 0);
    CHECK(code_of([&] { numerical_rank(g, 0.0); }) == ErrorCode::BadSpec);
}

TEST_CASE("expm agrees with Eigen and guards overflow") {
    CHECK(expm(ComplexMatrix(3)) == ComplexMatrix::identity(3));
    for (double scale : {0.01, 0.5, 3.0, 20.0}) {
        const auto a = random_matrix(6, 700, scale);
        const auto e = expm(a);
        const Eigen::MatrixXcd ref = to_eigen(a).exp();
        double err = 0.0, size = 0.0;
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 6; ++j) {
                err = std::max(err, std::abs(e(i, j) - ref(i, j)));
                size = std::max(size, std::abs(ref(i, j)));
            }
        CAPTURE(scale);
        CHECK(err <= 1e-11 * size);
    }
    CHECK(code_of([] { expm(ComplexMatrix::identity(2) * Complex(800.0)); }) == ErrorCode::OverflowRisk);
}

TEST_CASE("linear solve") {
    const auto a = random_matrix(7, 800);
    const auto b = random_matrix(7, 801);
    const auto x = solve(a, b);
    CHECK((a * x - b).frobenius_norm() <= 1e-12 * b.frobenius_norm() * a.frobenius_norm());
}
