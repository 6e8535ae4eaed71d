#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace nonortho {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

/// Dense square complex matrix stored row-major.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    explicit ComplexMatrix(std::size_t dim);
    ComplexMatrix(std::size_t dim, std::vector<Complex> entries);
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static ComplexMatrix identity(std::size_t dim);
    static ComplexMatrix diagonal(std::span<const Complex> diag);
    static ComplexMatrix diagonal(std::span<const double> diag);
    /// |a><b|
    static ComplexMatrix outer(std::span<const Complex> a, std::span<const Complex> b);

    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return dim_ == 0; }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

    std::span<const Complex> data() const noexcept { return data_; }
    std::span<Complex> data() noexcept { return data_; }

    CVector column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const Complex> v);

    ComplexMatrix adjoint() const;
    ComplexMatrix transpose() const;
    Complex trace() const;

    double frobenius_norm() const;
    double one_norm() const;
    double max_abs() const;
    bool all_finite() const;
    /// ||m - m^dagger||_F
    double hermiticity_defect() const;

    ComplexMatrix& operator+=(const ComplexMatrix& o);
    ComplexMatrix& operator-=(const ComplexMatrix& o);
    ComplexMatrix& operator*=(Complex s);

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
    friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
    friend CVector operator*(const ComplexMatrix& a, std::span<const Complex> v);

    bool operator==(const ComplexMatrix& o) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<Complex> data_;
};

// Vector helpers. dot() is antilinear in its first argument (<a|b>).
Complex dot(std::span<const Complex> a, std::span<const Complex> b);
double norm(std::span<const Complex> v);
CVector normalized(std::span<const Complex> v);
CVector axpy(Complex alpha, std::span<const Complex> x, std::span<const Complex> y);

/// <a|M|b>
Complex sandwich(std::span<const Complex> a, const ComplexMatrix& m, std::span<const Complex> b);

// JSON form: { "dim": n, "re": [[...]], "im": [[...]] }
nlohmann::json to_json(const ComplexMatrix& m);
/// Throws Error{ParseError} on malformed input or non-finite entries,
/// Error{NotSquare} if the row/column counts disagree with dim.
ComplexMatrix matrix_from_json(const nlohmann::json& j);

void save_matrix(const ComplexMatrix& m, const std::string& path);
ComplexMatrix load_matrix(const std::string& path);

}  // namespace nonortho
