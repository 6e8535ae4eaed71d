#include "nonortho/complex_matrix.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "nonortho/error.hpp"

namespace nonortho {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::BadShape: return "BadShape";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NotHermitian: return "NotHermitian";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::OverflowRisk: return "OverflowRisk";
        case ErrorCode::BadSpec: return "BadSpec";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::NotSquare: return "NotSquare";
        case ErrorCode::AllUndefined: return "AllUndefined";
        case ErrorCode::EigenvalueMatchFailure: return "EigenvalueMatchFailure";
        case ErrorCode::BranchAmbiguity: return "BranchAmbiguity";
        case ErrorCode::NoRootsFound: return "NoRootsFound";
        case ErrorCode::MaxStatesExceeded: return "MaxStatesExceeded";
        case ErrorCode::RegionTooSmall: return "RegionTooSmall";
        case ErrorCode::ZeroRHS: return "ZeroRHS";
        case ErrorCode::NotNormalized: return "NotNormalized";
        case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
        case ErrorCode::InfiniteDistance: return "InfiniteDistance";
        case ErrorCode::UpperHalfPlaneEigenvalue: return "UpperHalfPlaneEigenvalue";
        case ErrorCode::BadOrdering: return "BadOrdering";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

ComplexMatrix::ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

ComplexMatrix::ComplexMatrix(std::size_t dim, std::vector<Complex> entries)
    : dim_(dim), data_(std::move(entries)) {
    if (data_.size() != dim_ * dim_)
        throw Error(ErrorCode::BadShape, "entry count does not match dim*dim");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : dim_(rows.size()) {
    data_.reserve(dim_ * dim_);
    for (const auto& r : rows) {
        if (r.size() != dim_) throw Error(ErrorCode::NotSquare, "row length differs from row count");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> diag) {
    ComplexMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> diag) {
    ComplexMatrix m(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::BadShape, "outer: length mismatch");
    ComplexMatrix m(a.size());
    for (std::size_t r = 0; r < a.size(); ++r)
        for (std::size_t c = 0; c < b.size(); ++c) m(r, c) = a[r] * std::conj(b[c]);
    return m;
}

CVector ComplexMatrix::column(std::size_t c) const {
    CVector v(dim_);
    for (std::size_t r = 0; r < dim_; ++r) v[r] = (*this)(r, c);
    return v;
}

void ComplexMatrix::set_column(std::size_t c, std::span<const Complex> v) {
    for (std::size_t r = 0; r < dim_; ++r) (*this)(r, c) = v[r];
}

ComplexMatrix ComplexMatrix::adjoint() const {
    ComplexMatrix m(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c) m(c, r) = std::conj((*this)(r, c));
    return m;
}

ComplexMatrix ComplexMatrix::transpose() const {
    ComplexMatrix m(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c) m(c, r) = (*this)(r, c);
    return m;
}

Complex ComplexMatrix::trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
}

double ComplexMatrix::frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
}

double ComplexMatrix::one_norm() const {
    double best = 0.0;
    for (std::size_t c = 0; c < dim_; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < dim_; ++r) s += std::abs((*this)(r, c));
        best = std::max(best, s);
    }
    return best;
}

double ComplexMatrix::max_abs() const {
    double best = 0.0;
    for (const auto& z : data_) best = std::max(best, std::abs(z));
    return best;
}

bool ComplexMatrix::all_finite() const {
    for (const auto& z : data_)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

double ComplexMatrix::hermiticity_defect() const {
    double s = 0.0;
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t c = 0; c < dim_; ++c)
            s += std::norm((*this)(r, c) - std::conj((*this)(c, r)));
    return std::sqrt(s);
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
    if (o.dim_ != dim_) throw Error(ErrorCode::BadShape, "matrix sum: dim mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
    if (o.dim_ != dim_) throw Error(ErrorCode::BadShape, "matrix difference: dim mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.dim_ != b.dim_) throw Error(ErrorCode::BadShape, "matrix product: dim mismatch");
    const std::size_t n = a.dim_;
    ComplexMatrix m(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < n; ++k) {
            const Complex ark = a(r, k);
            if (ark == Complex{}) continue;
            for (std::size_t c = 0; c < n; ++c) m(r, c) += ark * b(k, c);
        }
    return m;
}

CVector operator*(const ComplexMatrix& a, std::span<const Complex> v) {
    if (v.size() != a.dim_) throw Error(ErrorCode::BadShape, "matrix-vector product: length mismatch");
    CVector out(a.dim_);
    for (std::size_t r = 0; r < a.dim_; ++r) {
        Complex s = 0.0;
        for (std::size_t c = 0; c < a.dim_; ++c) s += a(r, c) * v[c];
        out[r] = s;
    }
    return out;
}

Complex dot(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size()) throw Error(ErrorCode::BadShape, "dot: length mismatch");
    Complex s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

double norm(std::span<const Complex> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

CVector normalized(std::span<const Complex> v) {
    const double n = norm(v);
    if (n == 0.0) throw Error(ErrorCode::ZeroVector, "cannot normalize the zero vector");
    CVector out(v.begin(), v.end());
    for (auto& z : out) z /= n;
    return out;
}

CVector axpy(Complex alpha, std::span<const Complex> x, std::span<const Complex> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::BadShape, "axpy: length mismatch");
    CVector out(y.begin(), y.end());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += alpha * x[i];
    return out;
}

Complex sandwich(std::span<const Complex> a, const ComplexMatrix& m, std::span<const Complex> b) {
    return dot(a, m * b);
}

nlohmann::json to_json(const ComplexMatrix& m) {
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (std::size_t r = 0; r < m.dim(); ++r) {
        nlohmann::json rr = nlohmann::json::array();
        nlohmann::json ri = nlohmann::json::array();
        for (std::size_t c = 0; c < m.dim(); ++c) {
            rr.push_back(m(r, c).real());
            ri.push_back(m(r, c).imag());
        }
        re.push_back(std::move(rr));
        im.push_back(std::move(ri));
    }
    return {{"dim", m.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

namespace {

double finite_number(const nlohmann::json& v) {
    if (!v.is_number()) throw Error(ErrorCode::ParseError, "matrix entry is not a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, "matrix entry is not finite");
    return x;
}

}  // namespace

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("re"))
        throw Error(ErrorCode::ParseError, "expected object with dim, re and im");
    if (!j["dim"].is_number_integer() || j["dim"].get<long long>() < 1)
        throw Error(ErrorCode::ParseError, "dim must be a positive integer");
    const auto n = static_cast<std::size_t>(j["dim"].get<long long>());
    const auto& re = j["re"];
    const nlohmann::json* im = j.contains("im") ? &j["im"] : nullptr;
    if (!re.is_array() || (im && !im->is_array()))
        throw Error(ErrorCode::ParseError, "re/im must be arrays of rows");
    if (re.size() != n || (im && im->size() != n))
        throw Error(ErrorCode::NotSquare, "row count differs from dim");

    ComplexMatrix m(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!re[r].is_array() || re[r].size() != n || (im && (!(*im)[r].is_array() || (*im)[r].size() != n)))
            throw Error(ErrorCode::NotSquare, "row " + std::to_string(r) + " length differs from dim");
        for (std::size_t c = 0; c < n; ++c)
            m(r, c) = Complex(finite_number(re[r][c]), im ? finite_number((*im)[r][c]) : 0.0);
    }
    return m;
}

void save_matrix(const ComplexMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    out << to_json(m).dump(2) << '\n';
}

ComplexMatrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
    return matrix_from_json(j);
}

}  // namespace nonortho
