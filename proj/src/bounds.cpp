#include "nonortho/bounds.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "nonortho/error.hpp"

namespace nonortho {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double lw_rhs(double detuning, double rate_l, double rate_j) {
    const double num = rate_l * rate_j;
    const double den = detuning * detuning + 0.25 * (rate_l + rate_j) * (rate_l + rate_j);
    if (den > 0.0) return num / den;
    if (num > 0.0) return kInf;
    if (num < 0.0) return -kInf;
    return 0.0;
}

OverlapReport overlap_report(const EffectiveHamiltonian& h, RateConvention convention) {
    OverlapReport rep;
    rep.spectrum = eig_general(h.h);
    const std::size_t n = rep.spectrum.size();
    rep.dim = n;

    double scale = 1.0;
    for (const auto& e : rep.spectrum.eigenvalues) scale = std::max(scale, std::abs(e));
    rep.rates.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double g = -2.0 * rep.spectrum.eigenvalues[j].imag();
        if (std::abs(g) <= kRateFloor * scale) g = 0.0;
        if (convention == RateConvention::Absolute) g = std::abs(g);
        rep.rates[j] = g;
    }

    rep.overlaps = ComplexMatrix(n);
    rep.detunings = RealMatrix(n);
    rep.lw_rhs = RealMatrix(n);
    rep.xi = RealMatrix(n);
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t j = 0; j < n; ++j) {
            const Complex ov = l == j ? Complex(1.0) : dot(rep.spectrum.right[l], rep.spectrum.right[j]);
            rep.overlaps(l, j) = ov;
            const double delta = rep.spectrum.eigenvalues[l].real() - rep.spectrum.eigenvalues[j].real();
            rep.detunings(l, j) = delta;
            const double gl = rep.rates[l], gj = rep.rates[j];
            const double rhs = lw_rhs(delta, gl, gj);
            rep.lw_rhs(l, j) = rhs;

            const double ov_abs = std::abs(ov);
            double xi;
            if (gl * gj == 0.0 && delta == 0.0 && l != j) {
                xi = kNaN;
            } else if (rhs > 0.0 && std::isfinite(rhs)) {
                xi = ov_abs * ov_abs / rhs;
            } else if (rhs == kInf) {
                xi = 0.0;
            } else {
                xi = ov_abs <= kOverlapFloor ? kNaN : kInf;
            }
            rep.xi(l, j) = xi;
        }
    }
    rep.gamma_rank = numerical_rank(h.gamma);
    rep.sensitivity.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        rep.sensitivity[j] = 1.0 / std::abs(dot(rep.spectrum.left[j], rep.spectrum.right[j]));
    return rep;
}

LwCheck check_lw(const OverlapReport& report, double tol) {
    LwCheck out;
    for (std::size_t l = 0; l < report.dim; ++l)
        for (std::size_t j = l + 1; j < report.dim; ++j) {
            if (!report.xi_defined(l, j)) continue;
            const double xi = report.xi(l, j);
            ++out.defined_pairs;
            out.max_xi = std::max(out.max_xi, xi);
            if (xi > 1.0 + tol) out.violating_pairs.push_back({l, j, xi});
        }
    out.holds = out.violating_pairs.empty();
    return out;
}

XiAverage xi_average(const OverlapReport& report) {
    XiAverage out;
    double sum = 0.0;
    for (std::size_t l = 0; l < report.dim; ++l)
        for (std::size_t j = 0; j < l; ++j) {
            if (report.xi_defined(l, j)) {
                sum += report.xi(l, j);
                ++out.defined;
            } else {
                ++out.undefined;
            }
        }
    if (out.defined == 0) throw Error(ErrorCode::AllUndefined, "no pair has a defined normalized bound");
    out.mean = sum / static_cast<double>(out.defined);
    return out;
}

std::vector<SweepRow> ensemble_sweep(const EnsembleSpec& spec, const std::vector<std::size_t>& m_values,
                                     unsigned threads) {
    spec.validate();
    for (std::size_t m : m_values)
        if (m < 1 || m > spec.dim) throw Error(ErrorCode::BadSpec, "rank values must lie in [1, N]");
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

    std::vector<SweepRow> rows;
    for (std::size_t m : m_values) {
        EnsembleSpec s = spec;
        s.decay_rank = m;
        std::vector<XiAverage> results(s.realizations);

        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t r = next++; r < s.realizations; r = next++) {
                try {
                    results[r] = xi_average(overlap_report(build_fig1(s, r)));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        };
        const unsigned nworkers = static_cast<unsigned>(std::min<std::size_t>(threads, s.realizations));
        if (nworkers <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < nworkers; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        if (failure) std::rethrow_exception(failure);

        SweepRow row;
        row.rank = m;
        row.prediction = 1.0 / static_cast<double>(m);
        row.realizations = s.realizations;
        double sum = 0.0;
        for (const auto& r : results) {
            sum += r.mean;
            row.undefined_pairs += r.undefined;
        }
        row.mean_xi = sum / static_cast<double>(results.size());
        if (results.size() > 1) {
            double ss = 0.0;
            for (const auto& r : results) ss += (r.mean - row.mean_xi) * (r.mean - row.mean_xi);
            row.std_xi = std::sqrt(ss / static_cast<double>(results.size() - 1));
        }
        rows.push_back(row);
    }
    return rows;
}

BiorthReport biorth_report(const EffectiveHamiltonian& h) { return biorth_report(eig_general(h.h)); }

BiorthReport biorth_report(const Spectrum& sp) {
    const std::size_t n = sp.size();
    std::vector<Complex> lr(n);  // <L_j|R_j>
    BiorthReport out;
    out.sensitivity.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        lr[j] = dot(sp.left[j], sp.right[j]);
        if (std::abs(lr[j]) < kEpThreshold)
            throw Error(ErrorCode::EigenvalueMatchFailure,
                        "left/right overlap of eigenpair " + std::to_string(j) + " vanishes (exceptional point)");
        out.sensitivity[j] = 1.0 / std::abs(lr[j]);
    }

    out.o_matrix = ComplexMatrix(n);
    out.right_overlaps = ComplexMatrix(n);
    out.left_overlaps = ComplexMatrix(n);
    out.normalized_o = RealMatrix(n);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) {
            out.right_overlaps(l, j) = dot(sp.right[l], sp.right[j]);
            out.left_overlaps(l, j) = dot(sp.left[l], sp.left[j]);
        }
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) {
            // <R_j|R_l><L_l|L_j> / (<R_j|L_j><L_l|R_l>)
            out.o_matrix(l, j) = out.right_overlaps(j, l) * out.left_overlaps(l, j) / (std::conj(lr[j]) * lr[l]);
        }
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t j = 0; j < n; ++j) {
            const double oll = out.o_matrix(l, l).real();
            const double ojj = out.o_matrix(j, j).real();
            const double v = std::abs(out.o_matrix(l, j)) / std::sqrt(oll * ojj);
            out.normalized_o(l, j) = v;
            const double direct = std::abs(out.right_overlaps(l, j)) * std::abs(out.left_overlaps(l, j));
            out.identity_defect = std::max(out.identity_defect, std::abs(v - direct));
        }
    return out;
}

BiorthCheck check_biorth(const BiorthReport& bi, const OverlapReport& report, double tol) {
    BiorthCheck out;
    for (std::size_t l = 0; l < report.dim; ++l)
        for (std::size_t j = l + 1; j < report.dim; ++j) {
            const double rhs = report.lw_rhs(l, j);
            const double lhs = bi.normalized_o(l, j);
            if (std::isnan(rhs)) continue;
            // 0/0 pairs of the conventional bound are skipped here as well.
            if (!report.xi_defined(l, j)) continue;
            const double excess = lhs - rhs;
            out.max_excess = std::max(out.max_excess, excess);
            if (excess > tol) out.holds = false;
        }
    return out;
}

double decay_expectation(const EffectiveHamiltonian& h, std::span<const Complex> psi) {
    return sandwich(psi, h.gamma, psi).real();
}

double norm_derivative_fd(const EffectiveHamiltonian& h, std::span<const Complex> psi, double dt) {
    const ComplexMatrix fwd = expm(h.h * Complex(0.0, -dt));
    const ComplexMatrix bwd = expm(h.h * Complex(0.0, dt));
    const double np = norm(fwd * psi);
    const double nm = norm(bwd * psi);
    return (np * np - nm * nm) / (2.0 * dt);
}

}  // namespace nonortho
