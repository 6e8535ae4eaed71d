#include "nonortho/quasibound1d.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "nonortho/bounds.hpp"
#include "nonortho/error.hpp"

namespace nonortho {

namespace {

using Mat2 = std::array<std::array<Complex, 2>, 2>;
using Vec2 = std::array<Complex, 2>;

constexpr Complex kI{0.0, 1.0};

Mat2 mul(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

Vec2 mul(const Mat2& a, const Vec2& v) { return {a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]}; }

/// (psi, psi') at x0 + d from (psi, psi') at x0 for psi'' = -q^2 psi.
Mat2 propagator(Complex q, double d) {
    const Complex c = std::cos(q * d);
    const Complex s = std::sin(q * d);
    return {{{c, s / q}, {-q * s, c}}};
}

/// Absolute-phase mover amplitudes (A, B) -> (psi, psi') at x.
Mat2 mover_to_field(Complex k, double x) {
    const Complex ep = std::exp(kI * k * x), em = std::exp(-kI * k * x);
    return {{{ep, em}, {kI * k * ep, -kI * k * em}}};
}

Mat2 field_to_mover(Complex k, double x) {
    const Complex ep = std::exp(kI * k * x), em = std::exp(-kI * k * x);
    const Complex inv2ik = 1.0 / (2.0 * kI * k);
    return {{{0.5 * em, em * inv2ik}, {0.5 * ep, -ep * inv2ik}}};
}

/// Local wavenumbers per region: [exterior, intervals..., exterior].
std::vector<Complex> region_wavenumbers(const PiecewisePotential& p, Complex k) {
    std::vector<Complex> q(p.intervals() + 2, k);
    for (std::size_t r = 0; r < p.intervals(); ++r) q[r + 1] = local_wavenumber(p.mode, p.values[r], k);
    return q;
}

Mat2 interior_propagator(const PiecewisePotential& p, const std::vector<Complex>& q) {
    Mat2 g{{{1.0, 0.0}, {0.0, 1.0}}};
    for (std::size_t r = 0; r < p.intervals(); ++r)
        g = mul(propagator(q[r + 1], p.breakpoints[r + 1] - p.breakpoints[r]), g);
    return g;
}

void require_k(Complex k) {
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag())) throw Error(ErrorCode::NonFinite, "k is not finite");
    if (k.real() == 0.0) throw Error(ErrorCode::BadSpec, "Re k must be nonzero");
}

double max_entry(const Mat2& m) {
    return std::max({std::abs(m[0][0]), std::abs(m[0][1]), std::abs(m[1][0]), std::abs(m[1][1])});
}

struct RightAmplitudes {
    Vec2 v;        // (A_R, B_R)
    double scale;  // product of the factor magnitudes, the roundoff scale of v
};

/// Right-side mover amplitudes (A_R, B_R) for the unique (up to scale) solution
/// satisfying the left boundary condition.
RightAmplitudes right_amplitudes(const PiecewisePotential& p, Complex k) {
    const auto q = region_wavenumbers(p, k);
    Vec2 f;
    double scale = 1.0;
    if (p.left == LeftBoundary::Wall) {
        f = {0.0, 1.0};
    } else {
        // pure e^{-ikx} on the left
        f = mul(mover_to_field(k, p.support_begin()), Vec2{0.0, 1.0});
        scale = std::max(std::abs(f[0]), std::abs(f[1]));
    }
    for (std::size_t r = 0; r < p.intervals(); ++r) {
        const Mat2 g = propagator(q[r + 1], p.breakpoints[r + 1] - p.breakpoints[r]);
        f = mul(g, f);
        scale *= max_entry(g);
    }
    const Mat2 out = field_to_mover(k, p.support_end());
    return {mul(out, f), scale * max_entry(out)};
}

/// (e^w - 1) / w
Complex expm1_over(Complex w) {
    if (std::abs(w) < 1e-4) return 1.0 + w * (0.5 + w * (1.0 / 6.0 + w * (1.0 / 24.0 + w / 120.0)));
    return (std::exp(w) - 1.0) / w;
}

/// int_{s0}^{s1} e^{z s} ds
Complex exp_integral(Complex z, double s0, double s1) {
    const double len = s1 - s0;
    return std::exp(z * s0) * expm1_over(z * len) * len;
}

std::size_t region_of(const PiecewisePotential& p, double x) {
    if (x < p.support_begin()) return 0;
    if (x >= p.support_end()) return p.intervals() + 1;
    const auto it = std::upper_bound(p.breakpoints.begin(), p.breakpoints.end(), x);
    return static_cast<std::size_t>(it - p.breakpoints.begin());
}

double region_ref(const PiecewisePotential& p, std::size_t r) {
    if (r == 0) return p.support_begin();
    if (r > p.intervals()) return p.support_end();
    return p.breakpoints[r - 1];
}

Complex region_value(const PiecewisePotential& p, std::size_t r) {
    if (r == 0 || r > p.intervals()) return p.mode == WaveMode::Schrodinger ? Complex(0.0) : Complex(1.0);
    return p.values[r - 1];
}

/// int_u^v psi_1^* psi_2 dx inside region r (derivative_weighted: the same for
/// psi'/(iq)-type components, i.e. the H fields up to the q/k factors).
Complex region_integral(const QuasiboundState& s1, const QuasiboundState& s2, std::size_t r, double u, double v,
                        bool derivative_weighted) {
    const double ref = region_ref(s1.potential, r);
    const Complex q1c = std::conj(s1.q[r]);
    const Complex q2 = s2.q[r];
    Complex sum = 0.0;
    for (int a = 0; a < 2; ++a) {
        const double sa = a == 0 ? 1.0 : -1.0;
        for (int b = 0; b < 2; ++b) {
            const double sb = b == 0 ? 1.0 : -1.0;
            const Complex c = std::conj(s1.coeffs[r][a]) * s2.coeffs[r][b];
            if (c == Complex{}) continue;
            const Complex z = kI * (sb * q2 - sa * q1c);
            const double sign = derivative_weighted ? sa * sb : 1.0;
            sum += sign * c * exp_integral(z, u - ref, v - ref);
        }
    }
    return sum;
}

void require_same_system(const QuasiboundState& s1, const QuasiboundState& s2) {
    if (!(s1.potential == s2.potential)) throw Error(ErrorCode::BadSpec, "states belong to different potentials");
}

Region checked_region(const PiecewisePotential& p, const Region& omega) {
    if (!(omega.b > omega.a)) throw Error(ErrorCode::BadSpec, "region needs a < b");
    const bool left_ok = p.left == LeftBoundary::Wall || omega.a <= p.support_begin();
    if (!left_ok || omega.b < p.support_end() || omega.a > p.support_begin())
        throw Error(ErrorCode::RegionTooSmall, "region does not contain the potential support");
    Region r = omega;
    if (p.left == LeftBoundary::Wall) r.a = std::max(r.a, p.support_begin());
    return r;
}

struct Piece {
    std::size_t region;
    double u;
    double v;
};

std::vector<Piece> pieces(const PiecewisePotential& p, const Region& omega) {
    std::vector<Piece> out;
    if (omega.a < p.support_begin()) out.push_back({0, omega.a, p.support_begin()});
    for (std::size_t r = 0; r < p.intervals(); ++r) out.push_back({r + 1, p.breakpoints[r], p.breakpoints[r + 1]});
    if (omega.b > p.support_end()) out.push_back({p.intervals() + 1, p.support_end(), omega.b});
    return out;
}

/// Magnetic field H = E' / (i omega) of a Helmholtz state, omega = k.
Complex magnetic(const QuasiboundState& s, const FieldValue& f) { return f.dpsi / (kI * s.k); }

}  // namespace

const char* to_string(WaveMode mode) noexcept {
    return mode == WaveMode::Schrodinger ? "schrodinger" : "helmholtz";
}

void PiecewisePotential::validate() const {
    if (values.empty()) throw Error(ErrorCode::BadSpec, "potential needs at least one interval");
    if (breakpoints.size() != values.size() + 1)
        throw Error(ErrorCode::BadSpec, "need exactly one more breakpoint than values");
    for (std::size_t i = 0; i < breakpoints.size(); ++i) {
        if (!std::isfinite(breakpoints[i])) throw Error(ErrorCode::BadSpec, "breakpoint is not finite");
        if (i > 0 && !(breakpoints[i] > breakpoints[i - 1]))
            throw Error(ErrorCode::BadSpec, "breakpoints must be strictly increasing");
    }
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorCode::BadSpec, "potential value is not finite");
}

bool PiecewisePotential::has_gain() const {
    return std::any_of(values.begin(), values.end(), [&](Complex v) {
        return mode == WaveMode::Schrodinger ? v.imag() > 0.0 : v.imag() < 0.0;
    });
}

bool PiecewisePotential::absorption_free() const {
    return std::all_of(values.begin(), values.end(), [](Complex v) { return v.imag() == 0.0; });
}

PiecewisePotential potential_from_json(const nlohmann::json& j) {
    try {
        PiecewisePotential p;
        const auto mode = j.at("mode").get<std::string>();
        if (mode == "schrodinger") p.mode = WaveMode::Schrodinger;
        else if (mode == "helmholtz") p.mode = WaveMode::Helmholtz;
        else throw Error(ErrorCode::ParseError, "unknown mode '" + mode + "'");
        p.breakpoints = j.at("breakpoints").get<std::vector<double>>();
        const auto re = j.at("values_re").get<std::vector<double>>();
        std::vector<double> im(re.size(), 0.0);
        if (j.contains("values_im")) im = j.at("values_im").get<std::vector<double>>();
        if (im.size() != re.size()) throw Error(ErrorCode::ParseError, "values_re and values_im differ in length");
        for (std::size_t i = 0; i < re.size(); ++i) p.values.emplace_back(re[i], im[i]);
        if (j.contains("left_boundary")) {
            const auto lb = j.at("left_boundary").get<std::string>();
            if (lb == "wall") p.left = LeftBoundary::Wall;
            else if (lb == "open") p.left = LeftBoundary::Open;
            else throw Error(ErrorCode::ParseError, "unknown left_boundary '" + lb + "'");
        }
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

nlohmann::json to_json(const PiecewisePotential& p) {
    std::vector<double> re, im;
    for (const auto& v : p.values) {
        re.push_back(v.real());
        im.push_back(v.imag());
    }
    return {{"mode", to_string(p.mode)},
            {"breakpoints", p.breakpoints},
            {"values_re", re},
            {"values_im", im},
            {"left_boundary", p.left == LeftBoundary::Wall ? "wall" : "open"}};
}

PiecewisePotential load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return potential_from_json(nlohmann::json::parse(buf.str()));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path + ": " + e.what());
    }
}

Region support_region(const PiecewisePotential& p) { return {p.support_begin(), p.support_end()}; }

Complex local_wavenumber(WaveMode mode, Complex value, Complex k) {
    const Complex q2 = mode == WaveMode::Schrodinger ? k * k - value : k * k * value;
    Complex q = std::sqrt(q2);
    if (q.real() < 0.0 || (q.real() == 0.0 && q.imag() < 0.0)) q = -q;
    if (q == Complex{}) throw Error(ErrorCode::BranchAmbiguity, "local wavenumber vanishes");
    return q;
}

std::array<std::array<Complex, 2>, 2> transfer_matrix(const PiecewisePotential& p, Complex k) {
    p.validate();
    require_k(k);
    const auto q = region_wavenumbers(p, k);
    const Mat2 g = interior_propagator(p, q);
    return mul(field_to_mover(k, p.support_end()), mul(g, mover_to_field(k, p.support_begin())));
}

Complex resonance_function(const PiecewisePotential& p, Complex k) {
    require_k(k);
    return right_amplitudes(p, k).v[1];
}

double relative_residual(const PiecewisePotential& p, Complex k) {
    require_k(k);
    const auto r = right_amplitudes(p, k);
    return std::abs(r.v[1]) / r.scale;
}

Complex polish_root(const PiecewisePotential& p, Complex k) {
    for (int it = 0; it < 60; ++it) {
        const double h = 1e-7 * std::max(1.0, std::abs(k));
        const Complex f = resonance_function(p, k);
        if (f == Complex{}) return k;
        const Complex df = (resonance_function(p, k + h) - resonance_function(p, k - h)) / (2.0 * h);
        if (df == Complex{} || !std::isfinite(std::abs(df))) break;
        Complex step = f / df;
        // keep away from Re k = 0 where the exterior wavenumber degenerates
        if ((k - step).real() <= 0.0) step = 0.5 * (k.real()) * step / std::abs(step);
        k -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(k))) break;
    }
    return k;
}

int winding_count(const PiecewisePotential& p, const SearchBox& box) {
    const Complex corners[4] = {{box.re_min, box.im_min},
                                {box.re_max, box.im_min},
                                {box.re_max, box.im_max},
                                {box.re_min, box.im_max}};
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        const Complex a = corners[e], b = corners[(e + 1) % 4];
        const int base = 64;
        Complex prev_z = a;
        Complex prev_f = resonance_function(p, a);
        for (int i = 1; i <= base; ++i) {
            const Complex z = a + (b - a) * (static_cast<double>(i) / base);
            // adaptive bisection until the phase step is small
            std::vector<std::pair<Complex, Complex>> stack{{z, resonance_function(p, z)}};
            while (!stack.empty()) {
                auto [zt, ft] = stack.back();
                const double dphi = std::arg(ft / prev_f);
                if (std::abs(dphi) > 0.5 && std::abs(zt - prev_z) > 1e-12 * (1.0 + std::abs(zt))) {
                    const Complex zm = 0.5 * (prev_z + zt);
                    stack.emplace_back(zm, resonance_function(p, zm));
                    continue;
                }
                total += dphi;
                prev_z = zt;
                prev_f = ft;
                stack.pop_back();
            }
        }
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

namespace {

bool inside(const SearchBox& box, Complex k, double slack) {
    return k.real() >= box.re_min - slack && k.real() <= box.re_max + slack && k.imag() >= box.im_min - slack &&
           k.imag() <= box.im_max + slack;
}

void add_root(std::vector<Complex>& roots, Complex k) {
    for (const auto& r : roots)
        if (std::abs(r - k) <= 1e-8 * std::max(1.0, std::abs(k))) return;
    roots.push_back(k);
}

void try_seed(const PiecewisePotential& p, const SearchBox& box, Complex seed, std::vector<Complex>& roots) {
    const Complex k = polish_root(p, seed);
    if (!std::isfinite(k.real()) || !std::isfinite(k.imag()) || k.real() <= 0.0) return;
    if (!inside(box, k, 1e-9)) return;
    if (relative_residual(p, k) > 1e-10) return;
    add_root(roots, k);
}

/// Local minima of |F| on a grid over the box.
std::vector<Complex> grid_minima(const PiecewisePotential& p, const SearchBox& box, std::size_t nre, std::size_t nim,
                                 unsigned threads) {
    nre = std::max<std::size_t>(nre, 3);
    nim = std::max<std::size_t>(nim, 3);
    auto node = [&](std::size_t i, std::size_t j) {
        return Complex(box.re_min + (box.re_max - box.re_min) * static_cast<double>(i) / static_cast<double>(nre - 1),
                       box.im_min + (box.im_max - box.im_min) * static_cast<double>(j) / static_cast<double>(nim - 1));
    };
    std::vector<double> mag(nre * nim);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < nre; i = next++)
            for (std::size_t j = 0; j < nim; ++j) mag[i * nim + j] = std::abs(resonance_function(p, node(i, j)));
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<Complex> seeds;
    for (std::size_t i = 0; i < nre; ++i)
        for (std::size_t j = 0; j < nim; ++j) {
            const double m = mag[i * nim + j];
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const long ii = static_cast<long>(i) + di, jj = static_cast<long>(j) + dj;
                    if (ii < 0 || jj < 0 || ii >= static_cast<long>(nre) || jj >= static_cast<long>(nim)) continue;
                    if (mag[static_cast<std::size_t>(ii) * nim + static_cast<std::size_t>(jj)] < m) {
                        is_min = false;
                        break;
                    }
                }
            if (is_min) seeds.push_back(node(i, j));
        }
    return seeds;
}

std::size_t count_inside(const std::vector<Complex>& roots, const SearchBox& box) {
    return static_cast<std::size_t>(
        std::count_if(roots.begin(), roots.end(), [&](Complex k) { return inside(box, k, 0.0); }));
}

void refine(const PiecewisePotential& p, const SearchBox& box, std::vector<Complex>& roots, int depth) {
    const int w = winding_count(p, box);
    if (w <= 0 || count_inside(roots, box) >= static_cast<std::size_t>(w)) return;
    for (const auto& s : grid_minima(p, box, 24, 24, 1)) try_seed(p, box, s, roots);
    try_seed(p, box, {0.5 * (box.re_min + box.re_max), 0.5 * (box.im_min + box.im_max)}, roots);
    if (count_inside(roots, box) >= static_cast<std::size_t>(w) || depth >= 6) return;
    const double rm = 0.5 * (box.re_min + box.re_max), im = 0.5 * (box.im_min + box.im_max);
    // nudge the split lines off any grid-aligned root
    const double er = 1e-7 * (box.re_max - box.re_min), ei = 1e-7 * (box.im_max - box.im_min);
    refine(p, {box.re_min, rm + er, box.im_min, im + ei}, roots, depth + 1);
    refine(p, {rm + er, box.re_max, box.im_min, im + ei}, roots, depth + 1);
    refine(p, {box.re_min, rm + er, im + ei, box.im_max}, roots, depth + 1);
    refine(p, {rm + er, box.re_max, im + ei, box.im_max}, roots, depth + 1);
}

}  // namespace

QuasiboundState make_state(const PiecewisePotential& p, Complex k) {
    p.validate();
    require_k(k);
    QuasiboundState s;
    s.potential = p;
    s.k = k;
    s.energy = p.mode == WaveMode::Schrodinger ? k * k : k;
    s.q = region_wavenumbers(p, k);
    const std::size_t nk = p.intervals();
    s.coeffs.assign(nk + 2, {Complex{}, Complex{}});

    Vec2 f;  // (psi, psi') at the running breakpoint
    if (p.left == LeftBoundary::Wall) {
        f = {0.0, 1.0};
    } else {
        s.coeffs[0] = {0.0, 1.0};
        f = {1.0, -kI * k};
    }
    for (std::size_t r = 1; r <= nk; ++r) {
        const Complex q = s.q[r];
        const Complex d = f[1] / (kI * q);
        s.coeffs[r] = {0.5 * (f[0] + d), 0.5 * (f[0] - d)};
        f = mul(propagator(q, p.breakpoints[r] - p.breakpoints[r - 1]), f);
    }
    s.coeffs[nk + 1] = {0.5 * (f[0] + f[1] / (kI * k)), 0.0};
    s.residual = relative_residual(p, k);

    double scale = 0.0;
    for (std::size_t r = 1; r <= nk; ++r) scale = std::max({scale, std::abs(s.coeffs[r][0]), std::abs(s.coeffs[r][1])});
    for (auto& c : s.coeffs) {
        c[0] /= scale;
        c[1] /= scale;
    }
    s.zeta_right = s.coeffs[nk + 1][0] * std::exp(-kI * k * p.support_end());
    s.zeta_left = s.coeffs[0][1] * std::exp(kI * k * p.support_begin());
    return s;
}

std::vector<QuasiboundState> find_resonances(const PiecewisePotential& p, const SearchBox& box,
                                             const SearchOptions& opts) {
    p.validate();
    if (!(box.re_min > 0.0) || !(box.re_max > box.re_min) || !(box.im_max <= 0.0) || !(box.im_min < box.im_max))
        throw Error(ErrorCode::BadSpec, "search box must lie in Re k > 0, Im k <= 0");

    std::vector<Complex> roots;
    for (const auto& seed : grid_minima(p, box, opts.grid_re, opts.grid_im, std::max(1u, opts.threads)))
        try_seed(p, box, seed, roots);
    refine(p, box, roots, 0);

    if (roots.empty()) throw Error(ErrorCode::NoRootsFound, "no resonance inside the search box");
    if (roots.size() > opts.max_states)
        throw Error(ErrorCode::MaxStatesExceeded,
                    std::to_string(roots.size()) + " resonances exceed max_states=" + std::to_string(opts.max_states));

    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<QuasiboundState> out;
    for (const auto& k : roots) out.push_back(make_state(p, k));
    return out;
}

FieldValue field(const QuasiboundState& s, double x) {
    const auto& p = s.potential;
    if (p.left == LeftBoundary::Wall && x < p.support_begin()) return {0.0, 0.0};
    const std::size_t r = region_of(p, x);
    const double t = x - region_ref(p, r);
    const Complex q = s.q[r];
    const Complex ep = std::exp(kI * q * t), em = std::exp(-kI * q * t);
    const Complex a = s.coeffs[r][0] * ep, b = s.coeffs[r][1] * em;
    return {a + b, kI * q * (a - b)};
}

Complex volume_overlap(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega) {
    require_same_system(s1, s2);
    const auto& p = s1.potential;
    const Region reg = checked_region(p, omega);
    Complex sum = 0.0;
    for (const auto& pc : pieces(p, reg)) {
        if (p.mode == WaveMode::Schrodinger) {
            sum += region_integral(s1, s2, pc.region, pc.u, pc.v, false);
        } else {
            const double re_eps = region_value(p, pc.region).real();
            const Complex hfac = std::conj(s1.q[pc.region] / s1.k) * (s2.q[pc.region] / s2.k);
            sum += 0.25 * (re_eps * region_integral(s1, s2, pc.region, pc.u, pc.v, false) +
                           hfac * region_integral(s1, s2, pc.region, pc.u, pc.v, true));
        }
    }
    return sum;
}

HermitianFormParts hermitian_form_parts(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega) {
    require_same_system(s1, s2);
    const auto& p = s1.potential;
    const Region reg = checked_region(p, omega);

    auto flux = [&](double x) -> Complex {
        const FieldValue f1 = field(s1, x), f2 = field(s2, x);
        if (p.mode == WaveMode::Schrodinger)
            return kI * (f2.psi * std::conj(f1.dpsi) - std::conj(f1.psi) * f2.dpsi);
        return 0.25 * (std::conj(f1.psi) * magnetic(s2, f2) + f2.psi * std::conj(magnetic(s1, f1)));
    };

    HermitianFormParts out;
    const Complex left_flux = p.left == LeftBoundary::Wall ? Complex{} : flux(reg.a);
    out.surface = flux(reg.b) - left_flux;

    Complex absorb = 0.0;
    for (std::size_t r = 1; r <= p.intervals(); ++r) {
        const double im = p.values[r - 1].imag();
        if (im == 0.0) continue;
        absorb += im * region_integral(s1, s2, r, p.breakpoints[r - 1], p.breakpoints[r], false);
    }
    if (p.mode == WaveMode::Schrodinger)
        out.absorption = -2.0 * absorb;
    else
        out.absorption = 0.25 * (s2.k + std::conj(s1.k)) * absorb;
    return out;
}

Complex hermitian_form(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega) {
    return hermitian_form_parts(s1, s2, omega).total();
}

double current(std::span<const Wave> waves, std::span<const Complex> amplitudes, double x) {
    if (waves.size() != amplitudes.size()) throw Error(ErrorCode::BadShape, "one amplitude per wave");
    std::size_t helmholtz = 0;
    for (const auto& w : waves)
        if (const auto* s = std::get_if<QuasiboundState>(&w); s && s->potential.mode == WaveMode::Helmholtz) ++helmholtz;
    if (helmholtz != 0 && helmholtz != waves.size())
        throw Error(ErrorCode::BadSpec, "cannot mix Helmholtz fields with Schrodinger waves");

    Complex psi = 0.0, dpsi = 0.0, hfield = 0.0;
    for (std::size_t i = 0; i < waves.size(); ++i) {
        FieldValue f;
        if (const auto* pw = std::get_if<PlaneWave>(&waves[i])) {
            const Complex e = std::exp(kI * pw->k * x);
            f = {e, kI * pw->k * e};
        } else {
            const auto& s = std::get<QuasiboundState>(waves[i]);
            f = field(s, x);
            if (helmholtz) hfield += amplitudes[i] * magnetic(s, f);
        }
        psi += amplitudes[i] * f.psi;
        dpsi += amplitudes[i] * f.dpsi;
    }
    if (helmholtz) return 0.5 * (std::conj(psi) * hfield).real();
    return 2.0 * (std::conj(psi) * dpsi).imag();
}

std::vector<BackflowPoint> backflow_scan(const QuasiboundState& s1, const QuasiboundState& s2,
                                         std::span<const Complex> alpha_grid, std::span<const double> x_grid) {
    require_same_system(s1, s2);
    const auto& p = s1.potential;
    const Wave waves[2] = {s1, s2};
    std::vector<BackflowPoint> out;
    for (const auto& alpha : alpha_grid) {
        const Complex amps[2] = {1.0, alpha};
        for (double x : x_grid) {
            double normal;
            if (x >= p.support_end()) normal = 1.0;
            else if (x <= p.support_begin() && p.left == LeftBoundary::Open) normal = -1.0;
            else continue;
            const double j = normal * current(waves, amps, x);
            if (j < 0.0) out.push_back({alpha, x, j});
        }
    }
    return out;
}

ModifiedBound modified_bound_check(const QuasiboundState& s1, const QuasiboundState& s2, const Region& omega) {
    if (std::abs(s1.k - s2.k) <= 1e-12 * std::max(1.0, std::abs(s1.k)))
        throw Error(ErrorCode::BadSpec, "modified bound needs two distinct states");
    const Complex v12 = volume_overlap(s1, s2, omega);
    const double v11 = volume_overlap(s1, s1, omega).real();
    const double v22 = volume_overlap(s2, s2, omega).real();

    ModifiedBound out;
    out.lhs = std::norm(v12) / (v11 * v22);
    out.rhs = lw_rhs(s1.k.real() - s2.k.real(), -2.0 * s1.k.imag(), -2.0 * s2.k.imag());
    if (!(out.rhs > 0.0)) throw Error(ErrorCode::ZeroRHS, "wavenumber bound vanishes for this pair");
    out.xi_k = out.lhs / out.rhs;
    out.rhs_energy =
        lw_rhs(s1.energy.real() - s2.energy.real(), -2.0 * s1.energy.imag(), -2.0 * s2.energy.imag());
    out.xi_energy = out.rhs_energy > 0.0 ? out.lhs / out.rhs_energy : std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace nonortho
