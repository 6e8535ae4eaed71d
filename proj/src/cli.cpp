#include "nonortho/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "nonortho/bounds.hpp"
#include "nonortho/defaults.hpp"
#include "nonortho/error.hpp"
#include "nonortho/geometry.hpp"
#include "nonortho/hamiltonian.hpp"
#include "nonortho/quasibound1d.hpp"
#include "nonortho/rng.hpp"

namespace nonortho::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class Csv {
public:
    explicit Csv(std::initializer_list<const char*> header) {
        bool first = true;
        for (const char* h : header) {
            if (!first) text_ += ',';
            text_ += h;
            first = false;
        }
        text_ += '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((text_ += (first ? "" : ","), text_ += cell(cells), first = false), ...);
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

private:
    static std::string cell(double v) { return num(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    std::string text_;
};

/// Files are staged in memory and written together, so a failure leaves
/// nothing behind in the output directory.
class OutputSet {
public:
    void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

    void commit(const fs::path& dir) const {
        std::error_code ec;
        if (fs::exists(dir, ec) && !fs::is_directory(dir, ec))
            throw Error(ErrorCode::Io, "output path " + dir.string() + " is not a directory");
        fs::create_directories(dir, ec);
        if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

        std::vector<fs::path> staged;
        auto cleanup = [&] {
            for (const auto& p : staged) fs::remove(p, ec);
        };
        for (const auto& [name, content] : files_) {
            const fs::path tmp = dir / (name + ".part");
            std::ofstream f(tmp, std::ios::binary);
            if (f) staged.push_back(tmp);
            f << content;
            f.close();
            if (!f) {
                cleanup();
                throw Error(ErrorCode::Io, "cannot write " + tmp.string());
            }
        }
        for (std::size_t i = 0; i < files_.size(); ++i) {
            fs::rename(staged[i], dir / files_[i].first, ec);
            if (ec) {
                cleanup();
                throw Error(ErrorCode::Io, "cannot finalize " + files_[i].first + ": " + ec.message());
            }
        }
    }

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

struct Checks {
    std::vector<std::pair<std::string, bool>> items;

    void add(std::string name, bool ok) { items.emplace_back(std::move(name), ok); }

    int finish(std::ostream& out, std::ostream& err) const {
        std::size_t failed = 0;
        for (const auto& [name, ok] : items)
            if (!ok) {
                ++failed;
                err << "check failed: " << name << '\n';
            }
        out << "RESULT: " << (failed == 0 ? "PASS" : "FAIL") << " n_checks=" << items.size()
            << " n_failed=" << failed << '\n';
        return failed == 0 ? kExitPass : kExitFail;
    }
};

json section(const RunConfig& cfg, const char* name) {
    if (!cfg.config.contains(name)) return json::object();
    const json& s = cfg.config.at(name);
    if (!s.is_object()) throw Error(ErrorCode::ParseError, std::string("config section '") + name + "' must be an object");
    return s;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config key '") + key + "': " + e.what());
    }
}

unsigned threads_of(const RunConfig& cfg) { return cfg.threads != 0 ? cfg.threads : worker_threads(); }

void require_output_dir(const RunConfig& cfg) {
    std::error_code ec;
    if (fs::exists(cfg.out_dir, ec) && !fs::is_directory(cfg.out_dir, ec))
        throw Error(ErrorCode::Io, "output path " + cfg.out_dir.string() + " is not a directory");
}

PiecewisePotential potential_of(const RunConfig& cfg, const json& sec) {
    if (!sec.contains("potential")) return defaults::double_barrier();
    const json& p = sec.at("potential");
    if (p.is_string()) {
        fs::path path = p.get<std::string>();
        if (path.is_relative()) path = cfg.base_dir / path;
        return load_potential(path.string());
    }
    if (p.is_object()) return potential_from_json(p);
    throw Error(ErrorCode::ParseError, "'potential' must be a path or an object");
}

SearchBox box_of(const json& sec) {
    SearchBox b = defaults::search_box();
    const json s = sec.value("search", json::object());
    b.re_min = get_or(s, "re_min", b.re_min);
    b.re_max = get_or(s, "re_max", b.re_max);
    b.im_min = get_or(s, "im_min", b.im_min);
    b.im_max = get_or(s, "im_max", b.im_max);
    return b;
}

SearchOptions search_options_of(const RunConfig& cfg, const json& sec) {
    SearchOptions o;
    const json s = sec.value("search", json::object());
    o.grid_re = get_or(s, "grid_re", o.grid_re);
    o.grid_im = get_or(s, "grid_im", o.grid_im);
    o.max_states = get_or(s, "max_states", o.max_states);
    o.threads = threads_of(cfg);
    return o;
}

Region omega_of(const json& sec, const PiecewisePotential& p) {
    Region r = support_region(p);
    if (sec.contains("omega")) {
        const json& o = sec.at("omega");
        r.a = get_or(o, "a", r.a);
        r.b = get_or(o, "b", r.b);
    }
    return r;
}

/// Hamiltonian from {"hamiltonian": path} or {"builder": {...}}.
EffectiveHamiltonian system_of(const RunConfig& cfg, const json& sec) {
    if (sec.contains("hamiltonian")) {
        fs::path path = sec.at("hamiltonian").get<std::string>();
        if (path.is_relative()) path = cfg.base_dir / path;
        return load_hamiltonian(path.string());
    }
    const json b = sec.value("builder", json::object());
    const std::string type = get_or<std::string>(b, "type", "random_psd");
    const std::uint64_t seed = cfg.effective_seed();
    if (type == "random_psd")
        return build_random_psd(get_or<std::size_t>(b, "dim", 8), get_or<std::size_t>(b, "rank", 2), seed,
                                get_or<std::uint64_t>(b, "stream", 0));
    if (type == "pt_dimer") return build_pt_dimer(get_or(b, "g", 0.3), get_or(b, "gamma", defaults::kPtGamma));
    if (type == "single_channel") {
        const std::size_t n = get_or<std::size_t>(b, "dim", 8);
        const auto base = build_random_psd(n, 0, seed, get_or<std::uint64_t>(b, "stream", 0));
        return build_single_channel(n, base.hermitian_part, random_state(n, seed, 1000003));
    }
    if (type == "fig1") {
        EnsembleSpec spec;
        spec.dim = get_or(b, "dim", spec.dim);
        spec.decay_rank = get_or(b, "rank", spec.decay_rank);
        spec.seed = seed;
        const std::string kind = get_or<std::string>(b, "kind", "random");
        if (kind == "chain") spec.hermitian_kind = HermitianKind::TightBindingChain;
        else if (kind != "random") throw Error(ErrorCode::BadSpec, "unknown kind '" + kind + "'");
        const std::size_t index = get_or<std::size_t>(b, "index", 0);
        spec.realizations = index + 1;
        return build_fig1(spec, index);
    }
    throw Error(ErrorCode::BadSpec, "unknown builder type '" + type + "'");
}

// ---------------------------------------------------------------- svg

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;
    std::string color;
    bool line = false;
};

std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    const double w = 640, h = 440, ml = 70, mr = 20, mt = 40, mb = 50;
    auto sx = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
    auto sy = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x0 + (x1 - x0) * t / 4.0, yv = y0 + (y1 - y0) * t / 4.0;
        o << "<text x=\"" << sx(xv) << "\" y=\"" << h - mb + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
          << num(xv) << "</text>\n";
        o << "<text x=\"" << ml - 6 << "\" y=\"" << sy(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << num(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << w / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel
      << "</text>\n";
    o << "<text x=\"16\" y=\"" << h / 2 << "\" transform=\"rotate(-90 16 " << h / 2
      << ")\" text-anchor=\"middle\" font-size=\"13\">" << ylabel << "</text>\n";
    double ly = mt + 10;
    for (const auto& s : series) {
        if (s.line) {
            o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
            for (auto [x, y] : s.pts)
                if (std::isfinite(x) && std::isfinite(y)) o << sx(x) << ',' << sy(y) << ' ';
            o << "\"/>\n";
        } else {
            for (auto [x, y] : s.pts)
                if (std::isfinite(x) && std::isfinite(y))
                    o << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"3.5\" fill=\"" << s.color
                      << "\"/>\n";
        }
        o << "<text x=\"" << w - mr - 150 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\"" << s.color << "\">"
          << s.label << "</text>\n";
        ly += 16;
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace

Command parse_command(const std::string& name) {
    if (name == "ensemble") return Command::Ensemble;
    if (name == "verify") return Command::Verify;
    if (name == "resonances") return Command::Resonances;
    if (name == "backflow") return Command::Backflow;
    if (name == "geometry") return Command::Geometry;
    if (name == "demo-pt") return Command::DemoPt;
    throw Error(ErrorCode::BadSpec, "unknown command '" + name + "'");
}

const char* to_string(Command c) noexcept {
    switch (c) {
        case Command::Ensemble: return "ensemble";
        case Command::Verify: return "verify";
        case Command::Resonances: return "resonances";
        case Command::Backflow: return "backflow";
        case Command::Geometry: return "geometry";
        case Command::DemoPt: return "demo-pt";
    }
    return "unknown";
}

std::uint64_t RunConfig::effective_seed() const {
    if (seed) return *seed;
    return get_or<std::uint64_t>(config, "seed", defaults::kSeed);
}

RunConfig load_run_config(Command command, const fs::path& config_path) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::Io, "cannot open config " + config_path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    RunConfig cfg;
    cfg.command = command;
    try {
        cfg.config = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, config_path.string() + ": " + e.what());
    }
    if (!cfg.config.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
    cfg.base_dir = config_path.parent_path();
    if (cfg.base_dir.empty()) cfg.base_dir = ".";
    return cfg;
}

unsigned worker_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("NONORTHO_THREADS")) {
        char* end = nullptr;
        const unsigned long cap = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && cap >= 1) n = std::min<unsigned long>(n, cap);
    }
    return n;
}

int cmd_ensemble(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_output_dir(cfg);
    const json sec = section(cfg, "ensemble");
    EnsembleSpec spec;
    spec.dim = get_or(sec, "dim", defaults::kEnsembleDim);
    spec.realizations = get_or(sec, "realizations", defaults::kEnsembleRealizations);
    spec.decay_low = get_or(sec, "decay_low", defaults::kDecayLow);
    spec.decay_high = get_or(sec, "decay_high", defaults::kDecayHigh);
    spec.seed = cfg.effective_seed();
    std::vector<std::size_t> ms;
    for (std::size_t m = 1; m <= spec.dim; ++m) ms.push_back(m);
    ms = get_or(sec, "m_values", ms);
    const auto kinds = get_or<std::vector<std::string>>(sec, "kinds", {"random", "chain"});

    Csv csv{"kind", "M", "mean_xi", "std_xi", "prediction_inv_M", "realizations"};
    Checks checks;
    std::vector<Series> series;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
        const auto& kind = kinds[ki];
        if (kind == "random") spec.hermitian_kind = HermitianKind::UniformRandom;
        else if (kind == "chain") spec.hermitian_kind = HermitianKind::TightBindingChain;
        else throw Error(ErrorCode::BadSpec, "unknown ensemble kind '" + kind + "'");
        const auto rows = ensemble_sweep(spec, ms, threads_of(cfg));
        Series s{kind, {}, colors[ki % 3], false};
        for (const auto& r : rows) {
            csv.row(kind, r.rank, r.mean_xi, r.std_xi, r.prediction, r.realizations);
            s.pts.emplace_back(static_cast<double>(r.rank), r.mean_xi);
            checks.add("finite_mean:" + kind + ":M=" + std::to_string(r.rank), std::isfinite(r.mean_xi));
            if (r.rank == 1) checks.add("rank1_equality:" + kind, std::abs(r.mean_xi - 1.0) <= 1e-6);
        }
        series.push_back(std::move(s));
    }

    OutputSet files;
    files.add("fig1.csv", csv.str());
    if (cfg.plot) {
        Series inv{"1/M", {}, "black", true};
        for (double m = 1.0; m <= static_cast<double>(spec.dim); m += 0.25) inv.pts.emplace_back(m, 1.0 / m);
        series.push_back(inv);
        files.add("fig1.svg", svg_plot("mean normalized bound vs decay rank", "M = rank Gamma", "<xi>", series));
    }
    files.commit(cfg.out_dir);
    return checks.finish(out, err);
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_output_dir(cfg);
    const json sec = section(cfg, "verify");
    const double tol = get_or(sec, "tol", defaults::kLwTol);
    const auto h = system_of(cfg, sec);
    const auto report = overlap_report(h);
    const auto lw = check_lw(report, tol);

    std::optional<BiorthReport> bi;
    try {
        bi = biorth_report(report.spectrum);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::EigenvalueMatchFailure) throw;
        err << "note: biorthogonal bound skipped: " << e.what() << '\n';
    }

    Csv csv{"pair", "overlap2", "lw_rhs", "xi", "biorth_lhs", "holds"};
    for (std::size_t l = 0; l < report.dim; ++l)
        for (std::size_t j = l + 1; j < report.dim; ++j) {
            const double ov = std::abs(report.overlaps(l, j));
            const double xi = report.xi(l, j);
            const char* holds = std::isnan(xi) ? "undefined" : (xi <= 1.0 + tol ? "true" : "false");
            csv.row(std::to_string(l) + "-" + std::to_string(j), ov * ov, report.lw_rhs(l, j), xi,
                    bi ? bi->normalized_o(l, j) : std::nan(""), holds);
        }

    Checks checks;
    checks.add("lee_wolfenstein", lw.holds);
    if (bi) checks.add("biorthogonal", check_biorth(*bi, report, tol).holds);
    for (const auto& v : lw.violating_pairs)
        err << "violation: pair " << v.l << "-" << v.j << " xi=" << num(v.xi) << '\n';
    out << "dim=" << report.dim << " gamma_rank=" << report.gamma_rank
        << " gamma_psd=" << (is_positive_semidefinite(h.gamma) ? "true" : "false")
        << " defined_pairs=" << lw.defined_pairs << " max_xi=" << num(lw.max_xi) << '\n';

    Csv scsv{"index", "re_E", "im_E", "gamma", "sensitivity"};
    for (std::size_t j = 0; j < report.dim; ++j)
        scsv.row(j, report.spectrum.eigenvalues[j].real(), report.spectrum.eigenvalues[j].imag(), report.rates[j],
                 report.sensitivity[j]);

    OutputSet files;
    files.add("bounds.csv", csv.str());
    files.add("sensitivity.csv", scsv.str());
    files.commit(cfg.out_dir);
    return checks.finish(out, err);
}

int cmd_resonances(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_output_dir(cfg);
    const json sec = section(cfg, "resonances");
    const auto pot = potential_of(cfg, sec);
    const SearchBox box = box_of(sec);
    const Region omega = omega_of(sec, pot);
    const double res_tol = get_or(sec, "residual_tol", defaults::kResidualTol);
    const double id_tol = get_or(sec, "identity_tol", defaults::kIdentityTol);
    if (pot.has_gain()) err << "warning: potential has gain; bounds need not hold\n";

    const auto states = find_resonances(pot, box, search_options_of(cfg, sec));
    const int winding = winding_count(pot, box);

    Checks checks;
    Csv rcsv{"index", "re_k", "im_k", "re_E", "im_E", "residual"};
    bool residual_ok = true;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        rcsv.row(i, s.k.real(), s.k.imag(), s.energy.real(), s.energy.imag(), s.residual);
        residual_ok = residual_ok && s.residual <= res_tol;
    }
    checks.add("residuals", residual_ok);
    checks.add("winding_count", static_cast<int>(states.size()) == winding);

    const std::size_t n = states.size();
    std::vector<Complex> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = hermitian_form(states[i], states[i], omega);

    Csv pcsv{"l", "j", "lhs", "rhs", "xi_k", "rhs_energy", "xi_energy", "identity_defect", "surface_abs",
             "absorption_abs"};
    double worst_identity = 0.0;
    bool diag_positive = true;
    const Complex i_unit{0.0, 1.0};
    for (std::size_t l = 0; l < n; ++l) {
        if (!pot.has_gain() && pot.mode == WaveMode::Schrodinger) diag_positive = diag_positive && diag[l].real() >= 0.0;
        for (std::size_t j = l; j < n; ++j) {
            const auto parts = hermitian_form_parts(states[l], states[j], omega);
            const Complex lhs =
                -i_unit * (std::conj(states[l].energy) - states[j].energy) * volume_overlap(states[l], states[j], omega);
            const double scale = std::max(std::abs(parts.total()), std::sqrt(std::abs(diag[l]) * std::abs(diag[j])));
            const double defect = std::abs(lhs - parts.total()) / scale;
            worst_identity = std::max(worst_identity, defect);
            if (l == j) continue;
            ModifiedBound mb{std::nan(""), std::nan(""), std::nan(""), std::nan(""), std::nan("")};
            try {
                mb = modified_bound_check(states[l], states[j], omega);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ZeroRHS) throw;
            }
            pcsv.row(l, j, mb.lhs, mb.rhs, mb.xi_k, mb.rhs_energy, mb.xi_energy, defect, std::abs(parts.surface),
                     std::abs(parts.absorption));
        }
    }
    checks.add("master_identity", worst_identity <= id_tol);
    checks.add("diagonal_positivity", diag_positive);
    out << "resonances=" << n << " winding=" << winding << " omega=[" << num(omega.a) << "," << num(omega.b)
        << "] max_identity_defect=" << num(worst_identity) << '\n';

    OutputSet files;
    files.add("resonances.csv", rcsv.str());
    files.add("pairs.csv", pcsv.str());
    if (cfg.plot) {
        Series s{"resonances", {}, "#1f77b4", false};
        for (const auto& st : states) s.pts.emplace_back(st.k.real(), st.k.imag());
        files.add("resonances.svg", svg_plot("resonances in the complex k plane", "Re k", "Im k", {s}));
    }
    files.commit(cfg.out_dir);
    return checks.finish(out, err);
}

int cmd_backflow(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_output_dir(cfg);
    const json sec = section(cfg, "backflow");
    const auto pot = potential_of(cfg, sec);
    const auto pair = get_or<std::vector<std::size_t>>(sec, "pair", {0, 1});
    if (pair.size() != 2 || pair[0] == pair[1]) throw Error(ErrorCode::BadSpec, "'pair' needs two distinct indices");

    std::vector<Complex> alphas = defaults::backflow_alphas();
    if (sec.contains("alpha_abs")) {
        const json& a = sec.at("alpha_abs");
        const double lo = get_or(a, "min", 1e-2), hi = get_or(a, "max", 1e2);
        const std::size_t count = get_or<std::size_t>(a, "count", 41);
        const std::size_t phases = get_or<std::size_t>(sec, "phases", 24);
        if (!(lo > 0.0) || !(hi >= lo) || count < 1 || phases < 1)
            throw Error(ErrorCode::BadSpec, "bad alpha grid");
        alphas.clear();
        for (std::size_t m = 0; m < count; ++m) {
            const double t = count == 1 ? 0.0 : static_cast<double>(m) / static_cast<double>(count - 1);
            const double mag = lo * std::pow(hi / lo, t);
            for (std::size_t ph = 0; ph < phases; ++ph)
                alphas.push_back(std::polar(mag, 2.0 * std::numbers::pi * static_cast<double>(ph) / static_cast<double>(phases)));
        }
    }
    const auto xs = get_or(sec, "x", defaults::backflow_xs(pot));

    const auto states = find_resonances(pot, box_of(sec), search_options_of(cfg, sec));
    if (std::max(pair[0], pair[1]) >= states.size())
        throw Error(ErrorCode::BadSpec, "pair index beyond the " + std::to_string(states.size()) + " resonances found");
    const auto hits = backflow_scan(states[pair[0]], states[pair[1]], alphas, xs);

    Csv csv{"alpha_re", "alpha_im", "x", "j"};
    for (const auto& h : hits) csv.row(h.alpha.real(), h.alpha.imag(), h.x, h.flux);

    // e^{i k1 x} + alpha e^{i k2 x}
    const json pw = sec.value("plane_wave", json::object());
    const double k1 = get_or(pw, "k1", 1.0), k2 = get_or(pw, "k2", 0.1);
    const double alpha = get_or(pw, "alpha", 3.0);
    const double x = get_or(pw, "x", std::numbers::pi / 0.9);
    const Wave waves[2] = {PlaneWave{k1}, PlaneWave{k2}};
    const Complex amps[2] = {1.0, alpha};
    const double j_pw = current(waves, amps, x);
    Csv pcsv{"alpha_re", "alpha_im", "x", "j"};
    pcsv.row(alpha, 0.0, x, j_pw);

    Checks checks;
    checks.add("resonance_backflow_found", !hits.empty());
    checks.add("plane_wave_backflow", j_pw < 0.0);
    out << "pair=" << pair[0] << "-" << pair[1] << " grid_points=" << alphas.size() * xs.size()
        << " negative_points=" << hits.size() << " plane_wave_j=" << num(j_pw) << '\n';

    OutputSet files;
    files.add("backflow.csv", csv.str());
    files.add("backflow_plane_wave.csv", pcsv.str());
    files.commit(cfg.out_dir);
    return checks.finish(out, err);
}

int cmd_geometry(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_output_dir(cfg);
    const json sec = section(cfg, "geometry");
    const double tol = get_or(sec, "tol", defaults::kDistanceTol);
    const std::size_t n_orderings = get_or<std::size_t>(sec, "orderings", 100);
    const auto h = system_of(cfg, sec);
    const Spectrum sp = eig_general(h.h);
    const auto dc = check_distance_inequality(sp, tol);

    Csv csv{"pair", "d_hs", "d_ph", "margin"};
    for (const auto& m : dc.margins) csv.row(std::to_string(m.l) + "-" + std::to_string(m.j), m.d_hs, m.d_ph, m.margin);

    Checks checks;
    checks.add("distance_inequality", dc.holds);
    bool polygon_ok = true;
    double worst_gap = INFINITY;
    if (sp.size() >= 2) {
        auto order = default_ordering(sp);
        Rng rng(cfg.effective_seed(), 77);
        for (std::size_t r = 0; r <= n_orderings; ++r) {
            if (r > 0)
                for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
            const auto res = polygon_inequality(sp, order, tol);
            polygon_ok = polygon_ok && res.holds;
            worst_gap = std::min(worst_gap, res.lhs_sum - res.rhs_sum);
        }
        checks.add("polygon_inequality", polygon_ok);
    }
    double min_margin = INFINITY;
    for (const auto& m : dc.margins) min_margin = std::min(min_margin, m.margin);
    out << "pairs=" << dc.margins.size() << " skipped=" << dc.skipped << " min_margin=" << num(min_margin)
        << " min_polygon_gap=" << num(worst_gap) << '\n';

    OutputSet files;
    files.add("geometry.csv", csv.str());
    files.commit(cfg.out_dir);
    return checks.finish(out, err);
}

int cmd_demo_pt(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    require_output_dir(cfg);
    const json sec = section(cfg, "demo_pt");
    const double gamma = get_or(sec, "gamma", defaults::kPtGamma);
    const double g_min = get_or(sec, "g_min", defaults::kPtGMin);
    const double g_max = get_or(sec, "g_max", defaults::kPtGMax);
    const std::size_t steps = get_or(sec, "steps", defaults::kPtSteps);
    if (!(gamma > 0.0) || !(g_max >= g_min) || g_min < 0.0 || steps < 1)
        throw Error(ErrorCode::BadSpec, "bad demo_pt sweep");

    Csv csv{"g", "abs_overlap", "xi", "d_hs", "d_ph"};
    bool violation_near_ep = false;
    double min_dhs_near_ep = 1.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double g = steps == 1 ? g_min : g_min + (g_max - g_min) * static_cast<double>(s) / static_cast<double>(steps - 1);
        const auto report = overlap_report(build_pt_dimer(g, gamma));
        const double ov = std::abs(report.overlaps(0, 1));
        const double xi = report.xi(0, 1);
        const double dhs = d_hs(report.spectrum.right[0], report.spectrum.right[1]);
        double dph = std::nan("");  // undefined while an eigenvalue sits above the real axis
        try {
            dph = d_ph(HalfPlanePoint(report.spectrum.eigenvalues[0]), HalfPlanePoint(report.spectrum.eigenvalues[1]));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::UpperHalfPlaneEigenvalue && e.code() != ErrorCode::DegenerateDenominator) throw;
        }
        csv.row(g, ov, xi, dhs, dph);
        if (std::abs(g - 0.5 * gamma) <= 1e-3 * gamma) {
            violation_near_ep = violation_near_ep || (ov >= 0.99 && report.lw_rhs(0, 1) <= 1e-2);
            min_dhs_near_ep = std::min(min_dhs_near_ep, dhs);
        }
    }

    Checks checks;
    checks.add("bound_fails_near_ep", violation_near_ep);
    checks.add("eigenvectors_coalesce", min_dhs_near_ep < 0.1);
    out << "gamma=" << num(gamma) << " steps=" << steps << " min_d_hs_near_ep=" << num(min_dhs_near_ep) << '\n';

    OutputSet files;
    files.add("demo_pt.csv", csv.str());
    files.commit(cfg.out_dir);
    return checks.finish(out, err);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        switch (cfg.command) {
            case Command::Ensemble: return cmd_ensemble(cfg, out, err);
            case Command::Verify: return cmd_verify(cfg, out, err);
            case Command::Resonances: return cmd_resonances(cfg, out, err);
            case Command::Backflow: return cmd_backflow(cfg, out, err);
            case Command::Geometry: return cmd_geometry(cfg, out, err);
            case Command::DemoPt: return cmd_demo_pt(cfg, out, err);
        }
    } catch (const Error& e) {
        err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
        switch (e.code()) {
            case ErrorCode::Io:
            case ErrorCode::ParseError:
            case ErrorCode::BadSpec:
            case ErrorCode::BadShape:
            case ErrorCode::NotSquare:
                return kExitConfig;
            default:
                return kExitNumeric;
        }
    } catch (const json::exception& e) {
        err << "error [ParseError]: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitConfig;
}

}  // namespace nonortho::cli
