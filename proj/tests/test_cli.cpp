#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "nonortho/cli.hpp"
#include "nonortho/hamiltonian.hpp"

using namespace nonortho;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("nonortho_cli_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string c; std::getline(in, c, ',');) out.push_back(c);
    return out;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(cli::Command cmd, nlohmann::json config, const fs::path& out_dir) {
    cli::RunConfig cfg;
    cfg.command = cmd;
    cfg.config = std::move(config);
    cfg.out_dir = out_dir;
    cfg.threads = 2;
    std::ostringstream o, e;
    const int code = cli::run(cfg, o, e);
    return {code, o.str(), e.str()};
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command names") {
    CHECK(cli::parse_command("demo-pt") == cli::Command::DemoPt);
    CHECK(std::string(cli::to_string(cli::Command::Resonances)) == "resonances");
    CHECK_THROWS(cli::parse_command("plot"));
}

TEST_CASE("ensemble output and determinism") {
    const nlohmann::json cfg = {{"ensemble", {{"realizations", 3}}}};
    const auto d1 = scratch("ens1"), d2 = scratch("ens2");
    const auto r1 = run(cli::Command::Ensemble, cfg, d1);
    const auto r2 = run(cli::Command::Ensemble, cfg, d2);
    CHECK(r1.code == 0);
    CHECK(r1.out.find("RESULT: PASS") != std::string::npos);
    const std::string a = slurp(d1 / "fig1.csv");
    CHECK(a == slurp(d2 / "fig1.csv"));
    const auto rows = lines(a);
    REQUIRE(rows.size() == 41);
    CHECK(rows[0] == "kind,M,mean_xi,std_xi,prediction_inv_M,realizations");
    CHECK(split(rows[1])[0] == "random");
    CHECK(split(rows[21])[0] == "chain");
    CHECK(split(rows[20])[1] == "20");

    const auto d3 = scratch("ens3");
    nlohmann::json other = cfg;
    other["seed"] = 7;
    run(cli::Command::Ensemble, other, d3);
    CHECK(slurp(d3 / "fig1.csv") != a);

    const auto d4 = scratch("ens4");
    const auto r4 = run(cli::Command::Ensemble, {{"ensemble", {{"realizations", 1}, {"m_values", {1}}, {"kinds", {"random"}}}}}, d4);
    CHECK(r4.code == 0);
    const auto one = lines(slurp(d4 / "fig1.csv"));
    REQUIRE(one.size() == 2);
    CHECK(std::stod(split(one[1])[2]) == doctest::Approx(1.0).epsilon(1e-10));

    for (const auto& d : {d1, d2, d3, d4}) fs::remove_all(d);
}

TEST_CASE("bad output path leaves nothing behind") {
    const auto file = scratch("not_a_dir");
    std::ofstream(file) << "x";
    const auto r = run(cli::Command::Ensemble, {{"ensemble", {{"realizations", 1}, {"m_values", {1}}}}}, file);
    CHECK(r.code == cli::kExitConfig);
    CHECK(slurp(file) == "x");
    const auto r2 = run(cli::Command::DemoPt, nlohmann::json::object(), file / "sub");
    CHECK(r2.code == cli::kExitConfig);
    CHECK_FALSE(fs::exists(file / "sub"));
    fs::remove(file);
}

TEST_CASE("verify") {
    const auto d = scratch("verify");
    const auto pass = run(cli::Command::Verify, {{"verify", {{"builder", {{"type", "random_psd"}, {"dim", 10}, {"rank", 3}}}}}}, d);
    CHECK(pass.code == 0);
    CHECK(pass.out.find("RESULT: PASS n_checks=2") != std::string::npos);
    const auto rows = lines(slurp(d / "bounds.csv"));
    CHECK(rows[0] == "pair,overlap2,lw_rhs,xi,biorth_lhs,holds");
    CHECK(rows.size() == 1 + 45);
    CHECK(lines(slurp(d / "sensitivity.csv")).size() == 11);

    const auto fail = run(cli::Command::Verify, {{"verify", {{"builder", {{"type", "pt_dimer"}, {"g", 0.499}, {"gamma", 1.0}}}}}}, d);
    CHECK(fail.code == cli::kExitFail);
    CHECK(fail.out.find("RESULT: FAIL") != std::string::npos);
    CHECK(fail.err.find("violation: pair 0-1") != std::string::npos);

    // Hermitian input passes vacuously
    const auto hfile = d / "closed.json";
    save_hamiltonian(EffectiveHamiltonian::from_matrix(tight_binding_chain(4)), hfile.string());
    const auto vac = run(cli::Command::Verify, {{"verify", {{"hamiltonian", hfile.string()}}}}, d);
    CHECK(vac.code == 0);
    CHECK(vac.out.find("defined_pairs=0") != std::string::npos);

    const auto bad = run(cli::Command::Verify, {{"verify", {{"builder", {{"type", "nope"}}}}}}, d);
    CHECK(bad.code == cli::kExitConfig);
    fs::remove_all(d);
}

TEST_CASE("resonances, backflow, geometry, demo-pt") {
    const auto d = scratch("wave");
    const auto res = run(cli::Command::Resonances, nlohmann::json::object(), d);
    CHECK(res.code == 0);
    const auto rrows = lines(slurp(d / "resonances.csv"));
    CHECK(rrows[0] == "index,re_k,im_k,re_E,im_E,residual");
    CHECK(rrows.size() >= 4);
    CHECK(fs::exists(d / "pairs.csv"));

    const auto bf = run(cli::Command::Backflow, nlohmann::json::object(), d);
    CHECK(bf.code == 0);
    const auto pw = lines(slurp(d / "backflow_plane_wave.csv"));
    REQUIRE(pw.size() == 2);
    CHECK(std::stod(split(pw[1])[3]) == doctest::Approx(-2.8).epsilon(1e-10));
    CHECK(lines(slurp(d / "backflow.csv")).size() > 1);

    const auto geo = run(cli::Command::Geometry, nlohmann::json::object(), d);
    CHECK(geo.code == 0);
    CHECK(lines(slurp(d / "geometry.csv"))[0] == "pair,d_hs,d_ph,margin");

    const auto pt = run(cli::Command::DemoPt, nlohmann::json::object(), d);
    CHECK(pt.code == 0);
    const auto prow = lines(slurp(d / "demo_pt.csv"));
    CHECK(prow[0] == "g,abs_overlap,xi,d_hs,d_ph");
    CHECK(prow.size() == 202);
    const auto mid = split(prow[101]);  // g = 0.5
    CHECK(std::stod(mid[0]) == doctest::Approx(0.5));
    CHECK(std::stod(mid[3]) < 0.1);

    const auto plot = run(cli::Command::Resonances, {{"resonances", {{"potential", {{"mode", "helmholtz"}, {"breakpoints", {0, 1}}, {"values_re", {4}}}}}}}, d);
    CHECK(plot.code == 0);
    fs::remove_all(d);
}

TEST_CASE("command-line front end") {
    const std::string exe = NONORTHO_CLI_PATH;
    const auto d = scratch("exe");
    fs::create_directories(d);
    std::ofstream(d / "cfg.json") << R"({"seed": 5, "ensemble": {"realizations": 1, "m_values": [1, 2], "kinds": ["random"]}})";
    CHECK(shell(exe + " ensemble --config " + (d / "cfg.json").string() + " --out " + (d / "o").string() +
                " --plot > /dev/null") == 0);
    CHECK(fs::exists(d / "o" / "fig1.csv"));
    CHECK(fs::exists(d / "o" / "fig1.svg"));
    std::ofstream(d / "file") << "x";
    CHECK(shell(exe + " ensemble --config " + (d / "cfg.json").string() + " --out " + (d / "file").string() +
                " > /dev/null 2>&1") == 2);
    CHECK(shell(exe + " ensemble --config " + (d / "missing.json").string() + " > /dev/null 2>&1") == 2);
    CHECK(shell(exe + " bogus --config x > /dev/null 2>&1") == 2);
    fs::remove_all(d);
}
