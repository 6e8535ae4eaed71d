#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

namespace nonortho::cli {

enum class Command { Ensemble, Verify, Resonances, Backflow, Geometry, DemoPt };

/// Throws Error{BadSpec} for an unknown name.
Command parse_command(const std::string& name);
const char* to_string(Command c) noexcept;

/// Exit codes: 0 all checks pass, 1 some check failed, 2 config or I/O
/// problem (nothing written), 3 numerical failure.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct RunConfig {
    Command command = Command::Ensemble;
    nlohmann::json config = nlohmann::json::object();
    /// Directory relative input paths in the config are resolved against.
    std::filesystem::path base_dir = ".";
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;  // overrides config "seed"
    bool plot = false;
    /// Worker pool size; 0 = hardware concurrency capped by NONORTHO_THREADS.
    unsigned threads = 0;

    std::uint64_t effective_seed() const;
};

/// Reads and parses the config file. Throws Error{Io} / Error{ParseError}.
RunConfig load_run_config(Command command, const std::filesystem::path& config_path);

/// Hardware concurrency capped by NONORTHO_THREADS when set.
unsigned worker_threads();

/// Each writes its CSV file(s) into cfg.out_dir, prints the summary line
/// `RESULT: PASS|FAIL n_checks=... n_failed=...` to `out` and returns the exit code.
int cmd_ensemble(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_resonances(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_backflow(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_geometry(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_demo_pt(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Dispatch on cfg.command, mapping exceptions to exit codes.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace nonortho::cli
