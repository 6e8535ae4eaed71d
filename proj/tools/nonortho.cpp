// nonortho <command> --config <file.json> [--out <dir>] [--seed <u64>] [--plot]

#include <iostream>

#include <CLI11.hpp>

#include "nonortho/cli.hpp"
#include "nonortho/error.hpp"

int main(int argc, char** argv) {
    namespace cli = nonortho::cli;

    CLI::App app{"Nonorthogonality bounds for open quantum and wave systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool plot = false;

    for (const char* name : {"ensemble", "verify", "resonances", "backflow", "geometry", "demo-pt"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_flag("--plot", plot, "also write SVG plots");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommand(command);
    try {
        auto cfg = cli::load_run_config(cli::parse_command(command), config_path);
        cfg.out_dir = out_dir;
        cfg.plot = plot;
        if (sub->count("--seed") > 0) cfg.seed = seed;
        return cli::run(cfg, std::cout, std::cerr);
    } catch (const nonortho::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kExitConfig;
    }
}
