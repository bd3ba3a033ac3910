// scatterscan command-line driver.
//
//   scatterscan <command> --config <path> [--out <dir>] [--threads N]
//
// Commands: forward, probe, sinogram, reconstruct, hstudy, selftest.
// SCATTERSCAN_THREADS is used when --threads is absent.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "scatterscan/commands.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Local-data optical tomography laboratory"};
    app.require_subcommand(1);

    std::string config;
    std::string out_dir;
    int threads = 0;
    for (const char* name : {"forward", "probe", "sinogram", "reconstruct", "hstudy", "selftest"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (default: config 'output')");
        sub->add_option("--threads", threads, "OpenMP threads")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return scatterscan::kExitConfig;
    }

    if (threads == 0) {
        if (const char* env = std::getenv("SCATTERSCAN_THREADS")) {
            threads = std::atoi(env);
        }
    }
    if (threads > 0) {
        omp_set_num_threads(threads);
    }

    std::string command = app.get_subcommands().front()->get_name();
    std::optional<std::filesystem::path> out;
    if (!out_dir.empty()) {
        out = out_dir;
    }
    return scatterscan::run_command(command, config, out, std::cout, std::cerr);
}
