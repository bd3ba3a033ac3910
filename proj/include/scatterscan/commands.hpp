#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "scatterscan/config.hpp"

namespace scatterscan {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitNumerical = 3,
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Fast invariant suite over the compute modules, seeded from the config.
std::vector<CheckResult> run_selftest(const RunConfig& config);

/// Runs one of forward, probe, sinogram, reconstruct, hstudy, selftest.
/// Files go to `out_dir` if given, else to the config's output directory.
/// Returns the process exit code; diagnostics go to `err`.
int run_command(const std::string& name, const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& out_dir, std::ostream& out,
                std::ostream& err);

} // namespace scatterscan
