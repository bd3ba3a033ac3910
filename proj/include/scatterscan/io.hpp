#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scatterscan/xray.hpp"

namespace scatterscan {

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// "# scatterscan <version> config=<16 hex digits>"
std::string output_header(std::uint64_t config_hash);

/// Nine significant digits, as written to every CSV.
std::string format_number(double value);

/// Writes `<stem>.csv` and `<stem>.pgm` for an nx x ny field stored row-major
/// with row 0 at the lowest y. The CSV keeps that order; the PGM puts the
/// highest y on top.
void write_grid(std::span<const double> values, int nx, int ny, const std::filesystem::path& stem,
                std::uint64_t config_hash = 0);
void write_grid(const ScalarGrid& grid, const std::filesystem::path& stem,
                std::uint64_t config_hash = 0);

struct GridData {
    int nx = 0;
    int ny = 0;
    std::vector<double> values;
};

/// Reads a CSV written by write_grid.
GridData read_grid_csv(const std::filesystem::path& path);

/// Sinogram CSV in record order.
void write_sinogram(const Sinogram& sinogram, const std::filesystem::path& path,
                    std::uint64_t config_hash = 0);

} // namespace scatterscan
