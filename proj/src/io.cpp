#include "scatterscan/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace scatterscan {

std::uint64_t fnv1a(std::string_view text)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string output_header(std::uint64_t config_hash)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "# scatterscan %s config=%016llx", kVersion,
                  static_cast<unsigned long long>(config_hash));
    return buf;
}

std::string format_number(double value)
{
    if (std::isnan(value)) {
        return "nan";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path)
{
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing " + path.string());
    }
}

} // namespace

void write_grid(std::span<const double> values, int nx, int ny, const std::filesystem::path& stem,
                std::uint64_t config_hash)
{
    if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * ny) {
        throw Error(ErrorCode::InvalidArgument, "grid shape does not match its values");
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::InvalidArgument, "grid values must be finite");
        }
    }
    std::filesystem::path csv_path = stem;
    csv_path += ".csv";
    std::ofstream csv = open_output(csv_path);
    csv << output_header(config_hash) << '\n' << nx << ',' << ny << '\n';
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            csv << (i ? "," : "") << format_number(values[static_cast<std::size_t>(j) * nx + i]);
        }
        csv << '\n';
    }
    finish(csv, csv_path);

    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it;
    double hi = *hi_it;
    std::filesystem::path pgm_path = stem;
    pgm_path += ".pgm";
    std::ofstream pgm = open_output(pgm_path);
    pgm << "P2\n" << output_header(config_hash) << '\n';
    if (hi > lo) {
        pgm << "# scale min=" << format_number(lo) << " max=" << format_number(hi) << '\n';
    } else {
        pgm << "# scale min=max=" << format_number(lo) << '\n';
    }
    pgm << nx << ' ' << ny << "\n255\n";
    for (int j = ny - 1; j >= 0; --j) {
        for (int i = 0; i < nx; ++i) {
            double v = values[static_cast<std::size_t>(j) * nx + i];
            int p = hi > lo ? static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo))) : 0;
            pgm << (i ? " " : "") << p;
        }
        pgm << '\n';
    }
    finish(pgm, pgm_path);
}

void write_grid(const ScalarGrid& grid, const std::filesystem::path& stem,
                std::uint64_t config_hash)
{
    write_grid(grid.values(), grid.size(), grid.size(), stem, config_hash);
}

GridData read_grid_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    GridData data;
    std::string line;
    bool have_shape = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        if (!have_shape) {
            row >> data.nx >> data.ny;
            have_shape = true;
            continue;
        }
        std::string cell;
        while (row >> cell) {
            data.values.push_back(std::stod(cell));
        }
    }
    if (!have_shape || data.values.size() != static_cast<std::size_t>(data.nx) * data.ny) {
        throw Error(ErrorCode::IoError, "malformed grid file " + path.string());
    }
    return data;
}

void write_sinogram(const Sinogram& sinogram, const std::filesystem::path& path,
                    std::uint64_t config_hash)
{
    if (sinogram.records.empty()) {
        throw Error(ErrorCode::InvalidArgument, "sinogram is empty");
    }
    const bool spatial = sinogram.dimension == 3;
    std::ofstream out = open_output(path);
    out << output_header(config_hash) << '\n';
    auto names = [&](const char* base) {
        std::string s = std::string(base) + "_x," + base + "_y";
        return spatial ? s + "," + base + "_z" : s;
    };
    out << names("anchor") << ',' << names("dir") << ',' << names("entry") << ','
        << names("exit") << ",recovered,oracle,status\n";
    auto vec = [&](const Vec& v) {
        std::string s = format_number(v.x) + "," + format_number(v.y);
        return spatial ? s + "," + format_number(v.z) : s;
    };
    for (const auto& r : sinogram.records) {
        out << vec(r.anchor) << ',' << vec(r.direction) << ',' << vec(r.chord.entry) << ','
            << vec(r.chord.exit) << ',' << format_number(r.recovered) << ','
            << (r.oracle ? format_number(*r.oracle) : std::string("nan")) << ','
            << to_string(r.status) << '\n';
    }
    finish(out, path);
}

} // namespace scatterscan
