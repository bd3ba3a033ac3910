#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scatterscan/io.hpp"

using namespace scatterscan;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    fs::path dir = fs::temp_directory_path() / "scatterscan_test_io";
    fs::create_directories(dir);
    return dir / name;
}

std::vector<std::string> lines_of(const fs::path& p)
{
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        out.push_back(line);
    }
    return out;
}

// Pixel values of a P2 file, skipping comments.
std::vector<int> pgm_pixels(const fs::path& p)
{
    std::vector<int> px;
    int skip = 3; // width, height, maxval
    for (const auto& line : lines_of(p)) {
        if (line.empty() || line[0] == '#' || line == "P2") {
            continue;
        }
        std::istringstream ss(line);
        for (int v; ss >> v;) {
            if (skip > 0) {
                --skip;
                continue;
            }
            px.push_back(v);
        }
    }
    return px;
}

} // namespace

TEST_CASE("fnv1a reference values")
{
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(output_header(0x1234) == "# scatterscan 0.1.0 config=0000000000001234");
}

TEST_CASE("PGM scales linearly")
{
    std::vector<double> v{0.0, 1.0, 2.0, 3.0};
    auto stem = scratch("ramp");
    write_grid(v, 2, 2, stem);
    auto px = pgm_pixels(stem.string() + ".pgm");
    REQUIRE(px.size() == 4);
    // highest y row first
    CHECK(px == std::vector<int>{170, 255, 0, 85});
    auto text = lines_of(stem.string() + ".pgm");
    CHECK(text[0] == "P2");
}

TEST_CASE("constant grid writes a degenerate scale")
{
    std::vector<double> v(9, 0.7);
    auto stem = scratch("flat");
    write_grid(v, 3, 3, stem);
    for (int p : pgm_pixels(stem.string() + ".pgm")) {
        CHECK(p == 0);
    }
    bool found = false;
    for (const auto& line : lines_of(stem.string() + ".pgm")) {
        found = found || line.find("min=max") != std::string::npos;
    }
    CHECK(found);
}

TEST_CASE("CSV round trip")
{
    std::vector<double> v{0.125, -3.5, 1e-7, 42.0, 0.1, 7.0};
    auto stem = scratch("trip");
    write_grid(v, 3, 2, stem, 99);
    auto back = read_grid_csv(stem.string() + ".csv");
    CHECK(back.nx == 3);
    CHECK(back.ny == 2);
    REQUIRE(back.values.size() == v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(back.values[i] == doctest::Approx(v[i]).epsilon(1e-9));
    }
    CHECK(lines_of(stem.string() + ".csv")[0] == output_header(99));
    CHECK_THROWS_AS(read_grid_csv(scratch("missing.csv")), Error);
}

TEST_CASE("sinogram rows")
{
    auto disk = ConvexDomain::disk(1.0);
    Sinogram s;
    for (int k = 0; k < 4; ++k) {
        SinogramRecord r;
        r.anchor = polar(kPi + 0.1 * k);
        r.direction = -r.anchor;
        r.chord = chord_through(disk, r.anchor, r.direction);
        r.recovered = k < 3 ? 0.5 : std::numeric_limits<double>::quiet_NaN();
        r.oracle = 0.5;
        r.status = k < 3 ? RecordStatus::valid : RecordStatus::grazing;
        s.records.push_back(r);
    }
    auto path = scratch("sino.csv");
    write_sinogram(s, path);
    auto text = lines_of(path);
    REQUIRE(text.size() == 6); // header, column names, four rows
    int grazing = 0;
    for (std::size_t i = 2; i < text.size(); ++i) {
        grazing += text[i].find(",grazing") != std::string::npos;
    }
    CHECK(grazing == 1);
    CHECK(s.valid_count() == 3);
}

TEST_CASE("zero medium sweep columns")
{
    auto disk = ConvexDomain::disk(1.0);
    auto sino = oracle_sinogram(AttenuationField::zero_for_testing(), disk,
                                BoundaryPatch::arc(kPi, kPi / 4.0), 3, 3);
    auto path = scratch("zero.csv");
    write_sinogram(sino, path);
    auto text = lines_of(path);
    for (std::size_t i = 2; i < text.size(); ++i) {
        CHECK(text[i].find(",0,0,valid") != std::string::npos);
    }
}
