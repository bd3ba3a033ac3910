#include <doctest.h>

#include <string>

#include "scatterscan/config.hpp"

using namespace scatterscan;

namespace {

ErrorCode code_of(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST_CASE("defaults parse")
{
    RunConfig c = parse_config("{}");
    CHECK(c.make_domain().dimension() == 2);
    CHECK(c.probe.h.size() >= 1);
    CHECK(c.probe_options().grid_nodes == c.grid.spatial);
}

TEST_CASE("bundled configs load")
{
    for (const char* name : {"default", "zero_sigma", "blobs", "oracle_full", "ball"}) {
        CAPTURE(name);
        RunConfig c = load_config(std::string(SCATTERSCAN_CONFIG_DIR) + "/" + name + ".json");
        CHECK_NOTHROW(c.make_sigma());
        CHECK_NOTHROW(c.make_patch());
    }
}

TEST_CASE("hash follows the content")
{
    auto a = parse_config(R"({"seed": 1})");
    auto b = parse_config(R"({"seed": 2})");
    auto c = parse_config(R"({ "seed" : 1 })");
    CHECK(a.hash != b.hash);
    CHECK(a.hash == c.hash);
}

TEST_CASE("configuration errors")
{
    CHECK(code_of(R"({"sigma": {"kind": "constant", "colour": 1}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"bogus": 1})") == ErrorCode::ConfigError);
    CHECK(code_of("{not json") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"probe": {"h": [0.1, 0.2]}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"probe": {"h": []}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"grid": {"spatial": 2}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"domain": {"kind": "torus"}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"domain": {"kind": "ball", "dimension": 2}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"sigma": {"kind": "constant", "value": -1}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"reconstruction": {"relaxation": 2.5}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"probe": {"angular_scaling": "cubic"}})") == ErrorCode::ConfigError);
    CHECK(code_of(R"({"grid": {"spatial": "big"}})") == ErrorCode::ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), Error);
}
