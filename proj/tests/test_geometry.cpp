#include <doctest.h>

#include <cmath>
#include <random>

#include "scatterscan/geometry.hpp"
#include "scatterscan/grid.hpp"
#include "scatterscan/quadrature.hpp"

using namespace scatterscan;

namespace {

// Independent chord oracle: solve |x + t theta|^2 = 1 by the quadratic formula.
Vec unit_disk_hit(const Vec& x, const Vec& theta, double sign)
{
    double b = dot(x, theta);
    double c = dot(x, x) - 1.0;
    double t = -b + sign * std::sqrt(b * b - c);
    return x + t * theta;
}

} // namespace

TEST_CASE("exit and entry points on the unit disk")
{
    auto disk = ConvexDomain::disk(1.0);
    Vec e1{1.0, 0.0};

    Vec p = exit_point(disk, {0.0, 0.0}, e1);
    CHECK(p.x == doctest::Approx(1.0));
    CHECK(p.y == doctest::Approx(0.0));
    p = exit_point(disk, {-1.0, 0.0}, e1);
    CHECK(p.x == doctest::Approx(1.0));

    p = exit_point(disk, {0.0, 0.5}, e1);
    CHECK(p.x == doctest::Approx(std::sqrt(0.75)).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.5));

    p = entry_point(disk, {0.0, 0.0}, e1);
    CHECK(p.x == doctest::Approx(-1.0));
    p = entry_point(disk, {1.0, 0.0}, e1);
    CHECK(p.x == doctest::Approx(-1.0));
    p = entry_point(disk, {0.0, 0.5}, e1);
    CHECK(p.x == doctest::Approx(-std::sqrt(0.75)).epsilon(1e-12));
}

TEST_CASE("random chords agree with the quadratic oracle")
{
    auto disk = ConvexDomain::disk(1.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.7, 0.7);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int k = 0; k < 200; ++k) {
        Vec x{u(rng), u(rng)};
        double a = ang(rng);
        Vec theta{std::cos(a), std::sin(a)};
        Vec out = exit_point(disk, x, theta);
        Vec in = entry_point(disk, x, theta);
        Vec want_out = unit_disk_hit(x, theta, 1.0);
        Vec want_in = unit_disk_hit(x, theta, -1.0);
        CHECK(distance(out, want_out) < 1e-12);
        CHECK(distance(in, want_in) < 1e-12);
        // ordered and collinear along theta
        CHECK(dot(x - in, theta) >= 0.0);
        CHECK(dot(out - x, theta) >= 0.0);
        CHECK(norm(cross(out - in, theta)) < 1e-12);
        CHECK(distance(in, out) <= disk.diameter() + 1e-12);
    }
}

TEST_CASE("inflow pairs leave through an outflow pair")
{
    auto ellipse = ConvexDomain::ellipse(1.5, 0.8, {0.2, -0.1});
    for (int i = 0; i < 24; ++i) {
        Vec x = ellipse.boundary_point(2.0 * kPi * i / 24.0);
        Vec inward = -ellipse.normal(x);
        Vec theta = unit(inward + Vec{0.3, -0.2});
        REQUIRE(classify_boundary_pair(ellipse, x, theta) == FlowClass::inflow);
        Vec y = exit_point(ellipse, x, theta);
        CHECK(distance(x, y) > 1e-6);
        CHECK(classify_boundary_pair(ellipse, y, theta) == FlowClass::outflow);
    }
}

TEST_CASE("ball chords")
{
    auto ball = ConvexDomain::ball(2.0, {0.0, 0.0, 1.0});
    Vec p = exit_point(ball, {0.0, 0.0, 1.0}, {0.0, 0.0, 1.0});
    CHECK(p.z == doctest::Approx(3.0));
    p = entry_point(ball, {0.0, 0.0, 1.0}, {1.0, 0.0, 0.0});
    CHECK(p.x == doctest::Approx(-2.0));
    CHECK(ball.diameter() == doctest::Approx(4.0));
}

TEST_CASE("boundary pair classification")
{
    auto disk = ConvexDomain::disk(1.0);
    CHECK(classify_boundary_pair(disk, {1.0, 0.0}, {1.0, 0.0}) == FlowClass::outflow);
    CHECK(classify_boundary_pair(disk, {1.0, 0.0}, {-1.0, 0.0}) == FlowClass::inflow);
    CHECK(classify_boundary_pair(disk, {0.0, 1.0}, {1.0, 0.0}) == FlowClass::grazing);
}

TEST_CASE("geometry errors")
{
    auto disk = ConvexDomain::disk(1.0);
    CHECK_THROWS_AS(exit_point(disk, {3.0, 0.0}, {0.0, 1.0}), Error);
    try {
        classify_boundary_pair(disk, {0.5, 0.0}, {1.0, 0.0});
        FAIL("expected NotOnBoundary");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotOnBoundary);
    }
}

TEST_CASE("boundary patches")
{
    auto disk = ConvexDomain::disk(1.0);
    auto quarter = BoundaryPatch::arc(kPi, kPi / 4.0);
    CHECK(quarter.contains(disk, {-1.0, 0.0}));
    CHECK_FALSE(quarter.contains(disk, {1.0, 0.0}));
    CHECK(quarter.has_positive_measure());
    CHECK_FALSE(BoundaryPatch::empty().has_positive_measure());
    CHECK_FALSE(BoundaryPatch::arc(0.0, 0.0).has_positive_measure());
    CHECK(BoundaryPatch::full().contains(disk, {0.0, 1.0}));

    auto ball = ConvexDomain::ball(1.0);
    auto cap = BoundaryPatch::cap({0.0, 0.0, 1.0}, 0.5);
    CHECK(cap.contains(ball, {0.0, 0.0, 1.0}));
    CHECK_FALSE(cap.contains(ball, {1.0, 0.0, 0.0}));
}

TEST_CASE("direction quadrature in the plane")
{
    auto d8 = direction_quadrature(2, 8);
    REQUIRE(d8.size() == 8);
    double sum = 0.0;
    for (double w : d8.weights) {
        CHECK(w == doctest::Approx(kPi / 4.0));
        sum += w;
    }
    CHECK(sum == doctest::Approx(2.0 * kPi));

    auto d64 = direction_quadrature(2, 64);
    double one = 0.0;
    for (double w : d64.weights) {
        one += w;
    }
    CHECK(std::abs(one / d64.measure() - 1.0) < 1e-15);
}

TEST_CASE("direction quadrature moments")
{
    for (auto [n, res] : {std::pair{2, 32}, std::pair{2, 64}, std::pair{3, 26}, std::pair{3, 128}}) {
        auto d = direction_quadrature(n, res);
        CHECK(d.size() == static_cast<std::size_t>(res));
        double m0 = 0.0;
        double m1[3] = {0, 0, 0};
        double m2[3][3] = {};
        for (std::size_t k = 0; k < d.size(); ++k) {
            CHECK(d.weights[k] > 0.0);
            m0 += d.weights[k];
            for (int i = 0; i < 3; ++i) {
                m1[i] += d.weights[k] * d.directions[k][i];
                for (int j = 0; j < 3; ++j) {
                    m2[i][j] += d.weights[k] * d.directions[k][i] * d.directions[k][j];
                }
            }
        }
        double s = d.measure();
        CHECK(m0 / s == doctest::Approx(1.0).epsilon(1e-12));
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(m1[i] / s) < 1e-10);
            for (int j = 0; j < n; ++j) {
                double want = i == j ? 1.0 / n : 0.0;
                CHECK(std::abs(m2[i][j] / s - want) < 1e-8);
            }
        }
    }
}

TEST_CASE("gauss and adaptive quadrature")
{
    // x^15 is integrated exactly by the 8-point rule.
    double exact = (1.0 - 0.0) / 16.0;
    CHECK(gauss_integrate([](double x) { return std::pow(x, 15); }, 0.0, 1.0)
          == doctest::Approx(exact).epsilon(1e-14));
    CHECK(adaptive_simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-12)
          == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-11));
    CHECK(adaptive_gauss([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-12)
          == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("spatial grid interpolation reproduces linear fields")
{
    auto disk = ConvexDomain::disk(1.0);
    SpatialGrid grid(disk, 17);
    std::vector<double> inside(grid.inside_count());
    for (std::size_t i = 0; i < inside.size(); ++i) {
        Vec x = grid.node(grid.inside_nodes()[i]);
        inside[i] = 1.0 + 2.0 * x.x - x.y;
    }
    auto all = grid.expand(inside);
    for (Vec x : {Vec{0.1, 0.2}, Vec{-0.33, 0.41}, Vec{0.0, -0.6}}) {
        CHECK(grid.interpolate(all, x) == doctest::Approx(1.0 + 2.0 * x.x - x.y).epsilon(1e-12));
        double s = 0.0;
        grid.inside_stencil(x, [&](std::size_t p, double w) { s += w * inside[p]; });
        CHECK(s == doctest::Approx(1.0 + 2.0 * x.x - x.y).epsilon(1e-12));
    }
}
