#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "scatterscan/transport.hpp"

using namespace scatterscan;

namespace {

// Composite 5-point Gauss-Legendre on 400 panels; written out here so the
// oracle shares no code with the library's Simpson rules.
double line_oracle(const AttenuationField& sigma, const Vec& a, const Vec& b)
{
    static const double xs[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
    static const double ws[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                 0.4786286704993665, 0.2369268850561891};
    const int panels = 400;
    double len = distance(a, b);
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        for (int k = 0; k < 5; ++k) {
            double t = (p + 0.5 + 0.5 * xs[k]) / panels;
            sum += ws[k] * 0.5 * sigma(a + t * (b - a));
        }
    }
    return sum * len / panels;
}

BoundaryData ones()
{
    return BoundaryData::closed_form([](const Vec&, const Vec&) { return 1.0; }, 1.0);
}

BoundaryData smooth_source()
{
    return BoundaryData::closed_form(
        [](const Vec& x, const Vec& theta) {
            double c = dot(x, theta); // unit disk: -nu.theta = -x.theta
            return c < 0.0 ? (1.0 + 0.5 * x.x) * (-c) : 0.0;
        },
        1.5);
}

Vec random_point_in_disk(std::mt19937_64& rng, double r)
{
    std::uniform_real_distribution<double> u(-r, r);
    for (;;) {
        Vec p{u(rng), u(rng)};
        if (dot(p, p) <= r * r) {
            return p;
        }
    }
}

} // namespace

TEST_CASE("attenuation closed forms")
{
    auto disk = ConvexDomain::disk(1.0);
    auto zero = AttenuationField::zero_for_testing();
    CHECK(attenuation(zero, disk, {-0.3, 0.2}, {0.5, -0.1}) == 1.0);
    auto half = AttenuationField::constant(0.5);
    CHECK(attenuation(half, disk, {-1.0, 0.0}, {1.0, 0.0})
          == doctest::Approx(0.3678794411714423).epsilon(1e-12));
    CHECK(attenuation(half, disk, {0.2, 0.2}, {0.2, 0.2}) == 1.0);
    CHECK_THROWS_AS(attenuation(half, disk, {0.0, 0.0}, {2.0, 0.0}), Error);
}

TEST_CASE("blob attenuation against an independent quadrature")
{
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = three_blob_phantom();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    for (int k = 0; k < 20; ++k) {
        Vec a = polar(ang(rng));
        Vec b = polar(ang(rng));
        double want = std::exp(-line_oracle(sigma, a, b));
        CHECK(std::abs(attenuation(sigma, disk, a, b) - want) < 1e-6);
        // symmetry
        CHECK(std::abs(attenuation(sigma, disk, a, b) - attenuation(sigma, disk, b, a)) < 1e-12);
        // multiplicativity along the segment
        Vec m = a + 0.37 * (b - a);
        double prod = attenuation(sigma, disk, a, m) * attenuation(sigma, disk, m, b);
        CHECK(std::abs(attenuation(sigma, disk, a, b) - prod) < 1e-8);
    }
}

TEST_CASE("attenuation derivative identity")
{
    // d/dt alpha(x + t theta, x_{theta-}) = -sigma(x) alpha along theta.
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = three_blob_phantom();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    const double eps = 1e-4;
    for (int k = 0; k < 10; ++k) {
        Vec x = random_point_in_disk(rng, 0.7);
        Vec theta = polar(ang(rng));
        Vec in = entry_point(disk, x, theta);
        double fwd = attenuation(sigma, disk, x + eps * theta, in);
        double bwd = attenuation(sigma, disk, x - eps * theta, in);
        double d = (fwd - bwd) / (2.0 * eps);
        CHECK(d == doctest::Approx(-sigma(x) * attenuation(sigma, disk, x, in)).epsilon(1e-4));
    }
}

TEST_CASE("ballistic operator J")
{
    auto disk = ConvexDomain::disk(1.0);
    auto zero = AttenuationField::zero_for_testing();
    CHECK(apply_J(zero, disk, ones(), {0.3, -0.1}, {0.0, 1.0}) == 1.0);
    auto half = AttenuationField::constant(0.5);
    CHECK(apply_J(half, disk, ones(), {1.0, 0.0}, {1.0, 0.0})
          == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    auto quarter = BoundaryPatch::arc(kPi, kPi / 4.0);
    auto patched = BoundaryData::closed_form(
        [disk, quarter](const Vec& x, const Vec&) { return quarter.contains(disk, x) ? 1.0 : 0.0; },
        1.0);
    // entry point (1, 0) is outside the arc around (-1, 0)
    CHECK(apply_J(half, disk, patched, {0.0, 0.0}, {-1.0, 0.0}) == 0.0);
    CHECK(apply_J(half, disk, patched, {0.0, 0.0}, {1.0, 0.0}) > 0.0);
}

TEST_CASE("sampled boundary data interpolates smooth data")
{
    auto disk = ConvexDomain::disk(1.0);
    auto exact = smooth_source();
    auto table = BoundaryData::sampled(disk, 256, 64,
                                       [&exact](const Vec& x, const Vec& t) { return exact(x, t); });
    for (int i = 0; i < 16; ++i) {
        Vec x = polar(0.3 + 2.0 * kPi * i / 16.0);
        Vec theta = unit(-x + Vec{0.2, 0.1});
        CHECK(std::abs(table(x, theta) - exact(x, theta)) < 2e-3);
    }
}

TEST_CASE("angular average")
{
    auto disk = ConvexDomain::disk(1.0);
    auto disc = make_discretization(disk, 17, 64);
    RadianceField u(disc);
    RadianceField v(disc);
    for (std::size_t i = 0; i < disc.grid->inside_count(); ++i) {
        for (std::size_t j = 0; j < disc.directions.size(); ++j) {
            u.at(i, j) = 2.5;
            v.at(i, j) = disc.directions.directions[j].x;
        }
    }
    for (Vec x : {Vec{0.0, 0.0}, Vec{0.31, -0.2}, Vec{-0.6, 0.5}}) {
        CHECK(angular_average(u, x) == doctest::Approx(2.5).epsilon(1e-13));
        CHECK(std::abs(angular_average(v, x)) < 1e-10);
    }
}

TEST_CASE("source-to-solution operator")
{
    auto disk = ConvexDomain::disk(1.0);
    auto zero = AttenuationField::zero_for_testing();
    auto sigma = three_blob_phantom();
    Vec x{0.2, -0.3};
    Vec theta = unit(Vec{1.0, 0.4});
    Vec in = entry_point(disk, x, theta);

    CHECK(apply_Tinv(sigma, disk, [](const Vec&, const Vec&) { return 0.0; }, x, theta) == 0.0);
    CHECK(apply_Tinv(zero, disk, [](const Vec&, const Vec&) { return 1.0; }, x, theta)
          == doctest::Approx(distance(x, in)).epsilon(1e-12));
    double t = apply_Tinv(sigma, disk, [&](const Vec& y, const Vec&) { return sigma(y); }, x, theta);
    CHECK(t == doctest::Approx(1.0 - attenuation(sigma, disk, x, in)).epsilon(1e-8));
    // T^{-1} bound: |T^{-1}S| <= diameter ||S||
    double big = apply_Tinv(sigma, disk, [](const Vec&, const Vec&) { return -3.0; }, x, theta);
    CHECK(std::abs(big) <= disk.diameter() * 3.0);
}

TEST_CASE("scattering operator K")
{
    auto disk = ConvexDomain::disk(1.0);
    auto half = AttenuationField::constant(0.5);
    auto disc = make_discretization(disk, 33, 64);
    RadianceField one(disc);
    RadianceField nil(disc);
    for (std::size_t i = 0; i < disc.grid->inside_count(); ++i) {
        for (std::size_t j = 0; j < disc.directions.size(); ++j) {
            one.at(i, j) = 1.0;
        }
    }
    RadianceField k1 = apply_K(half, one);
    RadianceField k0 = apply_K(half, nil);
    double worst = 0.0;
    double kmax = 0.0;
    const auto& nodes = disc.grid->inside_nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Vec x = disc.grid->node(nodes[i]);
        for (std::size_t j = 0; j < disc.directions.size(); ++j) {
            const Vec& theta = disc.directions.directions[j];
            double want = 1.0 - std::exp(-0.5 * distance(x, entry_point(disk, x, theta)));
            worst = std::max(worst, std::abs(k1.at(i, j) - want));
            kmax = std::max(kmax, k1.at(i, j));
            CHECK(k0.at(i, j) == 0.0);
        }
    }
    CHECK(worst < 1e-9);
    CHECK(std::abs(kmax - (1.0 - std::exp(-1.0))) < 1e-3);
}

TEST_CASE("contraction certificate")
{
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = three_blob_phantom();
    double c = contraction_bound(sigma, disk);
    CHECK(c == doctest::Approx(1.0 - std::exp(-sigma.max_value() * 2.0)));
    CHECK(c < 1.0);

    auto disc = make_discretization(disk, 17, 32);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        RadianceField f(disc);
        double fmax = 0.0;
        for (std::size_t i = 0; i < disc.grid->inside_count(); ++i) {
            for (std::size_t j = 0; j < disc.directions.size(); ++j) {
                f.at(i, j) = u(rng);
                fmax = std::max(fmax, f.at(i, j));
            }
        }
        auto kf = apply_K(sigma, f);
        double kmax = *std::max_element(kf.values().begin(), kf.values().end());
        CHECK(kmax / fmax <= c + 1e-6);
    }

    CHECK(certified_terms(0.5, 0.0, 1e-6) == 0);
    // 0.5^{M+1} * 1 / 0.5 < 1e-3  <=>  M + 1 > log2(2000)
    CHECK(certified_terms(0.5, 1.0, 1e-3) == 10);
    CHECK_THROWS_AS(certified_terms(0.5, 1.0, 0.0), Error);
}

TEST_CASE("constant boundary data gives the constant solution")
{
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = three_blob_phantom();
    auto disc = make_discretization(disk, 33, 64);
    auto sol = solve_rte(sigma, ones(), 1e-5, disc);
    auto v = sol.radiance.values();
    double worst = 0.0;
    for (double x : v) {
        worst = std::max(worst, std::abs(x - 1.0));
    }
    CHECK(worst <= 1e-3);
    CHECK(sol.terms > 0);
    CHECK(sol.bound < 1e-5);
}

TEST_CASE("transparent medium reduces to the ballistic field")
{
    auto disk = ConvexDomain::disk(1.0);
    auto zero = AttenuationField::zero_for_testing();
    auto disc = make_discretization(disk, 17, 32);
    auto f = smooth_source();
    auto sol = solve_rte(zero, f, 1e-6, disc);
    CHECK(sol.terms == 0);
    const auto& nodes = disc.grid->inside_nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Vec x = disc.grid->node(nodes[i]);
        for (std::size_t j = 0; j < disc.directions.size(); ++j) {
            CHECK(sol.radiance.at(i, j) == apply_J(zero, disk, f, x, disc.directions.directions[j]));
        }
    }
}

TEST_CASE("solver residual on a 129 grid")
{
    auto disk = ConvexDomain::disk(1.0);
    auto half = AttenuationField::constant(0.5);
    auto disc = make_discretization(disk, 129, 64);
    auto f = smooth_source();
    auto sol = solve_rte(half, f, 1e-4, disc);

    auto trace = [&](const Vec& y, const Vec& theta) {
        return apply_J(half, disk, f, y, theta)
               + scattered_trace(half, f, sol.averages, disc, y, theta);
    };
    const double eps = 1e-3;
    double worst = 0.0;
    const auto& nodes = disc.grid->inside_nodes();
    for (std::size_t i = 0; i < nodes.size(); i += 37) {
        Vec x = disc.grid->node(nodes[i]);
        if (norm(x) > 0.95) {
            continue;
        }
        for (std::size_t j = 0; j < disc.directions.size(); j += 5) {
            const Vec& theta = disc.directions.directions[j];
            double d = (trace(x + eps * theta, theta) - trace(x - eps * theta, theta)) / (2.0 * eps);
            double r = d - 0.5 * (sol.average[i] - sol.radiance.at(i, j));
            worst = std::max(worst, std::abs(r));
        }
    }
    CHECK(worst <= 5e-2 * f.sup_norm());
}

TEST_CASE("restricted albedo")
{
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = three_blob_phantom();
    AveragedScattering op(sigma, make_discretization(disk, 33, 64));
    std::vector<std::pair<Vec, Vec>> outputs;
    for (int i = 0; i < 12; ++i) {
        Vec x = polar(2.0 * kPi * (i + 0.5) / 12.0);
        outputs.push_back({x, unit(x + Vec{0.1, -0.3})});
    }
    auto full = BoundaryPatch::full();
    auto out = albedo_restricted(sigma, full, ones(), outputs, 1e-5, op);
    for (double v : out) {
        CHECK(std::abs(v - 1.0) <= 1e-3);
    }

    auto pos = albedo_restricted(sigma, full, smooth_source(), outputs, 1e-5, op);
    for (double v : pos) {
        CHECK(v >= -1e-9);
    }

    std::vector<std::pair<Vec, Vec>> bad{{Vec{1.0, 0.0}, Vec{-1.0, 0.0}}};
    try {
        albedo_restricted(sigma, full, ones(), bad, 1e-5, op);
        FAIL("expected NotOutflow");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotOutflow);
    }

    // f == 1 leaks outside a quarter arc
    auto quarter = BoundaryPatch::arc(kPi, kPi / 4.0);
    std::vector<std::pair<Vec, Vec>> in_arc{{Vec{-1.0, 0.0}, Vec{-1.0, 0.0}}};
    try {
        albedo_restricted(sigma, quarter, ones(), in_arc, 1e-5, op);
        FAIL("expected SupportViolation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SupportViolation);
    }
    CHECK_THROWS_AS(albedo_restricted(sigma, full, ones(), outputs, 0.0, op), Error);
}
