#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "scatterscan/commands.hpp"
#include "scatterscan/io.hpp"
#include "scatterscan/quadrature.hpp"

namespace scatterscan {

namespace {

class Suite {
  public:
    void check(const std::string& name, bool ok, const std::string& detail = {})
    {
        results_.push_back({name, ok, detail});
    }

    void near(const std::string& name, double got, double want, double tol)
    {
        std::ostringstream d;
        d << "got " << format_number(got) << " want " << format_number(want) << " tol " << tol;
        check(name, std::abs(got - want) <= tol, d.str());
    }

    template <class F>
    void guarded(const std::string& name, F&& body)
    {
        try {
            body();
        } catch (const std::exception& e) {
            check(name, false, std::string("threw ") + e.what());
        }
    }

    template <class F>
    void throws(const std::string& name, ErrorCode code, F&& body)
    {
        try {
            body();
            check(name, false, "no error raised");
        } catch (const Error& e) {
            check(name, e.code() == code, e.what());
        }
    }

    std::vector<CheckResult> results_;
};

void geometry_checks(Suite& s)
{
    auto disk = ConvexDomain::disk(1.0);
    s.near("exit_point center", exit_point(disk, {}, {1, 0, 0}).x, 1.0, 1e-12);
    s.near("exit_point off-axis", exit_point(disk, {0, 0.5, 0}, {1, 0, 0}).x,
           std::sqrt(0.75), 1e-12);
    s.near("entry_point from boundary", entry_point(disk, {1, 0, 0}, {1, 0, 0}).x, -1.0, 1e-12);
    s.throws("exit_point outside", ErrorCode::NoIntersection,
             [&] { exit_point(disk, {2, 0, 0}, {1, 0, 0}); });
    s.check("classify outflow",
            classify_boundary_pair(disk, {1, 0, 0}, {1, 0, 0}) == FlowClass::outflow);
    s.check("classify inflow",
            classify_boundary_pair(disk, {1, 0, 0}, {-1, 0, 0}) == FlowClass::inflow);
    s.check("classify grazing",
            classify_boundary_pair(disk, {0, 1, 0}, {1, 0, 0}) == FlowClass::grazing);
    s.throws("classify off boundary", ErrorCode::NotOnBoundary,
             [&] { classify_boundary_pair(disk, {0.5, 0, 0}, {1, 0, 0}); });

    auto d8 = direction_quadrature(2, 8);
    double sum = 0.0;
    for (double w : d8.weights) sum += w;
    s.near("planar weights sum", sum, 2.0 * kPi, 1e-12);
    auto d3 = direction_quadrature(3, 26);
    double sum3 = 0.0;
    double first = 0.0;
    double second = 0.0;
    for (std::size_t j = 0; j < d3.size(); ++j) {
        sum3 += d3.weights[j];
        first += d3.weights[j] * d3.directions[j].x;
        second += d3.weights[j] * d3.directions[j].z * d3.directions[j].z;
    }
    s.near("spherical weights sum", sum3, 4.0 * kPi, 1e-6);
    s.near("spherical first moment", first / (4.0 * kPi), 0.0, 1e-10);
    s.near("spherical second moment", second / (4.0 * kPi), 1.0 / 3.0, 1e-8);
    s.throws("quadrature dimension", ErrorCode::UnsupportedDimension,
             [] { direction_quadrature(4, 8); });
}

void transport_checks(Suite& s, const AttenuationField& configured, std::mt19937_64& rng)
{
    auto disk = ConvexDomain::disk(1.0);
    auto zero = AttenuationField::zero_for_testing();
    auto half = AttenuationField::constant(0.5);
    s.near("attenuation zero sigma", attenuation(zero, disk, {-1, 0, 0}, {1, 0, 0}), 1.0, 0.0);
    s.near("attenuation diameter", attenuation(half, disk, {-1, 0, 0}, {1, 0, 0}), std::exp(-1.0),
           1e-12);

    std::uniform_real_distribution<double> u(-0.6, 0.6);
    Vec a{u(rng), u(rng), 0};
    Vec c{u(rng), u(rng), 0};
    Vec b = 0.5 * (a + c);
    s.near("attenuation symmetry", attenuation(configured, disk, a, c),
           attenuation(configured, disk, c, a), 1e-10);
    s.near("attenuation multiplicativity", attenuation(configured, disk, a, c),
           attenuation(configured, disk, a, b) * attenuation(configured, disk, b, c), 1e-8);
    {
        Vec theta = unit(c - a);
        double t = 0.3 * distance(a, c);
        double dt = 1e-4;
        double fd = (attenuation(configured, disk, a, a + (t + dt) * theta)
                     - attenuation(configured, disk, a, a + (t - dt) * theta))
                    / (2 * dt);
        s.near("attenuation derivative identity", fd,
               -configured(a + t * theta) * attenuation(configured, disk, a, a + t * theta), 1e-4);
    }

    auto one = BoundaryData::closed_form([](const Vec&, const Vec&) { return 1.0; }, 1.0);
    s.near("J of constant data", apply_J(half, disk, one, {1, 0, 0}, {1, 0, 0}), std::exp(-1.0),
           1e-12);
    PhaseSpaceFunction sig = [&](const Vec& x, const Vec&) { return configured(x); };
    Vec x{0.2, -0.1, 0};
    Vec theta = unit(Vec{1, 2, 0});
    s.near("T^-1 sigma = 1 - alpha", apply_Tinv(configured, disk, sig, x, theta),
           1.0 - attenuation(configured, disk, x, entry_point(disk, x, theta)), 1e-8);
    PhaseSpaceFunction unit_source = [](const Vec&, const Vec&) { return 1.0; };
    s.near("T^-1 path length", apply_Tinv(zero, disk, unit_source, x, theta),
           distance(x, entry_point(disk, x, theta)), 1e-12);

    auto disc = make_discretization(disk, 17, 16);
    RadianceField ones(disc);
    for (std::size_t i = 0; i < disc.grid->inside_count(); ++i) {
        for (std::size_t j = 0; j < disc.directions.size(); ++j) {
            ones.at(i, j) = 1.0;
        }
    }
    RadianceField k1 = apply_K(half, ones);
    double worst = 0.0;
    double kmax = 0.0;
    for (std::size_t i = 0; i < disc.grid->inside_count(); ++i) {
        Vec p = disc.grid->node(disc.grid->inside_nodes()[i]);
        for (std::size_t j = 0; j < disc.directions.size(); ++j) {
            double want = 1.0 - attenuation(half, disk, p, entry_point(disk, p, disc.directions.directions[j]));
            worst = std::max(worst, std::abs(k1.at(i, j) - want));
            kmax = std::max(kmax, k1.at(i, j));
        }
    }
    s.near("K of ones", worst, 0.0, 1e-6);
    s.check("K contraction", kmax <= contraction_bound(half, disk) + 1e-6);
    s.check("certified terms vanish for zero norm", certified_terms(0.5, 0.0, 1e-6) == 0);
    s.throws("certified terms tolerance", ErrorCode::NonPositiveTolerance,
             [] { certified_terms(0.5, 1.0, 0.0); });

    RteSolution sol = solve_rte(half, one, 1e-6, disc);
    double dev = 0.0;
    for (double v : sol.radiance.values()) dev = std::max(dev, std::abs(v - 1.0));
    s.near("constant solution", dev, 0.0, 1e-3);
}

void probe_checks(Suite& s)
{
    auto disk = ConvexDomain::disk(1.0);
    SingularSource lin(disk, {-1, 0, 0}, {1, 0, 0}, 0.1, AngularScaling::linear);
    s.near("psi peak", evaluate_psi(lin, {-1, 0, 0}, {1, 0, 0}), 100.0, 1e-9);
    s.near("psi support", evaluate_psi(lin, disk.boundary_point(kPi + 0.2), {1, 0, 0}), 0.0, 0.0);
    double mass = gauss_integrate([&](double p) { return lin.spatial(disk.boundary_point(p)); },
                                  kPi - 0.1, kPi, 16)
                  + gauss_integrate([&](double p) { return lin.spatial(disk.boundary_point(p)); },
                                    kPi, kPi + 0.1, 16);
    s.near("spatial profile mass", mass, 1.0, 1e-9);
    auto ball = ConvexDomain::ball(1.0);
    double rho = cone_radius(100.0, 1.0);
    double cone_mass = 100.0 * 2.0 * kPi * (1.0 - std::sin(rho) / rho);
    s.near("cone mass", cone_mass, 1.0, 1e-9);
    (void)ball;

    auto zero = AttenuationField::zero_for_testing();
    ProbeOptions opt;
    opt.grid_nodes = 9;
    opt.directions = 8;
    SingularSource src(disk, {-1, 0, 0}, {1, 0, 0}, 0.1);
    ProbeResult r = backscatter_measurement(zero, BoundaryPatch::full(), src, opt);
    s.near("transparent probe", r.measured, 0.0, 0.0);
    s.near("transparent alpha^2", recover_alpha_sq(r, src), 1.0, 0.0);
    s.check("split is exact", r.measured == r.ballistic + r.single_scatter + r.remainder);
    s.throws("anchor outside patch", ErrorCode::SupportViolation, [&] {
        check_source(src, BoundaryPatch::arc(0.0, 0.5));
    });
    s.throws("width too large", ErrorCode::WidthTooLarge, [&] {
        check_source(SingularSource(disk, {-1, 0, 0}, {1, 0, 0}, 0.3), BoundaryPatch::arc(kPi, 0.2));
    });
    s.near("log-log slope", log_log_slope({1, 2, 4}, {1, 0.5, 0.25}), -1.0, 1e-12);
}

void xray_checks(Suite& s, const AttenuationField& configured)
{
    auto disk = ConvexDomain::disk(1.0);
    Chord diameter = chord_through(disk, {}, {1, 0, 0});
    s.near("oracle constant", oracle_line_integral(AttenuationField::constant(0.25), diameter),
           0.5, 1e-12);
    Chord c = chord_through(disk, {0.1, 0.2, 0}, unit(Vec{1, 1, 0}));
    double simpson = oracle_line_integral(configured, c);
    double gauss = adaptive_gauss(
        [&](double t) { return configured(c.entry + t * c.direction); }, 0.0, c.length, 1e-11);
    s.near("oracle cross-check", simpson, gauss, 1e-7);

    std::vector<Chord> chords{diameter, c};
    SystemMatrix a = build_system_matrix(disk, 16, chords);
    s.near("row sum is chord length", a.row_sum(1), c.length, 1e-6);
    s.check("matrix shape", a.rows == 2 && a.cols == a.pixels.size());
    s.throws("empty chord set", ErrorCode::EmptyChordSet,
             [&] { build_system_matrix(disk, 16, std::span<const Chord>{}); });

    Sinogram zeros = oracle_sinogram(AttenuationField::zero_for_testing(), disk,
                                     BoundaryPatch::full(), 8, 8);
    auto rec = reconstruct(zeros, disk, 16, 5, 0.9, true);
    double mx = 0.0;
    for (double v : rec.grid.values()) mx = std::max(mx, std::abs(v));
    s.near("zero sinogram reconstructs zero", mx, 0.0, 0.0);
    s.near("empty patch scannability",
           scannability_surrogate(disk, BoundaryPatch::empty(), 8).smallest_singular_value, 0.0,
           0.0);
    s.throws("point patch viewpoint", ErrorCode::ConstructionFailed,
             [&] { construct_viewpoint(disk, BoundaryPatch::arc(0.0, 0.0), 1000); });
    auto vp = construct_viewpoint(disk, BoundaryPatch::full(), 2000);
    s.check("full patch viewpoint", vp.violations == 0 && vp.hits > 0);
}

void io_checks(Suite& s)
{
    auto dir = std::filesystem::temp_directory_path() / "scatterscan_selftest";
    std::filesystem::create_directories(dir);
    std::vector<double> v{0.125, 1.0 / 3.0, 2.0, 3.5};
    write_grid(v, 2, 2, dir / "grid");
    GridData back = read_grid_csv(dir / "grid.csv");
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        worst = std::max(worst, std::abs(back.values[i] - v[i]) / std::abs(v[i]));
    }
    s.check("grid csv round trip", back.nx == 2 && back.ny == 2 && worst < 1e-8);
    std::filesystem::remove_all(dir);
}

} // namespace

std::vector<CheckResult> run_selftest(const RunConfig& config)
{
    Suite s;
    std::mt19937_64 rng(config.seed);
    AttenuationField sigma = config.make_sigma();
    if (config.domain.kind != "disk" || config.domain.radius != 1.0 || sigma.min_value() <= 0.0) {
        // The invariant suite runs on the unit disk; fall back to the blob phantom.
        sigma = three_blob_phantom();
    }
    s.guarded("geometry", [&] { geometry_checks(s); });
    s.guarded("transport", [&] { transport_checks(s, sigma, rng); });
    s.guarded("probe", [&] { probe_checks(s); });
    s.guarded("xray", [&] { xray_checks(s, sigma); });
    s.guarded("io", [&] { io_checks(s); });
    return s.results_;
}

} // namespace scatterscan
