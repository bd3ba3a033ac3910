// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
//   acceptance            all criteria
//   acceptance AC4 AC9    selected criteria only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scatterscan/probe.hpp"
#include "scatterscan/transport.hpp"
#include "scatterscan/xray.hpp"

using namespace scatterscan;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

double median(std::vector<double> v)
{
    if (v.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

const Vec kWest{-1.0, 0.0};
const Vec kEast{1.0, 0.0};

BoundaryPatch quarter_arc() { return BoundaryPatch::arc(kPi, kPi / 4.0); }

// smooth in position, vanishing at grazing incidence; sup norm 1.5
BoundaryData smooth_source()
{
    return BoundaryData::closed_form(
        [](const Vec& x, const Vec& theta) {
            double c = -dot(x, theta);
            return c > 0.0 ? (1.0 + 0.5 * x.x) * c : 0.0;
        },
        1.5);
}

BoundaryData ones()
{
    return BoundaryData::closed_form([](const Vec&, const Vec&) { return 1.0; }, 1.0);
}

//---------------------------------------------------------------------------//

Outcome ac1()
{
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = AttenuationField::constant(0.5);
    auto f = smooth_source();
    auto disc = make_discretization(disk, 257, 64);
    const double eps = 1e-4;
    double worst = 0.0;
    for (std::size_t flat : disc.grid->inside_nodes()) {
        Vec x = disc.grid->node(flat);
        if (disk.level(x) > 0.999) {
            continue;
        }
        for (const Vec& theta : disc.directions.directions) {
            double fwd = apply_J(sigma, disk, f, x + eps * theta, theta);
            double bwd = apply_J(sigma, disk, f, x - eps * theta, theta);
            double r = (fwd - bwd) / (2.0 * eps) + 0.5 * apply_J(sigma, disk, f, x, theta);
            worst = std::max(worst, std::abs(r));
        }
    }
    double rel = worst / f.sup_norm();
    return {rel <= 1e-3, "sup residual / ||f|| = " + fmt("%.3g", rel) + " (limit 1e-3)"};
}

Outcome ac2()
{
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = three_blob_phantom();
    double c = contraction_bound(sigma, disk);
    auto disc = make_discretization(disk, 33, 64);
    std::mt19937_64 rng(20240531);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        RadianceField field(disc);
        // iid, smooth and sparse fields in turn
        double fmax = 0.0;
        double kx = 4.0 * u(rng);
        double ky = 4.0 * u(rng);
        for (std::size_t i = 0; i < disc.grid->inside_count(); ++i) {
            Vec x = disc.grid->node(disc.grid->inside_nodes()[i]);
            for (std::size_t j = 0; j < disc.directions.size(); ++j) {
                double v = 0.0;
                switch (trial % 3) {
                case 0: v = u(rng); break;
                case 1: v = 1.0 + std::sin(kx * x.x + ky * x.y + 0.3 * j); break;
                default: v = u(rng) < 0.05 ? 1.0 : 0.0; break;
                }
                field.at(i, j) = v;
                fmax = std::max(fmax, v);
            }
        }
        auto k = apply_K(sigma, field);
        double kmax = 0.0;
        for (double v : k.values()) {
            kmax = std::max(kmax, std::abs(v));
        }
        worst = std::max(worst, kmax / fmax);
    }
    bool pass = worst <= c + 1e-6 && c < 1.0;
    return {pass, "max ||Ku||/||u|| = " + fmt("%.6f", worst) + ", bound " + fmt("%.6f", c)};
}

Outcome ac3()
{
    auto disk = ConvexDomain::disk(1.0);
    auto sigma = three_blob_phantom();
    auto disc = make_discretization(disk, 33, 64);
    auto sol = solve_rte(sigma, ones(), 1e-5, disc);
    double worst = 0.0;
    for (double v : sol.radiance.values()) {
        worst = std::max(worst, std::abs(v - 1.0));
    }
    AveragedScattering op(sigma, disc);
    std::vector<std::pair<Vec, Vec>> outputs;
    for (int i = 0; i < 32; ++i) {
        Vec x = polar(2.0 * kPi * (i + 0.5) / 32.0);
        for (double psi : {-1.2, -0.4, 0.0, 0.7}) {
            outputs.push_back({x, std::cos(psi) * x + std::sin(psi) * Vec{-x.y, x.x}});
        }
    }
    auto albedo = albedo_restricted(sigma, BoundaryPatch::full(), ones(), outputs, 1e-5, op);
    double worst_albedo = 0.0;
    for (double v : albedo) {
        worst_albedo = std::max(worst_albedo, std::abs(v - 1.0));
    }
    bool pass = worst <= 1e-3 && worst_albedo <= 1e-3;
    return {pass, "max |u - 1| = " + fmt("%.3g", worst) + ", max |albedo - 1| = "
                      + fmt("%.3g", worst_albedo)};
}

Outcome ac4()
{
    const std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
    auto disk = ConvexDomain::disk(1.0);
    Prober planar(AttenuationField::constant(0.25), disk, quarter_arc());
    HStudy s2 = h_convergence_study(planar, kWest, kEast, hs);

    auto ball = ConvexDomain::ball(1.0);
    ProbeOptions o3;
    o3.grid_nodes = 33;
    o3.directions = 26;
    o3.tol = 1e-4;
    Vec pole{0.0, 0.0, -1.0};
    Prober spatial(AttenuationField::constant(0.25), ball, BoundaryPatch::cap(pole, kPi / 4.0), o3);
    HStudy s3 = h_convergence_study(spatial, pole, -1.0 * pole, hs);

    bool pass = s2.single_scatter_slope >= -1.2 && s2.single_scatter_slope <= -0.8
                && s2.scaled_remainder_decreasing && s3.single_scatter_slope >= -2.4
                && s3.single_scatter_slope <= -1.6;
    return {pass, "n=2 KJ slope " + fmt("%.3f", s2.single_scatter_slope) + ", h|R| decreasing "
                      + (s2.scaled_remainder_decreasing ? "yes" : "no") + "; n=3 KJ slope "
                      + fmt("%.3f", s3.single_scatter_slope)};
}

Outcome ac5()
{
    auto disk = ConvexDomain::disk(1.0);
    ProbeOptions fine;
    fine.grid_nodes = 257;
    Prober constant(AttenuationField::constant(0.25), disk, quarter_arc(), fine);
    auto src = constant.source(kWest, kEast, 0.025);
    ProbeResult r = constant.measure(src);
    double a_err = std::abs(r.alpha_sq - std::exp(-1.0)) / std::exp(-1.0);
    double l_err = std::abs(r.line_integral - 0.5) / 0.5;

    auto sigma = three_blob_phantom();
    Prober blobs(sigma, disk, quarter_arc());
    std::mt19937_64 rng(20240531);
    std::uniform_real_distribution<double> anchor(kPi - kPi / 4.0 + 0.05, kPi + kPi / 4.0 - 0.05);
    std::uniform_real_distribution<double> incidence(-1.2, 1.2);
    std::vector<double> errs;
    for (int k = 0; k < 12; ++k) {
        Vec x0 = disk.boundary_point(anchor(rng));
        Vec theta = incidence_direction(disk, x0, incidence(rng));
        ProbeResult b = blobs.measure(blobs.source(x0, theta, 0.025));
        double oracle = oracle_line_integral(sigma, b.chord, 1e-8);
        errs.push_back(b.valid ? std::abs(b.line_integral - oracle) / oracle : 1.0);
    }
    double med = median(errs);
    bool pass = a_err <= 0.05 && l_err <= 0.05 && med <= 0.08;
    return {pass, "257^2 alpha^2 err " + fmt("%.4f", a_err) + ", line err " + fmt("%.4f", l_err)
                      + "; blob median err " + fmt("%.4f", med)};
}

Outcome ac6()
{
    auto disk = ConvexDomain::disk(1.0);
    auto sino = sweep_sinogram(three_blob_phantom(), disk, quarter_arc(), 16, 16, 0.025);
    std::vector<double> errs;
    for (const auto& rec : sino.records) {
        if (rec.status == RecordStatus::valid) {
            errs.push_back(std::abs(rec.recovered - *rec.oracle) / *rec.oracle);
        }
    }
    double frac = static_cast<double>(errs.size()) / sino.records.size();
    double med = median(errs);
    return {med <= 0.08 && frac >= 0.9,
            "median err " + fmt("%.4f", med) + ", valid " + fmt("%.3f", frac)};
}

Outcome ac7()
{
    auto disk = ConvexDomain::disk(1.0);
    auto constant = AttenuationField::constant(0.25);
    auto blobs = three_blob_phantom();
    auto full = BoundaryPatch::full();
    auto rc = reconstruct(oracle_sinogram(constant, disk, full, 64, 64), disk, 64, 200, 0.9, true);
    auto rb = reconstruct(oracle_sinogram(blobs, disk, full, 64, 64), disk, 64, 200, 0.9, true);
    double ec = relative_l2_error(rc.grid, constant);
    double eb = relative_l2_error(rb.grid, blobs);

    // probed data from the quarter arc, 32 x 32 lattice
    auto sino = sweep_sinogram(blobs, disk, quarter_arc(), 32, 32, 0.025);
    auto rp = reconstruct(sino, disk, 64, 200, 0.9, true);
    double ep = relative_l2_error(rp.grid, blobs);
    bool pass = ec <= 0.05 && eb <= 0.15 && ep <= 0.25;
    return {pass, "oracle constant " + fmt("%.4f", ec) + ", oracle blobs " + fmt("%.4f", eb)
                      + ", probed quarter arc " + fmt("%.4f", ep)};
}

Outcome ac8()
{
    auto disk = ConvexDomain::disk(1.0);
    auto empty = scannability_surrogate(disk, BoundaryPatch::empty(), 16);
    auto q = scannability_surrogate(disk, quarter_arc(), 16);
    auto h = scannability_surrogate(disk, BoundaryPatch::arc(kPi, kPi / 2.0), 16);
    auto f = scannability_surrogate(disk, BoundaryPatch::full(), 16);
    bool monotone = q.smallest_singular_value <= h.smallest_singular_value
                    && h.smallest_singular_value <= f.smallest_singular_value;
    auto v = construct_viewpoint(disk, BoundaryPatch::arc(0.0, kPi / 6.0));
    bool pass = q.chords == 4096 && q.smallest_singular_value > 1e-8
                && empty.smallest_singular_value == 0.0 && monotone && v.violations == 0
                && v.samples == 100000;
    std::ostringstream d;
    d << "s_min quarter " << fmt("%.3g", q.smallest_singular_value) << " (" << q.chords
      << " chords), half " << fmt("%.3g", h.smallest_singular_value) << ", full "
      << fmt("%.3g", f.smallest_singular_value) << ", empty " << empty.smallest_singular_value
      << "; viewpoint violations " << v.violations << "/" << v.samples;
    return {pass, d.str()};
}

Outcome ac9()
{
    auto disk = ConvexDomain::disk(1.0);
    double worst = 0.0;
    for (auto sigma : {AttenuationField::constant(0.25), three_blob_phantom()}) {
        Prober prober(sigma, disk, quarter_arc());
        for (const auto& a : probe_lattice(disk, quarter_arc(), 3, 3)) {
            auto src = prober.source(a.point, a.direction, 0.025);
            double measured = prober.measure(src).measured;
            std::vector<std::pair<Vec, Vec>> out{{a.point, -1.0 * a.direction}};
            double albedo = albedo_restricted(sigma, quarter_arc(), prober.source_data(src), out,
                                              prober.options().tol, prober.op())[0];
            worst = std::max(worst, std::abs(albedo - measured) / std::abs(measured));
        }
    }
    return {worst <= 1e-6, "max relative difference " + fmt("%.3g", worst)};
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9},
    };
    std::vector<std::string> only(argv + 1, argv + argc);
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) {
            continue;
        }
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %s %s [%.1f s]\n", name.c_str(), o.pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
