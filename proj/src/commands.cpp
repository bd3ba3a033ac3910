#include "scatterscan/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "scatterscan/io.hpp"
#include "scatterscan/probe.hpp"
#include "scatterscan/xray.hpp"

namespace scatterscan {

namespace fs = std::filesystem;

namespace {

struct Context {
    RunConfig cfg;
    fs::path out_dir;
    std::ostream& out;
};

std::ofstream open_csv(const fs::path& path, std::uint64_t hash)
{
    std::ofstream f(path);
    if (!f) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    f << output_header(hash) << '\n';
    return f;
}

std::string vec_fields(const Vec& v, int dim)
{
    std::string s = format_number(v.x) + "," + format_number(v.y);
    return dim == 3 ? s + "," + format_number(v.z) : s;
}

std::string vec_names(const std::string& base, int dim)
{
    std::string s = base + "_x," + base + "_y";
    return dim == 3 ? s + "," + base + "_z" : s;
}

/// Anchor and direction of the single probe and width study.
std::pair<Vec, Vec> probe_pair(const RunConfig& cfg, const ConvexDomain& domain)
{
    if (domain.dimension() == 2) {
        Vec x = domain.boundary_point(cfg.probe.anchor_angle);
        return {x, incidence_direction(domain, x, cfg.probe.incidence)};
    }
    Vec axis = unit(cfg.patch.axis);
    Vec x = domain.center() + domain.radius() * axis;
    Vec e1;
    Vec e2;
    orthonormal_frame(axis, e1, e2);
    Vec theta = -std::cos(cfg.probe.incidence) * axis + std::sin(cfg.probe.incidence) * e1;
    return {x, theta};
}

int cmd_forward(Context& ctx)
{
    const RunConfig& cfg = ctx.cfg;
    ConvexDomain domain = cfg.make_domain();
    AttenuationField sigma = cfg.make_sigma();
    BoundaryPatch patch = cfg.make_patch();
    BoundaryData source = cfg.make_source(domain);
    Discretization disc = make_discretization(domain, cfg.grid.spatial, cfg.grid.directions);
    RteSolution sol = solve_rte(sigma, source, cfg.source.tol, disc);

    const SpatialGrid& grid = *disc.grid;
    int n = grid.nodes_per_axis();
    if (domain.dimension() == 2) {
        std::vector<double> avg = grid.expand(sol.average);
        for (std::size_t f = 0; f < avg.size(); ++f) {
            if (grid.inside_index(f) < 0) avg[f] = 0.0;
        }
        write_grid(avg, n, n, ctx.out_dir / "forward_average", cfg.hash);
        for (std::size_t j : {std::size_t{0}, disc.directions.size() / 4}) {
            std::vector<double> slice(grid.node_count(), 0.0);
            std::vector<double> inside = sol.radiance.slice(j);
            for (std::size_t i = 0; i < inside.size(); ++i) {
                slice[grid.inside_nodes()[i]] = inside[i];
            }
            write_grid(slice, n, n, ctx.out_dir / ("forward_slice_" + std::to_string(j)), cfg.hash);
        }
    }

    // Outflow trace on E of the source restricted to E.
    std::ofstream trace = open_csv(ctx.out_dir / "forward_trace.csv", cfg.hash);
    int dim = domain.dimension();
    trace << vec_names("x", dim) << ',' << vec_names("dir", dim) << ",trace\n";
    if (dim == 2 && patch.has_positive_measure()) {
        ConvexDomain dom = domain;
        BoundaryData restricted = BoundaryData::closed_form(
            [dom, patch, source](const Vec& x, const Vec& theta) {
                return patch.contains(dom, x) ? source(x, theta) : 0.0;
            },
            source.sup_norm());
        std::vector<std::pair<Vec, Vec>> outputs;
        for (const auto& a : probe_lattice(domain, patch, cfg.probe.anchors, cfg.probe.directions)) {
            if (a.flow == FlowClass::inflow) {
                outputs.emplace_back(a.point, -a.direction);
            }
        }
        AveragedScattering op(sigma, disc);
        std::vector<double> values =
            albedo_restricted(sigma, patch, restricted, outputs, cfg.source.tol, op);
        for (std::size_t k = 0; k < outputs.size(); ++k) {
            trace << vec_fields(outputs[k].first, dim) << ',' << vec_fields(outputs[k].second, dim)
                  << ',' << format_number(values[k]) << '\n';
        }
    }
    ctx.out << "forward: terms=" << sol.terms << " bound=" << format_number(sol.bound) << '\n';
    return kExitOk;
}

void write_probe_row(std::ostream& f, const ProbeResult& r, double oracle)
{
    auto kv = [&](const char* k, double v) { f << k << ',' << format_number(v) << '\n'; };
    kv("ballistic", r.ballistic);
    kv("single_scatter", r.single_scatter);
    kv("remainder", r.remainder);
    kv("measured", r.measured);
    kv("spatial_peak", r.spatial_peak);
    kv("alpha_sq", r.alpha_sq);
    kv("line_integral", r.line_integral);
    kv("oracle", oracle);
    kv("remainder_terms", r.remainder_terms);
    kv("remainder_bound", r.remainder_bound);
    kv("chord_length", r.chord.length);
    f << "valid," << (r.valid ? "true" : "false") << '\n';
}

int cmd_probe(Context& ctx)
{
    const RunConfig& cfg = ctx.cfg;
    ConvexDomain domain = cfg.make_domain();
    Prober prober(cfg.make_sigma(), domain, cfg.make_patch(), cfg.probe_options());
    auto [x0, t0] = probe_pair(cfg, domain);
    double h = cfg.probe.h.back();
    SingularSource src = prober.source(x0, t0, h);
    ProbeResult r = prober.measure(src);
    double oracle = oracle_line_integral(prober.sigma(), r.chord);
    std::ofstream f = open_csv(ctx.out_dir / "probe.csv", cfg.hash);
    f << "key,value\n";
    f << "h," << format_number(h) << '\n';
    int dim = domain.dimension();
    f << "anchor," << vec_fields(x0, dim) << '\n';
    f << "direction," << vec_fields(t0, dim) << '\n';
    write_probe_row(f, r, oracle);
    ctx.out << "probe: measured=" << format_number(r.measured)
            << " alpha_sq=" << format_number(r.alpha_sq)
            << " line_integral=" << format_number(r.line_integral)
            << " oracle=" << format_number(oracle) << '\n';
    return r.valid ? kExitOk : kExitNumerical;
}

Sinogram probe_sweep(const RunConfig& cfg)
{
    Prober prober(cfg.make_sigma(), cfg.make_domain(), cfg.make_patch(), cfg.probe_options());
    return sweep_sinogram(prober, cfg.probe.anchors, cfg.probe.directions, cfg.probe.h.back());
}

double median_relative_error(const Sinogram& s)
{
    std::vector<double> e;
    for (const auto& r : s.records) {
        if (r.status == RecordStatus::valid && r.oracle && *r.oracle != 0.0) {
            e.push_back(std::abs(r.recovered - *r.oracle) / *r.oracle);
        }
    }
    if (e.empty()) {
        return std::nan("");
    }
    std::nth_element(e.begin(), e.begin() + e.size() / 2, e.end());
    return e[e.size() / 2];
}

int cmd_sinogram(Context& ctx)
{
    Sinogram s = probe_sweep(ctx.cfg);
    write_sinogram(s, ctx.out_dir / "sinogram.csv", ctx.cfg.hash);
    ctx.out << "sinogram: records=" << s.records.size() << " valid=" << s.valid_count()
            << " median_relative_error=" << format_number(median_relative_error(s)) << '\n';
    return s.valid_count() > 0 ? kExitOk : kExitNumerical;
}

int cmd_reconstruct(Context& ctx)
{
    const RunConfig& cfg = ctx.cfg;
    const auto& rc = cfg.reconstruction;
    ConvexDomain domain = cfg.make_domain();
    AttenuationField sigma = cfg.make_sigma();
    Sinogram s = rc.data == "oracle"
                     ? oracle_sinogram(sigma, domain,
                                       rc.full_boundary ? BoundaryPatch::full() : cfg.make_patch(),
                                       rc.anchors, rc.directions)
                     : probe_sweep(cfg);
    if (s.valid_count() == 0) {
        throw Error(ErrorCode::NoValidRecords, "no valid records to reconstruct from");
    }
    write_sinogram(s, ctx.out_dir / "reconstruct_sinogram.csv", cfg.hash);
    ReconstructionResult rec = reconstruct(s, domain, rc.grid, rc.iterations, rc.relaxation, rc.nonneg);
    write_grid(rec.grid, ctx.out_dir / "sigma_hat", cfg.hash);
    write_grid(ScalarGrid::sample(domain, rc.grid, sigma), ctx.out_dir / "sigma_true", cfg.hash);
    double err = relative_l2_error(rec.grid, sigma);
    std::ofstream f = open_csv(ctx.out_dir / "reconstruction.csv", cfg.hash);
    f << "key,value\n";
    f << "data," << rc.data << '\n';
    f << "valid_records," << s.valid_count() << '\n';
    f << "iterations," << rc.iterations << '\n';
    f << "relative_l2_error," << format_number(err) << '\n';
    if (!rec.residuals.empty()) {
        f << "residual_first," << format_number(rec.residuals.front()) << '\n';
        f << "residual_last," << format_number(rec.residuals.back()) << '\n';
    }
    ctx.out << "reconstruct: valid_records=" << s.valid_count()
            << " relative_l2_error=" << format_number(err) << '\n';
    return kExitOk;
}

int cmd_hstudy(Context& ctx)
{
    const RunConfig& cfg = ctx.cfg;
    ConvexDomain domain = cfg.make_domain();
    Prober prober(cfg.make_sigma(), domain, cfg.make_patch(), cfg.probe_options());
    auto [x0, t0] = probe_pair(cfg, domain);
    HStudy study = h_convergence_study(prober, x0, t0, cfg.probe.h);
    std::ofstream f = open_csv(ctx.out_dir / "hstudy.csv", cfg.hash);
    f << "h,measured,ballistic,single_scatter,remainder,alpha_sq,line_integral,oracle,"
         "line_integral_error,scaled_remainder,valid\n";
    for (const auto& row : study.rows) {
        const auto& r = row.result;
        f << format_number(row.h) << ',' << format_number(r.measured) << ','
          << format_number(r.ballistic) << ',' << format_number(r.single_scatter) << ','
          << format_number(r.remainder) << ',' << format_number(r.alpha_sq) << ','
          << format_number(r.line_integral) << ',' << format_number(row.oracle) << ','
          << format_number(row.line_integral_error) << ',' << format_number(row.scaled_remainder)
          << ',' << (r.valid ? "true" : "false") << '\n';
    }
    std::ofstream g = open_csv(ctx.out_dir / "hstudy_summary.csv", cfg.hash);
    g << "key,value\n";
    g << "single_scatter_slope," << format_number(study.single_scatter_slope) << '\n';
    g << "scaled_remainder_slope," << format_number(study.scaled_remainder_slope) << '\n';
    g << "scaled_remainder_decreasing," << (study.scaled_remainder_decreasing ? "true" : "false")
      << '\n';
    ctx.out << "hstudy: single_scatter_slope=" << format_number(study.single_scatter_slope)
            << " scaled_remainder_decreasing=" << (study.scaled_remainder_decreasing ? "true" : "false")
            << '\n';
    return kExitOk;
}

int cmd_selftest(Context& ctx)
{
    auto results = run_selftest(ctx.cfg);
    std::ofstream f = open_csv(ctx.out_dir / "selftest.csv", ctx.cfg.hash);
    f << "check,status,detail\n";
    std::size_t passed = 0;
    for (const auto& r : results) {
        passed += r.passed;
        ctx.out << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.passed && !r.detail.empty()) {
            ctx.out << " (" << r.detail << ")";
        }
        ctx.out << '\n';
        std::string detail = r.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        f << r.name << ',' << (r.passed ? "pass" : "fail") << ',' << detail << '\n';
    }
    ctx.out << "selftest: " << passed << "/" << results.size() << " checks passed\n";
    return passed == results.size() ? kExitOk : kExitNumerical;
}

} // namespace

int run_command(const std::string& name, const fs::path& config_path,
                const std::optional<fs::path>& out_dir, std::ostream& out, std::ostream& err)
{
    static const std::map<std::string, std::function<int(Context&)>> commands{
        {"forward", cmd_forward},         {"probe", cmd_probe},   {"sinogram", cmd_sinogram},
        {"reconstruct", cmd_reconstruct}, {"hstudy", cmd_hstudy}, {"selftest", cmd_selftest},
    };
    auto it = commands.find(name);
    if (it == commands.end()) {
        err << "error: unknown command '" << name << "'\n";
        return kExitConfig;
    }
    try {
        RunConfig cfg = load_config(config_path);
        fs::path dir = out_dir ? *out_dir : fs::path(cfg.output);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) {
            throw Error(ErrorCode::IoError, "cannot create " + dir.string());
        }
        Context ctx{std::move(cfg), dir, out};
        return it->second(ctx);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

} // namespace scatterscan
