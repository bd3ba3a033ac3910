#include "scatterscan/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scatterscan {

//---------------------------------------------------------------------------//
// Attenuation
//---------------------------------------------------------------------------//

double optical_depth(const AttenuationField& sigma, const ConvexDomain& domain, const Vec& x,
                     const Vec& y)
{
    if (!domain.contains(x, 1e-9) || !domain.contains(y, 1e-9)) {
        throw Error(ErrorCode::SegmentOutsideDomain, "segment endpoints must lie in the domain");
    }
    double len = distance(x, y);
    if (len == 0.0) {
        return 0.0;
    }
    if (sigma.is_constant()) {
        return sigma.value() * len;
    }
    int n = 2 * std::max(1, static_cast<int>(std::ceil(len / (2.0 * chord_step(domain)))));
    Vec d = (y - x) / static_cast<double>(n);
    // Symmetric node placement: node k from x equals node n - k from y.
    double sum = sigma(x) + sigma(y);
    for (int k = 1; k < n; ++k) {
        Vec p = (k <= n / 2) ? x + static_cast<double>(k) * d : y - static_cast<double>(n - k) * d;
        sum += (k % 2 == 1 ? 4.0 : 2.0) * sigma(p);
    }
    return sum * len / (3.0 * n);
}

double attenuation(const AttenuationField& sigma, const ConvexDomain& domain, const Vec& x,
                   const Vec& y)
{
    if (x.x == y.x && x.y == y.y && x.z == y.z) {
        if (!domain.contains(x, 1e-9)) {
            throw Error(ErrorCode::SegmentOutsideDomain, "point lies outside the domain");
        }
        return 1.0;
    }
    return std::exp(-optical_depth(sigma, domain, x, y));
}

//---------------------------------------------------------------------------//
// Boundary data
//---------------------------------------------------------------------------//

BoundaryData BoundaryData::closed_form(Evaluator f, double sup_norm)
{
    BoundaryData data;
    data.eval_ = std::move(f);
    data.sup_ = sup_norm;
    return data;
}

BoundaryData BoundaryData::sampled(const ConvexDomain& domain, int boundary_samples,
                                   int direction_samples, const Evaluator& f)
{
    if (domain.dimension() != 2) {
        throw Error(ErrorCode::UnsupportedDimension, "sampled boundary data is planar only");
    }
    if (boundary_samples < 4 || direction_samples < 2) {
        throw Error(ErrorCode::InvalidArgument, "too few boundary data samples");
    }
    // Boundary angle is periodic; incidence angle psi in (-pi/2, pi/2) is
    // measured from the inward normal and sampled at cell centres.
    auto table = std::make_shared<std::vector<double>>(
        static_cast<std::size_t>(boundary_samples) * direction_samples);
    double dphi = 2.0 * kPi / boundary_samples;
    double dpsi = kPi / direction_samples;
    double sup = 0.0;
    for (int i = 0; i < boundary_samples; ++i) {
        Vec x = domain.boundary_point(i * dphi);
        Vec inward = -domain.normal(x);
        for (int j = 0; j < direction_samples; ++j) {
            double psi = -0.5 * kPi + (j + 0.5) * dpsi;
            Vec theta = std::cos(psi) * inward + std::sin(psi) * Vec{-inward.y, inward.x, 0.0};
            double v = f(x, theta);
            (*table)[static_cast<std::size_t>(i) * direction_samples + j] = v;
            sup = std::max(sup, std::abs(v));
        }
    }
    ConvexDomain dom = domain;
    auto eval = [table, dom, boundary_samples, direction_samples, dphi, dpsi](const Vec& x,
                                                                             const Vec& theta) {
        Vec inward = -dom.normal(x);
        double c = dot(inward, theta);
        if (c <= kGrazingTolerance) {
            return 0.0;
        }
        double psi = std::atan2(dot(theta, Vec{-inward.y, inward.x, 0.0}), c);
        double u = wrap_angle(dom.boundary_angle(x));
        if (u < 0.0) {
            u += 2.0 * kPi;
        }
        double fu = u / dphi;
        int i0 = static_cast<int>(std::floor(fu)) % boundary_samples;
        int i1 = (i0 + 1) % boundary_samples;
        double a = fu - std::floor(fu);
        double fv = std::clamp((psi + 0.5 * kPi) / dpsi - 0.5, 0.0, direction_samples - 1.0);
        int j0 = std::min(static_cast<int>(std::floor(fv)), direction_samples - 2);
        j0 = std::max(j0, 0);
        int j1 = std::min(j0 + 1, direction_samples - 1);
        double b = fv - j0;
        auto at = [&](int i, int j) {
            return (*table)[static_cast<std::size_t>(i) * direction_samples + j];
        };
        return (1 - a) * ((1 - b) * at(i0, j0) + b * at(i0, j1))
               + a * ((1 - b) * at(i1, j0) + b * at(i1, j1));
    };
    return closed_form(eval, sup);
}

double apply_J(const AttenuationField& sigma, const ConvexDomain& domain, const BoundaryData& f,
               const Vec& x, const Vec& theta)
{
    Vec p = entry_point(domain, x, theta);
    double value = f(p, theta);
    if (value == 0.0) {
        return 0.0;
    }
    return attenuation(sigma, domain, x, p) * value;
}

//---------------------------------------------------------------------------//
// Discretized fields
//---------------------------------------------------------------------------//

Discretization make_discretization(const ConvexDomain& domain, int nodes_per_axis,
                                   int direction_resolution)
{
    Discretization disc;
    disc.grid = std::make_shared<SpatialGrid>(domain, nodes_per_axis);
    disc.directions = direction_quadrature(domain.dimension(), direction_resolution);
    disc.step = chord_step(domain);
    return disc;
}

RadianceField::RadianceField(Discretization disc)
    : disc_(std::move(disc)), ndir_(disc_.directions.size()),
      values_(disc_.grid->inside_count() * ndir_, 0.0)
{
}

std::vector<double> RadianceField::slice(std::size_t j) const
{
    std::vector<double> out(grid().inside_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = at(i, j);
    }
    return out;
}

double RadianceField::interpolate(const Vec& x, std::size_t j) const
{
    double s = 0.0;
    grid().inside_stencil(x, [&](std::size_t p, double w) { s += w * at(p, j); });
    return s;
}

std::vector<double> RadianceField::node_averages() const
{
    const auto& dirs = directions();
    double inv = 1.0 / dirs.measure();
    std::vector<double> out(grid().inside_count(), 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < ndir_; ++j) {
            s += dirs.weights[j] * at(i, j);
        }
        out[i] = s * inv;
    }
    return out;
}

double angular_average(const RadianceField& u, const Vec& x)
{
    const auto& dirs = u.directions();
    double s = 0.0;
    u.grid().inside_stencil(x, [&](std::size_t p, double w) {
        double avg = 0.0;
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            avg += dirs.weights[j] * u.at(p, j);
        }
        s += w * avg;
    });
    return s / dirs.measure();
}

//---------------------------------------------------------------------------//
// Transport operators
//---------------------------------------------------------------------------//

namespace {

double backward_length(const ConvexDomain& domain, const Vec& x, const Vec& theta)
{
    return distance(x, entry_point(domain, x, theta));
}

/// int alpha sigma g along the backward chord from x with g an all-node field.
double scatter_integral(const AttenuationField& sigma, const SpatialGrid& grid,
                        std::span<const double> node_values, const Vec& x, const Vec& theta,
                        double step)
{
    double len = backward_length(grid.domain(), x, theta);
    double s = 0.0;
    march(sigma, x, -theta, len, step, [&](const Vec& p, double w, double sig) {
        s += w * sig * grid.interpolate(node_values, p);
    });
    return s;
}

} // namespace

double apply_Tinv(const AttenuationField& sigma, const ConvexDomain& domain,
                  const PhaseSpaceFunction& source, const Vec& x, const Vec& theta)
{
    double len = backward_length(domain, x, theta);
    double s = 0.0;
    march(sigma, x, -theta, len, chord_step(domain),
          [&](const Vec& p, double w, double) { s += w * source(p, theta); });
    return s;
}

RadianceField apply_K(const AttenuationField& sigma, const RadianceField& u)
{
    const auto& grid = u.grid();
    const auto& dirs = u.directions();
    std::vector<double> avg = grid.expand(u.node_averages());
    RadianceField out(u.discretization());
    const auto& nodes = grid.inside_nodes();
    long count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        Vec x = grid.node(nodes[i]);
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            out.at(i, j) = scatter_integral(sigma, grid, avg, x, dirs.directions[j],
                                            u.discretization().step);
        }
    }
    return out;
}

double contraction_bound(const AttenuationField& sigma, const ConvexDomain& domain)
{
    return 1.0 - std::exp(-sigma.max_value() * domain.diameter());
}

int certified_terms(double contraction, double norm, double tol)
{
    if (!(tol > 0.0)) {
        throw Error(ErrorCode::NonPositiveTolerance, "tolerance must be positive");
    }
    if (contraction <= 0.0 || norm == 0.0) {
        return 0;
    }
    if (contraction >= 1.0) {
        throw Error(ErrorCode::InvalidArgument, "contraction constant must be below 1");
    }
    int m = 0;
    double bound = contraction * norm / (1.0 - contraction);
    while (bound >= tol) {
        bound *= contraction;
        ++m;
    }
    return m;
}

AveragedScattering::AveragedScattering(AttenuationField sigma, Discretization disc,
                                       std::size_t dense_limit)
    : sigma_(std::move(sigma)), disc_(std::move(disc)),
      contraction_(contraction_bound(sigma_, disc_.domain()))
{
    const auto& grid = *disc_.grid;
    std::size_t n = grid.inside_count();
    if (n > dense_limit) {
        return;
    }
    dense_.assign(n * n, 0.0);
    const auto& dirs = disc_.directions;
    double inv = 1.0 / dirs.measure();
    const auto& nodes = grid.inside_nodes();
    long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 8)
    for (long i = 0; i < count; ++i) {
        double* row = dense_.data() + static_cast<std::size_t>(i) * n;
        Vec x = grid.node(nodes[i]);
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            const Vec& theta = dirs.directions[j];
            double len = backward_length(grid.domain(), x, theta);
            double wj = dirs.weights[j] * inv;
            march(sigma_, x, -theta, len, disc_.step, [&](const Vec& p, double w, double sig) {
                double c = wj * w * sig;
                grid.inside_stencil(p, [&](std::size_t q, double iw) { row[q] += c * iw; });
            });
        }
    }
}

std::vector<double> AveragedScattering::apply(std::span<const double> g) const
{
    const auto& grid = *disc_.grid;
    std::size_t n = grid.inside_count();
    std::vector<double> out(n, 0.0);
    if (!dense_.empty()) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = dense_.data() + i * n;
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                s += row[k] * g[k];
            }
            out[i] = s;
        }
        return out;
    }
    std::vector<double> all = grid.expand(g);
    const auto& dirs = disc_.directions;
    double inv = 1.0 / dirs.measure();
    const auto& nodes = grid.inside_nodes();
    long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        Vec x = grid.node(nodes[i]);
        double s = 0.0;
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            s += dirs.weights[j]
                 * scatter_integral(sigma_, grid, all, x, dirs.directions[j], disc_.step);
        }
        out[i] = s * inv;
    }
    return out;
}

std::vector<double> AveragedScattering::tail(std::span<const double> start, int terms) const
{
    std::vector<double> sum(start.size(), 0.0);
    std::vector<double> current(start.begin(), start.end());
    for (int k = 0; k < terms; ++k) {
        current = apply(current);
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum[i] += current[i];
        }
    }
    return sum;
}

//---------------------------------------------------------------------------//
// Collision series
//---------------------------------------------------------------------------//

namespace {

double sup_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

/// <Jf> on inside nodes by direction quadrature.
std::vector<double> direct_averages(const AttenuationField& sigma, const BoundaryData& f,
                                    const Discretization& disc, double* sup_j)
{
    const auto& grid = *disc.grid;
    const auto& dirs = disc.directions;
    const auto& nodes = grid.inside_nodes();
    std::vector<double> out(nodes.size(), 0.0);
    std::vector<double> row_max(nodes.size(), 0.0);
    double inv = 1.0 / dirs.measure();
    long count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        Vec x = grid.node(nodes[i]);
        double s = 0.0;
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            double v = apply_J(sigma, grid.domain(), f, x, dirs.directions[j]);
            row_max[i] = std::max(row_max[i], std::abs(v));
            s += dirs.weights[j] * v;
        }
        out[i] = s * inv;
    }
    if (sup_j) {
        *sup_j = sup_abs(row_max);
    }
    return out;
}

} // namespace

CollisionAverages collision_averages(const AttenuationField& sigma, const BoundaryData& f,
                                     double tol, const AveragedScattering& op)
{
    if (!(tol > 0.0)) {
        throw Error(ErrorCode::NonPositiveTolerance, "tolerance must be positive");
    }
    const auto& disc = op.discretization();
    const auto& grid = *disc.grid;
    CollisionAverages result;
    double c = op.contraction();

    if (f.singular()) {
        // Orders 0 and 1 are pointwise; the grid carries sum_{k>=1} A^k <KJf>.
        const auto& hooks = *f.singular();
        const auto& nodes = grid.inside_nodes();
        std::vector<double> first(nodes.size());
        long count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 4)
        for (long i = 0; i < count; ++i) {
            first[i] = hooks.scattered(grid.node(nodes[i]));
        }
        double norm = sup_abs(first);
        int m = certified_terms(c, norm, tol);
        result.grid_sum = op.tail(first, m);
        result.singular = true;
        result.terms = m + 2;
        result.bound = (c > 0.0 && norm > 0.0) ? std::pow(c, m + 1) * norm / (1.0 - c) : 0.0;
        return result;
    }

    double sup_j = 0.0;
    std::vector<double> direct = direct_averages(sigma, f, disc, &sup_j);
    int m = certified_terms(c, sup_j, tol);
    result.grid_sum.assign(direct.size(), 0.0);
    if (m > 0) {
        result.grid_sum = op.tail(direct, m - 1);
        for (std::size_t i = 0; i < direct.size(); ++i) {
            result.grid_sum[i] += direct[i];
        }
    }
    result.terms = m;
    result.bound = (c > 0.0 && sup_j > 0.0) ? std::pow(c, m + 1) * sup_j / (1.0 - c) : 0.0;
    return result;
}

double scattered_trace(const AttenuationField& sigma, const BoundaryData& f,
                       const CollisionAverages& averages, const Discretization& disc,
                       const Vec& x, const Vec& theta)
{
    const auto& grid = *disc.grid;
    const auto& domain = grid.domain();
    std::vector<double> all = grid.expand(averages.grid_sum);
    double len = backward_length(domain, x, theta);
    double s = 0.0;
    if (averages.singular) {
        const auto& hooks = *f.singular();
        double step = std::min(disc.step, hooks.step > 0.0 ? hooks.step : disc.step);
        march(sigma, x, -theta, len, step, [&](const Vec& p, double w, double sig) {
            double g = hooks.direct(p) + hooks.scattered(p) + grid.interpolate(all, p);
            s += w * sig * g;
        });
        return s;
    }
    march(sigma, x, -theta, len, disc.step,
          [&](const Vec& p, double w, double sig) { s += w * sig * grid.interpolate(all, p); });
    return s;
}

RteSolution solve_rte(const AttenuationField& sigma, const BoundaryData& f, double tol,
                      const Discretization& disc)
{
    if (!(tol > 0.0)) {
        throw Error(ErrorCode::NonPositiveTolerance, "tolerance must be positive");
    }
    AveragedScattering op(sigma, disc);
    // The radiance grid cannot carry singular data: use the plain evaluator.
    BoundaryData plain = BoundaryData::closed_form(
        [&f](const Vec& x, const Vec& theta) { return f(x, theta); }, f.sup_norm());
    CollisionAverages averages = collision_averages(sigma, plain, tol, op);
    const auto& grid = *disc.grid;
    const auto& dirs = disc.directions;
    const auto& nodes = grid.inside_nodes();
    std::vector<double> all = grid.expand(averages.grid_sum);
    RteSolution sol{RadianceField(disc), {}, averages.terms, averages.bound, averages};
    long count = static_cast<long>(nodes.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < count; ++i) {
        Vec x = grid.node(nodes[i]);
        for (std::size_t j = 0; j < dirs.size(); ++j) {
            const Vec& theta = dirs.directions[j];
            double j_term = apply_J(sigma, grid.domain(), f, x, theta);
            double scattered = averages.terms > 0
                                   ? scatter_integral(sigma, grid, all, x, theta, disc.step)
                                   : 0.0;
            sol.radiance.at(i, j) = j_term + scattered;
        }
    }
    sol.average = sol.radiance.node_averages();
    return sol;
}

namespace {

void check_support(const ConvexDomain& domain, const BoundaryPatch& patch, const BoundaryData& f)
{
    if (patch.kind() == BoundaryPatch::Kind::full) {
        return;
    }
    constexpr double kLeak = 1e-12;
    auto probe = [&](const Vec& x) {
        if (patch.contains(domain, x)) {
            return;
        }
        Vec inward = -domain.normal(x);
        Vec e1;
        Vec e2;
        orthonormal_frame(inward, e1, e2);
        constexpr int kIncidence = 32;
        int azimuths = domain.dimension() == 2 ? 2 : 16;
        for (int a = 0; a < kIncidence; ++a) {
            double psi = (a + 0.5) * 0.5 * kPi / kIncidence;
            for (int b = 0; b < azimuths; ++b) {
                Vec side;
                if (domain.dimension() == 2) {
                    side = Vec{-inward.y, inward.x, 0.0} * (b == 0 ? 1.0 : -1.0);
                } else {
                    double g = 2.0 * kPi * b / azimuths;
                    side = std::cos(g) * e1 + std::sin(g) * e2;
                }
                Vec theta = std::cos(psi) * inward + std::sin(psi) * side;
                if (std::abs(f(x, theta)) > kLeak) {
                    throw Error(ErrorCode::SupportViolation,
                                "boundary data has mass outside the patch");
                }
            }
        }
    };
    if (domain.dimension() == 2) {
        constexpr int kPoints = 720;
        for (int i = 0; i < kPoints; ++i) {
            probe(domain.boundary_point(2.0 * kPi * (i + 0.5) / kPoints));
        }
        return;
    }
    // Fibonacci lattice on the sphere.
    constexpr int kPoints = 2048;
    double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kPoints; ++i) {
        double z = 1.0 - 2.0 * (i + 0.5) / kPoints;
        double r = std::sqrt(1.0 - z * z);
        Vec dir{r * std::cos(golden * i), r * std::sin(golden * i), z};
        probe(domain.center() + domain.radius() * dir);
    }
}

} // namespace

std::vector<double> albedo_restricted(const AttenuationField& sigma, const BoundaryPatch& patch,
                                      const BoundaryData& f,
                                      std::span<const std::pair<Vec, Vec>> outputs, double tol,
                                      const AveragedScattering& op)
{
    const auto& disc = op.discretization();
    const auto& domain = disc.domain();
    for (const auto& [x, theta] : outputs) {
        if (!patch.contains(domain, x)
            || classify_boundary_pair(domain, x, theta) != FlowClass::outflow) {
            throw Error(ErrorCode::NotOutflow, "output pair is not in E_+");
        }
    }
    check_support(domain, patch, f);
    CollisionAverages averages = collision_averages(sigma, f, tol, op);
    std::vector<double> out;
    out.reserve(outputs.size());
    for (const auto& [x, theta] : outputs) {
        double j_term = apply_J(sigma, domain, f, x, theta);
        out.push_back(j_term + scattered_trace(sigma, f, averages, disc, x, theta));
    }
    return out;
}

} // namespace scatterscan
