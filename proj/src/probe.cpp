#include "scatterscan/probe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scatterscan/quadrature.hpp"

namespace scatterscan {

AngularScaling parse_angular_scaling(const std::string& name)
{
    if (name == "linear") {
        return AngularScaling::linear;
    }
    if (name == "quadratic") {
        return AngularScaling::quadratic;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown angular scaling '" + name + "'");
}

const char* to_string(AngularScaling scaling)
{
    return scaling == AngularScaling::linear ? "linear" : "quadratic";
}

//---------------------------------------------------------------------------//
// SingularSource
//---------------------------------------------------------------------------//

double cone_radius(double peak, double sphere_radius)
{
    const double r = sphere_radius;
    // mass(rho) = peak * 2 pi R * (R - R^2 sin(rho/R) / rho), increasing in rho
    auto mass = [&](double rho) {
        double x = rho / r;
        double bracket = x < 1e-2 ? x * x / 6.0 - std::pow(x, 4) / 120.0 + std::pow(x, 6) / 5040.0
                                  : 1.0 - std::sin(x) / x;
        return peak * 2.0 * kPi * r * r * bracket;
    };
    double hi = kPi * r;
    if (mass(hi) < 1.0) {
        throw Error(ErrorCode::WidthTooLarge, "cone cannot reach unit mass on the sphere");
    }
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * r; ++it) {
        double mid = 0.5 * (lo + hi);
        (mass(mid) < 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SingularSource::SingularSource(const ConvexDomain& domain, const Vec& anchor, const Vec& direction,
                               double h, AngularScaling scaling)
    : domain_(domain), anchor_(anchor), direction_(unit(direction)), h_(h), scaling_(scaling)
{
    if (!(h > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "source width must be positive");
    }
    if (domain.boundary_distance(anchor) > kBoundaryTolerance) {
        throw Error(ErrorCode::NotOnBoundary, "source anchor is not on the boundary");
    }
    double ha = scaling == AngularScaling::linear ? h : h * h;
    if (domain.dimension() == 2) {
        spatial_peak_ = 1.0 / h;
        spatial_radius_ = h;
        angular_peak_ = 1.0 / ha;
        angular_radius_ = ha;
    } else {
        spatial_peak_ = 1.0 / (h * h);
        spatial_radius_ = cone_radius(spatial_peak_, domain.radius());
        angular_peak_ = 1.0 / (ha * ha);
        angular_radius_ = cone_radius(angular_peak_, 1.0);
    }
}

double SingularSource::spatial(const Vec& x) const
{
    double d = domain_.dimension() == 2
                   ? domain_.arc_distance(x, anchor_)
                   : domain_.radius()
                         * angle_between(unit(x - domain_.center()), unit(anchor_ - domain_.center()));
    return d < spatial_radius_ ? spatial_peak_ * (1.0 - d / spatial_radius_) : 0.0;
}

double SingularSource::angular_profile(double angle) const
{
    angle = std::abs(angle);
    return angle < angular_radius_ ? angular_peak_ * (1.0 - angle / angular_radius_) : 0.0;
}

double SingularSource::angular(const Vec& theta) const
{
    return angular_profile(angle_between(theta, direction_));
}

BoundaryData SingularSource::boundary_data() const
{
    SingularSource self = *this;
    return BoundaryData::closed_form(
        [self](const Vec& x, const Vec& theta) {
            double a = self.angular(theta);
            return a == 0.0 ? 0.0 : a * self.spatial(x);
        },
        spatial_peak_ * angular_peak_);
}

double evaluate_psi(const SingularSource& src, const Vec& x, const Vec& theta)
{
    double a = src.angular(theta);
    return a == 0.0 ? 0.0 : a * src.spatial(x);
}

double source_step(const SingularSource& src)
{
    return std::min(0.25 * src.h(), chord_step(src.domain()));
}

//---------------------------------------------------------------------------//
// Ballistic and single-scatter terms
//---------------------------------------------------------------------------//

namespace {

/// Boundary point at signed boundary distance `arc` from x (n = 2, first order for ellipses).
Vec boundary_offset(const ConvexDomain& domain, const Vec& x, double arc)
{
    double phi = domain.boundary_angle(x);
    Vec a = domain.semi_axes();
    double speed = std::hypot(a.x * std::sin(phi), a.y * std::cos(phi));
    return domain.boundary_point(phi + arc / speed);
}

/// True when no ray from y inside the angular support can reach the spatial support.
bool outside_tube(const SingularSource& src, const Vec& y)
{
    Vec rel = y - src.anchor();
    double along = dot(rel, src.direction());
    double perp = norm(rel - along * src.direction());
    double spread = norm(rel) * std::sin(std::min(src.angular_radius(), 0.5 * kPi));
    return perp > (src.spatial_radius() + spread) * (1.0 + 1e-9) + 1e-14;
}

double ballistic_planar(const AttenuationField& sigma, const SingularSource& src, const Vec& y)
{
    const ConvexDomain& domain = src.domain();
    const double ha = src.angular_radius();
    const Vec& t0 = src.direction();
    const double phi0 = std::atan2(t0.y, t0.x);

    // Kinks: hat apex and edges of Theta, and the rays through the apex and
    // edges of X.
    std::vector<double> breaks{-ha, 0.0, ha};
    for (Vec p : {src.anchor(), boundary_offset(domain, src.anchor(), src.spatial_radius()),
                  boundary_offset(domain, src.anchor(), -src.spatial_radius())}) {
        if (distance(y, p) > 1e-14) {
            Vec d = unit(y - p);
            double phi = wrap_angle(std::atan2(d.y, d.x) - phi0);
            if (std::abs(phi) < ha) {
                breaks.push_back(phi);
            }
        }
    }
    std::sort(breaks.begin(), breaks.end());

    auto integrand = [&](double phi) {
        double w = src.angular_profile(phi);
        if (w == 0.0) {
            return 0.0;
        }
        Vec theta = polar(phi0 + phi);
        Vec b = entry_point(domain, y, theta);
        double x = src.spatial(b);
        if (x == 0.0) {
            return 0.0;
        }
        return w * x * attenuation(sigma, domain, y, b);
    };
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        if (breaks[k + 1] > breaks[k]) {
            sum += gauss_integrate(integrand, breaks[k], breaks[k + 1], 16);
        }
    }
    return sum / (2.0 * kPi);
}

double ballistic_spatial(const AttenuationField& sigma, const SingularSource& src, const Vec& y)
{
    const ConvexDomain& domain = src.domain();
    const Vec& t0 = src.direction();
    Vec e1;
    Vec e2;
    orthonormal_frame(t0, e1, e2);
    const double rho = src.angular_radius();
    constexpr int kPieces = 12;
    constexpr int kAzimuths = 32;
    const GaussRule& rule = gauss_legendre(8);
    double sum = 0.0;
    for (int piece = 0; piece < kPieces; ++piece) {
        double a = rho * piece / kPieces;
        double b = rho * (piece + 1) / kPieces;
        double half = 0.5 * (b - a);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            double beta = a + half * (1.0 + rule.nodes[q]);
            double w = src.angular_profile(beta) * std::sin(beta) * rule.weights[q] * half;
            if (w == 0.0) {
                continue;
            }
            double ring = 0.0;
            for (int k = 0; k < kAzimuths; ++k) {
                double g = 2.0 * kPi * (k + 0.5) / kAzimuths;
                Vec theta = std::cos(beta) * t0
                            + std::sin(beta) * (std::cos(g) * e1 + std::sin(g) * e2);
                Vec p = entry_point(domain, y, theta);
                double x = src.spatial(p);
                if (x != 0.0) {
                    ring += x * attenuation(sigma, domain, y, p);
                }
            }
            sum += w * ring * (2.0 * kPi / kAzimuths);
        }
    }
    return sum / (4.0 * kPi);
}

} // namespace

double ballistic_average(const AttenuationField& sigma, const SingularSource& src, const Vec& x)
{
    if (outside_tube(src, x)) {
        return 0.0;
    }
    return src.dimension() == 2 ? ballistic_planar(sigma, src, x) : ballistic_spatial(sigma, src, x);
}

double single_scatter_term(const AttenuationField& sigma, const SingularSource& src, const Vec& x,
                           const Vec& theta)
{
    const ConvexDomain& domain = src.domain();
    double len = distance(x, entry_point(domain, x, theta));
    double s = 0.0;
    march(sigma, x, -theta, len, source_step(src), [&](const Vec& p, double w, double sig) {
        if (sig != 0.0) {
            s += w * sig * ballistic_average(sigma, src, p);
        }
    });
    return s;
}

//---------------------------------------------------------------------------//
// Line-source model of <K J psi_h>
//---------------------------------------------------------------------------//

namespace {

/// <J psi_h> collapsed onto the chord {x0 + s theta0}: transverse mass
/// m(s) = alpha(x0, y_s) |nu . theta0| / |S^{n-1}| spread over a tube whose
/// width grows from the footprint of X_h at rate sin(angular radius).
/// <K J psi_h>(x) is then a line integral of the regularized kernel
/// |x - y_s|^{1-n}, smoothed by the effective transverse radius.
class LineSource {
  public:
    LineSource(AttenuationField sigma, const SingularSource& src)
        : sigma_(std::move(sigma)), domain_(src.domain()), x0_(src.anchor()),
          t0_(src.direction()), dim_(src.dimension())
    {
        Chord c = chord_through(domain_, x0_, t0_);
        length_ = distance(x0_, c.exit);
        double incidence = std::abs(dot(domain_.normal(x0_), t0_));
        mass_ = incidence / sphere_measure(dim_);
        double footprint = src.spatial_radius() * (dim_ == 2 ? incidence : std::sqrt(incidence));
        width0_ = footprint;
        growth_ = std::sin(std::min(src.angular_radius(), 0.5 * kPi));
        // Hat in the plane: geometric mean of |r| is w e^{-3/2}. Cone in 3D:
        // 1 / <1/|r|> = w / 3.
        shrink_ = dim_ == 2 ? std::exp(-1.5) : 1.0 / 3.0;
        build_depth_table();
    }

    double operator()(const Vec& x) const
    {
        Vec rel = x - x0_;
        double s_star = std::clamp(dot(rel, t0_), 0.0, length_);
        double d = distance(x, point(s_star));
        double delta = std::hypot(d, effective_radius(s_star));
        const GaussRule& rule = gauss_legendre(32);
        double sum = 0.0;
        auto piece = [&](double ua, double ub) {
            if (ub <= ua) {
                return;
            }
            double half = 0.5 * (ub - ua);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                double u = ua + half * (1.0 + rule.nodes[q]);
                double s = std::clamp(s_star + delta * std::sinh(u), 0.0, length_);
                double ds = delta * std::cosh(u) * rule.weights[q] * half;
                Vec y = point(s);
                double re = effective_radius(s);
                double r2 = dot(x - y, x - y) + re * re;
                double kernel = dim_ == 2 ? 1.0 / std::sqrt(r2) : 1.0 / r2;
                sum += ds * std::exp(-depth(x, y)) * sigma_(y) * transverse_mass(s) * kernel;
            }
        };
        piece(std::asinh(-s_star / delta), 0.0);
        piece(0.0, std::asinh((length_ - s_star) / delta));
        return sum / sphere_measure(dim_);
    }

  private:
    static constexpr int kTable = 1024;

    Vec point(double s) const { return x0_ + s * t0_; }

    /// Optical depth by a fixed Gauss rule; the model tolerates its error.
    double depth(const Vec& a, const Vec& b) const
    {
        if (sigma_.is_constant()) {
            return sigma_.value() * distance(a, b);
        }
        Vec d = b - a;
        return gauss_integrate([&](double t) { return sigma_(a + t * d); }, 0.0, 1.0, 24)
               * norm(d);
    }
    double effective_radius(double s) const { return shrink_ * (width0_ + s * growth_); }

    double transverse_mass(double s) const
    {
        double f = std::clamp(s / length_, 0.0, 1.0) * kTable;
        int k = std::min(static_cast<int>(f), kTable - 1);
        double t = f - k;
        double tau = (1.0 - t) * depth_[k] + t * depth_[k + 1];
        return mass_ * std::exp(-tau);
    }

    void build_depth_table()
    {
        depth_.assign(kTable + 1, 0.0);
        double ds = length_ / kTable;
        for (int k = 1; k <= kTable; ++k) {
            double a = (k - 1) * ds;
            double b = k * ds;
            depth_[k] = depth_[k - 1]
                        + ds / 6.0
                              * (sigma_(point(a)) + 4.0 * sigma_(point(0.5 * (a + b)))
                                 + sigma_(point(b)));
        }
    }

    AttenuationField sigma_;
    ConvexDomain domain_;
    Vec x0_;
    Vec t0_;
    int dim_;
    double length_ = 0.0;
    double mass_ = 0.0;
    double width0_ = 0.0;
    double growth_ = 0.0;
    double shrink_ = 1.0;
    std::vector<double> depth_;
};

} // namespace

//---------------------------------------------------------------------------//
// Probing
//---------------------------------------------------------------------------//

void check_source(const SingularSource& src, const BoundaryPatch& patch)
{
    const ConvexDomain& domain = src.domain();
    const Vec& x0 = src.anchor();
    const Vec& t0 = src.direction();
    if (!patch.contains(domain, x0)) {
        throw Error(ErrorCode::SupportViolation, "source anchor lies outside the patch");
    }
    if (classify_boundary_pair(domain, x0, t0) != FlowClass::inflow) {
        throw Error(ErrorCode::SupportViolation, "source direction is not incoming");
    }
    if (src.angular_radius() >= kPi) {
        throw Error(ErrorCode::WidthTooLarge, "angular support contains the probe direction");
    }

    // Support corners: spatial edge points times angular edge directions.
    std::vector<Vec> points{x0};
    std::vector<Vec> dirs{t0};
    if (src.dimension() == 2) {
        points.push_back(boundary_offset(domain, x0, src.spatial_radius()));
        points.push_back(boundary_offset(domain, x0, -src.spatial_radius()));
        double phi0 = std::atan2(t0.y, t0.x);
        dirs.push_back(polar(phi0 + src.angular_radius()));
        dirs.push_back(polar(phi0 - src.angular_radius()));
    } else {
        Vec c = domain.center();
        Vec axis = unit(x0 - c);
        Vec e1;
        Vec e2;
        orthonormal_frame(axis, e1, e2);
        Vec f1;
        Vec f2;
        orthonormal_frame(t0, f1, f2);
        double gamma = src.spatial_radius() / domain.radius();
        double beta = src.angular_radius();
        constexpr int kRing = 16;
        for (int k = 0; k < kRing; ++k) {
            double g = 2.0 * kPi * k / kRing;
            Vec side = std::cos(g) * e1 + std::sin(g) * e2;
            points.push_back(c + domain.radius() * (std::cos(gamma) * axis + std::sin(gamma) * side));
            dirs.push_back(std::cos(beta) * t0
                           + std::sin(beta) * (std::cos(g) * f1 + std::sin(g) * f2));
        }
    }
    for (const Vec& p : points) {
        if (!patch.contains(domain, p)) {
            throw Error(ErrorCode::WidthTooLarge, "spatial support leaves the patch");
        }
        for (const Vec& d : dirs) {
            if (dot(domain.normal(p), d) >= -kGrazingTolerance) {
                throw Error(ErrorCode::WidthTooLarge, "angular support leaves the inflow set");
            }
        }
    }
}

Prober::Prober(AttenuationField sigma, const ConvexDomain& domain, BoundaryPatch patch,
               ProbeOptions options)
    : sigma_(std::move(sigma)), domain_(domain), patch_(std::move(patch)), options_(options)
{
    Discretization disc = make_discretization(domain_, options_.grid_nodes, options_.directions);
    op_ = std::make_shared<AveragedScattering>(sigma_, std::move(disc));
}

SingularSource Prober::source(const Vec& anchor, const Vec& direction, double h) const
{
    return SingularSource(domain_, anchor, direction, h, options_.scaling);
}

BoundaryData Prober::source_data(const SingularSource& src) const
{
    auto line = std::make_shared<LineSource>(sigma_, src);
    BoundaryData::SingularAverages hooks;
    hooks.direct = [sigma = sigma_, src](const Vec& x) { return ballistic_average(sigma, src, x); };
    hooks.scattered = [line](const Vec& x) { return (*line)(x); };
    hooks.step = source_step(src);
    BoundaryData data = src.boundary_data();
    data.with_support(patch_).with_singular_averages(std::move(hooks));
    return data;
}

ProbeResult Prober::measure(const SingularSource& src) const
{
    check_source(src, patch_);
    const Vec& x0 = src.anchor();
    const Vec out = -src.direction();
    BoundaryData f = source_data(src);
    const auto& hooks = *f.singular();

    ProbeResult r;
    r.chord = chord_through(domain_, x0, src.direction());
    r.spatial_peak = src.spatial_peak();
    r.ballistic = apply_J(sigma_, domain_, f, x0, out);

    CollisionAverages averages = collision_averages(sigma_, f, options_.tol, *op_);
    r.remainder_terms = averages.terms;
    r.remainder_bound = averages.bound;
    const SpatialGrid& grid = *op_->discretization().grid;
    std::vector<double> tail = grid.expand(averages.grid_sum);

    // Both chord integrals share the march used by scattered_trace.
    double step = std::min(op_->discretization().step, hooks.step);
    double len = r.chord.length;
    double kj = 0.0;
    double rem = 0.0;
    march(sigma_, x0, src.direction(), len, step, [&](const Vec& p, double w, double sig) {
        kj += w * sig * hooks.direct(p);
        rem += w * sig * (hooks.scattered(p) + grid.interpolate(tail, p));
    });
    r.single_scatter = kj;
    r.remainder = rem;
    r.measured = r.ballistic + r.single_scatter + r.remainder;

    r.alpha_sq = 1.0 - 2.0 * sphere_measure(src.dimension()) * r.measured / r.spatial_peak;
    r.valid = r.alpha_sq > 0.0;
    r.line_integral = r.valid ? -0.5 * std::log(r.alpha_sq) + 0.0 : std::numeric_limits<double>::quiet_NaN();
    return r;
}

ProbeResult backscatter_measurement(const AttenuationField& sigma, const BoundaryPatch& patch,
                                    const SingularSource& src, const ProbeOptions& options)
{
    Prober prober(sigma, src.domain(), patch, options);
    return prober.measure(src);
}

double recover_alpha_sq(const ProbeResult& result, const SingularSource& src)
{
    double a = 1.0 - 2.0 * sphere_measure(src.dimension()) * result.measured / src.spatial_peak();
    if (!(a > 0.0)) {
        throw Error(ErrorCode::InvalidRecovery, "recovered alpha^2 is not positive");
    }
    return a;
}

double recover_line_integral(const ProbeResult& result, const SingularSource& src)
{
    return -0.5 * std::log(recover_alpha_sq(result, src)) + 0.0;
}

//---------------------------------------------------------------------------//
// Sweeps and width studies
//---------------------------------------------------------------------------//

Sinogram sweep_sinogram(const Prober& prober, int anchors, int directions, double h)
{
    const ConvexDomain& domain = prober.domain();
    if (!prober.patch().has_positive_measure()) {
        throw Error(ErrorCode::InvalidArgument, "sweep needs a patch of positive measure");
    }
    Sinogram sino;
    sino.dimension = domain.dimension();
    for (const auto& a : probe_lattice(domain, prober.patch(), anchors, directions)) {
        SinogramRecord rec;
        rec.anchor = a.point;
        rec.direction = a.direction;
        if (a.flow != FlowClass::inflow) {
            rec.status = RecordStatus::grazing;
            sino.records.push_back(rec);
            continue;
        }
        rec.chord = chord_through(domain, a.point, a.direction);
        rec.oracle = oracle_line_integral(prober.sigma(), rec.chord);
        try {
            ProbeResult r = prober.measure(prober.source(a.point, a.direction, h));
            if (r.valid) {
                rec.recovered = r.line_integral;
                rec.status = RecordStatus::valid;
            } else {
                rec.status = RecordStatus::invalid_recovery;
            }
        } catch (const Error& e) {
            rec.status = e.code() == ErrorCode::WidthTooLarge ? RecordStatus::width_too_large
                                                              : RecordStatus::failed;
        }
        sino.records.push_back(rec);
    }
    return sino;
}

Sinogram sweep_sinogram(const AttenuationField& sigma, const ConvexDomain& domain,
                        const BoundaryPatch& patch, int anchors, int directions, double h,
                        const ProbeOptions& options)
{
    Prober prober(sigma, domain, patch, options);
    return sweep_sinogram(prober, anchors, directions, h);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double n = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(std::abs(y[i]) > 0.0)) {
            continue;
        }
        double lx = std::log(x[i]);
        double ly = std::log(std::abs(y[i]));
        n += 1.0;
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double den = n * sxx - sx * sx;
    if (n < 2.0 || den == 0.0) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return (n * sxy - sx * sy) / den;
}

HStudy h_convergence_study(const Prober& prober, const Vec& anchor, const Vec& direction,
                           const std::vector<double>& widths)
{
    if (widths.empty()) {
        throw Error(ErrorCode::InvalidArgument, "width list is empty");
    }
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (!(widths[i] > 0.0) || (i > 0 && !(widths[i] < widths[i - 1]))) {
            throw Error(ErrorCode::InvalidArgument, "widths must be positive and decreasing");
        }
    }
    int n = prober.domain().dimension();
    HStudy study;
    std::vector<double> kj;
    std::vector<double> scaled;
    for (double h : widths) {
        HStudyRow row;
        row.h = h;
        row.result = prober.measure(prober.source(anchor, direction, h));
        row.oracle = oracle_line_integral(prober.sigma(), row.result.chord);
        row.line_integral_error =
            row.result.valid
                ? (row.oracle != 0.0 ? std::abs(row.result.line_integral - row.oracle) / row.oracle
                                     : std::abs(row.result.line_integral))
                : std::numeric_limits<double>::quiet_NaN();
        row.scaled_remainder = std::pow(h, n - 1) * std::abs(row.result.remainder);
        kj.push_back(row.result.single_scatter);
        scaled.push_back(row.scaled_remainder);
        study.rows.push_back(row);
    }
    study.single_scatter_slope = log_log_slope(widths, kj);
    study.scaled_remainder_slope = log_log_slope(widths, scaled);
    study.scaled_remainder_decreasing = true;
    for (std::size_t i = 1; i < scaled.size(); ++i) {
        if (!(scaled[i] < scaled[i - 1])) {
            study.scaled_remainder_decreasing = false;
        }
    }
    return study;
}

} // namespace scatterscan
