#include "scatterscan/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scatterscan/quadrature.hpp"

namespace scatterscan {

const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::SegmentOutsideDomain: return "SegmentOutsideDomain";
    case ErrorCode::NonPositiveTolerance: return "NonPositiveTolerance";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::NotOutflow: return "NotOutflow";
    case ErrorCode::WidthTooLarge: return "WidthTooLarge";
    case ErrorCode::InvalidRecovery: return "InvalidRecovery";
    case ErrorCode::EmptyChordSet: return "EmptyChordSet";
    case ErrorCode::NoValidRecords: return "NoValidRecords";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::ConstructionFailed: return "ConstructionFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

double wrap_angle(double a)
{
    a = std::fmod(a, 2.0 * kPi);
    if (a <= -kPi) {
        a += 2.0 * kPi;
    } else if (a > kPi) {
        a -= 2.0 * kPi;
    }
    return a;
}

double sphere_measure(int dimension)
{
    if (dimension == 2) {
        return 2.0 * kPi;
    }
    if (dimension == 3) {
        return 4.0 * kPi;
    }
    throw Error(ErrorCode::UnsupportedDimension, "dimension must be 2 or 3");
}

//---------------------------------------------------------------------------//
// ConvexDomain
//---------------------------------------------------------------------------//

ConvexDomain ConvexDomain::disk(double radius, Vec center)
{
    if (!(radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "disk radius must be positive");
    }
    center.z = 0.0;
    return ConvexDomain(DomainKind::disk, 2, {radius, radius, 1.0}, center);
}

ConvexDomain ConvexDomain::ball(double radius, Vec center)
{
    if (!(radius > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
    }
    return ConvexDomain(DomainKind::ball, 3, {radius, radius, radius}, center);
}

ConvexDomain ConvexDomain::ellipse(double semi_x, double semi_y, Vec center)
{
    if (!(semi_x > 0.0) || !(semi_y > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "ellipse semi-axes must be positive");
    }
    center.z = 0.0;
    return ConvexDomain(DomainKind::ellipse, 2, {semi_x, semi_y, 1.0}, center);
}

double ConvexDomain::diameter() const
{
    double a = std::max(axes_.x, axes_.y);
    if (dim_ == 3) {
        a = std::max(a, axes_.z);
    }
    return 2.0 * a;
}

double ConvexDomain::radius() const
{
    if (kind_ == DomainKind::ellipse) {
        throw Error(ErrorCode::InvalidArgument, "ellipse has no single radius");
    }
    return axes_.x;
}

Vec ConvexDomain::lower() const
{
    Vec lo = center_ - axes_;
    if (dim_ == 2) {
        lo.z = 0.0;
    }
    return lo;
}

Vec ConvexDomain::upper() const
{
    Vec hi = center_ + axes_;
    if (dim_ == 2) {
        hi.z = 0.0;
    }
    return hi;
}

double ConvexDomain::level(const Vec& x) const
{
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double d = (x[i] - center_[i]) / axes_[i];
        s += d * d;
    }
    return s;
}

double ConvexDomain::boundary_distance(const Vec& x) const
{
    if (kind_ != DomainKind::ellipse) {
        return std::abs(distance(x, center_) - axes_.x);
    }
    // |F - 1| / |grad F| with F the quadric level: first order in the offset.
    Vec grad{};
    for (int i = 0; i < dim_; ++i) {
        grad[i] = 2.0 * (x[i] - center_[i]) / (axes_[i] * axes_[i]);
    }
    double g = norm(grad);
    if (g == 0.0) {
        return std::min(axes_.x, axes_.y);
    }
    return std::abs(level(x) - 1.0) / g;
}

Vec ConvexDomain::normal(const Vec& x) const
{
    Vec grad{};
    for (int i = 0; i < dim_; ++i) {
        grad[i] = (x[i] - center_[i]) / (axes_[i] * axes_[i]);
    }
    return unit(grad);
}

std::optional<std::pair<double, double>> ConvexDomain::line_parameters(const Vec& x,
                                                                       const Vec& dir) const
{
    // a t^2 + 2 b t + c = 0
    double a = 0.0;
    double b = 0.0;
    double c = -1.0;
    for (int i = 0; i < dim_; ++i) {
        double inv = 1.0 / axes_[i];
        double d = (x[i] - center_[i]) * inv;
        double e = dir[i] * inv;
        a += e * e;
        b += d * e;
        c += d * d;
    }
    double disc = b * b - a * c;
    if (a == 0.0 || disc < 0.0) {
        return std::nullopt;
    }
    double root = std::sqrt(disc);
    double q = -(b + std::copysign(root, b));
    double t1;
    double t2;
    if (q == 0.0) {
        t1 = t2 = 0.0;
    } else {
        t1 = q / a;
        t2 = c / q;
    }
    return std::make_pair(std::min(t1, t2), std::max(t1, t2));
}

Vec ConvexDomain::boundary_point(double phi) const
{
    return center_ + Vec{axes_.x * std::cos(phi), axes_.y * std::sin(phi), 0.0};
}

double ConvexDomain::boundary_angle(const Vec& x) const
{
    return std::atan2((x.y - center_.y) / axes_.y, (x.x - center_.x) / axes_.x);
}

double ConvexDomain::arc_distance(const Vec& a, const Vec& b) const
{
    if (kind_ != DomainKind::ellipse) {
        return axes_.x * angle_between(unit(a - center_), unit(b - center_));
    }
    double pa = boundary_angle(a);
    double pb = pa + wrap_angle(boundary_angle(b) - pa);
    auto speed = [this](double t) {
        return std::hypot(axes_.x * std::sin(t), axes_.y * std::cos(t));
    };
    return std::abs(gauss_integrate(speed, pa, pb, 24));
}

//---------------------------------------------------------------------------//
// Rays and chords
//---------------------------------------------------------------------------//

Vec exit_point(const ConvexDomain& domain, const Vec& x, const Vec& theta)
{
    if (!domain.contains(x, 1e-10)) {
        throw Error(ErrorCode::NoIntersection, "point lies outside the closed domain");
    }
    auto params = domain.line_parameters(x, theta);
    if (!params) {
        throw Error(ErrorCode::NoIntersection, "ray misses the domain");
    }
    return x + std::max(params->second, 0.0) * theta;
}

Vec entry_point(const ConvexDomain& domain, const Vec& x, const Vec& theta)
{
    return exit_point(domain, x, -theta);
}

Chord chord_through(const ConvexDomain& domain, const Vec& x, const Vec& theta)
{
    Chord chord;
    chord.direction = theta;
    chord.entry = entry_point(domain, x, theta);
    chord.exit = exit_point(domain, x, theta);
    chord.length = distance(chord.entry, chord.exit);
    return chord;
}

FlowClass classify_boundary_pair(const ConvexDomain& domain, const Vec& x, const Vec& theta)
{
    if (domain.boundary_distance(x) > kBoundaryTolerance) {
        throw Error(ErrorCode::NotOnBoundary, "point is not on the boundary");
    }
    double c = dot(domain.normal(x), theta);
    if (c < -kGrazingTolerance) {
        return FlowClass::inflow;
    }
    if (c > kGrazingTolerance) {
        return FlowClass::outflow;
    }
    return FlowClass::grazing;
}

//---------------------------------------------------------------------------//
// BoundaryPatch
//---------------------------------------------------------------------------//

BoundaryPatch BoundaryPatch::arc(double center_angle, double half_width)
{
    if (half_width < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "arc half-width must be nonnegative");
    }
    if (half_width >= kPi) {
        return full();
    }
    BoundaryPatch p(Kind::arc);
    p.center_ = wrap_angle(center_angle);
    p.half_width_ = half_width;
    return p;
}

BoundaryPatch BoundaryPatch::cap(const Vec& axis, double half_angle)
{
    if (half_angle < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "cap half-angle must be nonnegative");
    }
    if (half_angle >= kPi) {
        return full();
    }
    BoundaryPatch p(Kind::cap);
    p.axis_ = unit(axis);
    p.half_width_ = half_angle;
    return p;
}

bool BoundaryPatch::contains(const ConvexDomain& domain, const Vec& x) const
{
    switch (kind_) {
    case Kind::empty: return false;
    case Kind::full: return true;
    case Kind::arc:
        return std::abs(wrap_angle(domain.boundary_angle(x) - center_)) < half_width_;
    case Kind::cap: return angle_between(unit(x - domain.center()), axis_) < half_width_;
    }
    return false;
}

bool BoundaryPatch::has_positive_measure() const
{
    return kind_ == Kind::full || ((kind_ == Kind::arc || kind_ == Kind::cap) && half_width_ > 0.0);
}

Vec BoundaryPatch::center_point(const ConvexDomain& domain) const
{
    switch (kind_) {
    case Kind::arc: return domain.boundary_point(center_);
    case Kind::cap: return domain.center() + domain.radius() * axis_;
    default:
        if (domain.dimension() == 2) {
            return domain.boundary_point(0.0);
        }
        return domain.center() + Vec{domain.radius(), 0.0, 0.0};
    }
}

//---------------------------------------------------------------------------//
// Direction quadrature
//---------------------------------------------------------------------------//

double DirectionSet::measure() const { return sphere_measure(dimension); }

DirectionSet direction_quadrature(int dimension, int resolution)
{
    if (dimension != 2 && dimension != 3) {
        throw Error(ErrorCode::UnsupportedDimension, "direction quadrature needs n in {2,3}");
    }
    if (resolution < 4) {
        throw Error(ErrorCode::InvalidArgument, "direction resolution must be >= 4");
    }
    DirectionSet set;
    set.dimension = dimension;
    if (dimension == 2) {
        double w = 2.0 * kPi / resolution;
        for (int j = 0; j < resolution; ++j) {
            set.directions.push_back(polar(w * j));
            set.weights.push_back(w);
        }
        return set;
    }

    // Pick rings x azimuths = resolution with rings closest to sqrt(resolution / 2).
    double target = std::sqrt(resolution / 2.0);
    int rings = 0;
    for (int r = 2; r * 3 <= resolution; ++r) {
        if (resolution % r == 0 && (rings == 0 || std::abs(r - target) < std::abs(rings - target))) {
            rings = r;
        }
    }
    int azimuths;
    if (rings == 0) {
        rings = std::max(2, static_cast<int>(std::floor(target)));
        azimuths = std::max(3, (resolution + rings - 1) / rings);
    } else {
        azimuths = resolution / rings;
    }
    const GaussRule& rule = gauss_legendre(rings);
    double dphi = 2.0 * kPi / azimuths;
    for (int i = 0; i < rings; ++i) {
        double mu = rule.nodes[i];
        double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        for (int k = 0; k < azimuths; ++k) {
            double phi = dphi * (k + 0.5);
            set.directions.push_back({s * std::cos(phi), s * std::sin(phi), mu});
            set.weights.push_back(rule.weights[i] * dphi);
        }
    }
    return set;
}

} // namespace scatterscan
