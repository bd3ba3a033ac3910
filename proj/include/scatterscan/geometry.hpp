#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "scatterscan/error.hpp"
#include "scatterscan/vec.hpp"

namespace scatterscan {

inline constexpr double kPi = 3.14159265358979323846;

/// Tolerance on |nu . theta| below which a boundary pair counts as grazing.
inline constexpr double kGrazingTolerance = 1e-9;
/// Maximum distance from the boundary accepted for boundary-point arguments.
inline constexpr double kBoundaryTolerance = 1e-8;

enum class DomainKind { disk, ball, ellipse };

/// Strictly convex quadric domain: disk (n=2), ball (n=3) or axis-aligned ellipse (n=2).
///
/// Every domain is the unit level set of sum_i ((x_i - c_i) / a_i)^2, so ray
/// intersections reduce to one quadratic.
class ConvexDomain {
  public:
    static ConvexDomain disk(double radius, Vec center = {});
    static ConvexDomain ball(double radius, Vec center = {});
    static ConvexDomain ellipse(double semi_x, double semi_y, Vec center = {});

    DomainKind kind() const { return kind_; }
    int dimension() const { return dim_; }
    const Vec& center() const { return center_; }
    const Vec& semi_axes() const { return axes_; }
    double diameter() const;
    /// Radius for disk and ball; throws for an ellipse.
    double radius() const;

    Vec lower() const;
    Vec upper() const;

    /// Quadric level sum_i ((x_i - c_i)/a_i)^2; 1 on the boundary.
    double level(const Vec& x) const;
    bool contains(const Vec& x, double tol = 1e-10) const { return level(x) <= 1.0 + tol; }
    /// First-order distance from x to the boundary (exact for disk and ball).
    double boundary_distance(const Vec& x) const;
    /// Outward unit normal of the level set through x.
    Vec normal(const Vec& x) const;

    /// Parameters t_lo <= t_hi where the line x + t dir meets the boundary.
    /// Returns nullopt when the line misses the closed domain.
    std::optional<std::pair<double, double>> line_parameters(const Vec& x, const Vec& dir) const;

    /// Boundary point at parametric angle phi (n = 2).
    Vec boundary_point(double phi) const;
    /// Parametric angle of a planar point about the center, scaled by the semi-axes.
    double boundary_angle(const Vec& x) const;
    /// Geodesic distance along the boundary between two boundary points.
    double arc_distance(const Vec& a, const Vec& b) const;

  private:
    ConvexDomain(DomainKind kind, int dim, Vec axes, Vec center)
        : kind_(kind), dim_(dim), axes_(axes), center_(center)
    {
    }

    DomainKind kind_;
    int dim_;
    Vec axes_;
    Vec center_;
};

/// Segment of a line between its entry x_{theta-} and exit x_{theta+}.
struct Chord {
    Vec entry;
    Vec exit;
    Vec direction;
    double length = 0.0;
};

/// First boundary point on the ray from x in direction theta (x_{theta+}).
Vec exit_point(const ConvexDomain& domain, const Vec& x, const Vec& theta);
/// First boundary point on the ray from x in direction -theta (x_{theta-}).
Vec entry_point(const ConvexDomain& domain, const Vec& x, const Vec& theta);
/// Chord through x in direction theta.
Chord chord_through(const ConvexDomain& domain, const Vec& x, const Vec& theta);

enum class FlowClass { inflow, outflow, grazing };

FlowClass classify_boundary_pair(const ConvexDomain& domain, const Vec& x, const Vec& theta);

/// Relatively open patch E of the boundary.
///
/// In the plane a patch is an arc of parametric angles (center +- half_width);
/// on a sphere it is a cap around an axis. `full` and `empty` are explicit.
class BoundaryPatch {
  public:
    enum class Kind { empty, full, arc, cap };

    static BoundaryPatch empty() { return BoundaryPatch(Kind::empty); }
    static BoundaryPatch full() { return BoundaryPatch(Kind::full); }
    static BoundaryPatch arc(double center_angle, double half_width);
    static BoundaryPatch cap(const Vec& axis, double half_angle);

    Kind kind() const { return kind_; }
    bool contains(const ConvexDomain& domain, const Vec& x) const;
    /// True when the patch has positive surface measure.
    bool has_positive_measure() const;
    /// Boundary point at the middle of the patch (the domain's first boundary point for `full`).
    Vec center_point(const ConvexDomain& domain) const;

    double center_angle() const { return center_; }
    double half_width() const { return half_width_; }
    const Vec& axis() const { return axis_; }

  private:
    explicit BoundaryPatch(Kind kind) : kind_(kind) {}

    Kind kind_;
    double center_ = 0.0;
    double half_width_ = 0.0;
    Vec axis_{};
};

/// Quadrature rule on the unit sphere S^{n-1}.
struct DirectionSet {
    int dimension = 2;
    std::vector<Vec> directions;
    std::vector<double> weights;

    std::size_t size() const { return directions.size(); }
    /// |S^{n-1}|: 2 pi or 4 pi.
    double measure() const;
};

/// |S^{n-1}| for n in {2, 3}.
double sphere_measure(int dimension);

/// n = 2: `resolution` equispaced angles. n = 3: Gauss-Legendre in cos(polar)
/// times uniform azimuth; exactly `resolution` directions whenever it factors
/// as rings x azimuths with rings >= 2 and azimuths >= 3.
DirectionSet direction_quadrature(int dimension, int resolution);

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

} // namespace scatterscan
