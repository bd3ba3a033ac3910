#pragma once

#include <memory>
#include <string>
#include <vector>

#include "scatterscan/field.hpp"
#include "scatterscan/geometry.hpp"
#include "scatterscan/transport.hpp"
#include "scatterscan/xray.hpp"

namespace scatterscan {

/// How the angular half-width of Theta_h follows the spatial width h.
enum class AngularScaling {
    linear,    ///< angular half-width h
    quadratic, ///< angular half-width h^2
};

AngularScaling parse_angular_scaling(const std::string& name);
const char* to_string(AngularScaling scaling);

/// Boundary source psi_h(x, theta) = X_h(x) Theta_h(theta) concentrated at (x0, theta0).
///
/// Both factors are hats of unit mass. X_h peaks at h^{1-n} and vanishes
/// beyond boundary distance h (n = 2) or the cone radius giving unit mass
/// (n = 3, about 0.98 h). Theta_h is the same shape on S^{n-1} with width
/// set by the angular scaling.
class SingularSource {
  public:
    SingularSource(const ConvexDomain& domain, const Vec& anchor, const Vec& direction, double h,
                   AngularScaling scaling = AngularScaling::quadratic);

    const ConvexDomain& domain() const { return domain_; }
    int dimension() const { return domain_.dimension(); }
    const Vec& anchor() const { return anchor_; }
    const Vec& direction() const { return direction_; }
    double h() const { return h_; }
    AngularScaling scaling() const { return scaling_; }

    double spatial_peak() const { return spatial_peak_; }
    double spatial_radius() const { return spatial_radius_; }
    double angular_peak() const { return angular_peak_; }
    double angular_radius() const { return angular_radius_; }

    /// X_h(x) for a boundary point x.
    double spatial(const Vec& x) const;
    /// Theta_h(theta) for a unit vector theta.
    double angular(const Vec& theta) const;
    /// Theta_h as a function of the angle from theta0.
    double angular_profile(double angle) const;

    /// psi_h as closed-form boundary data (no singular hooks attached).
    BoundaryData boundary_data() const;

  private:
    ConvexDomain domain_;
    Vec anchor_;
    Vec direction_;
    double h_;
    AngularScaling scaling_;
    double spatial_peak_ = 0.0;
    double spatial_radius_ = 0.0;
    double angular_peak_ = 0.0;
    double angular_radius_ = 0.0;
};

/// Radius of a cone of peak `peak` and unit mass on a sphere of radius R.
double cone_radius(double peak, double sphere_radius);

double evaluate_psi(const SingularSource& src, const Vec& x, const Vec& theta);

/// <J psi_h>(x) by quadrature over the angular support of Theta_h.
double ballistic_average(const AttenuationField& sigma, const SingularSource& src, const Vec& x);

/// K J psi_h(x, theta): chord integral of alpha sigma <J psi_h> behind x.
double single_scatter_term(const AttenuationField& sigma, const SingularSource& src, const Vec& x,
                           const Vec& theta);

/// Chord step resolving the source: min(h/4, diameter/512).
double source_step(const SingularSource& src);

/// Checks that psi_h lives in E_- and that -theta0 is an outgoing direction of E.
/// Throws SupportViolation or WidthTooLarge.
void check_source(const SingularSource& src, const BoundaryPatch& patch);

struct ProbeResult {
    Chord chord;
    double measured = 0.0;
    double ballistic = 0.0;      ///< J psi_h(x0, -theta0)
    double single_scatter = 0.0; ///< K J psi_h(x0, -theta0)
    double remainder = 0.0;      ///< R(x0, -theta0)
    double spatial_peak = 0.0;   ///< X_h(x0)
    int remainder_terms = 0;
    double remainder_bound = 0.0;
    double alpha_sq = 1.0;       ///< recovered alpha^2, may be <= 0
    double line_integral = 0.0;  ///< NaN when alpha_sq <= 0
    bool valid = true;
};

struct ProbeOptions {
    int grid_nodes = 33;    ///< remainder grid nodes per axis
    int directions = 64;    ///< remainder grid direction resolution
    double tol = 1e-6;      ///< truncation tolerance of the remainder series
    AngularScaling scaling = AngularScaling::quadratic;
};

/// Shared state for probes of one medium: the averaged scattering operator
/// on the remainder grid is assembled once and reused by every probe.
class Prober {
  public:
    Prober(AttenuationField sigma, const ConvexDomain& domain, BoundaryPatch patch,
           ProbeOptions options = {});

    const AttenuationField& sigma() const { return sigma_; }
    const ConvexDomain& domain() const { return domain_; }
    const BoundaryPatch& patch() const { return patch_; }
    const ProbeOptions& options() const { return options_; }
    const AveragedScattering& op() const { return *op_; }

    SingularSource source(const Vec& anchor, const Vec& direction, double h) const;

    /// psi_h with its pointwise <J psi> and <K J psi> evaluators attached.
    BoundaryData source_data(const SingularSource& src) const;

    ProbeResult measure(const SingularSource& src) const;

  private:
    AttenuationField sigma_;
    ConvexDomain domain_;
    BoundaryPatch patch_;
    ProbeOptions options_;
    std::shared_ptr<const AveragedScattering> op_;
};

/// One backscatter probe u(x0, -theta0) = J + KJ + R with recovery filled in.
ProbeResult backscatter_measurement(const AttenuationField& sigma, const BoundaryPatch& patch,
                                    const SingularSource& src, const ProbeOptions& options = {});

/// alpha^2 = 1 - 2 |S^{n-1}| measured / X_h(x0). Throws InvalidRecovery when <= 0.
double recover_alpha_sq(const ProbeResult& result, const SingularSource& src);

/// -1/2 ln alpha^2.
double recover_line_integral(const ProbeResult& result, const SingularSource& src);

/// Probes every lattice pair of E; failures are recorded per row.
Sinogram sweep_sinogram(const Prober& prober, int anchors, int directions, double h);

Sinogram sweep_sinogram(const AttenuationField& sigma, const ConvexDomain& domain,
                        const BoundaryPatch& patch, int anchors, int directions, double h,
                        const ProbeOptions& options = {});

struct HStudyRow {
    double h = 0.0;
    ProbeResult result;
    double oracle = 0.0;
    double line_integral_error = 0.0; ///< relative, NaN when invalid
    double scaled_remainder = 0.0;    ///< h^{n-1} |R|
};

struct HStudy {
    std::vector<HStudyRow> rows;
    double single_scatter_slope = 0.0;   ///< log|KJ| against log h
    double scaled_remainder_slope = 0.0; ///< log(h^{n-1}|R|) against log h
    bool scaled_remainder_decreasing = false;
};

/// Probes one anchor pair at every width in `widths` (strictly decreasing).
HStudy h_convergence_study(const Prober& prober, const Vec& anchor, const Vec& direction,
                           const std::vector<double>& widths);

/// Least-squares slope of log|y| against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace scatterscan
