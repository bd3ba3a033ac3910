#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "scatterscan/field.hpp"
#include "scatterscan/geometry.hpp"
#include "scatterscan/grid.hpp"

namespace scatterscan {

/// Chord quadrature uses steps no longer than diameter / kChordDivisions.
inline constexpr int kChordDivisions = 512;

inline double chord_step(const ConvexDomain& domain)
{
    return domain.diameter() / kChordDivisions;
}

//---------------------------------------------------------------------------//
// Attenuation
//---------------------------------------------------------------------------//

/// Integral of sigma over the segment [x, y] by composite Simpson.
double optical_depth(const AttenuationField& sigma, const ConvexDomain& domain, const Vec& x,
                     const Vec& y);

/// alpha(x, y) = exp(-optical_depth); exactly 1 when x == y.
double attenuation(const AttenuationField& sigma, const ConvexDomain& domain, const Vec& x,
                   const Vec& y);

/// exp(-d) for the small optical increments of one chord step.
inline double step_decay(double d)
{
    if (d < 0.0 || d > 1e-2) {
        return std::exp(-d);
    }
    // degree 5 Taylor polynomial; truncation below 2e-15 relative
    return 1.0 - d * (1.0 - d * (0.5 - d * (1.0 / 6 - d * (1.0 / 24 - d * (1.0 / 120)))));
}

/// Walks the segment x + t * dir, t in [0, len], on an even number of equal
/// steps no longer than `step`. For every Simpson node it calls
///   sink(point, simpson_weight * alpha(x, point), sigma(point))
/// so that sum(weight * g) integrates alpha * g along the segment.
/// alpha is accumulated step by step from the sampled sigma.
template <class Sink>
void march(const AttenuationField& sigma, const Vec& x, const Vec& dir, double len, double step,
           Sink&& sink)
{
    if (!(len > 0.0)) {
        return;
    }
    int n = 2 * std::max(1, static_cast<int>(std::ceil(len / (2.0 * step))));
    double dt = len / n;
    double third = dt / 3.0;
    auto weight = [&](int k) {
        if (k == 0 || k == n) {
            return third;
        }
        return (k % 2 == 1) ? 4.0 * third : 2.0 * third;
    };
    if (sigma.is_constant()) {
        double c = sigma.value();
        double decay = std::exp(-c * dt);
        double alpha = 1.0;
        for (int k = 0; k <= n; ++k) {
            sink(x + (k * dt) * dir, weight(k) * alpha, c);
            alpha *= decay;
        }
        return;
    }
    // One sigma sample per node; each step integrates the quadratic through
    // three neighbouring nodes: (5 s_a + 8 s_b - s_c) dt / 12 over [a, b].
    std::vector<double> sig(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        sig[k] = sigma(x + (k * dt) * dir);
    }
    double alpha = 1.0;
    sink(x, weight(0), sig[0]);
    for (int k = 1; k <= n; ++k) {
        double d = k == 1 ? 5.0 * sig[0] + 8.0 * sig[1] - sig[2]
                          : 5.0 * sig[k] + 8.0 * sig[k - 1] - sig[k - 2];
        alpha *= step_decay(d * dt / 12.0);
        sink(x + (k * dt) * dir, weight(k) * alpha, sig[k]);
    }
}

//---------------------------------------------------------------------------//
// Boundary data
//---------------------------------------------------------------------------//

/// Inflow boundary function f(x, theta) on dOmega_-.
///
/// Smooth data is evaluated through a closed form or a sampled table. Data
/// concentrated on scales the direction grid cannot resolve may carry
/// `SingularAverages`: pointwise evaluators of <Jf> and <KJf> bound to one
/// sigma, which the solvers then use instead of grid quadrature.
class BoundaryData {
  public:
    using Evaluator = std::function<double(const Vec& x, const Vec& theta)>;

    struct SingularAverages {
        std::function<double(const Vec&)> direct;    ///< <Jf>(x)
        std::function<double(const Vec&)> scattered; ///< <KJf>(x)
        double step = 0.0;                           ///< chord step resolving the source
    };

    static BoundaryData closed_form(Evaluator f, double sup_norm);
    /// Samples f on boundary angle x incidence angle (n = 2) and interpolates.
    static BoundaryData sampled(const ConvexDomain& domain, int boundary_samples,
                                int direction_samples, const Evaluator& f);

    /// Value at an inflow pair; zero for outflow or grazing pairs.
    double operator()(const Vec& x, const Vec& theta) const { return eval_(x, theta); }
    double sup_norm() const { return sup_; }

    /// Patch whose E_- is declared to contain the support (nullopt: unknown).
    const std::optional<BoundaryPatch>& support() const { return support_; }
    BoundaryData& with_support(BoundaryPatch patch)
    {
        support_ = std::move(patch);
        return *this;
    }

    const std::optional<SingularAverages>& singular() const { return singular_; }
    BoundaryData& with_singular_averages(SingularAverages averages)
    {
        singular_ = std::move(averages);
        return *this;
    }

  private:
    BoundaryData() = default;

    Evaluator eval_;
    double sup_ = 0.0;
    std::optional<BoundaryPatch> support_;
    std::optional<SingularAverages> singular_;
};

/// Jf(x, theta) = alpha(x, x_{theta-}) f(x_{theta-}, theta).
double apply_J(const AttenuationField& sigma, const ConvexDomain& domain, const BoundaryData& f,
               const Vec& x, const Vec& theta);

//---------------------------------------------------------------------------//
// Discretized fields
//---------------------------------------------------------------------------//

/// Spatial grid, direction set and chord step shared by the grid operators.
struct Discretization {
    std::shared_ptr<const SpatialGrid> grid;
    DirectionSet directions;
    double step = 0.0;

    const ConvexDomain& domain() const { return grid->domain(); }
};

Discretization make_discretization(const ConvexDomain& domain, int nodes_per_axis,
                                   int direction_resolution);

/// Specific intensity u(x_i, theta_j) on inside grid nodes x direction set.
class RadianceField {
  public:
    explicit RadianceField(Discretization disc);

    const Discretization& discretization() const { return disc_; }
    const SpatialGrid& grid() const { return *disc_.grid; }
    const DirectionSet& directions() const { return disc_.directions; }

    /// Value at inside node `node` (position in the inside list) and direction j.
    double& at(std::size_t node, std::size_t j) { return values_[node * ndir_ + j]; }
    double at(std::size_t node, std::size_t j) const { return values_[node * ndir_ + j]; }
    std::span<const double> values() const { return values_; }

    /// Inside-node values for direction j.
    std::vector<double> slice(std::size_t j) const;
    /// Multilinear interpolation of direction j at x.
    double interpolate(const Vec& x, std::size_t j) const;
    /// Angular average at every inside node.
    std::vector<double> node_averages() const;

  private:
    Discretization disc_;
    std::size_t ndir_;
    std::vector<double> values_;
};

/// <u>(x): direction quadrature of the interpolated field, divided by |S^{n-1}|.
double angular_average(const RadianceField& u, const Vec& x);

//---------------------------------------------------------------------------//
// Transport operators
//---------------------------------------------------------------------------//

using PhaseSpaceFunction = std::function<double(const Vec& x, const Vec& theta)>;

/// T^{-1}S(x, theta) = int_0^{|x - x_{theta-}|} alpha(x, x - t theta) S(x - t theta, theta) dt.
double apply_Tinv(const AttenuationField& sigma, const ConvexDomain& domain,
                  const PhaseSpaceFunction& source, const Vec& x, const Vec& theta);

/// K u = T^{-1} sigma <u> on the grid of u.
RadianceField apply_K(const AttenuationField& sigma, const RadianceField& u);

/// Contraction constant 1 - exp(-sigma_max * diameter) of K in L^infinity.
double contraction_bound(const AttenuationField& sigma, const ConvexDomain& domain);

/// Smallest M >= 0 with C^{M+1} * norm / (1 - C) < tol.
int certified_terms(double contraction, double norm, double tol);

/// Averaged scattering operator g -> <T^{-1} sigma g> on inside grid nodes.
///
/// This is K acting on angular averages; the collision series only ever needs
/// it. Small grids assemble it densely once, larger ones apply it matrix-free.
class AveragedScattering {
  public:
    static constexpr std::size_t kDenseLimit = 4000;

    AveragedScattering(AttenuationField sigma, Discretization disc,
                       std::size_t dense_limit = kDenseLimit);

    std::vector<double> apply(std::span<const double> g) const;
    double contraction() const { return contraction_; }
    bool is_dense() const { return !dense_.empty(); }
    const Discretization& discretization() const { return disc_; }
    const AttenuationField& sigma() const { return sigma_; }

    /// sum_{k=1..terms} A^k start
    std::vector<double> tail(std::span<const double> start, int terms) const;

  private:
    AttenuationField sigma_;
    Discretization disc_;
    double contraction_;
    std::vector<double> dense_;
};

//---------------------------------------------------------------------------//
// Collision series
//---------------------------------------------------------------------------//

/// Angular averages of the collision series on the grid.
///
/// Smooth data: `grid_sum` = sum_{m=0}^{M-1} <K^m Jf>.
/// Singular data: `grid_sum` = sum_{m=2}^{M-1} <K^m Jf>; orders 0 and 1 come
/// from the pointwise hooks when the trace is evaluated.
struct CollisionAverages {
    std::vector<double> grid_sum;
    bool singular = false;
    int terms = 0;       ///< highest collision order M in the trace
    double bound = 0.0;  ///< certified truncation bound in L^infinity
};

CollisionAverages collision_averages(const AttenuationField& sigma, const BoundaryData& f,
                                     double tol, const AveragedScattering& op);

/// Scattered part of the trace: u(x, theta) - Jf(x, theta) from the averages.
double scattered_trace(const AttenuationField& sigma, const BoundaryData& f,
                       const CollisionAverages& averages, const Discretization& disc,
                       const Vec& x, const Vec& theta);

struct RteSolution {
    RadianceField radiance;
    std::vector<double> average; ///< <u> on inside nodes
    int terms = 0;               ///< highest collision order M kept
    double bound = 0.0;          ///< C^{M+1} ||Jf|| / (1 - C)
    CollisionAverages averages;  ///< scattering source; u off the grid is Jf + scattered_trace
};

/// u = sum_{m=0}^{M} K^m Jf with M certified against `tol`.
RteSolution solve_rte(const AttenuationField& sigma, const BoundaryData& f, double tol,
                      const Discretization& disc);

/// A|_E(f): outflow trace at the requested pairs of E_+.
std::vector<double> albedo_restricted(const AttenuationField& sigma, const BoundaryPatch& patch,
                                      const BoundaryData& f,
                                      std::span<const std::pair<Vec, Vec>> outputs, double tol,
                                      const AveragedScattering& op);

} // namespace scatterscan
