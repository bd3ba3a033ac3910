#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "scatterscan/geometry.hpp"

namespace scatterscan {

/// Regular node grid over the domain's bounding box with an inside mask.
///
/// Scalar fields live on the inside nodes. Interpolation expands them to all
/// nodes first: ghost nodes near the boundary take averages of their interior
/// neighbours, so cells straddling the boundary stay well defined.
class SpatialGrid {
  public:
    SpatialGrid(const ConvexDomain& domain, int nodes_per_axis);

    const ConvexDomain& domain() const { return domain_; }
    int dimension() const { return dim_; }
    int nodes_per_axis() const { return n_; }
    double spacing() const { return spacing_; }
    std::size_t node_count() const { return total_; }
    Vec node(std::size_t flat) const;

    /// Flat indices of nodes inside the closed domain.
    const std::vector<std::size_t>& inside_nodes() const { return inside_; }
    std::size_t inside_count() const { return inside_.size(); }
    /// Position of a flat node in the inside list, or -1.
    long inside_index(std::size_t flat) const { return inside_pos_[flat]; }

    /// All-node values from inside-node values (ghosts filled, far nodes zero).
    std::vector<double> expand(std::span<const double> inside_values) const;

    /// Multilinear interpolation of all-node values at x.
    double interpolate(std::span<const double> node_values, const Vec& x) const;

    /// Calls sink(inside_index, weight) for the interpolation weights of x
    /// expressed directly on inside nodes (ghost averages unrolled).
    template <class Sink>
    void inside_stencil(const Vec& x, Sink&& sink) const
    {
        std::size_t idx[8];
        double w[8];
        int count = corner_weights(x, idx, w);
        for (int c = 0; c < count; ++c) {
            if (w[c] == 0.0) {
                continue;
            }
            long pos = inside_pos_[idx[c]];
            if (pos >= 0) {
                sink(static_cast<std::size_t>(pos), w[c]);
                continue;
            }
            for (const auto& [p, gw] : ghost_weights_[idx[c]]) {
                sink(p, w[c] * gw);
            }
        }
    }

  private:
    int corner_weights(const Vec& x, std::size_t* idx, double* w) const;

    ConvexDomain domain_;
    int dim_;
    int n_;
    double spacing_;
    Vec origin_;
    std::size_t total_;
    std::vector<std::size_t> inside_;
    std::vector<long> inside_pos_;
    // ghost node -> weights over inside positions
    std::vector<std::vector<std::pair<std::size_t, double>>> ghost_weights_;
};

} // namespace scatterscan
