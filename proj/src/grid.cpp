#include "scatterscan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace scatterscan {

namespace {
// Ghost layers filled around the inside mask; two cover every cell that meets
// the closed domain, the third is slack for coarse grids.
constexpr int kGhostLayers = 3;
} // namespace

SpatialGrid::SpatialGrid(const ConvexDomain& domain, int nodes_per_axis)
    : domain_(domain), dim_(domain.dimension()), n_(nodes_per_axis)
{
    if (nodes_per_axis < 4) {
        throw Error(ErrorCode::InvalidArgument, "grid needs at least 4 nodes per axis");
    }
    origin_ = domain.lower();
    spacing_ = (domain.upper().x - domain.lower().x) / (n_ - 1);
    // Square cells: extend the shorter axes of an ellipse to the longest.
    double longest = 0.0;
    for (int i = 0; i < dim_; ++i) {
        longest = std::max(longest, domain.upper()[i] - domain.lower()[i]);
    }
    spacing_ = longest / (n_ - 1);
    for (int i = 0; i < dim_; ++i) {
        origin_[i] = domain.center()[i] - 0.5 * longest;
    }

    total_ = 1;
    for (int i = 0; i < dim_; ++i) {
        total_ *= static_cast<std::size_t>(n_);
    }
    inside_pos_.assign(total_, -1);
    for (std::size_t f = 0; f < total_; ++f) {
        if (domain_.contains(node(f), 1e-12)) {
            inside_pos_[f] = static_cast<long>(inside_.size());
            inside_.push_back(f);
        }
    }

    ghost_weights_.resize(total_);
    std::vector<char> filled(total_, 0);
    for (std::size_t f : inside_) {
        filled[f] = 1;
    }
    auto neighbours = [this](std::size_t f, auto&& visit) {
        int c[3] = {0, 0, 0};
        std::size_t rem = f;
        for (int i = 0; i < dim_; ++i) {
            c[i] = static_cast<int>(rem % n_);
            rem /= n_;
        }
        int span = dim_ == 2 ? 9 : 27;
        for (int k = 0; k < span; ++k) {
            int off[3] = {k % 3 - 1, (k / 3) % 3 - 1, k / 9 - 1};
            if (dim_ == 2) {
                off[2] = 0;
            }
            bool ok = true;
            bool self = true;
            std::size_t g = 0;
            std::size_t stride = 1;
            for (int i = 0; i < dim_; ++i) {
                int ci = c[i] + off[i];
                if (off[i] != 0) {
                    self = false;
                }
                if (ci < 0 || ci >= n_) {
                    ok = false;
                    break;
                }
                g += static_cast<std::size_t>(ci) * stride;
                stride *= static_cast<std::size_t>(n_);
            }
            if (ok && !self) {
                visit(g);
            }
        }
    };
    for (int layer = 0; layer < kGhostLayers; ++layer) {
        std::vector<std::size_t> fresh;
        for (std::size_t f = 0; f < total_; ++f) {
            if (filled[f]) {
                continue;
            }
            int count = 0;
            std::map<std::size_t, double> acc;
            neighbours(f, [&](std::size_t g) {
                if (filled[g] != 1) {
                    return;
                }
                ++count;
                long pos = inside_pos_[g];
                if (pos >= 0) {
                    acc[static_cast<std::size_t>(pos)] += 1.0;
                } else {
                    for (const auto& [p, w] : ghost_weights_[g]) {
                        acc[p] += w;
                    }
                }
            });
            if (count == 0) {
                continue;
            }
            auto& gw = ghost_weights_[f];
            for (const auto& [p, w] : acc) {
                gw.emplace_back(p, w / count);
            }
            fresh.push_back(f);
        }
        // Mark after the sweep so each layer only sees the previous ones.
        for (std::size_t f : fresh) {
            filled[f] = 1;
        }
    }
}

Vec SpatialGrid::node(std::size_t flat) const
{
    Vec p = origin_;
    for (int i = 0; i < dim_; ++i) {
        p[i] = origin_[i] + spacing_ * static_cast<double>(flat % n_);
        flat /= n_;
    }
    return p;
}

std::vector<double> SpatialGrid::expand(std::span<const double> inside_values) const
{
    std::vector<double> all(total_, 0.0);
    for (std::size_t k = 0; k < inside_.size(); ++k) {
        all[inside_[k]] = inside_values[k];
    }
    for (std::size_t f = 0; f < total_; ++f) {
        if (inside_pos_[f] >= 0) {
            continue;
        }
        double s = 0.0;
        for (const auto& [p, w] : ghost_weights_[f]) {
            s += w * inside_values[p];
        }
        all[f] = s;
    }
    return all;
}

int SpatialGrid::corner_weights(const Vec& x, std::size_t* idx, double* w) const
{
    int base[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int i = 0; i < dim_; ++i) {
        double u = (x[i] - origin_[i]) / spacing_;
        int k = static_cast<int>(std::floor(u));
        k = std::clamp(k, 0, n_ - 2);
        base[i] = k;
        frac[i] = std::clamp(u - k, 0.0, 1.0);
    }
    int corners = 1 << dim_;
    for (int c = 0; c < corners; ++c) {
        double wc = 1.0;
        std::size_t flat = 0;
        std::size_t stride = 1;
        for (int i = 0; i < dim_; ++i) {
            int bit = (c >> i) & 1;
            wc *= bit ? frac[i] : 1.0 - frac[i];
            flat += static_cast<std::size_t>(base[i] + bit) * stride;
            stride *= static_cast<std::size_t>(n_);
        }
        idx[c] = flat;
        w[c] = wc;
    }
    return corners;
}

double SpatialGrid::interpolate(std::span<const double> node_values, const Vec& x) const
{
    if (dim_ == 2) {
        double u = (x.x - origin_.x) / spacing_;
        double v = (x.y - origin_.y) / spacing_;
        int i = std::clamp(static_cast<int>(std::floor(u)), 0, n_ - 2);
        int j = std::clamp(static_cast<int>(std::floor(v)), 0, n_ - 2);
        double a = std::clamp(u - i, 0.0, 1.0);
        double b = std::clamp(v - j, 0.0, 1.0);
        const double* p = node_values.data() + static_cast<std::size_t>(j) * n_ + i;
        return (1.0 - b) * ((1.0 - a) * p[0] + a * p[1]) + b * ((1.0 - a) * p[n_] + a * p[n_ + 1]);
    }
    std::size_t idx[8];
    double w[8];
    int count = corner_weights(x, idx, w);
    double s = 0.0;
    for (int c = 0; c < count; ++c) {
        s += w[c] * node_values[idx[c]];
    }
    return s;
}

} // namespace scatterscan
