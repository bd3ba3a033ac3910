#include "scatterscan/field.hpp"

#include <algorithm>
#include <cmath>

namespace scatterscan {

AttenuationField AttenuationField::constant(double value)
{
    if (!(value > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "constant sigma must be positive");
    }
    AttenuationField f;
    f.kind_ = Kind::constant;
    f.value_ = value;
    f.min_ = f.max_ = value;
    return f;
}

AttenuationField AttenuationField::zero_for_testing()
{
    AttenuationField f;
    f.kind_ = Kind::constant;
    return f;
}

AttenuationField AttenuationField::gaussian_blobs(double background, std::vector<Blob> blobs)
{
    if (!(background > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "blob background must be positive");
    }
    AttenuationField f;
    f.kind_ = Kind::gaussian_blobs;
    f.value_ = background;
    f.min_ = background;
    f.max_ = background;
    for (const auto& b : blobs) {
        if (b.amplitude < 0.0 || !(b.width > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "blob amplitude must be >= 0 and width > 0");
        }
        f.max_ += b.amplitude;
    }
    f.blobs_ = std::move(blobs);
    return f;
}

AttenuationField AttenuationField::grid(const ConvexDomain& domain, int nodes_per_axis,
                                        std::vector<double> values)
{
    int d = domain.dimension();
    std::size_t expected = 1;
    for (int i = 0; i < d; ++i) {
        expected *= static_cast<std::size_t>(nodes_per_axis);
    }
    if (nodes_per_axis < 2 || values.size() != expected) {
        throw Error(ErrorCode::InvalidArgument, "grid sigma needs nodes_per_axis^d values");
    }
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*lo > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "grid sigma values must be positive");
    }
    AttenuationField f;
    f.kind_ = Kind::grid;
    f.dim_ = d;
    f.nodes_ = nodes_per_axis;
    f.origin_ = domain.lower();
    f.spacing_ = (domain.upper().x - domain.lower().x) / (nodes_per_axis - 1);
    f.min_ = *lo;
    f.max_ = *hi;
    f.grid_ = std::move(values);
    return f;
}

double AttenuationField::eval_blobs(const Vec& x) const
{
    double s = value_;
    for (const auto& b : blobs_) {
        Vec d = x - b.center;
        s += b.amplitude * std::exp(-dot(d, d) / (2.0 * b.width * b.width));
    }
    return s;
}

double AttenuationField::eval_grid(const Vec& x) const
{
    int idx[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int i = 0; i < dim_; ++i) {
        double u = (x[i] - origin_[i]) / spacing_;
        int k = static_cast<int>(std::floor(u));
        k = std::clamp(k, 0, nodes_ - 2);
        idx[i] = k;
        frac[i] = std::clamp(u - k, 0.0, 1.0);
    }
    double s = 0.0;
    int corners = 1 << dim_;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t flat = 0;
        std::size_t stride = 1;
        for (int i = 0; i < dim_; ++i) {
            int bit = (c >> i) & 1;
            w *= bit ? frac[i] : 1.0 - frac[i];
            flat += static_cast<std::size_t>(idx[i] + bit) * stride;
            stride *= static_cast<std::size_t>(nodes_);
        }
        s += w * grid_[flat];
    }
    return s;
}

AttenuationField three_blob_phantom()
{
    return AttenuationField::gaussian_blobs(
        0.2, {{{0.35, 0.25, 0.0}, 0.30, 0.15},
              {{-0.30, -0.20, 0.0}, 0.20, 0.20},
              {{0.05, -0.50, 0.0}, 0.25, 0.12}});
}

} // namespace scatterscan
