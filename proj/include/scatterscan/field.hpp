#pragma once

#include <vector>

#include "scatterscan/geometry.hpp"

namespace scatterscan {

/// Scattering coefficient sigma(x) >= sigma_min > 0 on the closed domain.
class AttenuationField {
  public:
    enum class Kind { constant, gaussian_blobs, grid };

    struct Blob {
        Vec center;
        double amplitude = 0.0;
        double width = 1.0;
    };

    static AttenuationField constant(double value);
    /// background + sum_k amplitude_k exp(-|x - c_k|^2 / (2 width_k^2))
    static AttenuationField gaussian_blobs(double background, std::vector<Blob> blobs);
    /// Node values on an n^d grid spanning the domain's bounding box, multilinear in between.
    static AttenuationField grid(const ConvexDomain& domain, int nodes_per_axis,
                                 std::vector<double> values);
    /// sigma == 0. Violates the positivity the solvers assume; test fixtures only.
    static AttenuationField zero_for_testing();

    double operator()(const Vec& x) const
    {
        switch (kind_) {
        case Kind::constant: return value_;
        case Kind::gaussian_blobs: return eval_blobs(x);
        case Kind::grid: return eval_grid(x);
        }
        return value_;
    }

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::constant; }
    /// Constant value (constant kind) or background (blob kind).
    double value() const { return value_; }
    const std::vector<Blob>& blobs() const { return blobs_; }
    /// Lower bound sigma_min.
    double min_value() const { return min_; }
    /// Upper bound sigma_max used by the contraction certificate.
    double max_value() const { return max_; }

  private:
    AttenuationField() = default;

    double eval_blobs(const Vec& x) const;
    double eval_grid(const Vec& x) const;

    Kind kind_ = Kind::constant;
    double value_ = 0.0;
    std::vector<Blob> blobs_;
    int dim_ = 2;
    int nodes_ = 0;
    Vec origin_{};
    double spacing_ = 0.0;
    std::vector<double> grid_;
    double min_ = 0.0;
    double max_ = 0.0;
};

/// Three-blob phantom on the unit disk used throughout the tests and default configs.
AttenuationField three_blob_phantom();

} // namespace scatterscan
