#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scatterscan/field.hpp"
#include "scatterscan/geometry.hpp"

namespace scatterscan {

//---------------------------------------------------------------------------//
// Sinograms
//---------------------------------------------------------------------------//

enum class RecordStatus { valid, grazing, invalid_recovery, width_too_large, failed };

const char* to_string(RecordStatus status);

struct SinogramRecord {
    Vec anchor;
    Vec direction;
    Chord chord;
    double recovered = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> oracle;
    RecordStatus status = RecordStatus::failed;
};

struct Sinogram {
    int dimension = 2;
    std::vector<SinogramRecord> records;

    std::size_t valid_count() const;
};

/// Inflow pair (x, theta) of the probing lattice.
struct ProbeAnchor {
    Vec point;
    Vec direction;
    FlowClass flow = FlowClass::inflow;
};

/// Planar probing lattice on a patch, anchor-major, direction-minor.
///
/// Anchors sit at cell centres of the patch's parametric angle range.
/// Directions make angles psi_j = -pi/2 + (j + 1/2) pi / directions with the
/// inward normal.
std::vector<ProbeAnchor> probe_lattice(const ConvexDomain& domain, const BoundaryPatch& patch,
                                       int anchors, int directions);

/// Inflow direction at incidence angle psi from the inward normal at x (n = 2).
Vec incidence_direction(const ConvexDomain& domain, const Vec& x, double psi);

/// int sigma over the chord by adaptive Simpson.
double oracle_line_integral(const AttenuationField& sigma, const Chord& chord, double tol = 1e-9);

/// Oracle sinogram on the probing lattice; recovered = oracle for every transversal chord.
Sinogram oracle_sinogram(const AttenuationField& sigma, const ConvexDomain& domain,
                         const BoundaryPatch& patch, int anchors, int directions);

//---------------------------------------------------------------------------//
// Pixel grids
//---------------------------------------------------------------------------//

/// n x n square pixels over the bounding box of a planar domain.
///
/// Pixel (i, j) has column i (x) and row j (y); flat index j * n + i.
/// The mask marks pixels whose centre lies in the closed domain.
class ScalarGrid {
  public:
    ScalarGrid(const ConvexDomain& domain, int n);

    const ConvexDomain& domain() const { return domain_; }
    int size() const { return n_; }
    double spacing() const { return spacing_; }
    const Vec& origin() const { return origin_; }
    std::size_t pixel_count() const { return values_.size(); }

    Vec center(int i, int j) const;
    Vec center(std::size_t flat) const;
    bool inside(std::size_t flat) const { return mask_[flat] != 0; }

    double& operator[](std::size_t flat) { return values_[flat]; }
    double operator[](std::size_t flat) const { return values_[flat]; }
    double at(int i, int j) const { return values_[static_cast<std::size_t>(j) * n_ + i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    /// Pixel centres of sigma, zero outside the mask.
    static ScalarGrid sample(const ConvexDomain& domain, int n, const AttenuationField& sigma);

  private:
    ConvexDomain domain_;
    int n_;
    double spacing_;
    Vec origin_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

/// Relative L2 error of `estimate` against sigma at masked pixel centres.
double relative_l2_error(const ScalarGrid& estimate, const AttenuationField& sigma);

//---------------------------------------------------------------------------//
// Restricted X-ray transform
//---------------------------------------------------------------------------//

enum class PixelSelection {
    intersecting, ///< pixels meeting the closed domain
    interior,     ///< pixels contained in the closed domain
};

/// Sparse chord x pixel matrix of intersection lengths (CSR).
struct SystemMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::size_t> col;
    std::vector<double> val;
    /// Flat pixel index of every column.
    std::vector<std::size_t> pixels;

    double row_sum(std::size_t r) const;
    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> multiply_transpose(std::span<const double> y) const;
};

SystemMatrix build_system_matrix(const ConvexDomain& domain, int grid_n,
                                 std::span<const Chord> chords,
                                 PixelSelection selection = PixelSelection::intersecting);

struct ReconstructionResult {
    ScalarGrid grid;
    /// Row-weighted residual ||b - A x||_R after every iteration.
    std::vector<double> residuals;
};

/// SIRT from zero: x += lambda C A^T R (b - A x) with R, C inverse row and column sums.
ReconstructionResult reconstruct(const Sinogram& sinogram, const ConvexDomain& domain, int grid_n,
                                 int iterations, double relaxation, bool nonneg);

struct LineSampling {
    int anchors = 256; ///< anchors on the whole boundary
    int angles = 64;   ///< incidence angles per anchor
};

struct ScannabilityReport {
    double smallest_singular_value = 0.0;
    double condition = std::numeric_limits<double>::infinity();
    std::size_t chords = 0;
    std::size_t pixels = 0;
    std::size_t rank = 0;
    bool scannable = false;
};

inline constexpr double kScannableThreshold = 1e-8;
inline constexpr int kMaxScannabilityGrid = 24;

/// Smallest singular value of the transform restricted to chords entering
/// through E, on pixels interior to the domain. Chords come from one global
/// lattice, so a larger patch only adds rows.
ScannabilityReport scannability_surrogate(const ConvexDomain& domain, const BoundaryPatch& patch,
                                          int grid_n, LineSampling sampling = {});

struct ViewpointReport {
    Vec center;
    double radius = 0.0;
    double offset = 0.0; ///< distance of the centre from the patch centre along the normal
    std::size_t samples = 0;
    std::size_t hits = 0;       ///< sampled lines meeting the closed domain
    std::size_t violations = 0; ///< hits whose near boundary point lies outside E
};

/// External ball V such that every sampled line through V that meets the
/// domain enters it through E. Offsets halve from the domain diameter; the
/// radius is half the offset.
ViewpointReport construct_viewpoint(const ConvexDomain& domain, const BoundaryPatch& patch,
                                    std::size_t samples = 100000, std::uint64_t seed = 20240531);

} // namespace scatterscan
