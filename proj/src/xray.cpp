#include "scatterscan/xray.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "scatterscan/quadrature.hpp"

namespace scatterscan {

const char* to_string(RecordStatus status)
{
    switch (status) {
    case RecordStatus::valid: return "valid";
    case RecordStatus::grazing: return "grazing";
    case RecordStatus::invalid_recovery: return "invalid_recovery";
    case RecordStatus::width_too_large: return "width_too_large";
    case RecordStatus::failed: return "failed";
    }
    return "failed";
}

std::size_t Sinogram::valid_count() const
{
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) {
        return r.status == RecordStatus::valid;
    }));
}

//---------------------------------------------------------------------------//
// Probing lattice and oracle data
//---------------------------------------------------------------------------//

Vec incidence_direction(const ConvexDomain& domain, const Vec& x, double psi)
{
    if (domain.dimension() != 2) {
        throw Error(ErrorCode::UnsupportedDimension, "incidence angles are planar");
    }
    Vec inward = -domain.normal(x);
    Vec tangent{-inward.y, inward.x, 0.0};
    return std::cos(psi) * inward + std::sin(psi) * tangent;
}

std::vector<ProbeAnchor> probe_lattice(const ConvexDomain& domain, const BoundaryPatch& patch,
                                       int anchors, int directions)
{
    if (domain.dimension() != 2) {
        throw Error(ErrorCode::UnsupportedDimension, "probing lattices are planar");
    }
    if (anchors < 1 || directions < 1) {
        throw Error(ErrorCode::InvalidArgument, "lattice needs at least one anchor and direction");
    }
    std::vector<ProbeAnchor> out;
    double lo = 0.0;
    double width = 0.0;
    switch (patch.kind()) {
    case BoundaryPatch::Kind::empty: return out;
    case BoundaryPatch::Kind::full: width = 2.0 * kPi; break;
    case BoundaryPatch::Kind::arc:
        lo = patch.center_angle() - patch.half_width();
        width = 2.0 * patch.half_width();
        break;
    case BoundaryPatch::Kind::cap:
        throw Error(ErrorCode::UnsupportedDimension, "cap patches need n = 3");
    }
    out.reserve(static_cast<std::size_t>(anchors) * directions);
    for (int k = 0; k < anchors; ++k) {
        Vec x = domain.boundary_point(lo + (k + 0.5) * width / anchors);
        for (int j = 0; j < directions; ++j) {
            double psi = -0.5 * kPi + (j + 0.5) * kPi / directions;
            Vec theta = incidence_direction(domain, x, psi);
            out.push_back({x, theta, classify_boundary_pair(domain, x, theta)});
        }
    }
    return out;
}

double oracle_line_integral(const AttenuationField& sigma, const Chord& chord, double tol)
{
    if (chord.length == 0.0) {
        return 0.0;
    }
    if (sigma.is_constant()) {
        return sigma.value() * chord.length;
    }
    auto f = [&](double s) { return sigma(chord.entry + s * chord.direction); };
    return adaptive_simpson(f, 0.0, chord.length, tol);
}

Sinogram oracle_sinogram(const AttenuationField& sigma, const ConvexDomain& domain,
                         const BoundaryPatch& patch, int anchors, int directions)
{
    Sinogram sino;
    sino.dimension = domain.dimension();
    for (const auto& a : probe_lattice(domain, patch, anchors, directions)) {
        SinogramRecord rec;
        rec.anchor = a.point;
        rec.direction = a.direction;
        if (a.flow != FlowClass::inflow) {
            rec.status = RecordStatus::grazing;
            sino.records.push_back(rec);
            continue;
        }
        rec.chord = chord_through(domain, a.point, a.direction);
        double v = oracle_line_integral(sigma, rec.chord);
        rec.recovered = v;
        rec.oracle = v;
        rec.status = RecordStatus::valid;
        sino.records.push_back(rec);
    }
    return sino;
}

//---------------------------------------------------------------------------//
// ScalarGrid
//---------------------------------------------------------------------------//

ScalarGrid::ScalarGrid(const ConvexDomain& domain, int n) : domain_(domain), n_(n)
{
    if (domain.dimension() != 2) {
        throw Error(ErrorCode::UnsupportedDimension, "pixel grids are planar");
    }
    if (n < 2) {
        throw Error(ErrorCode::InvalidArgument, "pixel grid needs n >= 2");
    }
    Vec lo = domain.lower();
    Vec hi = domain.upper();
    double extent = std::max(hi.x - lo.x, hi.y - lo.y);
    spacing_ = extent / n;
    Vec c = domain.center();
    origin_ = Vec{c.x - 0.5 * extent, c.y - 0.5 * extent, 0.0};
    values_.assign(static_cast<std::size_t>(n) * n, 0.0);
    mask_.assign(values_.size(), 0);
    for (std::size_t f = 0; f < values_.size(); ++f) {
        mask_[f] = domain.contains(center(f), 0.0) ? 1 : 0;
    }
}

Vec ScalarGrid::center(int i, int j) const
{
    return origin_ + Vec{(i + 0.5) * spacing_, (j + 0.5) * spacing_, 0.0};
}

Vec ScalarGrid::center(std::size_t flat) const
{
    return center(static_cast<int>(flat % n_), static_cast<int>(flat / n_));
}

ScalarGrid ScalarGrid::sample(const ConvexDomain& domain, int n, const AttenuationField& sigma)
{
    ScalarGrid g(domain, n);
    for (std::size_t f = 0; f < g.pixel_count(); ++f) {
        if (g.inside(f)) {
            g[f] = sigma(g.center(f));
        }
    }
    return g;
}

double relative_l2_error(const ScalarGrid& estimate, const AttenuationField& sigma)
{
    double num = 0.0;
    double den = 0.0;
    for (std::size_t f = 0; f < estimate.pixel_count(); ++f) {
        if (!estimate.inside(f)) {
            continue;
        }
        double truth = sigma(estimate.center(f));
        num += (estimate[f] - truth) * (estimate[f] - truth);
        den += truth * truth;
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

//---------------------------------------------------------------------------//
// System matrix
//---------------------------------------------------------------------------//

double SystemMatrix::row_sum(std::size_t r) const
{
    double s = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
        s += val[k];
    }
    return s;
}

std::vector<double> SystemMatrix::multiply(std::span<const double> x) const
{
    std::vector<double> y(rows, 0.0);
    long nr = static_cast<long>(rows);
#pragma omp parallel for schedule(static)
    for (long r = 0; r < nr; ++r) {
        double s = 0.0;
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            s += val[k] * x[col[k]];
        }
        y[r] = s;
    }
    return y;
}

std::vector<double> SystemMatrix::multiply_transpose(std::span<const double> y) const
{
    std::vector<double> x(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            x[col[k]] += val[k] * y[r];
        }
    }
    return x;
}

namespace {

/// Smallest level of the domain quadric over the axis-aligned box [lo, hi].
double min_level(const ConvexDomain& domain, const Vec& lo, const Vec& hi)
{
    Vec c = domain.center();
    Vec p{std::clamp(c.x, lo.x, hi.x), std::clamp(c.y, lo.y, hi.y), 0.0};
    return domain.level(p);
}

bool pixel_selected(const ConvexDomain& domain, const ScalarGrid& grid, int i, int j,
                    PixelSelection selection)
{
    double s = grid.spacing();
    Vec lo = grid.origin() + Vec{i * s, j * s, 0.0};
    Vec hi = lo + Vec{s, s, 0.0};
    if (selection == PixelSelection::intersecting) {
        return min_level(domain, lo, hi) <= 1.0 + 1e-9;
    }
    for (Vec corner : {lo, hi, Vec{lo.x, hi.y, 0.0}, Vec{hi.x, lo.y, 0.0}}) {
        if (domain.level(corner) > 1.0) {
            return false;
        }
    }
    return true;
}

/// Amanatides-Woo traversal: (flat pixel, length) for every pixel the segment crosses.
std::vector<std::pair<std::size_t, double>> traverse(const ScalarGrid& grid, const Vec& a,
                                                     const Vec& b)
{
    std::vector<std::pair<std::size_t, double>> out;
    Vec d = b - a;
    double len = norm(d);
    if (len == 0.0) {
        return out;
    }
    d = d / len;
    int n = grid.size();
    double s = grid.spacing();
    const Vec& o = grid.origin();
    Vec start = a + (0.5 * std::min(len, 1e-12)) * d;
    int i = std::clamp(static_cast<int>(std::floor((start.x - o.x) / s)), 0, n - 1);
    int j = std::clamp(static_cast<int>(std::floor((start.y - o.y) / s)), 0, n - 1);
    constexpr double inf = std::numeric_limits<double>::infinity();
    int si = d.x > 0 ? 1 : -1;
    int sj = d.y > 0 ? 1 : -1;
    double tx = d.x != 0.0 ? (o.x + (i + (si > 0 ? 1 : 0)) * s - a.x) / d.x : inf;
    double ty = d.y != 0.0 ? (o.y + (j + (sj > 0 ? 1 : 0)) * s - a.y) / d.y : inf;
    double dx = d.x != 0.0 ? s / std::abs(d.x) : inf;
    double dy = d.y != 0.0 ? s / std::abs(d.y) : inf;
    double t = 0.0;
    while (t < len) {
        double next = std::min({tx, ty, len});
        if (next > t) {
            out.emplace_back(static_cast<std::size_t>(j) * n + i, next - t);
        }
        t = next;
        if (t >= len) {
            break;
        }
        if (tx <= ty) {
            i += si;
            tx += dx;
        } else {
            j += sj;
            ty += dy;
        }
        if (i < 0 || j < 0 || i >= n || j >= n) {
            break;
        }
    }
    return out;
}

} // namespace

SystemMatrix build_system_matrix(const ConvexDomain& domain, int grid_n,
                                 std::span<const Chord> chords, PixelSelection selection)
{
    if (chords.empty()) {
        throw Error(ErrorCode::EmptyChordSet, "no chords to trace");
    }
    if (grid_n < 8) {
        throw Error(ErrorCode::InvalidArgument, "system matrix grid needs n >= 8");
    }
    ScalarGrid grid(domain, grid_n);
    SystemMatrix m;
    std::vector<long> column(grid.pixel_count(), -1);
    for (int j = 0; j < grid_n; ++j) {
        for (int i = 0; i < grid_n; ++i) {
            if (pixel_selected(domain, grid, i, j, selection)) {
                std::size_t flat = static_cast<std::size_t>(j) * grid_n + i;
                column[flat] = static_cast<long>(m.pixels.size());
                m.pixels.push_back(flat);
            }
        }
    }
    m.rows = chords.size();
    m.cols = m.pixels.size();
    std::vector<std::vector<std::pair<std::size_t, double>>> rows(chords.size());
    long count = static_cast<long>(chords.size());
#pragma omp parallel for schedule(dynamic, 32)
    for (long r = 0; r < count; ++r) {
        for (const auto& [flat, len] : traverse(grid, chords[r].entry, chords[r].exit)) {
            if (column[flat] >= 0) {
                rows[r].emplace_back(static_cast<std::size_t>(column[flat]), len);
            }
        }
    }
    m.row_ptr.assign(1, 0);
    for (auto& row : rows) {
        std::sort(row.begin(), row.end());
        for (const auto& [c, v] : row) {
            m.col.push_back(c);
            m.val.push_back(v);
        }
        m.row_ptr.push_back(m.col.size());
    }
    return m;
}

//---------------------------------------------------------------------------//
// Reconstruction
//---------------------------------------------------------------------------//

ReconstructionResult reconstruct(const Sinogram& sinogram, const ConvexDomain& domain, int grid_n,
                                 int iterations, double relaxation, bool nonneg)
{
    if (!(relaxation > 0.0 && relaxation < 2.0)) {
        throw Error(ErrorCode::InvalidArgument, "relaxation must lie in (0, 2)");
    }
    if (iterations < 0) {
        throw Error(ErrorCode::InvalidArgument, "iteration count must be nonnegative");
    }
    std::vector<Chord> chords;
    std::vector<double> b;
    for (const auto& rec : sinogram.records) {
        if (rec.status == RecordStatus::valid && std::isfinite(rec.recovered)) {
            chords.push_back(rec.chord);
            b.push_back(rec.recovered);
        }
    }
    if (chords.empty()) {
        throw Error(ErrorCode::NoValidRecords, "sinogram has no valid records");
    }
    SystemMatrix a = build_system_matrix(domain, grid_n, chords);
    std::vector<double> inv_row(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        double s = a.row_sum(r);
        inv_row[r] = s > 0.0 ? 1.0 / s : 0.0;
    }
    std::vector<double> ones(a.rows, 1.0);
    std::vector<double> colsum = a.multiply_transpose(ones);
    std::vector<double> inv_col(a.cols, 0.0);
    for (std::size_t c = 0; c < a.cols; ++c) {
        inv_col[c] = colsum[c] > 0.0 ? 1.0 / colsum[c] : 0.0;
    }

    std::vector<double> x(a.cols, 0.0);
    ReconstructionResult result{ScalarGrid(domain, grid_n), {}};
    std::vector<double> res(a.rows);
    for (int k = 0;; ++k) {
        std::vector<double> ax = a.multiply(x);
        double norm2 = 0.0;
        for (std::size_t r = 0; r < a.rows; ++r) {
            res[r] = b[r] - ax[r];
            norm2 += res[r] * res[r] * inv_row[r];
            res[r] *= inv_row[r];
        }
        if (k > 0) {
            result.residuals.push_back(std::sqrt(norm2));
        }
        if (k == iterations) {
            break;
        }
        std::vector<double> back = a.multiply_transpose(res);
        for (std::size_t c = 0; c < a.cols; ++c) {
            x[c] += relaxation * inv_col[c] * back[c];
            if (nonneg && x[c] < 0.0) {
                x[c] = 0.0;
            }
        }
    }
    for (std::size_t c = 0; c < a.cols; ++c) {
        result.grid[a.pixels[c]] = x[c];
    }
    return result;
}

//---------------------------------------------------------------------------//
// Scannability
//---------------------------------------------------------------------------//

ScannabilityReport scannability_surrogate(const ConvexDomain& domain, const BoundaryPatch& patch,
                                          int grid_n, LineSampling sampling)
{
    if (grid_n > kMaxScannabilityGrid) {
        throw Error(ErrorCode::GridTooLarge, "dense SVD limited to 24 x 24 pixels");
    }
    ScannabilityReport report;
    std::vector<Chord> chords;
    if (patch.kind() != BoundaryPatch::Kind::empty) {
        for (const auto& a : probe_lattice(domain, BoundaryPatch::full(), sampling.anchors,
                                           sampling.angles)) {
            if (a.flow == FlowClass::inflow && patch.contains(domain, a.point)) {
                chords.push_back(chord_through(domain, a.point, a.direction));
            }
        }
    }
    report.chords = chords.size();
    if (chords.empty()) {
        ScalarGrid grid(domain, grid_n);
        for (int j = 0; j < grid_n; ++j) {
            for (int i = 0; i < grid_n; ++i) {
                report.pixels += pixel_selected(domain, grid, i, j, PixelSelection::interior);
            }
        }
        return report;
    }
    SystemMatrix a = build_system_matrix(domain, grid_n, chords, PixelSelection::interior);
    report.pixels = a.cols;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.rows),
                                                  static_cast<Eigen::Index>(a.cols));
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a.col[k])) = a.val[k];
        }
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
    const auto& s = svd.singularValues();
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        report.rank += s(k) > kScannableThreshold;
    }
    // With fewer chords than pixels the transform has a kernel.
    double smallest = a.rows < a.cols ? 0.0 : s(s.size() - 1);
    report.smallest_singular_value = smallest;
    report.condition = smallest > 0.0 ? s(0) / smallest : std::numeric_limits<double>::infinity();
    report.scannable = smallest > kScannableThreshold;
    return report;
}

//---------------------------------------------------------------------------//
// Viewpoint construction
//---------------------------------------------------------------------------//

namespace {

struct Candidate {
    Vec center;
    double radius;
    double offset;
};

ViewpointReport verify(const ConvexDomain& domain, const BoundaryPatch& patch, const Candidate& c,
                       std::size_t samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> gauss;
    int n = domain.dimension();
    ViewpointReport report{c.center, c.radius, c.offset, samples, 0, 0};
    for (std::size_t k = 0; k < samples; ++k) {
        Vec offset;
        do {
            offset = Vec{unif(rng), unif(rng), n == 3 ? unif(rng) : 0.0};
        } while (dot(offset, offset) > 1.0);
        Vec p = c.center + c.radius * offset;
        Vec d{gauss(rng), gauss(rng), n == 3 ? gauss(rng) : 0.0};
        d = unit(d);
        auto t = domain.line_parameters(p, d);
        if (!t || t->second - t->first <= 0.0) {
            continue;
        }
        ++report.hits;
        double near = std::abs(t->first) < std::abs(t->second) ? t->first : t->second;
        if (!patch.contains(domain, p + near * d)) {
            ++report.violations;
        }
    }
    return report;
}

} // namespace

ViewpointReport construct_viewpoint(const ConvexDomain& domain, const BoundaryPatch& patch,
                                    std::size_t samples, std::uint64_t seed)
{
    if (!patch.has_positive_measure()) {
        throw Error(ErrorCode::ConstructionFailed, "patch has zero measure");
    }
    Vec p = patch.center_point(domain);
    Vec nu = domain.normal(p);
    ViewpointReport best;
    best.violations = samples + 1;
    double delta = domain.diameter();
    constexpr int kHalvings = 30;
    for (int k = 0; k <= kHalvings; ++k, delta *= 0.5) {
        Candidate c{p + delta * nu, 0.5 * delta, delta};
        // Keep the closed ball away from the closed domain.
        if (domain.contains(c.center, 0.0) || domain.boundary_distance(c.center) <= 1.5 * c.radius) {
            continue;
        }
        ViewpointReport r = verify(domain, patch, c, samples, seed);
        if (r.hits > 0 && r.violations == 0) {
            return r;
        }
        if (r.violations < best.violations) {
            best = r;
        }
    }
    std::ostringstream msg;
    msg << "no ball verified; tightest candidate offset " << best.offset << " had "
        << best.violations << " violations in " << best.hits << " hits";
    throw Error(ErrorCode::ConstructionFailed, msg.str());
}

} // namespace scatterscan
