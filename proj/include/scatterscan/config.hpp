#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scatterscan/field.hpp"
#include "scatterscan/geometry.hpp"
#include "scatterscan/probe.hpp"
#include "scatterscan/transport.hpp"

namespace scatterscan {

struct DomainSpec {
    std::string kind = "disk"; ///< disk | ball | ellipse
    double radius = 1.0;
    double semi_x = 1.0;
    double semi_y = 1.0;
    Vec center{};
};

struct SigmaSpec {
    std::string kind = "constant"; ///< constant | gaussian_blobs | three_blob | grid | zero
    double value = 0.25;
    double background = 0.2;
    std::vector<AttenuationField::Blob> blobs;
    int nodes = 0;
    std::vector<double> values;
};

struct PatchSpec {
    bool full = false;
    double center_angle = kPi; ///< arc centre (n = 2)
    double half_width = kPi / 4.0;
    Vec axis{-1.0, 0.0, 0.0}; ///< cap axis (n = 3)
};

struct GridSpec {
    int spatial = 33;
    int directions = 64;
};

struct ProbeSpec {
    std::vector<double> h{0.2, 0.1, 0.05, 0.025};
    int anchors = 16;
    int directions = 16;
    AngularScaling angular_scaling = AngularScaling::quadratic;
    double anchor_angle = kPi; ///< boundary angle of the single probe and the width study
    double incidence = 0.0;    ///< angle from the inward normal
    double tol = 1e-6;
};

struct ReconstructionSpec {
    int grid = 64;
    int iterations = 200;
    double relaxation = 0.9;
    bool nonneg = true;
    std::string data = "probe"; ///< probe | oracle
    bool full_boundary = false; ///< oracle data over the whole boundary instead of E
    int anchors = 64;           ///< oracle lattice
    int directions = 64;
};

struct SourceSpec {
    std::string kind = "constant"; ///< constant | smooth
    double value = 1.0;
    double tol = 1e-6;
};

struct RunConfig {
    DomainSpec domain;
    SigmaSpec sigma;
    PatchSpec patch;
    GridSpec grid;
    ProbeSpec probe;
    ReconstructionSpec reconstruction;
    SourceSpec source;
    std::uint64_t seed = 1;
    std::string output = "out";
    /// FNV-1a of the canonical JSON dump.
    std::uint64_t hash = 0;

    ConvexDomain make_domain() const;
    AttenuationField make_sigma() const;
    BoundaryPatch make_patch() const;
    BoundaryData make_source(const ConvexDomain& domain) const;
    ProbeOptions probe_options() const;
};

/// Parses and validates a config document. Unknown keys and out-of-range
/// values throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

} // namespace scatterscan
