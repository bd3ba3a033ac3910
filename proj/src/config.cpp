#include "scatterscan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "scatterscan/io.hpp"

namespace scatterscan {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) {
        fail(where + " must be an object");
    }
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& item : j.items()) {
        if (!allowed.count(item.key())) {
            fail("unknown key '" + item.key() + "' in " + where);
        }
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(where + "." + key + " has the wrong type");
    }
}

Vec read_point(const json& j, const std::string& where)
{
    if (!j.is_array() || j.size() < 2 || j.size() > 3) {
        fail(where + " must be an array of 2 or 3 numbers");
    }
    Vec v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            fail(where + " must contain numbers");
        }
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

void parse_domain(const json& j, DomainSpec& d)
{
    allow_keys(j, "domain", {"kind", "dimension", "radius", "semi_axes", "center"});
    read(j, "kind", d.kind, "domain");
    if (d.kind != "disk" && d.kind != "ball" && d.kind != "ellipse") {
        fail("domain.kind must be disk, ball or ellipse");
    }
    read(j, "radius", d.radius, "domain");
    if (j.contains("semi_axes")) {
        Vec a = read_point(j.at("semi_axes"), "domain.semi_axes");
        d.semi_x = a.x;
        d.semi_y = a.y;
    }
    if (j.contains("center")) {
        d.center = read_point(j.at("center"), "domain.center");
    }
    int dim = d.kind == "ball" ? 3 : 2;
    if (j.contains("dimension")) {
        int given = 0;
        read(j, "dimension", given, "domain");
        if (given != dim) {
            fail("domain.dimension does not match domain.kind");
        }
    }
    if (!(d.radius > 0.0) || !(d.semi_x > 0.0) || !(d.semi_y > 0.0)) {
        fail("domain sizes must be positive");
    }
}

void parse_sigma(const json& j, SigmaSpec& s)
{
    allow_keys(j, "sigma", {"kind", "value", "background", "blobs", "nodes", "values"});
    read(j, "kind", s.kind, "sigma");
    read(j, "value", s.value, "sigma");
    read(j, "background", s.background, "sigma");
    read(j, "nodes", s.nodes, "sigma");
    read(j, "values", s.values, "sigma");
    if (j.contains("blobs")) {
        if (!j.at("blobs").is_array()) {
            fail("sigma.blobs must be an array");
        }
        for (const auto& b : j.at("blobs")) {
            allow_keys(b, "sigma.blobs[]", {"center", "amplitude", "width"});
            AttenuationField::Blob blob;
            if (!b.contains("center")) {
                fail("sigma.blobs[] needs a center");
            }
            blob.center = read_point(b.at("center"), "sigma.blobs[].center");
            read(b, "amplitude", blob.amplitude, "sigma.blobs[]");
            read(b, "width", blob.width, "sigma.blobs[]");
            s.blobs.push_back(blob);
        }
    }
    static const std::set<std::string> kinds{"constant", "gaussian_blobs", "three_blob", "grid",
                                             "zero"};
    if (!kinds.count(s.kind)) {
        fail("sigma.kind '" + s.kind + "' is not supported");
    }
}

void parse_patch(const json& j, PatchSpec& p)
{
    allow_keys(j, "patch", {"full", "center_angle", "half_width", "axis"});
    read(j, "full", p.full, "patch");
    read(j, "center_angle", p.center_angle, "patch");
    read(j, "half_width", p.half_width, "patch");
    if (j.contains("axis")) {
        p.axis = read_point(j.at("axis"), "patch.axis");
    }
    if (p.half_width < 0.0) {
        fail("patch.half_width must be nonnegative");
    }
}

void parse_grid(const json& j, GridSpec& g)
{
    allow_keys(j, "grid", {"spatial", "directions"});
    read(j, "spatial", g.spatial, "grid");
    read(j, "directions", g.directions, "grid");
    if (g.spatial < 4 || g.directions < 4) {
        fail("grid resolutions must be at least 4");
    }
}

void parse_probe(const json& j, ProbeSpec& p)
{
    allow_keys(j, "probe", {"h", "anchors", "directions", "angular_scaling", "anchor_angle",
                            "incidence", "tol"});
    read(j, "h", p.h, "probe");
    read(j, "anchors", p.anchors, "probe");
    read(j, "directions", p.directions, "probe");
    read(j, "anchor_angle", p.anchor_angle, "probe");
    read(j, "incidence", p.incidence, "probe");
    read(j, "tol", p.tol, "probe");
    if (j.contains("angular_scaling")) {
        std::string name;
        read(j, "angular_scaling", name, "probe");
        try {
            p.angular_scaling = parse_angular_scaling(name);
        } catch (const Error&) {
            fail("probe.angular_scaling must be linear or quadratic");
        }
    }
    if (p.h.empty()) {
        fail("probe.h must not be empty");
    }
    for (std::size_t i = 0; i < p.h.size(); ++i) {
        if (!(p.h[i] > 0.0) || (i > 0 && !(p.h[i] < p.h[i - 1]))) {
            fail("probe.h must be positive and strictly decreasing");
        }
    }
    if (p.anchors < 1 || p.directions < 1) {
        fail("probe sampling counts must be positive");
    }
    if (!(p.tol > 0.0)) {
        fail("probe.tol must be positive");
    }
    if (!(std::abs(p.incidence) < 0.5 * kPi)) {
        fail("probe.incidence must lie in (-pi/2, pi/2)");
    }
}

void parse_reconstruction(const json& j, ReconstructionSpec& r)
{
    allow_keys(j, "reconstruction", {"grid", "iterations", "relaxation", "nonneg", "data",
                                     "full_boundary", "anchors", "directions"});
    read(j, "grid", r.grid, "reconstruction");
    read(j, "iterations", r.iterations, "reconstruction");
    read(j, "relaxation", r.relaxation, "reconstruction");
    read(j, "nonneg", r.nonneg, "reconstruction");
    read(j, "data", r.data, "reconstruction");
    read(j, "full_boundary", r.full_boundary, "reconstruction");
    read(j, "anchors", r.anchors, "reconstruction");
    read(j, "directions", r.directions, "reconstruction");
    if (r.grid < 8) {
        fail("reconstruction.grid must be at least 8");
    }
    if (r.iterations < 0) {
        fail("reconstruction.iterations must be nonnegative");
    }
    if (!(r.relaxation > 0.0 && r.relaxation < 2.0)) {
        fail("reconstruction.relaxation must lie in (0, 2)");
    }
    if (r.data != "probe" && r.data != "oracle") {
        fail("reconstruction.data must be probe or oracle");
    }
    if (r.anchors < 1 || r.directions < 1) {
        fail("reconstruction sampling counts must be positive");
    }
}

void parse_source(const json& j, SourceSpec& s)
{
    allow_keys(j, "source", {"kind", "value", "tol"});
    read(j, "kind", s.kind, "source");
    read(j, "value", s.value, "source");
    read(j, "tol", s.tol, "source");
    if (s.kind != "constant" && s.kind != "smooth") {
        fail("source.kind must be constant or smooth");
    }
    if (!(s.tol > 0.0)) {
        fail("source.tol must be positive");
    }
}

} // namespace

RunConfig parse_config(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    allow_keys(doc, "config", {"domain", "sigma", "patch", "grid", "probe", "reconstruction",
                               "source", "seed", "output"});
    RunConfig cfg;
    if (doc.contains("domain")) parse_domain(doc.at("domain"), cfg.domain);
    if (doc.contains("sigma")) parse_sigma(doc.at("sigma"), cfg.sigma);
    if (doc.contains("patch")) parse_patch(doc.at("patch"), cfg.patch);
    if (doc.contains("grid")) parse_grid(doc.at("grid"), cfg.grid);
    if (doc.contains("probe")) parse_probe(doc.at("probe"), cfg.probe);
    if (doc.contains("reconstruction")) parse_reconstruction(doc.at("reconstruction"), cfg.reconstruction);
    if (doc.contains("source")) parse_source(doc.at("source"), cfg.source);
    read(doc, "seed", cfg.seed, "config");
    read(doc, "output", cfg.output, "config");
    cfg.hash = fnv1a(doc.dump());

    // Building the objects once surfaces semantic errors as config errors.
    try {
        ConvexDomain domain = cfg.make_domain();
        cfg.make_sigma();
        cfg.make_patch();
        if (domain.dimension() == 3 && cfg.grid.directions < 6) {
            fail("grid.directions too small for n = 3");
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) {
            throw;
        }
        fail(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        fail("cannot read config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

ConvexDomain RunConfig::make_domain() const
{
    if (domain.kind == "ball") {
        return ConvexDomain::ball(domain.radius, domain.center);
    }
    if (domain.kind == "ellipse") {
        return ConvexDomain::ellipse(domain.semi_x, domain.semi_y, domain.center);
    }
    return ConvexDomain::disk(domain.radius, domain.center);
}

AttenuationField RunConfig::make_sigma() const
{
    if (sigma.kind == "constant") {
        return AttenuationField::constant(sigma.value);
    }
    if (sigma.kind == "gaussian_blobs") {
        return AttenuationField::gaussian_blobs(sigma.background, sigma.blobs);
    }
    if (sigma.kind == "three_blob") {
        return three_blob_phantom();
    }
    if (sigma.kind == "grid") {
        return AttenuationField::grid(make_domain(), sigma.nodes, sigma.values);
    }
    return AttenuationField::zero_for_testing();
}

BoundaryPatch RunConfig::make_patch() const
{
    if (patch.full) {
        return BoundaryPatch::full();
    }
    if (domain.kind == "ball") {
        return BoundaryPatch::cap(patch.axis, patch.half_width);
    }
    return BoundaryPatch::arc(patch.center_angle, patch.half_width);
}

BoundaryData RunConfig::make_source(const ConvexDomain& dom) const
{
    double v = source.value;
    if (source.kind == "constant") {
        return BoundaryData::closed_form([v](const Vec&, const Vec&) { return v; }, std::abs(v));
    }
    // Smooth in position and vanishing at grazing incidence.
    ConvexDomain d = dom;
    return BoundaryData::closed_form(
        [v, d](const Vec& x, const Vec& theta) {
            Vec rel = x - d.center();
            double c = -dot(d.normal(x), theta);
            return c > 0.0 ? v * (1.0 + 0.5 * rel.x / d.diameter()) * c : 0.0;
        },
        std::abs(v) * 1.25);
}

ProbeOptions RunConfig::probe_options() const
{
    ProbeOptions o;
    o.grid_nodes = grid.spatial;
    o.directions = grid.directions;
    o.tol = probe.tol;
    o.scaling = probe.angular_scaling;
    return o;
}

} // namespace scatterscan
