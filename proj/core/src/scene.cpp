#include "dtgnss/scene.hpp"

#include "dtgnss/errors.hpp"
#include "dtgnss/io_util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dtgnss {

namespace {

using ordered_json = nlohmann::ordered_json;

double signed_area(const std::vector<Eigen::Vector2d>& poly) {
    double acc = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        acc += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * acc;
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
}

/// Proper or improper intersection of closed segments [a,b] and [c,d].
bool segments_intersect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                        const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
    const double d1 = cross2(b - a, c - a);
    const double d2 = cross2(b - a, d - a);
    const double d3 = cross2(d - c, a - c);
    const double d4 = cross2(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    auto on_segment = [](const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                         const Eigen::Vector2d& r) {
        return std::abs(cross2(q - p, r - p)) < 1e-12 &&
               r.x() >= std::min(p.x(), q.x()) - 1e-12 &&
               r.x() <= std::max(p.x(), q.x()) + 1e-12 &&
               r.y() >= std::min(p.y(), q.y()) - 1e-12 &&
               r.y() <= std::max(p.y(), q.y()) + 1e-12;
    };
    return on_segment(a, b, c) || on_segment(a, b, d) ||
           on_segment(c, d, a) || on_segment(c, d, b);
}

void validate_building(const Building& b) {
    const std::string tag = "building " + std::to_string(b.id);
    if (b.footprint.size() < 3) {
        throw ValidationError(tag + ": footprint needs at least 3 vertices");
    }
    if (!(b.height_m > 0.0) || !std::isfinite(b.height_m) ||
        !std::isfinite(b.base_altitude_m)) {
        throw ValidationError(tag + ": height must be positive and finite");
    }
    for (const auto& v : b.footprint) {
        if (!std::isfinite(v.x()) || !std::isfinite(v.y())) {
            throw ValidationError(tag + ": non-finite footprint vertex");
        }
    }
    const std::size_t n = b.footprint.size();
    for (std::size_t i = 0; i < n; ++i) {
        if ((b.footprint[(i + 1) % n] - b.footprint[i]).norm() < 1e-9) {
            throw ValidationError(tag + ": repeated footprint vertex");
        }
    }
    // Simple polygon: non-adjacent edges must not touch.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) {
                continue;
            }
            if (segments_intersect(b.footprint[i], b.footprint[(i + 1) % n],
                                   b.footprint[j], b.footprint[(j + 1) % n])) {
                throw ValidationError(tag + ": footprint self-intersects");
            }
        }
    }
    if (signed_area(b.footprint) <= 0.0) {
        throw ValidationError(tag + ": footprint must wind counter-clockwise");
    }
}

void validate_terrain(const Terrain& t) {
    if (const auto* c = std::get_if<double>(&t)) {
        if (!std::isfinite(*c)) {
            throw ValidationError("terrain: non-finite constant altitude");
        }
        return;
    }
    const auto& r = std::get<RasterTerrain>(t);
    if (!(r.cell_size_m > 0.0)) {
        throw ValidationError("terrain raster: cell size must be > 0");
    }
    if (r.rows < 1 || r.cols < 1 ||
        r.values.size() != static_cast<std::size_t>(r.rows) * r.cols) {
        throw ValidationError("terrain raster: values length must equal rows*cols");
    }
    for (double v : r.values) {
        if (!std::isfinite(v)) {
            throw ValidationError("terrain raster: non-finite altitude");
        }
    }
}

void validate_grid(const GridSpec& g) {
    if (!(g.east_max > g.east_min) || !(g.north_max > g.north_min)) {
        throw ValidationError("grid: bounds are degenerate");
    }
    if (!(g.resolution_m > 0.0)) {
        throw ValidationError("grid: resolution must be > 0");
    }
    if (!std::isfinite(g.receiver_height_m)) {
        throw ValidationError("grid: receiver height must be finite");
    }
}

/// Ear-clipping triangulation of a simple CCW polygon. Convex footprints
/// reduce to a fan; the triangles feed convex SurfacePolygons.
std::vector<std::array<int, 3>> triangulate(const std::vector<Eigen::Vector2d>& poly) {
    std::vector<int> idx(poly.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::array<int, 3>> triangles;

    auto inside_triangle = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                              const Eigen::Vector2d& c, const Eigen::Vector2d& p) {
        const double d1 = cross2(b - a, p - a);
        const double d2 = cross2(c - b, p - b);
        const double d3 = cross2(a - c, p - c);
        return d1 > 1e-12 && d2 > 1e-12 && d3 > 1e-12;
    };

    while (idx.size() > 3) {
        bool clipped = false;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const int ia = idx[(i + idx.size() - 1) % idx.size()];
            const int ib = idx[i];
            const int ic = idx[(i + 1) % idx.size()];
            const auto& a = poly[ia];
            const auto& b = poly[ib];
            const auto& c = poly[ic];
            if (cross2(b - a, c - b) <= 1e-12) {
                continue; // reflex corner
            }
            bool ear = true;
            for (int other : idx) {
                if (other == ia || other == ib || other == ic) {
                    continue;
                }
                if (inside_triangle(a, b, c, poly[other])) {
                    ear = false;
                    break;
                }
            }
            if (ear) {
                triangles.push_back({ia, ib, ic});
                idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(i));
                clipped = true;
                break;
            }
        }
        if (!clipped) {
            throw ValidationError("footprint triangulation failed (degenerate polygon)");
        }
    }
    triangles.push_back({idx[0], idx[1], idx[2]});
    return triangles;
}

bool footprint_is_convex(const std::vector<Eigen::Vector2d>& poly) {
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        const auto& c = poly[(i + 2) % n];
        if (cross2(b - a, c - b) < -1e-12) {
            return false;
        }
    }
    return true;
}

std::vector<SurfacePolygon> extrude_surfaces(const std::vector<Building>& buildings) {
    std::vector<SurfacePolygon> surfaces;
    int next_id = 0;
    for (const auto& b : buildings) {
        const double z0 = b.base_altitude_m;
        const double z1 = b.base_altitude_m + b.height_m;
        const std::size_t n = b.footprint.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& p = b.footprint[i];
            const auto& q = b.footprint[(i + 1) % n];
            // CCW footprint: (base i, base i+1, top i+1, top i) winds so the
            // Newell normal points outward.
            surfaces.push_back(make_surface_polygon(
                {EnuPoint{p.x(), p.y(), z0}, EnuPoint{q.x(), q.y(), z0},
                 EnuPoint{q.x(), q.y(), z1}, EnuPoint{p.x(), p.y(), z1}},
                next_id++));
        }
        // One roof polygon when the footprint is convex; ear-clipped
        // triangles otherwise, keeping every surface convex.
        if (footprint_is_convex(b.footprint)) {
            std::vector<EnuPoint> roof;
            roof.reserve(n);
            for (const auto& v : b.footprint) {
                roof.push_back({v.x(), v.y(), z1});
            }
            surfaces.push_back(make_surface_polygon(std::move(roof), next_id++));
        } else {
            for (const auto& tri : triangulate(b.footprint)) {
                surfaces.push_back(make_surface_polygon(
                    {EnuPoint{b.footprint[tri[0]].x(), b.footprint[tri[0]].y(), z1},
                     EnuPoint{b.footprint[tri[1]].x(), b.footprint[tri[1]].y(), z1},
                     EnuPoint{b.footprint[tri[2]].x(), b.footprint[tri[2]].y(), z1}},
                    next_id++));
            }
        }
    }
    return surfaces;
}

void require_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
                return key == k;
            }) == allowed.end()) {
            throw ParseError("scene: unknown field '" + key + "' in " + where);
        }
    }
}

double number_at(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) {
        throw ParseError("scene: missing field '" + std::string(key) + "' in " + where);
    }
    if (!obj[key].is_number()) {
        throw ParseError("scene: field '" + std::string(key) + "' in " + where +
                         " must be a number");
    }
    return obj[key].get<double>();
}

} // namespace

double terrain_altitude(const Terrain& terrain, double east, double north) {
    if (const auto* c = std::get_if<double>(&terrain)) {
        return *c;
    }
    const auto& r = std::get<RasterTerrain>(terrain);
    auto node = [&](int row, int col) {
        return r.values[static_cast<std::size_t>(row) * r.cols + col];
    };
    double u = (east - r.origin.x()) / r.cell_size_m;
    double v = (north - r.origin.y()) / r.cell_size_m;
    u = std::clamp(u, 0.0, static_cast<double>(r.cols - 1));
    v = std::clamp(v, 0.0, static_cast<double>(r.rows - 1));
    const int c0 = std::min(static_cast<int>(std::floor(u)), r.cols - 2 >= 0 ? r.cols - 2 : 0);
    const int r0 = std::min(static_cast<int>(std::floor(v)), r.rows - 2 >= 0 ? r.rows - 2 : 0);
    if (r.cols == 1 && r.rows == 1) {
        return node(0, 0);
    }
    const int c1 = std::min(c0 + 1, r.cols - 1);
    const int r1 = std::min(r0 + 1, r.rows - 1);
    const double fu = u - c0;
    const double fv = v - r0;
    const double bottom = node(r0, c0) * (1.0 - fu) + node(r0, c1) * fu;
    const double top = node(r1, c0) * (1.0 - fu) + node(r1, c1) * fu;
    return bottom * (1.0 - fv) + top * fv;
}

int GridSpec::cols() const {
    return static_cast<int>(std::ceil((east_max - east_min) / resolution_m - 1e-12));
}

int GridSpec::rows() const {
    return static_cast<int>(std::ceil((north_max - north_min) / resolution_m - 1e-12));
}

Scene make_scene(const GeodeticPoint& origin, std::vector<Building> buildings,
                 Terrain terrain, const GridSpec& grid) {
    validate(origin);
    for (const auto& b : buildings) {
        validate_building(b);
    }
    validate_terrain(terrain);
    validate_grid(grid);

    Scene scene;
    scene.origin = origin;
    scene.buildings = std::move(buildings);
    scene.terrain = std::move(terrain);
    scene.grid = grid;
    scene.surfaces = extrude_surfaces(scene.buildings);
    scene.content_hash = crc32_of(serialize_scene(scene));
    return scene;
}

std::string serialize_scene(const Scene& scene) {
    ordered_json j;
    j["origin"] = {{"lat", scene.origin.latitude_deg},
                   {"lon", scene.origin.longitude_deg},
                   {"height", scene.origin.height_m}};
    if (const auto* c = std::get_if<double>(&scene.terrain)) {
        j["terrain"] = {{"constant", *c}};
    } else {
        const auto& r = std::get<RasterTerrain>(scene.terrain);
        j["terrain"] = {{"raster",
                         {{"origin", {r.origin.x(), r.origin.y()}},
                          {"cell_size", r.cell_size_m},
                          {"rows", r.rows},
                          {"cols", r.cols},
                          {"values", r.values}}}};
    }
    j["buildings"] = ordered_json::array();
    for (const auto& b : scene.buildings) {
        ordered_json fp = ordered_json::array();
        for (const auto& v : b.footprint) {
            fp.push_back({v.x(), v.y()});
        }
        j["buildings"].push_back({{"id", b.id},
                                  {"base_alt", b.base_altitude_m},
                                  {"height", b.height_m},
                                  {"footprint", std::move(fp)}});
    }
    j["grid"] = {{"east", {scene.grid.east_min, scene.grid.east_max}},
                 {"north", {scene.grid.north_min, scene.grid.north_max}},
                 {"resolution", scene.grid.resolution_m},
                 {"receiver_height", scene.grid.receiver_height_m}};
    return j.dump(2) + "\n";
}

Scene parse_scene(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("scene: ") + e.what());
    }
    if (!j.is_object()) {
        throw ParseError("scene: top level must be an object");
    }
    require_keys(j, {"origin", "terrain", "buildings", "grid"}, "scene");
    for (const char* key : {"origin", "terrain", "buildings", "grid"}) {
        if (!j.contains(key)) {
            throw ParseError("scene: missing field '" + std::string(key) + "'");
        }
    }

    const auto& jo = j["origin"];
    require_keys(jo, {"lat", "lon", "height"}, "origin");
    GeodeticPoint origin{number_at(jo, "lat", "origin"), number_at(jo, "lon", "origin"),
                         number_at(jo, "height", "origin")};

    Terrain terrain = 0.0;
    const auto& jt = j["terrain"];
    require_keys(jt, {"constant", "raster"}, "terrain");
    if (jt.contains("constant") == jt.contains("raster")) {
        throw ParseError("scene: terrain must have exactly one of 'constant'/'raster'");
    }
    if (jt.contains("constant")) {
        terrain = number_at(jt, "constant", "terrain");
    } else {
        const auto& jr = jt["raster"];
        require_keys(jr, {"origin", "cell_size", "rows", "cols", "values"}, "terrain.raster");
        RasterTerrain raster;
        if (!jr.contains("origin") || !jr["origin"].is_array() || jr["origin"].size() != 2) {
            throw ParseError("scene: terrain.raster.origin must be [east, north]");
        }
        raster.origin = {jr["origin"][0].get<double>(), jr["origin"][1].get<double>()};
        raster.cell_size_m = number_at(jr, "cell_size", "terrain.raster");
        raster.rows = static_cast<int>(number_at(jr, "rows", "terrain.raster"));
        raster.cols = static_cast<int>(number_at(jr, "cols", "terrain.raster"));
        if (!jr.contains("values") || !jr["values"].is_array()) {
            throw ParseError("scene: terrain.raster.values must be an array");
        }
        for (const auto& v : jr["values"]) {
            raster.values.push_back(v.get<double>());
        }
        terrain = std::move(raster);
    }

    std::vector<Building> buildings;
    if (!j["buildings"].is_array()) {
        throw ParseError("scene: buildings must be an array");
    }
    for (const auto& jb : j["buildings"]) {
        require_keys(jb, {"id", "base_alt", "height", "footprint"}, "building");
        Building b;
        b.id = static_cast<int>(number_at(jb, "id", "building"));
        b.base_altitude_m = number_at(jb, "base_alt", "building");
        b.height_m = number_at(jb, "height", "building");
        if (!jb.contains("footprint") || !jb["footprint"].is_array()) {
            throw ParseError("scene: building footprint must be an array");
        }
        for (const auto& jv : jb["footprint"]) {
            if (!jv.is_array() || jv.size() != 2) {
                throw ParseError("scene: footprint vertex must be [east, north]");
            }
            b.footprint.emplace_back(jv[0].get<double>(), jv[1].get<double>());
        }
        buildings.push_back(std::move(b));
    }

    const auto& jg = j["grid"];
    require_keys(jg, {"east", "north", "resolution", "receiver_height"}, "grid");
    GridSpec grid;
    for (const char* key : {"east", "north"}) {
        if (!jg.contains(key) || !jg[key].is_array() || jg[key].size() != 2) {
            throw ParseError("scene: grid." + std::string(key) + " must be [min, max]");
        }
    }
    grid.east_min = jg["east"][0].get<double>();
    grid.east_max = jg["east"][1].get<double>();
    grid.north_min = jg["north"][0].get<double>();
    grid.north_max = jg["north"][1].get<double>();
    if (jg.contains("resolution")) {
        grid.resolution_m = number_at(jg, "resolution", "grid");
    }
    if (jg.contains("receiver_height")) {
        grid.receiver_height_m = number_at(jg, "receiver_height", "grid");
    }

    return make_scene(origin, std::move(buildings), std::move(terrain), grid);
}

Scene load_scene(const std::filesystem::path& path) {
    return parse_scene(read_file(path));
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_scene(scene));
}

bool point_in_footprint(const Eigen::Vector2d& p, const Building& building) {
    const auto& poly = building.footprint;
    const std::size_t n = poly.size();
    // Boundary points count as outside (strict interior test).
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % n];
        const Eigen::Vector2d ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
        if ((a + t * ab - p).norm() < 1e-9) {
            return false;
        }
    }
    bool inside = false;
    for (std::size_t i = 0, jprev = n - 1; i < n; jprev = i++) {
        const auto& a = poly[i];
        const auto& b = poly[jprev];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
            inside = !inside;
        }
    }
    return inside;
}

EnuPoint cell_center(const CellIndex& index, const GridSpec& spec, const Terrain& terrain) {
    const double east = spec.east_min + (index.col + 0.5) * spec.resolution_m;
    const double north = spec.north_min + (index.row + 0.5) * spec.resolution_m;
    return {east, north, terrain_altitude(terrain, east, north) + spec.receiver_height_m};
}

std::vector<GridCell> build_grid(const Scene& scene, const GridSpec& spec) {
    std::vector<GridCell> cells;
    cells.reserve(static_cast<std::size_t>(spec.cols()) * spec.rows());
    for (int row = 0; row < spec.rows(); ++row) {
        for (int col = 0; col < spec.cols(); ++col) {
            const CellIndex index{col, row};
            const EnuPoint center = cell_center(index, spec, scene.terrain);
            const Eigen::Vector2d horizontal{center.east, center.north};
            const bool occupied =
                std::any_of(scene.buildings.begin(), scene.buildings.end(),
                            [&](const Building& b) {
                                return point_in_footprint(horizontal, b);
                            });
            if (!occupied) {
                cells.push_back({index, center});
            }
        }
    }
    return cells;
}

std::optional<CellIndex> snap_to_cell(const EnuPoint& p, const GridSpec& spec) {
    const int col = static_cast<int>(std::floor((p.east - spec.east_min) / spec.resolution_m));
    const int row = static_cast<int>(std::floor((p.north - spec.north_min) / spec.resolution_m));
    if (col < 0 || col >= spec.cols() || row < 0 || row >= spec.rows()) {
        return std::nullopt;
    }
    return CellIndex{col, row};
}

} // namespace dtgnss
