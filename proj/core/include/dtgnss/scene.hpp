#pragma once

#include "dtgnss/geo.hpp"
#include "dtgnss/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dtgnss {

/// Extruded building: a simple counter-clockwise footprint in the horizontal
/// plane, raised from base altitude by height.
struct Building {
    int id = 0;
    double base_altitude_m = 0.0;
    double height_m = 0.0;
    std::vector<Eigen::Vector2d> footprint; // (east, north), CCW
};

struct RasterTerrain {
    Eigen::Vector2d origin = Eigen::Vector2d::Zero(); // (east, north) of node (0,0)
    double cell_size_m = 0.0;
    int rows = 0;
    int cols = 0;
    std::vector<double> values; // row-major, rows*cols altitudes
};

/// Ground altitude source: either a constant or a bilinear raster.
using Terrain = std::variant<double, RasterTerrain>;

/// Altitude at (east, north). Raster queries are bilinear, clamped to the
/// nearest node outside coverage.
double terrain_altitude(const Terrain& terrain, double east, double north);

/// The candidate-receiver lattice: half-open squares [e, e+res) x [n, n+res).
struct GridSpec {
    double east_min = 0.0;
    double east_max = 0.0;
    double north_min = 0.0;
    double north_max = 0.0;
    double resolution_m = 3.0;
    double receiver_height_m = 1.0;

    int cols() const;
    int rows() const;
};

struct CellIndex {
    int col = 0;
    int row = 0;

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct GridCell {
    CellIndex index;
    EnuPoint center;
};

/// The digital twin: buildings and terrain anchored to a local ENU frame,
/// with the candidate grid and the derived blocking/reflecting surfaces.
struct Scene {
    GeodeticPoint origin;
    std::vector<Building> buildings;
    Terrain terrain = 0.0;
    GridSpec grid;
    std::vector<SurfacePolygon> surfaces; // extruded walls + roof triangles
    std::uint32_t content_hash = 0;       // crc32 of the canonical serialization
};

/// Validates all invariants, extrudes wall and roof surfaces, and stamps the
/// content hash. Wall normals point outward from the footprint; roofs are
/// fan/ear triangles with +up normals. Floors are not generated.
Scene make_scene(const GeodeticPoint& origin, std::vector<Building> buildings,
                 Terrain terrain, const GridSpec& grid);

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

/// Canonical JSON serialization (stable key order); equal scenes serialize to
/// identical bytes.
std::string serialize_scene(const Scene& scene);
Scene parse_scene(const std::string& text);

/// Candidate cells over the grid bounds. Centers sit at cell midpoints with
/// up = terrain + receiver height; cells whose center lies strictly inside a
/// building footprint are excluded.
std::vector<GridCell> build_grid(const Scene& scene, const GridSpec& spec);

/// Index of the half-open cell square containing p (up ignored); nullopt when
/// p lies outside the tiled region.
std::optional<CellIndex> snap_to_cell(const EnuPoint& p, const GridSpec& spec);

EnuPoint cell_center(const CellIndex& index, const GridSpec& spec, const Terrain& terrain);

/// Strict 2D point-in-footprint test; boundary points count as outside.
bool point_in_footprint(const Eigen::Vector2d& p, const Building& building);

} // namespace dtgnss
