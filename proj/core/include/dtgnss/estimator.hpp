#pragma once

#include "dtgnss/geo.hpp"
#include "dtgnss/measurement.hpp"

#include <Eigen/Core>

#include <vector>

namespace dtgnss {

/// Estimated receiver state: local position plus clock bias in meters.
struct PositionSolution {
    EnuPoint position;
    double clock_bias_m = 0.0;
    int iterations = 0;
    bool converged = false;
    int satellite_count = 0;
};

/// Linearized system at the current state: design rows hold the unit
/// state-to-satellite vector and a trailing 1; residuals are measured minus
/// predicted pseudorange.
struct GeometrySystem {
    Eigen::MatrixXd design;   // m x 4
    Eigen::VectorXd residual; // m
};

struct SolverOptions {
    double tolerance_m = 1e-4;
    int max_iterations = 20;
    double max_condition = 1e12;
};

/// |sat - position| + clock bias.
double predicted_pseudorange(const PositionSolution& state, const EcefPoint& sat,
                             const GeodeticPoint& origin);

/// Throws InsufficientSatellitesError below 4 measurements.
GeometrySystem build_geometry_system(const PositionSolution& state,
                                     const std::vector<SimulatedMeasurement>& meas,
                                     const GeodeticPoint& origin);

/// Iterated least squares on the normal equations until the update norm drops
/// to tolerance or the iteration cap is reached. Throws
/// SingularGeometryError when the normal matrix condition exceeds the limit.
PositionSolution solve_ols(const std::vector<SimulatedMeasurement>& meas,
                           const PositionSolution& init, const GeodeticPoint& origin,
                           const SolverOptions& options = {});

/// Weighted variant: solves (G^T W G) dx = G^T W b with diagonal W.
/// Weights must be positive, one per measurement.
PositionSolution solve_wls(const std::vector<SimulatedMeasurement>& meas,
                           const std::vector<double>& weights,
                           const PositionSolution& init, const GeodeticPoint& origin,
                           const SolverOptions& options = {});

/// Default baseline weighting: w = sin^2(max(elevation, floor)).
std::vector<double> elevation_weights(const std::vector<SimulatedMeasurement>& meas,
                                      const EnuPoint& receiver,
                                      const GeodeticPoint& origin,
                                      double floor_deg = 5.0);

/// Grid-bounds centroid at receiver height, zero clock bias.
PositionSolution default_init(const GridSpec& grid, const Terrain& terrain);

} // namespace dtgnss
