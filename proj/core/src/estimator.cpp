#include "dtgnss/estimator.hpp"

#include "dtgnss/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace dtgnss {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

std::vector<Eigen::Vector3d> satellites_enu(const std::vector<SimulatedMeasurement>& meas,
                                            const GeodeticPoint& origin) {
    std::vector<Eigen::Vector3d> sats;
    sats.reserve(meas.size());
    for (const auto& m : meas) {
        sats.push_back(ecef_to_enu(m.sat_position, origin).vec());
    }
    return sats;
}

GeometrySystem assemble(const Eigen::Vector3d& position, double clock_bias,
                        const std::vector<Eigen::Vector3d>& sats,
                        const std::vector<SimulatedMeasurement>& meas) {
    const auto m = static_cast<Eigen::Index>(meas.size());
    GeometrySystem system;
    system.design.resize(m, 4);
    system.residual.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Eigen::Vector3d offset = sats[static_cast<std::size_t>(j)] - position;
        const double range = offset.norm();
        system.design.block<1, 3>(j, 0) = (offset / range).transpose();
        system.design(j, 3) = 1.0;
        system.residual(j) =
            meas[static_cast<std::size_t>(j)].pseudorange_m - (range + clock_bias);
    }
    return system;
}

PositionSolution iterate(const std::vector<SimulatedMeasurement>& meas,
                         const Eigen::VectorXd& weights,
                         const PositionSolution& init, const GeodeticPoint& origin,
                         const SolverOptions& options) {
    if (meas.size() < 4) {
        throw InsufficientSatellitesError(
            "need at least 4 measurements, got " + std::to_string(meas.size()));
    }
    const auto sats = satellites_enu(meas, origin);

    Eigen::Vector3d position = init.position.vec();
    double clock_bias = init.clock_bias_m;
    PositionSolution solution;
    solution.satellite_count = static_cast<int>(meas.size());

    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const GeometrySystem system = assemble(position, clock_bias, sats, meas);
        const Eigen::MatrixXd weighted = weights.asDiagonal() * system.design;
        const Eigen::Matrix4d normal = system.design.transpose() * weighted;
        const Eigen::Vector4d rhs = weighted.transpose() * system.residual;

        const Eigen::JacobiSVD<Eigen::Matrix4d> svd(normal, Eigen::ComputeFullU |
                                                                Eigen::ComputeFullV);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (!(smin > 0.0) || smax / smin > options.max_condition) {
            throw SingularGeometryError("normal matrix condition exceeds limit");
        }
        const Eigen::Vector4d update = svd.solve(rhs);

        // Design rows carry +unit vectors while the range derivative is the
        // negative unit vector, so the position increment enters negated.
        position -= update.head<3>();
        clock_bias += update(3);
        solution.iterations = iter;
        if (update.norm() <= options.tolerance_m) {
            solution.converged = true;
            break;
        }
    }

    solution.position = EnuPoint::from_vec(position);
    solution.clock_bias_m = clock_bias;
    return solution;
}

} // namespace

double predicted_pseudorange(const PositionSolution& state, const EcefPoint& sat,
                             const GeodeticPoint& origin) {
    const Eigen::Vector3d sat_enu = ecef_to_enu(sat, origin).vec();
    return (sat_enu - state.position.vec()).norm() + state.clock_bias_m;
}

GeometrySystem build_geometry_system(const PositionSolution& state,
                                     const std::vector<SimulatedMeasurement>& meas,
                                     const GeodeticPoint& origin) {
    if (meas.size() < 4) {
        throw InsufficientSatellitesError(
            "need at least 4 measurements, got " + std::to_string(meas.size()));
    }
    return assemble(state.position.vec(), state.clock_bias_m,
                    satellites_enu(meas, origin), meas);
}

PositionSolution solve_ols(const std::vector<SimulatedMeasurement>& meas,
                           const PositionSolution& init, const GeodeticPoint& origin,
                           const SolverOptions& options) {
    return iterate(meas, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(meas.size())),
                   init, origin, options);
}

PositionSolution solve_wls(const std::vector<SimulatedMeasurement>& meas,
                           const std::vector<double>& weights,
                           const PositionSolution& init, const GeodeticPoint& origin,
                           const SolverOptions& options) {
    if (weights.size() != meas.size()) {
        throw ValidationError("weight count must match measurement count");
    }
    Eigen::VectorXd w(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0)) {
            throw ValidationError("weights must be positive");
        }
        w(static_cast<Eigen::Index>(i)) = weights[i];
    }
    return iterate(meas, w, init, origin, options);
}

std::vector<double> elevation_weights(const std::vector<SimulatedMeasurement>& meas,
                                      const EnuPoint& receiver,
                                      const GeodeticPoint& origin, double floor_deg) {
    std::vector<double> weights;
    weights.reserve(meas.size());
    for (const auto& m : meas) {
        const auto [elevation, azimuth] = elevation_azimuth(m.sat_position, receiver, origin);
        const double clamped = std::max(elevation, floor_deg) * kDegToRad;
        weights.push_back(std::sin(clamped) * std::sin(clamped));
    }
    return weights;
}

PositionSolution default_init(const GridSpec& grid, const Terrain& terrain) {
    PositionSolution init;
    const double east = 0.5 * (grid.east_min + grid.east_max);
    const double north = 0.5 * (grid.north_min + grid.north_max);
    init.position = {east, north,
                     terrain_altitude(terrain, east, north) + grid.receiver_height_m};
    return init;
}

} // namespace dtgnss
