#include "oracles.hpp"

#include <dtgnss/errors.hpp>
#include <dtgnss/estimator.hpp>
#include <dtgnss/synthetic.hpp>

#include <doctest.h>

#include <random>

using namespace dtgnss;

namespace {

const GeodeticPoint kOrigin{22.3, 114.18, 5.0};

/// Noise-free LOS measurements from explicit ENU satellite positions.
std::vector<SimulatedMeasurement> los_measurements(
    const std::vector<Eigen::Vector3d>& sats_enu, const Eigen::Vector3d& truth,
    double clock_bias = 0.0) {
    std::vector<SimulatedMeasurement> meas;
    for (std::size_t i = 0; i < sats_enu.size(); ++i) {
        SimulatedMeasurement m;
        m.sat_id = "S" + std::to_string(i < 9 ? 0 : i) + std::to_string((i + 1) % 10);
        m.sat_position = enu_to_ecef(EnuPoint::from_vec(sats_enu[i]), kOrigin);
        m.path.kind = PathKind::Los;
        m.path.range_m = (sats_enu[i] - truth).norm();
        m.pseudorange_m = m.path.range_m + clock_bias;
        meas.push_back(std::move(m));
    }
    return meas;
}

std::vector<Eigen::Vector3d> eight_sat_sky() {
    std::vector<Eigen::Vector3d> sats;
    for (int i = 0; i < 8; ++i) {
        const double az = i * M_PI / 4.0;
        const double el = (i % 2 == 0) ? 35.0 * M_PI / 180.0 : 65.0 * M_PI / 180.0;
        const double r = 2.4e7;
        sats.emplace_back(r * std::cos(el) * std::sin(az), r * std::cos(el) * std::cos(az),
                          r * std::sin(el));
    }
    return sats;
}

} // namespace

TEST_CASE("predicted_pseudorange adds the clock term") {
    PositionSolution state;
    state.position = {0.0, 0.0, 0.0};
    const EcefPoint sat = enu_to_ecef({2.0e7, 0.0, 0.0}, kOrigin);
    CHECK(predicted_pseudorange(state, sat, kOrigin) == doctest::Approx(2.0e7));
    state.clock_bias_m = 1000.0;
    CHECK(predicted_pseudorange(state, sat, kOrigin) == doctest::Approx(2.0e7 + 1000.0));

    // Arbitrary point: hand norm computation.
    state.position = {3.0, -4.0, 12.0};
    state.clock_bias_m = 7.5;
    const Eigen::Vector3d sat_enu(103.0, -4.0, 12.0);
    const double expected = 100.0 + 7.5;
    CHECK(predicted_pseudorange(state, enu_to_ecef(EnuPoint::from_vec(sat_enu), kOrigin),
                                kOrigin) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("build_geometry_system rows and residuals") {
    const Eigen::Vector3d truth(10.0, 20.0, 1.0);
    const auto sats = eight_sat_sky();
    const auto meas = los_measurements(sats, truth);

    PositionSolution at_truth;
    at_truth.position = EnuPoint::from_vec(truth);
    const GeometrySystem system = build_geometry_system(at_truth, meas, kOrigin);
    REQUIRE(system.design.rows() == 8);
    CHECK(system.residual.norm() < 1e-6); // zero residual at truth
    for (Eigen::Index j = 0; j < 8; ++j) {
        CHECK(system.design.block<1, 3>(j, 0).norm() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(system.design(j, 3) == 1.0);
    }

    // A satellite straight above gives the row (0, 0, 1, 1).
    const auto zenith =
        los_measurements({Eigen::Vector3d(10.0, 20.0, 2.0e7)}, truth);
    std::vector<SimulatedMeasurement> padded = meas;
    padded.push_back(zenith.front());
    const GeometrySystem with_zenith = build_geometry_system(at_truth, padded, kOrigin);
    CHECK(with_zenith.design(8, 0) == doctest::Approx(0.0).scale(1.0));
    CHECK(with_zenith.design(8, 1) == doctest::Approx(0.0).scale(1.0));
    CHECK(with_zenith.design(8, 2) == doctest::Approx(1.0));

    // Fewer than four measurements is an error.
    const std::vector<SimulatedMeasurement> three(meas.begin(), meas.begin() + 3);
    CHECK_THROWS_AS(build_geometry_system(at_truth, three, kOrigin),
                    InsufficientSatellitesError);
}

TEST_CASE("solve_ols recovers the exact solution from clean data") {
    const Eigen::Vector3d truth(15.0, -8.0, 2.0);
    const auto meas = los_measurements(eight_sat_sky(), truth);

    PositionSolution init; // frame origin
    const PositionSolution solution = solve_ols(meas, init, kOrigin);
    CHECK(solution.converged);
    CHECK(solution.satellite_count == 8);
    CHECK((solution.position.vec() - truth).norm() < 1e-6);
    CHECK(std::abs(solution.clock_bias_m) < 1e-6);
}

TEST_CASE("solve_ols recovers an injected clock bias") {
    const Eigen::Vector3d truth(15.0, -8.0, 2.0);
    const auto meas = los_measurements(eight_sat_sky(), truth, 3.0e5);
    const PositionSolution solution = solve_ols(meas, PositionSolution{}, kOrigin);
    CHECK(solution.converged);
    CHECK((solution.position.vec() - truth).norm() < 1e-6);
    CHECK(solution.clock_bias_m == doctest::Approx(3.0e5).epsilon(1e-12));
}

TEST_CASE("common-mode pseudorange shifts move only the clock") {
    const Eigen::Vector3d truth(15.0, -8.0, 2.0);
    auto meas = los_measurements(eight_sat_sky(), truth);
    const PositionSolution base = solve_ols(meas, PositionSolution{}, kOrigin);
    for (auto& m : meas) {
        m.pseudorange_m += 1234.5;
    }
    const PositionSolution shifted = solve_ols(meas, PositionSolution{}, kOrigin);
    CHECK((shifted.position.vec() - base.position.vec()).norm() < 1e-6);
    CHECK(shifted.clock_bias_m - base.clock_bias_m == doctest::Approx(1234.5).epsilon(1e-9));
}

TEST_CASE("solve_ols converges from far-off initializations") {
    const Eigen::Vector3d truth(15.0, -8.0, 2.0);
    const auto meas = los_measurements(eight_sat_sky(), truth);
    std::mt19937_64 rng(80);
    std::uniform_real_distribution<double> offset(-1e5, 1e5);
    for (int i = 0; i < 25; ++i) {
        PositionSolution init;
        init.position = EnuPoint::from_vec(
            truth + Eigen::Vector3d(offset(rng), offset(rng), offset(rng)));
        const PositionSolution solution = solve_ols(meas, init, kOrigin);
        CHECK(solution.converged);
        CHECK((solution.position.vec() - truth).norm() < 1e-6);
    }
}

TEST_CASE("residual orthogonality at convergence") {
    const Eigen::Vector3d truth(25.0, 4.0, 1.5);
    auto meas = los_measurements(eight_sat_sky(), truth);
    // Bias two satellites to force a nonzero residual vector.
    meas[1].pseudorange_m += 25.0;
    meas[5].pseudorange_m += 40.0;
    const PositionSolution solution = solve_ols(meas, PositionSolution{}, kOrigin);
    CHECK(solution.converged);
    const GeometrySystem final_system = build_geometry_system(solution, meas, kOrigin);
    const double gate = 1e-6 * (1.0 + final_system.residual.norm());
    CHECK((final_system.design.transpose() * final_system.residual).norm() <= gate);
}

TEST_CASE("solve_ols matches the independent Gauss-Newton oracle on biased data") {
    const Eigen::Vector3d truth(12.0, 7.0, 1.0);
    auto meas = los_measurements(eight_sat_sky(), truth);
    // NLOS-style delays on three satellites.
    meas[0].pseudorange_m += 18.0;
    meas[3].pseudorange_m += 33.0;
    meas[6].pseudorange_m += 9.0;

    const std::vector<double> unit_weights(meas.size(), 1.0);
    const PositionSolution ours = solve_ols(meas, PositionSolution{}, kOrigin);
    const PositionSolution reference =
        oracle::gauss_newton_reference(meas, unit_weights, PositionSolution{}, kOrigin);
    CHECK(ours.converged);
    CHECK(reference.converged);
    CHECK((ours.position.vec() - reference.position.vec()).norm() < 1e-4);
    CHECK(std::abs(ours.clock_bias_m - reference.clock_bias_m) < 1e-4);
}

TEST_CASE("solve_wls with unit weights equals solve_ols") {
    const Eigen::Vector3d truth(12.0, 7.0, 1.0);
    auto meas = los_measurements(eight_sat_sky(), truth);
    meas[2].pseudorange_m += 21.0;
    const std::vector<double> ones(meas.size(), 1.0);
    const PositionSolution ols = solve_ols(meas, PositionSolution{}, kOrigin);
    const PositionSolution wls = solve_wls(meas, ones, PositionSolution{}, kOrigin);
    CHECK((ols.position.vec() - wls.position.vec()).norm() < 1e-9);
    CHECK(std::abs(ols.clock_bias_m - wls.clock_bias_m) < 1e-9);
}

TEST_CASE("downweighting the biased satellite shrinks the 2D error") {
    const Eigen::Vector3d truth(12.0, 7.0, 1.0);
    auto meas = los_measurements(eight_sat_sky(), truth);
    meas[4].pseudorange_m += 45.0; // one NLOS satellite

    std::vector<double> weights(meas.size(), 1.0);
    const PositionSolution equal = solve_wls(meas, weights, PositionSolution{}, kOrigin);
    weights[4] = 1e-6;
    const PositionSolution down = solve_wls(meas, weights, PositionSolution{}, kOrigin);

    const double err_equal = (equal.position.vec().head<2>() - truth.head<2>()).norm();
    const double err_down = (down.position.vec().head<2>() - truth.head<2>()).norm();
    CHECK(err_down < err_equal);
    CHECK(err_down < 1e-3); // effectively removes the outlier

    // The weighted solve matches a weighted reference oracle.
    const PositionSolution reference =
        oracle::gauss_newton_reference(meas, weights, PositionSolution{}, kOrigin);
    CHECK((down.position.vec() - reference.position.vec()).norm() < 1e-4);
}

TEST_CASE("solver error paths") {
    const Eigen::Vector3d truth(0.0, 0.0, 1.0);
    auto meas = los_measurements(eight_sat_sky(), truth);

    std::vector<double> bad_weights(meas.size(), 1.0);
    bad_weights[0] = 0.0;
    CHECK_THROWS_AS(solve_wls(meas, bad_weights, PositionSolution{}, kOrigin),
                    ValidationError);
    std::vector<double> short_weights(meas.size() - 1, 1.0);
    CHECK_THROWS_AS(solve_wls(meas, short_weights, PositionSolution{}, kOrigin),
                    ValidationError);

    const std::vector<SimulatedMeasurement> three(meas.begin(), meas.begin() + 3);
    CHECK_THROWS_AS(solve_ols(three, PositionSolution{}, kOrigin),
                    InsufficientSatellitesError);

    // Degenerate geometry: all satellites in one direction.
    std::vector<Eigen::Vector3d> collinear(6, Eigen::Vector3d(2.4e7, 0.0, 1.0e7));
    for (int i = 0; i < 6; ++i) {
        collinear[static_cast<std::size_t>(i)] += Eigen::Vector3d(0.0, 0.0, i * 0.01);
    }
    const auto degenerate = los_measurements(collinear, truth);
    CHECK_THROWS_AS(solve_ols(degenerate, PositionSolution{}, kOrigin),
                    SingularGeometryError);
}

TEST_CASE("elevation weights follow sin^2 with a 5 degree floor") {
    const Eigen::Vector3d truth(0.0, 0.0, 1.0);
    std::vector<Eigen::Vector3d> sats = {
        {0.0, 0.0, 2.4e7},          // zenith
        {2.4e7, 0.0, 0.0},          // horizon
        {0.0, 2.4e7 * std::cos(M_PI / 6), 2.4e7 * std::sin(M_PI / 6)}, // 30 deg
        {0.0, -2.4e7, 2.4e7},
    };
    const auto meas = los_measurements(sats, truth);
    const auto weights =
        elevation_weights(meas, EnuPoint::from_vec(truth), kOrigin);
    REQUIRE(weights.size() == 4);
    CHECK(weights[0] == doctest::Approx(1.0).epsilon(1e-6));
    const double floor_w = std::pow(std::sin(5.0 * M_PI / 180.0), 2);
    CHECK(weights[1] == doctest::Approx(floor_w).epsilon(1e-6));
    CHECK(weights[2] == doctest::Approx(0.25).epsilon(1e-4));
}

TEST_CASE("default init sits at the grid centroid at receiver height") {
    GridSpec grid{0.0, 120.0, -60.0, 60.0};
    const PositionSolution init = default_init(grid, Terrain{7.0});
    CHECK(init.position.east == doctest::Approx(60.0));
    CHECK(init.position.north == doctest::Approx(0.0).scale(1.0));
    CHECK(init.position.up == doctest::Approx(8.0));
    CHECK(init.clock_bias_m == 0.0);
}
