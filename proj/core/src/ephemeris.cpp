#include "dtgnss/ephemeris.hpp"

#include "dtgnss/errors.hpp"
#include "dtgnss/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dtgnss {

namespace {

constexpr double kMinSatNorm = 2.0e7;
constexpr double kMaxSatNorm = 5.0e7;
constexpr double kRadToDeg = 180.0 / M_PI;

void validate_record(const SatelliteEpoch& rec) {
    if (!(rec.epoch_s >= 0.0) || !(rec.epoch_s < kSecondsPerDay)) {
        throw ValidationError("ephemeris: epoch " + format_double(rec.epoch_s) +
                              " outside [0, 86400) for satellite " + rec.sat_id);
    }
    if (rec.sat_id.empty()) {
        throw ValidationError("ephemeris: empty satellite id");
    }
    const double norm = rec.position.vec().norm();
    if (!std::isfinite(norm) || norm < kMinSatNorm || norm > kMaxSatNorm) {
        throw ValidationError("ephemeris: satellite " + rec.sat_id + " at epoch " +
                              format_double(rec.epoch_s) + " has position norm " +
                              format_double(norm) + " outside [2.0e7, 5.0e7] m");
    }
}

} // namespace

std::vector<double> EphemerisTable::distinct_epochs() const {
    std::vector<double> epochs;
    for (const auto& rec : records) {
        if (epochs.empty() || rec.epoch_s != epochs.back()) {
            epochs.push_back(rec.epoch_s);
        }
    }
    return epochs;
}

EphemerisTable make_ephemeris(std::vector<SatelliteEpoch> records) {
    for (const auto& rec : records) {
        validate_record(rec);
    }
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.epoch_s, a.sat_id) < std::tie(b.epoch_s, b.sat_id);
    });
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].epoch_s == records[i - 1].epoch_s &&
            records[i].sat_id == records[i - 1].sat_id) {
            throw ValidationError("ephemeris: duplicate record for satellite " +
                                  records[i].sat_id + " at epoch " +
                                  format_double(records[i].epoch_s));
        }
    }

    EphemerisTable table;
    table.records = std::move(records);
    const auto epochs = table.distinct_epochs();
    double step = 0.0;
    for (std::size_t i = 1; i < epochs.size(); ++i) {
        const double gap = epochs[i] - epochs[i - 1];
        step = (i == 1) ? gap : std::min(step, gap);
    }
    table.epoch_step_s = step;
    table.content_hash = crc32_of(serialize_ephemeris(table));
    return table;
}

std::string serialize_ephemeris(const EphemerisTable& table) {
    std::string out = "epoch_s,sat_id,x_m,y_m,z_m\n";
    for (const auto& rec : table.records) {
        out += format_double(rec.epoch_s);
        out += ',';
        out += rec.sat_id;
        out += ',';
        out += format_fixed(rec.position.x, 6);
        out += ',';
        out += format_fixed(rec.position.y, 6);
        out += ',';
        out += format_fixed(rec.position.z, 6);
        out += '\n';
    }
    return out;
}

void save_ephemeris(const EphemerisTable& table, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_ephemeris(table));
}

EphemerisTable load_ephemeris(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("ephemeris: empty file " + path.string());
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != "epoch_s,sat_id,x_m,y_m,z_m") {
        throw ParseError("ephemeris: bad header '" + line + "' (expected "
                         "'epoch_s,sat_id,x_m,y_m,z_m')");
    }

    std::vector<SatelliteEpoch> records;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split(line, ',');
        if (fields.size() != 5) {
            throw ParseError("ephemeris: row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected 5");
        }
        const std::string ctx = "ephemeris row " + std::to_string(row);
        SatelliteEpoch rec;
        rec.epoch_s = parse_double(fields[0], ctx);
        rec.sat_id = fields[1];
        rec.position = {parse_double(fields[2], ctx), parse_double(fields[3], ctx),
                        parse_double(fields[4], ctx)};
        records.push_back(std::move(rec));
    }
    return make_ephemeris(std::move(records));
}

std::vector<SatelliteEpoch> satellites_at(const EphemerisTable& table, double epoch_s) {
    const auto epochs = table.distinct_epochs();
    if (epochs.empty()) {
        throw CoverageError("ephemeris: table is empty");
    }
    auto it = std::lower_bound(epochs.begin(), epochs.end(), epoch_s);
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_dist = std::numeric_limits<double>::infinity();
    if (it != epochs.end()) {
        best = *it;
        best_dist = std::abs(*it - epoch_s);
    }
    if (it != epochs.begin()) {
        const double prev = *std::prev(it);
        const double dist = std::abs(prev - epoch_s);
        if (dist <= best_dist) { // ties go to the earlier epoch
            best = prev;
            best_dist = dist;
        }
    }
    const double tolerance = table.epoch_step_s / 2.0 + 1e-9;
    if (!(best_dist <= tolerance)) {
        throw CoverageError("ephemeris: no tabulated epoch within " +
                            format_double(tolerance) + " s of " + format_double(epoch_s));
    }

    std::vector<SatelliteEpoch> out;
    for (const auto& rec : table.records) {
        if (rec.epoch_s == best) {
            out.push_back(rec);
        }
    }
    return out;
}

bool has_coverage(const EphemerisTable& table, double epoch_s) {
    try {
        satellites_at(table, epoch_s);
        return true;
    } catch (const CoverageError&) {
        return false;
    }
}

SlotIndex slot_of_epoch(double epoch_s, double slot_length_s) {
    if (!(slot_length_s > 0.0)) {
        throw ValidationError("slot length must be > 0");
    }
    if (!(epoch_s >= 0.0) || !(epoch_s < kSecondsPerDay)) {
        throw ValidationError("epoch " + format_double(epoch_s) + " outside [0, 86400)");
    }
    return SlotIndex{static_cast<int>(std::floor(epoch_s / slot_length_s)), slot_length_s};
}

std::pair<double, double> elevation_azimuth(const EcefPoint& sat,
                                            const EnuPoint& receiver,
                                            const GeodeticPoint& origin) {
    const Eigen::Vector3d v = ecef_to_enu(sat, origin).vec() - receiver.vec();
    const double horizontal = std::hypot(v.x(), v.y());
    const double elevation = std::atan2(v.z(), horizontal) * kRadToDeg;
    double azimuth = std::atan2(v.x(), v.y()) * kRadToDeg;
    if (azimuth < 0.0) {
        azimuth += 360.0;
    }
    if (azimuth >= 360.0) {
        azimuth -= 360.0;
    }
    return {elevation, azimuth};
}

} // namespace dtgnss
