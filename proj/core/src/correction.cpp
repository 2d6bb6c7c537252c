#include "dtgnss/correction.hpp"

#include "dtgnss/errors.hpp"
#include "dtgnss/io_util.hpp"
#include "dtgnss/version.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace dtgnss {

namespace {

constexpr int kFormatVersion = 1;

} // namespace

std::vector<double> slot_sample_epochs(const SlotIndex& slot, double step_s) {
    if (!(step_s > 0.0)) {
        throw ValidationError("epoch sampling step must be > 0");
    }
    const double ratio = slot.slot_length_s / step_s;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 || rounded < 1.0) {
        throw ValidationError("step must divide the slot length");
    }
    std::vector<double> epochs;
    const auto count = static_cast<int>(rounded);
    epochs.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        epochs.push_back(slot.slot * slot.slot_length_s + i * step_s);
    }
    return epochs;
}

std::vector<SlotIndex> covered_slots(const EphemerisTable& table,
                                     double slot_length_s, double step_s) {
    std::vector<SlotIndex> slots;
    if (table.records.empty()) {
        return slots;
    }
    const auto epochs = table.distinct_epochs();
    const int first_slot = slot_of_epoch(epochs.front(), slot_length_s).slot;
    const int last_slot = slot_of_epoch(epochs.back(), slot_length_s).slot;
    for (int s = first_slot; s <= last_slot; ++s) {
        const SlotIndex slot{s, slot_length_s};
        const auto samples = slot_sample_epochs(slot, step_s);
        if (std::all_of(samples.begin(), samples.end(), [&](double epoch) {
                return has_coverage(table, epoch);
            })) {
            slots.push_back(slot);
        }
    }
    return slots;
}

const CorrectionEntry* CorrectionDatabase::find(int slot, const CellIndex& cell) const {
    const auto it = entries.find({slot, cell.col, cell.row});
    return it == entries.end() ? nullptr : &it->second;
}

SlotSimulation simulate_slot_solutions(const Scene& scene,
                                       const std::vector<GridCell>& cells,
                                       const EphemerisTable& table,
                                       const SlotIndex& slot, double step_s) {
    const auto epochs = slot_sample_epochs(slot, step_s);
    const NoiseModel noise_free{};
    const PositionSolution init = default_init(scene.grid, scene.terrain);

    SlotSimulation result;
    for (const double epoch : epochs) {
        const auto sats = satellites_at(table, epoch); // CoverageError propagates
        for (const auto& cell : cells) {
            const auto meas = simulate_cell_epoch(cell, sats, scene, noise_free);
            if (meas.size() < 4) {
                ++result.skipped;
                continue;
            }
            PositionSolution solution;
            try {
                solution = solve_ols(meas, init, scene.origin);
            } catch (const SolverError&) {
                ++result.skipped;
                continue;
            }
            if (!solution.converged) {
                ++result.skipped;
                continue;
            }
            SimulatedFix fix;
            fix.origin_cell = cell.index;
            fix.epoch_s = epoch;
            fix.solution = solution.position;
            fix.bias = solution.position.vec() - cell.center.vec();
            fix.converged = true;
            result.fixes.push_back(std::move(fix));
        }
    }
    return result;
}

SlotAccumulation accumulate_corrections(const std::vector<SimulatedFix>& fixes,
                                        const GridSpec& grid, const SlotIndex& slot) {
    struct Group {
        Eigen::Vector3d bias_sum = Eigen::Vector3d::Zero();
        std::vector<CellIndex> contributors;
    };
    std::map<std::pair<int, int>, Group> groups; // (col, row), ordered

    SlotAccumulation result;
    for (const auto& fix : fixes) {
        const auto cell = snap_to_cell(fix.solution, grid);
        if (!cell) {
            ++result.dropped_outside;
            continue;
        }
        auto& group = groups[{cell->col, cell->row}];
        group.bias_sum += fix.bias;
        group.contributors.push_back(fix.origin_cell);
    }

    for (auto& [key, group] : groups) {
        CorrectionEntry entry;
        entry.result_cell = {key.first, key.second};
        entry.slot = slot;
        entry.support = static_cast<int>(group.contributors.size());
        entry.correction = -group.bias_sum / static_cast<double>(entry.support);
        entry.contributors = std::move(group.contributors);
        result.entries.push_back(std::move(entry));
    }
    return result;
}

CorrectionDatabase build_database(const Scene& scene, const GridSpec& grid,
                                  const EphemerisTable& table,
                                  double slot_length_s, double step_s,
                                  unsigned threads) {
    if (table.records.empty()) {
        throw CoverageError("ephemeris table is empty");
    }
    const auto cells = build_grid(scene, grid);
    const auto slots = covered_slots(table, slot_length_s, step_s);

    CorrectionDatabase db;
    db.grid = grid;
    db.slot_length_s = slot_length_s;
    db.step_s = step_s;
    db.scene_hash = scene.content_hash;
    db.ephemeris_hash = table.content_hash;
    db.tool_version = std::string(kToolVersion);
    db.stats.cell_count = static_cast<long>(cells.size());
    db.stats.epochs_per_slot = static_cast<int>(std::round(slot_length_s / step_s));

    struct SlotResult {
        SlotAccumulation accumulation;
        long skipped = 0;
    };
    auto process = [&](const SlotIndex& slot) {
        SlotResult r;
        auto sim = simulate_slot_solutions(scene, cells, table, slot, step_s);
        r.skipped = sim.skipped;
        r.accumulation = accumulate_corrections(sim.fixes, grid, slot);
        return r;
    };

    const unsigned worker_count =
        threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    std::vector<SlotResult> results(slots.size());
    if (worker_count <= 1 || slots.size() <= 1) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            results[i] = process(slots[i]);
        }
    } else {
        // Slot-parallel build; merging in slot order keeps output deterministic.
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= slots.size()) {
                    return;
                }
                results[i] = process(slots[i]);
            }
        };
        std::vector<std::thread> pool;
        const unsigned pool_size =
            std::min<unsigned>(worker_count, static_cast<unsigned>(slots.size()));
        pool.reserve(pool_size);
        for (unsigned i = 0; i < pool_size; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& thread : pool) {
            thread.join();
        }
    }

    for (std::size_t i = 0; i < slots.size(); ++i) {
        ++db.stats.slots_processed;
        db.stats.skipped += results[i].skipped;
        db.stats.dropped_outside += results[i].accumulation.dropped_outside;
        for (auto& entry : results[i].accumulation.entries) {
            db.stats.contributing += entry.support;
            db.entries.emplace(
                std::tuple{slots[i].slot, entry.result_cell.col, entry.result_cell.row},
                std::move(entry));
        }
    }
    return db;
}

CorrectionResult correct_position(const EnuPoint& measured, double epoch_s,
                                  const CorrectionDatabase& db) {
    CorrectionResult result{measured, false, nullptr};
    const auto cell = snap_to_cell(measured, db.grid);
    if (!cell) {
        return result;
    }
    const int slot = slot_of_epoch(epoch_s, db.slot_length_s).slot;
    const CorrectionEntry* entry = db.find(slot, *cell);
    if (!entry) {
        return result;
    }
    result.corrected = EnuPoint::from_vec(measured.vec() + entry->correction);
    result.applied = true;
    result.entry = entry;
    return result;
}

std::string serialize_database(const CorrectionDatabase& db) {
    std::string out;
    out += "dtgnss-correction-db " + std::to_string(kFormatVersion) + "\n";
    out += "tool_version " + db.tool_version + "\n";
    out += "scene_hash " + format_hash(db.scene_hash) + "\n";
    out += "ephemeris_hash " + format_hash(db.ephemeris_hash) + "\n";
    out += "grid " + format_double(db.grid.east_min) + " " + format_double(db.grid.east_max) +
           " " + format_double(db.grid.north_min) + " " + format_double(db.grid.north_max) +
           " " + format_double(db.grid.resolution_m) + " " +
           format_double(db.grid.receiver_height_m) + "\n";
    out += "slot_length " + format_double(db.slot_length_s) + "\n";
    out += "step " + format_double(db.step_s) + "\n";
    out += "entries " + std::to_string(db.entries.size()) + "\n";
    for (const auto& [key, entry] : db.entries) {
        out += std::to_string(std::get<0>(key));
        out += ' ';
        out += std::to_string(std::get<1>(key));
        out += ' ';
        out += std::to_string(std::get<2>(key));
        out += ' ';
        out += format_fixed(entry.correction.x(), 6);
        out += ' ';
        out += format_fixed(entry.correction.y(), 6);
        out += ' ';
        out += format_fixed(entry.correction.z(), 6);
        out += ' ';
        out += std::to_string(entry.support);
        out += ' ';
        for (std::size_t i = 0; i < entry.contributors.size(); ++i) {
            if (i > 0) {
                out += ';';
            }
            out += std::to_string(entry.contributors[i].col) + "," +
                   std::to_string(entry.contributors[i].row);
        }
        out += '\n';
    }
    out += "checksum " + format_hash(crc32_of(out)) + "\n";
    return out;
}

void save_database(const CorrectionDatabase& db, const std::filesystem::path& path) {
    atomic_write_file(path, serialize_database(db));
}

CorrectionDatabase parse_database(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&](const std::string& what) {
        if (!std::getline(in, line)) {
            throw ParseError("database: unexpected end of file, expected " + what);
        }
        return line;
    };
    auto expect_tokens = [](const std::string& l, const std::string& keyword,
                            std::size_t count) {
        const auto tokens = split(l, ' ');
        if (tokens.size() != count || tokens[0] != keyword) {
            throw ParseError("database: malformed '" + keyword + "' line: " + l);
        }
        return tokens;
    };

    auto parse_hash = [](const std::string& token) -> std::uint32_t {
        if (token.size() != 10 || token.substr(0, 2) != "0x" ||
            token.find_first_not_of("0123456789abcdef", 2) != std::string::npos) {
            throw ParseError("database: malformed hash token '" + token + "'");
        }
        return static_cast<std::uint32_t>(std::stoul(token, nullptr, 16));
    };

    const auto header = split(next_line("header"), ' ');
    if (header.size() != 2 || header[0] != "dtgnss-correction-db") {
        throw ParseError("database: not a dtgnss correction database");
    }
    if (parse_long(header[1], "format version") != kFormatVersion) {
        throw VersionError("database: unsupported format version " + header[1]);
    }

    CorrectionDatabase db;
    db.tool_version = expect_tokens(next_line("tool_version"), "tool_version", 2)[1];
    db.scene_hash =
        parse_hash(expect_tokens(next_line("scene_hash"), "scene_hash", 2)[1]);
    db.ephemeris_hash =
        parse_hash(expect_tokens(next_line("ephemeris_hash"), "ephemeris_hash", 2)[1]);

    const auto grid = expect_tokens(next_line("grid"), "grid", 7);
    db.grid.east_min = parse_double(grid[1], "grid");
    db.grid.east_max = parse_double(grid[2], "grid");
    db.grid.north_min = parse_double(grid[3], "grid");
    db.grid.north_max = parse_double(grid[4], "grid");
    db.grid.resolution_m = parse_double(grid[5], "grid");
    db.grid.receiver_height_m = parse_double(grid[6], "grid");

    db.slot_length_s =
        parse_double(expect_tokens(next_line("slot_length"), "slot_length", 2)[1],
                     "slot_length");
    db.step_s = parse_double(expect_tokens(next_line("step"), "step", 2)[1], "step");
    const long entry_count =
        parse_long(expect_tokens(next_line("entries"), "entries", 2)[1], "entries");

    for (long i = 0; i < entry_count; ++i) {
        const std::string entry_line = next_line("entry " + std::to_string(i));
        const auto tokens = split(entry_line, ' ');
        if (tokens.size() != 8) {
            throw ParseError("database: malformed entry line: " + entry_line);
        }
        const std::string ctx = "database entry " + std::to_string(i);
        CorrectionEntry entry;
        const int slot = static_cast<int>(parse_long(tokens[0], ctx));
        entry.slot = SlotIndex{slot, 0.0}; // slot length filled below
        entry.result_cell = {static_cast<int>(parse_long(tokens[1], ctx)),
                             static_cast<int>(parse_long(tokens[2], ctx))};
        entry.correction = {parse_double(tokens[3], ctx), parse_double(tokens[4], ctx),
                            parse_double(tokens[5], ctx)};
        entry.support = static_cast<int>(parse_long(tokens[6], ctx));
        for (const auto& pair : split(tokens[7], ';')) {
            const auto cr = split(pair, ',');
            if (cr.size() != 2) {
                throw ParseError("database: malformed contributor '" + pair + "'");
            }
            entry.contributors.push_back({static_cast<int>(parse_long(cr[0], ctx)),
                                          static_cast<int>(parse_long(cr[1], ctx))});
        }
        if (entry.support != static_cast<int>(entry.contributors.size()) ||
            entry.support < 1) {
            throw ParseError("database: support count mismatch in entry line: " +
                             entry_line);
        }
        entry.slot.slot_length_s = db.slot_length_s;
        db.entries.emplace(
            std::tuple{slot, entry.result_cell.col, entry.result_cell.row},
            std::move(entry));
    }

    const auto body_size = static_cast<std::size_t>(in.tellg());
    const std::string checksum_line = next_line("checksum");
    const auto checksum = expect_tokens(checksum_line, "checksum", 2);
    const std::uint32_t expected = crc32_of(std::string_view(text).substr(0, body_size));
    if (expected != parse_hash(checksum[1])) {
        throw CorruptionError("database: checksum mismatch");
    }
    if (std::getline(in, line) && !line.empty()) {
        throw ParseError("database: trailing content after checksum");
    }
    return db;
}

CorrectionDatabase load_database(const std::filesystem::path& path) {
    return parse_database(read_file(path));
}

} // namespace dtgnss
