#pragma once

#include "dtgnss/ephemeris.hpp"
#include "dtgnss/estimator.hpp"
#include "dtgnss/scene.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace dtgnss {

/// One simulated positioning outcome for a candidate cell at one epoch.
/// bias = solution - cell center.
struct SimulatedFix {
    CellIndex origin_cell;
    double epoch_s = 0.0;
    EnuPoint solution;
    Eigen::Vector3d bias = Eigen::Vector3d::Zero();
    bool converged = false;
};

/// Correction for one (slot, result cell): the negated mean of the biases of
/// every simulated fix that landed in the cell during the slot.
struct CorrectionEntry {
    CellIndex result_cell;
    SlotIndex slot;
    Eigen::Vector3d correction = Eigen::Vector3d::Zero();
    int support = 0;                     // number of contributing (cell, epoch) fixes
    std::vector<CellIndex> contributors; // origin cells, in fix order
};

struct BuildStats {
    long contributing = 0;
    long dropped_outside = 0; // fixes that snapped outside the grid
    long skipped = 0;         // <4 satellites, singular geometry, or non-converged
    int slots_processed = 0;
    long cell_count = 0;
    int epochs_per_slot = 0;
};

struct CorrectionDatabase {
    GridSpec grid;
    double slot_length_s = kDefaultSlotLength;
    double step_s = 30.0;
    std::map<std::tuple<int, int, int>, CorrectionEntry> entries; // (slot, col, row)
    std::uint32_t scene_hash = 0;
    std::uint32_t ephemeris_hash = 0;
    std::string tool_version;
    BuildStats stats; // in-memory only, not persisted

    const CorrectionEntry* find(int slot, const CellIndex& cell) const;
};

struct SlotSimulation {
    std::vector<SimulatedFix> fixes; // ordered by (epoch, cell row, cell col)
    long skipped = 0;
};

/// Noise-free measurements and OLS solves for every candidate cell at every
/// sampled epoch of the slot (slot start, +step, ...). Cells with fewer than
/// four received satellites, singular geometry, or a non-converged solve are
/// skipped and counted.
SlotSimulation simulate_slot_solutions(const Scene& scene,
                                       const std::vector<GridCell>& cells,
                                       const EphemerisTable& table,
                                       const SlotIndex& slot, double step_s);

struct SlotAccumulation {
    std::vector<CorrectionEntry> entries; // ordered by (col, row)
    long dropped_outside = 0;
};

/// Groups fixes by the result cell their solution snaps to and averages the
/// negated biases per group.
SlotAccumulation accumulate_corrections(const std::vector<SimulatedFix>& fixes,
                                        const GridSpec& grid, const SlotIndex& slot);

/// Epochs sampled within a slot: slot start, +step, ... (step must divide the
/// slot length).
std::vector<double> slot_sample_epochs(const SlotIndex& slot, double step_s);

/// Slots whose sampled epochs are all covered by the table; only these enter
/// a database build.
std::vector<SlotIndex> covered_slots(const EphemerisTable& table,
                                     double slot_length_s, double step_s);

/// Full database over every slot whose sampled epochs are all covered by the
/// table. Deterministic: identical inputs produce identical databases.
CorrectionDatabase build_database(const Scene& scene, const GridSpec& grid,
                                  const EphemerisTable& table,
                                  double slot_length_s, double step_s,
                                  unsigned threads = 0);

struct CorrectionResult {
    EnuPoint corrected;
    bool applied = false;
    const CorrectionEntry* entry = nullptr;
};

/// Looks up (slot of epoch, result cell of measured) and applies the stored
/// correction; the position passes through unchanged when no entry exists.
CorrectionResult correct_position(const EnuPoint& measured, double epoch_s,
                                  const CorrectionDatabase& db);

/// Canonical text serialization with a trailing crc32 checksum line; equal
/// databases serialize to identical bytes.
std::string serialize_database(const CorrectionDatabase& db);
void save_database(const CorrectionDatabase& db, const std::filesystem::path& path);

/// Strict parse; throws VersionError on a format version mismatch and
/// CorruptionError on a checksum mismatch.
CorrectionDatabase load_database(const std::filesystem::path& path);
CorrectionDatabase parse_database(const std::string& text);

} // namespace dtgnss
