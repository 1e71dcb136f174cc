#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "escape4d/core.hpp"
#include "escape4d/metrics.hpp"
#include "escape4d/stats.hpp"
#include "escape4d/trajectory.hpp"

namespace escape4d {

struct RunRecord {
    SceneSpec scene;
    TrajectoryLog log;
};

/// One row per family present in `runs`: ER, Prop, Steps, GSR, GR, TSR, TR,
/// TCSS, MAT, AMR (blank when no distractor was ever triggered).
std::string metrics_csv(const std::vector<RunRecord>& runs, const MetricsOptions& opts = {});

/// Occupancy grid over all aligned trajectory points of the runs.
DensityGrid pooled_density(const std::vector<RunRecord>& runs, int b = kDefaultGridB);

/// B x B CSV of the log(1 + count) values (heatmap export).
std::string grid_csv(const DensityGrid& grid, bool use_log_map = true);

std::array<double, kCurvePoints> mean_distance_curve(const std::vector<RunRecord>& runs);
std::string curve_csv(const std::array<double, kCurvePoints>& curve, const std::string& label);

struct PairedDelta {
    std::string scene_id;
    double steps = 0.0;
    double time = 0.0;
    double path_len = 0.0;
    double frechet = 0.0;
};

/// Per-scene deltas a - b, paired by scene id; scenes present in only one
/// set are skipped.
std::vector<PairedDelta> paired_deltas(const std::vector<RunRecord>& a,
                                       const std::vector<RunRecord>& b);
std::string deltas_csv(const std::vector<PairedDelta>& deltas);

/// Hypothesis-test rows (label, statistic, p, N) comparing run set A against
/// B: rank/permutation tests on steps, grid-level group permutation,
/// sign-flip on paired grid deltas, and a Mantel test of the two sets'
/// pairwise trajectory-distance structures.
std::string stats_report_text(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                              std::uint64_t seed, int grid_b = kDefaultGridB);

}  // namespace escape4d
