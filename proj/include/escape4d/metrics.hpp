#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "escape4d/engine.hpp"

namespace escape4d {

struct MetricsOptions {
    /// TCSS time limit convention: window-relative (t_found measured from
    /// window start against the window duration) or episode-relative
    /// (t_found from episode start against the episode's total time budget).
    bool episode_relative_tcss = false;
    double tcss_time_limit = 20.0;  // T_lim for the window-relative reading
};

struct RunMetrics {
    bool escaped = false;
    int steps = 0;  // steps_recorded (limit + 1 convention on failure)
    double prop_gain = 0.0;
    double gsr = 0.0;
    bool no_grab_attempts = false;
    double r_grab = 0.0;
    double tsr = 0.0;
    bool no_trigger_attempts = false;
    double r_trigger = 0.0;
    double tcss = 0.0;
    int grab_attempts = 0;
    int grab_successes = 0;
    int trigger_attempts = 0;
    int trigger_successes = 0;
    bool distractor_triggered = false;
    bool misguided = false;
};

struct CorpusMetrics {
    int runs = 0;
    double er = 0.0;          // percent
    double mean_steps = 0.0;  // limit + 1 convention for failures
    double mean_prop_gain = 0.0;
    double mean_gsr = 0.0;
    double mean_r_grab = 0.0;
    double mean_tsr = 0.0;
    double mean_r_trigger = 0.0;
    double mean_tcss = 0.0;
    double mat = 0.0;                 // percent, misleading families only
    std::optional<double> amr;        // percent; absent when never triggered
    int distractor_triggered_runs = 0;
    int misguided_runs = 0;
};

/// Per-run metric extraction. `prop_count` comes from the scene.
RunMetrics run_metrics(const TrajectoryLog& log, int prop_count,
                       const MetricsOptions& options = {});

/// Aggregation over the logs of one (model, family) cell. Order-invariant.
CorpusMetrics corpus_metrics(const std::vector<RunMetrics>& runs);

// --- consistency-judge harness -------------------------------------------

using JudgeFn = std::function<std::string(const std::string& prompt)>;

struct ConsistencyVerdict {
    std::string scene_id;
    int step_index = 0;
    std::string rationale;
    std::string response;
    std::optional<int> verdict;  // 1/0; absent when the judge reply was unparsable
};

struct ConsistencyReport {
    std::vector<ConsistencyVerdict> verdicts;
    int excluded = 0;                 // unparsable judge replies
    std::optional<double> c_io;       // percent over parsed verdicts
};

/// Renders the consistency prompt for every successful interaction in the
/// logs, collects `{"Consistency": 1|0}` verdicts from the judge callable,
/// and aggregates C_IO. Per-log ordering of verdicts is preserved.
ConsistencyReport consistency_harness(const std::vector<TrajectoryLog>& logs,
                                      const JudgeFn& judge);

/// Parses a judge reply; std::nullopt when no verdict is recognizable.
std::optional<int> parse_judge_verdict(const std::string& reply);

}  // namespace escape4d
