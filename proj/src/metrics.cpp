#include "escape4d/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "escape4d/protocol.hpp"

namespace escape4d {

RunMetrics run_metrics(const TrajectoryLog& log, int prop_count, const MetricsOptions& options) {
    RunMetrics m;
    m.escaped = log.escaped;
    m.steps = log.steps_recorded;
    m.distractor_triggered = log.distractor_triggered;
    m.misguided = log.misguided;

    for (const auto& r : log.records) {
        for (const auto& e : r.events) {
            switch (e.kind) {
                case EventKind::GrabSuccess: ++m.grab_successes; ++m.grab_attempts; break;
                case EventKind::GrabFail: ++m.grab_attempts; break;
                case EventKind::TriggerSuccess: ++m.trigger_successes; ++m.trigger_attempts; break;
                case EventKind::TriggerFail: ++m.trigger_attempts; break;
                default: break;
            }
        }
    }

    m.no_grab_attempts = m.grab_attempts == 0;
    m.gsr = m.no_grab_attempts ? 0.0
                               : static_cast<double>(m.grab_successes) / m.grab_attempts;
    m.r_grab = static_cast<double>(m.grab_attempts) / m.steps;
    m.no_trigger_attempts = m.trigger_attempts == 0;
    m.tsr = m.no_trigger_attempts
                ? 0.0
                : static_cast<double>(m.trigger_successes) / m.trigger_attempts;
    m.r_trigger = static_cast<double>(m.trigger_attempts) / m.steps;
    m.prop_gain =
        std::min(1.0, static_cast<double>(m.grab_successes) / std::max(prop_count, 1));

    double t_lim = options.tcss_time_limit;
    std::optional<double> t_found = log.t_found;
    if (options.episode_relative_tcss) {
        // episode-relative reading: sighting clock instead of window offset
        t_found.reset();
        for (const auto& r : log.records)
            for (const auto& e : r.events)
                if (e.kind == EventKind::ClueShown && !t_found) t_found = r.clock_after;
    }
    m.tcss = (t_found && *t_found <= t_lim) ? 1.0 - *t_found / t_lim : 0.0;
    return m;
}

CorpusMetrics corpus_metrics(const std::vector<RunMetrics>& runs) {
    CorpusMetrics c;
    c.runs = static_cast<int>(runs.size());
    if (runs.empty()) return c;
    int escapes = 0;
    for (const auto& m : runs) {
        escapes += m.escaped ? 1 : 0;
        c.mean_steps += m.steps;
        c.mean_prop_gain += m.prop_gain;
        c.mean_gsr += m.gsr;
        c.mean_r_grab += m.r_grab;
        c.mean_tsr += m.tsr;
        c.mean_r_trigger += m.r_trigger;
        c.mean_tcss += m.tcss;
        c.distractor_triggered_runs += m.distractor_triggered ? 1 : 0;
        c.misguided_runs += m.misguided ? 1 : 0;
    }
    double n = static_cast<double>(c.runs);
    c.er = 100.0 * escapes / n;
    c.mean_steps /= n;
    c.mean_prop_gain /= n;
    c.mean_gsr /= n;
    c.mean_r_grab /= n;
    c.mean_tsr /= n;
    c.mean_r_trigger /= n;
    c.mean_tcss /= n;
    c.mat = 100.0 * c.distractor_triggered_runs / n;
    if (c.distractor_triggered_runs > 0)
        c.amr = 100.0 * c.misguided_runs / c.distractor_triggered_runs;
    return c;
}

std::optional<int> parse_judge_verdict(const std::string& reply) {
    auto pos = reply.find("Consistency");
    if (pos == std::string::npos) return std::nullopt;
    for (std::size_t i = pos + 11; i < reply.size(); ++i) {
        char ch = reply[i];
        if (ch == '0') return 0;
        if (ch == '1') return 1;
        if (ch == '"' || ch == '\'' || ch == ':' || ch == ' ' || ch == '=' || ch == '\t')
            continue;
        break;
    }
    return std::nullopt;
}

namespace {

std::string event_response_text(const StepEvent& e) {
    switch (e.kind) {
        case EventKind::Escape: return "Escaped successfully!";
        case EventKind::GrabSuccess:
            return "You interacted with the " + e.detail + " successfully.";
        case EventKind::TriggerSuccess: return "The " + e.detail + " starts playing.";
        default: return "";
    }
}

}  // namespace

ConsistencyReport consistency_harness(const std::vector<TrajectoryLog>& logs,
                                      const JudgeFn& judge) {
    ConsistencyReport report;
    for (const auto& log : logs) {
        for (const auto& r : log.records) {
            // An escape step carries both GrabSuccess and Escape; judge it
            // once with the escape response.
            bool escaped_here = false;
            for (const auto& e : r.events) escaped_here |= e.kind == EventKind::Escape;
            for (const auto& e : r.events) {
                if (e.kind != EventKind::GrabSuccess && e.kind != EventKind::TriggerSuccess)
                    continue;
                if (escaped_here && e.kind != EventKind::GrabSuccess) continue;
                ConsistencyVerdict v;
                v.scene_id = log.scene_id;
                v.step_index = r.step_index;
                v.rationale = r.action.rationale;
                v.response = escaped_here ? "Escaped successfully!" : event_response_text(e);
                std::string reply =
                    judge(render_consistency_prompt(v.rationale, v.response));
                v.verdict = parse_judge_verdict(reply);
                if (!v.verdict) ++report.excluded;
                report.verdicts.push_back(std::move(v));
            }
        }
    }
    int parsed = 0, ones = 0;
    for (const auto& v : report.verdicts)
        if (v.verdict) {
            ++parsed;
            ones += *v.verdict;
        }
    if (parsed > 0) report.c_io = 100.0 * ones / parsed;
    return report;
}

}  // namespace escape4d
