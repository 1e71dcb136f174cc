#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "escape4d/metrics.hpp"

using namespace escape4d;

namespace {

TrajectoryLog synthetic_log(int steps, bool escaped,
                            const std::vector<std::pair<int, StepEvent>>& events) {
    TrajectoryLog log;
    log.scene_id = "T_00";
    log.escaped = escaped;
    log.steps_recorded = escaped ? steps : steps + 1;
    for (int i = 0; i < steps; ++i) {
        StepRecord r;
        r.step_index = i;
        r.clock_before = i * 1.0;
        r.clock_after = i * 1.0 + 1.0;
        log.records.push_back(r);
    }
    for (const auto& [step, ev] : events) {
        log.records[step].events.push_back(ev);
        if (ev.kind == EventKind::GrabSuccess || ev.kind == EventKind::GrabFail)
            log.records[step].action.grab = true;
        if (ev.kind == EventKind::TriggerSuccess || ev.kind == EventKind::TriggerFail)
            log.records[step].action.trigger = true;
    }
    return log;
}

}  // namespace

TEST_CASE("run metrics: rates against hand counts") {
    TrajectoryLog log = synthetic_log(10, true,
                                      {{1, {EventKind::GrabFail, "box"}},
                                       {2, {EventKind::GrabSuccess, "box"}},
                                       {4, {EventKind::TriggerFail, "rec"}},
                                       {5, {EventKind::TriggerSuccess, "rec"}},
                                       {8, {EventKind::GrabSuccess, "door"}},
                                       {8, {EventKind::Escape, "door"}}});
    RunMetrics m = run_metrics(log, 2);
    CHECK(m.escaped);
    CHECK(m.steps == 10);
    CHECK(m.grab_attempts == 3);
    CHECK(m.grab_successes == 2);
    CHECK(m.gsr == doctest::Approx(2.0 / 3.0));
    CHECK(m.r_grab == doctest::Approx(3.0 / 10.0));
    CHECK(m.trigger_attempts == 2);
    CHECK(m.tsr == doctest::Approx(0.5));
    CHECK(m.r_trigger == doctest::Approx(0.2));
    CHECK(m.prop_gain == doctest::Approx(1.0));
}

TEST_CASE("zero-attempt ratios report 0 with the no-attempts flag") {
    TrajectoryLog log = synthetic_log(5, false, {});
    RunMetrics m = run_metrics(log, 1);
    CHECK(m.no_grab_attempts);
    CHECK(m.gsr == 0.0);
    CHECK(m.no_trigger_attempts);
    CHECK(m.tsr == 0.0);
    CHECK(m.steps == 6);  // failure convention
    CHECK(m.prop_gain == 0.0);
}

TEST_CASE("TCSS: window-relative scoring") {
    TrajectoryLog log = synthetic_log(5, true, {});
    SUBCASE("found at 5 s of a 20 s window") {
        log.t_found = 5.0;
        CHECK(run_metrics(log, 1).tcss == doctest::Approx(0.75));
    }
    SUBCASE("found at the window edge") {
        log.t_found = 20.0;
        CHECK(run_metrics(log, 1).tcss == doctest::Approx(0.0));
    }
    SUBCASE("never found") {
        CHECK(run_metrics(log, 1).tcss == 0.0);
    }
}

TEST_CASE("TCSS: episode-relative flag reads the sighting clock") {
    TrajectoryLog log =
        synthetic_log(10, true, {{3, {EventKind::ClueShown, ""}}});
    log.t_found = 1.0;  // window-relative value, ignored by this reading
    MetricsOptions opts;
    opts.episode_relative_tcss = true;
    opts.tcss_time_limit = 16.0;
    // sighting happened at clock_after = 4.0 of a 16 s budget
    CHECK(run_metrics(log, 1, opts).tcss == doctest::Approx(1.0 - 4.0 / 16.0));
}

TEST_CASE("corpus metrics aggregate in percent") {
    TrajectoryLog win = synthetic_log(10, true, {{0, {EventKind::GrabSuccess, "door"}}});
    TrajectoryLog loss = synthetic_log(10, false, {});
    loss.distractor_triggered = true;
    loss.misguided = true;
    CorpusMetrics c = corpus_metrics({run_metrics(win, 1), run_metrics(loss, 1)});
    CHECK(c.runs == 2);
    CHECK(c.er == doctest::Approx(50.0));
    CHECK(c.mean_steps == doctest::Approx((10 + 11) / 2.0));
    CHECK(c.mat == doctest::Approx(50.0));
    REQUIRE(c.amr.has_value());
    CHECK(*c.amr == doctest::Approx(100.0));
}

TEST_CASE("AMR is absent when no distractor was ever triggered") {
    TrajectoryLog log = synthetic_log(4, false, {});
    CorpusMetrics c = corpus_metrics({run_metrics(log, 1)});
    CHECK_FALSE(c.amr.has_value());
    CHECK(c.mat == 0.0);
}

TEST_CASE("judge verdict parsing") {
    CHECK(parse_judge_verdict(R"({"Consistency": 1})") == 1);
    CHECK(parse_judge_verdict(R"({"Consistency": 0})") == 0);
    CHECK(parse_judge_verdict("Consistency: 1") == 1);
    CHECK(parse_judge_verdict("The consistency is fine") == std::nullopt);
    CHECK(parse_judge_verdict("") == std::nullopt);
    CHECK(parse_judge_verdict("Consistency: maybe") == std::nullopt);
}

TEST_CASE("consistency harness aggregates C_IO over parsed verdicts") {
    TrajectoryLog log = synthetic_log(10, true,
                                      {{2, {EventKind::GrabSuccess, "box_1"}},
                                       {5, {EventKind::TriggerSuccess, "rec_1"}},
                                       {7, {EventKind::GrabSuccess, "door_1"}},
                                       {7, {EventKind::Escape, "door_1"}}});
    log.records[2].action.rationale = "open the box";

    int calls = 0;
    JudgeFn judge = [&](const std::string& prompt) {
        ++calls;
        CHECK(prompt.find("Consistency") != std::string::npos);
        return calls == 2 ? std::string("no verdict here")
                          : std::string(R"({"Consistency": 1})");
    };
    ConsistencyReport report = consistency_harness({log}, judge);
    CHECK(report.verdicts.size() == 3);
    CHECK(report.excluded == 1);
    REQUIRE(report.c_io.has_value());
    CHECK(*report.c_io == doctest::Approx(100.0));
    CHECK(report.verdicts[0].rationale == "open the box");
}
