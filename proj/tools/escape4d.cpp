#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>

#include "escape4d/agents.hpp"
#include "escape4d/engine.hpp"
#include "escape4d/protocol.hpp"
#include "escape4d/report.hpp"
#include "escape4d/scenegen.hpp"
#include "escape4d/stats.hpp"

namespace fs = std::filesystem;
using namespace escape4d;

namespace {

std::string default_out_root() {
    const char* env = std::getenv("ESCAPE4D_OUT");
    return env ? env : "out";
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

std::vector<RunRecord> load_runs(const std::string& suite_dir, const std::string& logs_dir) {
    SuiteManifest manifest = load_manifest((fs::path(suite_dir) / "manifest.json").string());
    std::vector<RunRecord> runs;
    for (const auto& entry : manifest.entries) {
        fs::path log_path = fs::path(logs_dir) / (entry.id + ".jsonl");
        if (!fs::exists(log_path)) continue;
        RunRecord r;
        r.scene = load_scene((fs::path(suite_dir) / entry.file).string());
        r.log = load_log(log_path.string());
        runs.push_back(std::move(r));
    }
    if (runs.empty()) throw std::runtime_error("no logs found in " + logs_dir);
    return runs;
}

int cmd_gen(const std::string& out_dir, std::uint64_t seed, const std::string& family,
            int count) {
    GenConfig config;
    config.seed = seed;
    config.scenes_per_family = count;
    Suite suite;
    if (family.empty()) {
        suite = generate_suite(config);
    } else {
        auto f = family_from_name(family);
        if (!f) throw std::runtime_error("unknown family: " + family);
        for (int i = 0; i < count; ++i) {
            std::uint64_t scene_seed = seed * 1000 + static_cast<std::uint64_t>(i);
            SceneSpec scene = generate_scene(*f, scene_seed, config);
            char idx[8];
            std::snprintf(idx, sizeof idx, "%02d", i);
            scene.id = std::string(family_name(*f)) + "_" + idx;
            SuiteEntry e;
            e.id = scene.id;
            e.family = *f;
            e.seed = scene_seed;
            e.object_count = static_cast<int>(scene.objects.size());
            suite.scenes.push_back(std::move(scene));
            suite.manifest.entries.push_back(e);
        }
        suite.manifest.seed = seed;
    }
    write_suite(suite, out_dir);

    std::map<Family, std::pair<int, double>> summary;  // count, object sum
    for (const auto& s : suite.scenes) {
        summary[s.family].first += 1;
        summary[s.family].second += static_cast<double>(s.objects.size());
    }
    std::cout << "family scenes mean_objects\n";
    for (const auto& [f, cs] : summary)
        std::cout << family_name(f) << ' ' << cs.first << ' ' << cs.second / cs.first << '\n';
    std::cout << suite.scenes.size() << " scenes written to " << out_dir << '\n';
    return 0;
}

int cmd_run(const std::string& suite_dir, const std::string& agent, const std::string& out_dir,
            std::uint64_t seed, bool no_audio, int jobs, double timeout) {
    SuiteManifest manifest = load_manifest((fs::path(suite_dir) / "manifest.json").string());
    fs::create_directories(out_dir);
    EpisodeOptions options;
    options.no_audio = no_audio;

    std::vector<SceneSpec> scenes;
    for (const auto& e : manifest.entries)
        scenes.push_back(load_scene((fs::path(suite_dir) / e.file).string()));

    std::atomic<std::size_t> next{0};
    std::atomic<int> escaped{0};
    std::mutex io;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= scenes.size()) return;
            const SceneSpec& scene = scenes[i];
            std::uint64_t episode_seed = seed ^ scene.seed;
            TrajectoryLog log;
            if (is_builtin_policy(agent)) {
                log = run_episode(scene, make_builtin_policy(agent, scene, episode_seed),
                                  episode_seed, options);
            } else {
                ExternalAgentOptions ext;
                ext.step_timeout_seconds = timeout;
                ExternalAgent bridge(agent, ext);
                log = run_episode(scene, bridge.policy(), episode_seed, options);
            }
            if (log.escaped) escaped.fetch_add(1);
            save_log(log, (fs::path(out_dir) / (scene.id + ".jsonl")).string());
            std::lock_guard<std::mutex> lock(io);
            std::cout << scene.id << (log.escaped ? " escaped in " : " failed after ")
                      << log.steps_recorded << " steps\n";
        }
    };

    // External agents keep one subprocess per episode; run them serially.
    int n_threads = is_builtin_policy(agent) ? std::max(1, jobs) : 1;
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::cout << escaped.load() << "/" << scenes.size() << " escaped\n";
    return 0;
}

int cmd_replay(const std::string& scene_path, const std::string& log_path,
               const std::string& out_path) {
    SceneSpec scene = load_scene(scene_path);
    TrajectoryLog original = load_log(log_path);
    TrajectoryLog replayed =
        run_episode(scene, make_replay_policy(original), original.seed);
    if (!out_path.empty()) save_log(replayed, out_path);
    bool identical = log_to_jsonl(replayed) == log_to_jsonl(original);
    std::cout << (identical ? "replay matches original log\n"
                            : "replay DIVERGES from original log\n");
    return identical ? 0 : 1;
}

int cmd_report(const std::string& suite_dir, const std::string& logs_dir,
               const std::string& logs_b_dir, const std::string& out_dir, int grid_b,
               bool episode_tcss, std::uint64_t stats_seed) {
    std::vector<RunRecord> runs = load_runs(suite_dir, logs_dir);
    MetricsOptions mopts;
    mopts.episode_relative_tcss = episode_tcss;
    fs::create_directories(out_dir);

    write_file(fs::path(out_dir) / "metrics.csv", metrics_csv(runs, mopts));

    std::map<Family, std::vector<RunRecord>> by_family;
    for (auto& r : runs) by_family[r.scene.family].push_back(r);
    for (const auto& [f, fruns] : by_family) {
        std::string name = family_name(f);
        write_file(fs::path(out_dir) / ("heatmap_" + name + ".csv"),
                   grid_csv(pooled_density(fruns, grid_b)));
        write_file(fs::path(out_dir) / ("curve_" + name + ".csv"),
                   curve_csv(mean_distance_curve(fruns), "mean_distance"));
        std::vector<DistanceCurve> curves;
        for (const auto& r : fruns) {
            AlignedTrajectory traj = align_to_exit(r.scene, r.log);
            curves.push_back(distance_curve(traj.points, aligned_exit(r.scene)));
        }
        auto surv = survival_curve(curves);
        std::array<double, kCurvePoints> s{};
        for (int k = 0; k < kCurvePoints; ++k) s[k] = surv[k];
        write_file(fs::path(out_dir) / ("survival_" + name + ".csv"),
                   curve_csv(s, "survival"));
    }

    std::ofstream meta(fs::path(out_dir) / "report_meta.txt");
    meta << "grid_b=" << grid_b << "\nepisode_relative_tcss=" << (episode_tcss ? 1 : 0)
         << "\n";

    if (!logs_b_dir.empty()) {
        std::vector<RunRecord> runs_b = load_runs(suite_dir, logs_b_dir);
        write_file(fs::path(out_dir) / "deltas.csv", deltas_csv(paired_deltas(runs, runs_b)));
        write_file(fs::path(out_dir) / "stats_report.txt",
                   stats_report_text(runs, runs_b, stats_seed, grid_b));
    }
    std::cout << "report written to " << out_dir << '\n';
    return 0;
}

std::vector<double> read_column(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::vector<double> v;
    double x;
    while (f >> x) v.push_back(x);
    if (v.empty()) throw std::runtime_error("no numbers in " + path);
    return v;
}

int cmd_stats(const std::string& a_path, const std::string& b_path, bool paired,
              std::uint64_t seed) {
    std::vector<double> a = read_column(a_path), b = read_column(b_path);
    auto show = [](const std::string& label, const TestResult& r) {
        std::cout << label << ": statistic=" << r.statistic << " p=" << r.p_value
                  << " method=" << r.method
                  << (r.n_permutations ? " N=" + std::to_string(r.n_permutations) : "")
                  << '\n';
    };
    if (paired) {
        show("wilcoxon_signed_rank", wilcoxon_signed_rank(a, b));
    } else {
        show("mann_whitney_u", mann_whitney_u(a, b));
    }
    Rng rng(seed);
    show("permutation_test", permutation_test(a, b, kPermutationN, rng));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"escape4d: deterministic escape-room benchmark engine"};
    app.require_subcommand(1);

    std::string out_root = default_out_root();

    auto* gen = app.add_subcommand("gen", "generate a scene suite");
    std::string gen_out = out_root + "/suite", gen_family;
    std::uint64_t gen_seed = 2024;
    int gen_count = 11;
    gen->add_option("--out", gen_out, "output directory");
    gen->add_option("--seed", gen_seed, "suite seed");
    gen->add_option("--family", gen_family, "single family (D1,D2,D3,D2M,D3M,D2T)");
    gen->add_option("--count", gen_count, "scenes per family");

    auto* run = app.add_subcommand("run", "run an agent over a suite");
    std::string run_suite = out_root + "/suite", run_agent = "oracle",
                run_out = out_root + "/logs";
    std::uint64_t run_seed = 7;
    bool run_no_audio = false;
    int run_jobs = static_cast<int>(std::thread::hardware_concurrency());
    double run_timeout = 120.0;
    run->add_option("--suite", run_suite, "suite directory");
    run->add_option("--agent", run_agent, "builtin (noop|random|greedy|oracle) or command");
    run->add_option("--out", run_out, "log output directory");
    run->add_option("--seed", run_seed, "episode seed base");
    run->add_flag("--no-audio", run_no_audio, "suppress ambient audio (ablation)");
    run->add_option("--jobs", run_jobs, "parallel episodes (builtin agents)");
    run->add_option("--timeout", run_timeout, "external agent step timeout (s)");

    auto* replay = app.add_subcommand("replay", "re-execute a log's actions");
    std::string replay_scene, replay_log, replay_out;
    replay->add_option("--scene", replay_scene, "scene file")->required();
    replay->add_option("--log", replay_log, "log file")->required();
    replay->add_option("--out", replay_out, "write replayed log here");

    auto* report = app.add_subcommand("report", "metrics + analytics CSVs");
    std::string rep_suite = out_root + "/suite", rep_logs = out_root + "/logs", rep_logs_b,
                rep_out = out_root + "/report";
    int rep_grid = kDefaultGridB;
    bool rep_episode_tcss = false;
    std::uint64_t rep_seed = 99;
    report->add_option("--suite", rep_suite, "suite directory");
    report->add_option("--logs", rep_logs, "log directory (group A)");
    report->add_option("--logs-b", rep_logs_b, "second log directory for paired deltas");
    report->add_option("--out", rep_out, "report output directory");
    report->add_option("--grid", rep_grid, "density grid cells per side");
    report->add_flag("--episode-relative-tcss", rep_episode_tcss,
                     "TCSS against the episode clock instead of the clue window");
    report->add_option("--stats-seed", rep_seed, "permutation rng seed");

    auto* stats = app.add_subcommand("stats", "hypothesis tests on two numeric files");
    std::string stats_a, stats_b;
    bool stats_paired = false;
    std::uint64_t stats_seed = 99;
    stats->add_option("--a", stats_a, "whitespace-separated numbers")->required();
    stats->add_option("--b", stats_b, "whitespace-separated numbers")->required();
    stats->add_flag("--paired", stats_paired, "treat samples as pairs");
    stats->add_option("--seed", stats_seed, "permutation rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(gen_out, gen_seed, gen_family, gen_count);
        if (run->parsed())
            return cmd_run(run_suite, run_agent, run_out, run_seed, run_no_audio, run_jobs,
                           run_timeout);
        if (replay->parsed()) return cmd_replay(replay_scene, replay_log, replay_out);
        if (report->parsed())
            return cmd_report(rep_suite, rep_logs, rep_logs_b, rep_out, rep_grid,
                              rep_episode_tcss, rep_seed);
        if (stats->parsed()) return cmd_stats(stats_a, stats_b, stats_paired, stats_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
