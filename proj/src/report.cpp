#include "escape4d/report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace escape4d {

namespace {

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace

std::string metrics_csv(const std::vector<RunRecord>& runs, const MetricsOptions& opts) {
    std::map<Family, std::vector<RunMetrics>> by_family;
    for (const auto& r : runs)
        by_family[r.scene.family].push_back(run_metrics(r.log, r.scene.prop_count, opts));

    std::ostringstream out;
    out << "Family,Runs,ER,Prop,Steps,GSR,GR,TSR,TR,TCSS,MAT,AMR\n";
    for (Family f : all_families()) {
        auto it = by_family.find(f);
        if (it == by_family.end()) continue;
        CorpusMetrics c = corpus_metrics(it->second);
        out << family_name(f) << ',' << c.runs << ',' << fmt2(c.er) << ','
            << fmt2(c.mean_prop_gain) << ',' << fmt2(c.mean_steps) << ',' << fmt2(c.mean_gsr)
            << ',' << fmt2(c.mean_r_grab) << ',' << fmt2(c.mean_tsr) << ','
            << fmt2(c.mean_r_trigger) << ',' << fmt2(c.mean_tcss) << ',' << fmt2(c.mat) << ','
            << (c.amr ? fmt2(*c.amr) : std::string()) << '\n';
    }
    return out.str();
}

DensityGrid pooled_density(const std::vector<RunRecord>& runs, int b) {
    std::vector<Vec2> points;
    double width = 10.0, depth = 10.0;
    for (const auto& r : runs) {
        AlignedTrajectory traj = align_to_exit(r.scene, r.log);
        points.insert(points.end(), traj.points.begin(), traj.points.end());
        width = r.scene.geometry.width;
        depth = r.scene.geometry.depth;
    }
    return density(points, b, width, depth);
}

std::string grid_csv(const DensityGrid& grid, bool use_log_map) {
    std::ostringstream out;
    for (int row = 0; row < grid.b; ++row) {
        for (int col = 0; col < grid.b; ++col) {
            if (col) out << ',';
            std::size_t i = static_cast<std::size_t>(row) * grid.b + col;
            out << fmt6(use_log_map ? grid.log_map[i] : grid.mass[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::array<double, kCurvePoints> mean_distance_curve(const std::vector<RunRecord>& runs) {
    std::array<double, kCurvePoints> mean{};
    for (const auto& r : runs) {
        AlignedTrajectory traj = align_to_exit(r.scene, r.log);
        DistanceCurve c = distance_curve(traj.points, aligned_exit(r.scene));
        for (int k = 0; k < kCurvePoints; ++k) mean[k] += c.values[k];
    }
    if (!runs.empty())
        for (double& v : mean) v /= static_cast<double>(runs.size());
    return mean;
}

std::string curve_csv(const std::array<double, kCurvePoints>& curve, const std::string& label) {
    std::ostringstream out;
    out << "progress," << label << '\n';
    for (int k = 0; k < kCurvePoints; ++k)
        out << fmt6(static_cast<double>(k) / (kCurvePoints - 1)) << ',' << fmt6(curve[k])
            << '\n';
    return out.str();
}

std::vector<PairedDelta> paired_deltas(const std::vector<RunRecord>& a,
                                       const std::vector<RunRecord>& b) {
    std::map<std::string, const RunRecord*> b_by_id;
    for (const auto& r : b) b_by_id[r.log.scene_id] = &r;
    std::vector<PairedDelta> out;
    for (const auto& ra : a) {
        auto it = b_by_id.find(ra.log.scene_id);
        if (it == b_by_id.end()) continue;
        const RunRecord& rb = *it->second;
        AlignedTrajectory ta = align_to_exit(ra.scene, ra.log);
        AlignedTrajectory tb = align_to_exit(rb.scene, rb.log);
        PathMetrics ma = path_metrics(ta, ra.scene);
        PathMetrics mb = path_metrics(tb, rb.scene);
        PairedDelta d;
        d.scene_id = ra.log.scene_id;
        d.steps = static_cast<double>(ra.log.steps_recorded - rb.log.steps_recorded);
        d.time = ma.time - mb.time;
        d.path_len = ma.path_len - mb.path_len;
        d.frechet = ma.frechet - mb.frechet;
        out.push_back(d);
    }
    return out;
}

std::string deltas_csv(const std::vector<PairedDelta>& deltas) {
    std::ostringstream out;
    out << "scene_id,d_steps,d_time,d_path_len,d_frechet\n";
    for (const auto& d : deltas)
        out << d.scene_id << ',' << fmt6(d.steps) << ',' << fmt6(d.time) << ','
            << fmt6(d.path_len) << ',' << fmt6(d.frechet) << '\n';
    return out.str();
}

std::string stats_report_text(const std::vector<RunRecord>& a, const std::vector<RunRecord>& b,
                              std::uint64_t seed, int grid_b) {
    std::ostringstream out;
    out << "test\tstatistic\tp_value\tn_permutations\n";
    auto emit = [&](const std::string& label, const TestResult& r) {
        out << label << '\t' << fmt6(r.statistic) << '\t' << fmt6(r.p_value) << '\t'
            << r.n_permutations << '\n';
    };

    std::vector<double> steps_a, steps_b;
    for (const auto& r : a) steps_a.push_back(static_cast<double>(r.log.steps_recorded));
    for (const auto& r : b) steps_b.push_back(static_cast<double>(r.log.steps_recorded));
    emit("mann_whitney_u(steps)", mann_whitney_u(steps_a, steps_b));

    std::vector<PairedDelta> deltas = paired_deltas(a, b);
    if (!deltas.empty()) {
        std::vector<double> x, zero(deltas.size(), 0.0);
        for (const auto& d : deltas) x.push_back(d.steps);
        emit("wilcoxon_signed_rank(d_steps)", wilcoxon_signed_rank(x, zero));
    }

    Rng rng(seed);
    emit("permutation(steps)", permutation_test(steps_a, steps_b, kPermutationN, rng));

    std::vector<DensityGrid> grids_a, grids_b;
    for (const auto& r : a)
        grids_a.push_back(density(align_to_exit(r.scene, r.log), r.scene, grid_b));
    for (const auto& r : b)
        grids_b.push_back(density(align_to_exit(r.scene, r.log), r.scene, grid_b));
    if (grids_a.size() >= 2 && grids_b.size() >= 2) {
        emit("group_permutation(jsd)",
             group_permutation(grids_a, grids_b, GridDistance::JSD, kGridPermutationN, rng));
        emit("group_permutation(l1)",
             group_permutation(grids_a, grids_b, GridDistance::L1, kGridPermutationN, rng));
    }

    // Paired grid deltas, matched by scene id as in paired_deltas.
    std::map<std::string, const DensityGrid*> gb_by_id;
    for (std::size_t i = 0; i < b.size(); ++i) gb_by_id[b[i].log.scene_id] = &grids_b[i];
    std::vector<std::vector<double>> grid_deltas;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto it = gb_by_id.find(a[i].log.scene_id);
        if (it == gb_by_id.end()) continue;
        std::vector<double> d(grids_a[i].mass.size());
        for (std::size_t c = 0; c < d.size(); ++c)
            d[c] = grids_a[i].mass[c] - it->second->mass[c];
        grid_deltas.push_back(std::move(d));
    }
    if (grid_deltas.size() >= 2) {
        emit("sign_flip(jsd)",
             sign_flip_permutation(grid_deltas, GridDistance::JSD, kGridPermutationN, rng));
        emit("sign_flip(l1)",
             sign_flip_permutation(grid_deltas, GridDistance::L1, kGridPermutationN, rng));
    }

    // Mantel: does the pairwise-dissimilarity structure of A's trajectories
    // correlate with B's, scene by scene?
    std::size_t n = grid_deltas.size();
    if (n >= 3) {
        std::vector<const DensityGrid*> ga, gb;
        for (std::size_t i = 0; i < a.size(); ++i) {
            auto it = gb_by_id.find(a[i].log.scene_id);
            if (it == gb_by_id.end()) continue;
            ga.push_back(&grids_a[i]);
            gb.push_back(it->second);
        }
        auto dm = [&](const std::vector<const DensityGrid*>& g) {
            std::vector<std::vector<double>> m(g.size(), std::vector<double>(g.size(), 0.0));
            for (std::size_t i = 0; i < g.size(); ++i)
                for (std::size_t j = i + 1; j < g.size(); ++j)
                    m[i][j] = m[j][i] = density_distance(*g[i], *g[j], GridDistance::JSD);
            return m;
        };
        try {
            emit("mantel(jsd_grids)", mantel(dm(ga), dm(gb), kGridPermutationN, rng));
        } catch (const std::invalid_argument&) {
            out << "mantel(jsd_grids)\tdegenerate\t\t\n";
        }
    }
    return out.str();
}

}  // namespace escape4d
