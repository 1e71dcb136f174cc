#include "escape4d/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace escape4d {

namespace {

double clamp_p(double p) { return std::min(std::max(p, 1e-300), 1.0); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

bool all_equal(const std::vector<double>& v) {
    for (double x : v)
        if (x != v.front()) return false;
    return true;
}

/// Sum over tied groups of t^3 - t, for the tie-corrected variances.
double tie_term(std::vector<double> pooled) {
    std::sort(pooled.begin(), pooled.end());
    double sum = 0.0;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j] == pooled[i]) ++j;
        double t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

/// Runs `replicate(index) -> bool exceedance` n times with one deterministic
/// rng substream per index and returns the exceedance count. The OpenMP and
/// serial paths count identically because each index owns its substream.
template <typename Fn>
int count_exceedances(int n, const Fn& replicate, bool parallel) {
    int count = 0;
    if (parallel) {
#pragma omp parallel for reduction(+ : count) schedule(static)
        for (int i = 0; i < n; ++i) count += replicate(i) ? 1 : 0;
    } else {
        for (int i = 0; i < n; ++i) count += replicate(i) ? 1 : 0;
    }
    return count;
}

}  // namespace

const char* grid_distance_name(GridDistance d) { return d == GridDistance::JSD ? "jsd" : "l1"; }

std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
    std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());

    TestResult res;
    res.two_sided = true;
    if (all_equal(pooled)) {
        res.statistic = static_cast<double>(n1 * n2) / 2.0;
        res.p_value = 1.0;
        res.degenerate = true;
        res.method = "mann_whitney_u/degenerate";
        return res;
    }

    std::vector<double> ranks = average_ranks(pooled);
    double r1 = std::accumulate(ranks.begin(), ranks.begin() + n1, 0.0);
    double u1 = static_cast<double>(n1 * n2) + n1 * (n1 + 1) / 2.0 - r1;
    double u2 = static_cast<double>(n1 * n2) - u1;
    res.statistic = std::min(u1, u2);

    if (n <= 12) {
        // Exact: every assignment of n1 pooled ranks to group a.
        long total = 0, at_most = 0;
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            if (static_cast<std::size_t>(__builtin_popcount(mask)) != n1) continue;
            ++total;
            double rsum = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (mask & (1u << k)) rsum += ranks[k];
            double pu1 = static_cast<double>(n1 * n2) + n1 * (n1 + 1) / 2.0 - rsum;
            double pu = std::min(pu1, static_cast<double>(n1 * n2) - pu1);
            if (pu <= res.statistic + 1e-12) ++at_most;
        }
        res.p_value = static_cast<double>(at_most) / total;
        res.method = "mann_whitney_u/exact";
    } else {
        double mu = static_cast<double>(n1 * n2) / 2.0;
        double nn = static_cast<double>(n);
        double var = static_cast<double>(n1 * n2) / 12.0 *
                     (nn + 1.0 - tie_term(pooled) / (nn * (nn - 1.0)));
        double z = (res.statistic - mu) / std::sqrt(var);
        res.p_value = clamp_p(2.0 * normal_cdf(z));
        res.method = "mann_whitney_u/normal";
    }
    return res;
}

TestResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.empty())
        throw std::invalid_argument("wilcoxon_signed_rank: mismatched or empty samples");
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i]) d.push_back(x[i] - y[i]);

    TestResult res;
    res.two_sided = true;
    if (d.empty()) {
        res.p_value = 1.0;
        res.degenerate = true;
        res.method = "wilcoxon_signed_rank/degenerate";
        return res;
    }
    std::size_t n = d.size();
    std::vector<double> absd(n);
    for (std::size_t i = 0; i < n; ++i) absd[i] = std::fabs(d[i]);
    std::vector<double> ranks = average_ranks(absd);
    double w_plus = 0.0, w_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w_total += ranks[i];
        if (d[i] > 0) w_plus += ranks[i];
    }
    res.statistic = std::min(w_plus, w_total - w_plus);

    if (n <= 15) {
        long at_most = 0;
        std::uint64_t patterns = 1ULL << n;
        for (std::uint64_t mask = 0; mask < patterns; ++mask) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (mask & (1ULL << k)) s += ranks[k];
            if (std::min(s, w_total - s) <= res.statistic + 1e-12) ++at_most;
        }
        res.p_value = static_cast<double>(at_most) / static_cast<double>(patterns);
        res.method = "wilcoxon_signed_rank/exact";
    } else {
        double nn = static_cast<double>(n);
        double mu = nn * (nn + 1.0) / 4.0;
        double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term(absd) / 48.0;
        double z = (res.statistic - mu) / std::sqrt(var);
        res.p_value = clamp_p(2.0 * normal_cdf(z));
        res.method = "wilcoxon_signed_rank/normal";
    }
    return res;
}

namespace {

TestResult permutation_test_impl(const std::vector<double>& a, const std::vector<double>& b,
                                 int n_permutations, Rng& rng, bool parallel) {
    if (a.empty() || b.empty()) throw std::invalid_argument("permutation_test: empty sample");
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
    double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
    double mean_b = (total - mean_a * a.size()) / b.size();
    double obs = std::fabs(mean_a - mean_b);
    std::uint64_t seed = rng.next_u64();
    std::size_t n1 = a.size();

    int count = count_exceedances(
        n_permutations,
        [&](int i) {
            Rng r = Rng::substream(seed, static_cast<std::uint64_t>(i));
            std::vector<double> p = pooled;
            r.shuffle(p);
            double sa = std::accumulate(p.begin(), p.begin() + n1, 0.0);
            double ma = sa / n1;
            double mb = (total - sa) / b.size();
            return std::fabs(ma - mb) >= obs;
        },
        parallel);

    TestResult res;
    res.statistic = obs;
    res.n_permutations = n_permutations;
    res.p_value = static_cast<double>(count + 1) / (n_permutations + 1);
    res.method = "permutation_test";
    return res;
}

std::vector<double> mean_grid(const std::vector<const std::vector<double>*>& grids) {
    std::vector<double> m(grids.front()->size(), 0.0);
    for (const auto* g : grids)
        for (std::size_t c = 0; c < m.size(); ++c) m[c] += (*g)[c];
    for (double& v : m) v /= static_cast<double>(grids.size());
    return m;
}

TestResult group_permutation_impl(const std::vector<DensityGrid>& group_a,
                                  const std::vector<DensityGrid>& group_b, GridDistance dist,
                                  int n_permutations, Rng& rng, bool parallel) {
    if (group_a.size() < 2 || group_b.size() < 2)
        throw std::invalid_argument("group_permutation: need >= 2 grids per group");
    std::size_t cells = group_a.front().mass.size();
    std::vector<const std::vector<double>*> pool;
    for (const auto& g : group_a) pool.push_back(&g.mass);
    for (const auto& g : group_b) pool.push_back(&g.mass);
    for (const auto* g : pool)
        if (g->size() != cells)
            throw std::invalid_argument("group_permutation: mismatched grid sizes");

    std::size_t na = group_a.size(), total = pool.size();
    auto stat_for = [&](const std::vector<std::size_t>& order) {
        std::vector<const std::vector<double>*> ga, gb;
        for (std::size_t i = 0; i < total; ++i)
            (i < na ? ga : gb).push_back(pool[order[i]]);
        return density_distance(mean_grid(ga), mean_grid(gb), dist);
    };

    std::vector<std::size_t> identity(total);
    std::iota(identity.begin(), identity.end(), 0);
    double obs = stat_for(identity);
    std::uint64_t seed = rng.next_u64();

    int count = count_exceedances(
        n_permutations,
        [&](int i) {
            Rng r = Rng::substream(seed, static_cast<std::uint64_t>(i));
            std::vector<std::size_t> order = identity;
            r.shuffle(order);
            return stat_for(order) >= obs;
        },
        parallel);

    TestResult res;
    res.statistic = obs;
    res.n_permutations = n_permutations;
    res.p_value = static_cast<double>(count + 1) / (n_permutations + 1);
    res.method = std::string("group_permutation/") + grid_distance_name(dist);
    return res;
}

/// Magnitude of a mean-delta map on the chosen distance scale. L1 reads the
/// deltas directly; JSD reconstructs the two distributions around a uniform
/// base (M +- delta/2, clamped and renormalized) and takes their distance.
double delta_magnitude(const std::vector<double>& mean_delta, GridDistance dist) {
    if (dist == GridDistance::L1) {
        double s = 0.0;
        for (double v : mean_delta) s += std::fabs(v);
        return s;
    }
    std::size_t c = mean_delta.size();
    std::vector<double> p(c), q(c);
    double base = 1.0 / static_cast<double>(c);
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        p[i] = std::max(0.0, base + mean_delta[i] / 2.0);
        q[i] = std::max(0.0, base - mean_delta[i] / 2.0);
        sp += p[i];
        sq += q[i];
    }
    if (sp <= 0.0 || sq <= 0.0) return 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        p[i] /= sp;
        q[i] /= sq;
    }
    return density_distance(p, q, GridDistance::JSD);
}

TestResult sign_flip_impl(const std::vector<std::vector<double>>& deltas, GridDistance dist,
                          int n_permutations, Rng& rng, bool parallel) {
    if (deltas.size() < 2)
        throw std::invalid_argument("sign_flip_permutation: need >= 2 runs");
    std::size_t cells = deltas.front().size();
    for (const auto& d : deltas)
        if (d.size() != cells)
            throw std::invalid_argument("sign_flip_permutation: mismatched grid sizes");

    std::size_t n = deltas.size();
    std::vector<double> mean(cells, 0.0);
    for (const auto& d : deltas)
        for (std::size_t c = 0; c < cells; ++c) mean[c] += d[c];
    for (double& v : mean) v /= static_cast<double>(n);
    double obs = delta_magnitude(mean, dist);
    std::uint64_t seed = rng.next_u64();

    int count = count_exceedances(
        n_permutations,
        [&](int i) {
            Rng r = Rng::substream(seed, static_cast<std::uint64_t>(i));
            std::vector<double> m(cells, 0.0);
            for (std::size_t k = 0; k < n; ++k) {
                double sign = r.bernoulli(0.5) ? 1.0 : -1.0;
                for (std::size_t c = 0; c < cells; ++c) m[c] += sign * deltas[k][c];
            }
            for (double& v : m) v /= static_cast<double>(n);
            return delta_magnitude(m, dist) >= obs;
        },
        parallel);

    TestResult res;
    res.statistic = obs;
    res.n_permutations = n_permutations;
    res.p_value = static_cast<double>(count + 1) / (n_permutations + 1);
    res.method = std::string("sign_flip_permutation/") + grid_distance_name(dist);
    return res;
}

std::vector<double> upper_triangle(const std::vector<std::vector<double>>& m,
                                   const std::vector<std::size_t>* perm = nullptr) {
    std::size_t n = m.size();
    std::vector<double> out;
    out.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            std::size_t a = perm ? (*perm)[i] : i;
            std::size_t b = perm ? (*perm)[j] : j;
            out.push_back(m[a][b]);
        }
    return out;
}

double matrix_correlation(const std::vector<double>& x, const std::vector<double>& y,
                          CorrelationKind kind) {
    return kind == CorrelationKind::Pearson ? pearson(x, y) : spearman(x, y);
}

}  // namespace

TestResult permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                            int n_permutations, Rng& rng) {
    return permutation_test_impl(a, b, n_permutations, rng, true);
}

TestResult permutation_test_serial(const std::vector<double>& a, const std::vector<double>& b,
                                   int n_permutations, Rng& rng) {
    return permutation_test_impl(a, b, n_permutations, rng, false);
}

TestResult group_permutation(const std::vector<DensityGrid>& group_a,
                             const std::vector<DensityGrid>& group_b, GridDistance dist,
                             int n_permutations, Rng& rng) {
    return group_permutation_impl(group_a, group_b, dist, n_permutations, rng, true);
}

TestResult group_permutation_serial(const std::vector<DensityGrid>& group_a,
                                    const std::vector<DensityGrid>& group_b, GridDistance dist,
                                    int n_permutations, Rng& rng) {
    return group_permutation_impl(group_a, group_b, dist, n_permutations, rng, false);
}

TestResult sign_flip_permutation(const std::vector<std::vector<double>>& deltas,
                                 GridDistance dist, int n_permutations, Rng& rng) {
    return sign_flip_impl(deltas, dist, n_permutations, rng, true);
}

TestResult sign_flip_permutation_serial(const std::vector<std::vector<double>>& deltas,
                                        GridDistance dist, int n_permutations, Rng& rng) {
    return sign_flip_impl(deltas, dist, n_permutations, rng, false);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson: mismatched or short samples");
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::invalid_argument("pearson: zero variance");
    return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman: mismatched or short samples");
    std::vector<double> rx = average_ranks(x), ry = average_ranks(y);
    return pearson(rx, ry);  // throws on zero rank variance
}

TestResult mantel(const std::vector<std::vector<double>>& dx,
                  const std::vector<std::vector<double>>& dy, int n_permutations, Rng& rng,
                  CorrelationKind kind) {
    std::size_t n = dx.size();
    if (n < 3 || dy.size() != n) throw std::invalid_argument("mantel: bad matrix sizes");
    for (std::size_t i = 0; i < n; ++i)
        if (dx[i].size() != n || dy[i].size() != n)
            throw std::invalid_argument("mantel: non-square matrix");

    std::vector<double> vx = upper_triangle(dx), vy = upper_triangle(dy);
    double obs = matrix_correlation(vx, vy, kind);  // throws when degenerate
    std::uint64_t seed = rng.next_u64();

    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    int count = count_exceedances(
        n_permutations,
        [&](int i) {
            Rng r = Rng::substream(seed, static_cast<std::uint64_t>(i));
            std::vector<std::size_t> perm = identity;
            r.shuffle(perm);
            std::vector<double> px = upper_triangle(dx, &perm);
            double rp = matrix_correlation(px, vy, kind);
            return std::fabs(rp) >= std::fabs(obs);
        },
        true);

    TestResult res;
    res.statistic = obs;
    res.n_permutations = n_permutations;
    res.p_value = static_cast<double>(count + 1) / (n_permutations + 1);
    res.method = kind == CorrelationKind::Pearson ? "mantel/pearson" : "mantel/spearman";
    return res;
}

double density_distance(const std::vector<double>& p, const std::vector<double>& q,
                        GridDistance kind) {
    if (p.size() != q.size()) throw std::invalid_argument("density_distance: size mismatch");
    if (kind == GridDistance::L1) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
        return s;
    }
    double klp = 0.0, klq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double m = (p[i] + q[i]) / 2.0;
        if (p[i] > 0.0) klp += p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) klq += q[i] * std::log2(q[i] / m);
    }
    double jsd = 0.5 * klp + 0.5 * klq;
    return std::sqrt(std::max(0.0, jsd));
}

double density_distance(const DensityGrid& p, const DensityGrid& q, GridDistance kind) {
    return density_distance(p.mass, q.mass, kind);
}

}  // namespace escape4d
