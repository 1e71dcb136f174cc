#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "escape4d/stats.hpp"

using namespace escape4d;

namespace {

DensityGrid grid_of(std::vector<double> mass) {
    DensityGrid g;
    g.b = static_cast<int>(std::sqrt(static_cast<double>(mass.size())));
    g.mass = std::move(mass);
    return g;
}

}  // namespace

TEST_CASE("average ranks with ties") {
    std::vector<double> v{3.0, 1.0, 3.0, 2.0};
    std::vector<double> r = average_ranks(v);
    CHECK(r[0] == doctest::Approx(3.5));
    CHECK(r[1] == doctest::Approx(1.0));
    CHECK(r[2] == doctest::Approx(3.5));
    CHECK(r[3] == doctest::Approx(2.0));
}

TEST_CASE("Mann-Whitney exact: separated samples give p = 0.1") {
    TestResult r = mann_whitney_u({1, 2, 3}, {4, 5, 6});
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(0.1));
    CHECK(r.method == "mann_whitney_u/exact");
}

TEST_CASE("Mann-Whitney exact: singletons give p = 1") {
    TestResult r = mann_whitney_u({1}, {2});
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("Mann-Whitney: identical multisets split U evenly") {
    TestResult r = mann_whitney_u({1, 2, 3, 4}, {1, 2, 3, 4});
    CHECK(r.statistic == doctest::Approx(8.0));  // n1 n2 / 2
    CHECK(r.p_value == doctest::Approx(1.0));
}

TEST_CASE("Mann-Whitney: jointly constant samples are degenerate") {
    TestResult r = mann_whitney_u({5, 5, 5}, {5, 5});
    CHECK(r.degenerate);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("Mann-Whitney is invariant under monotone transforms") {
    std::vector<double> a{1, 4, 9}, b{2, 5, 20};
    TestResult r1 = mann_whitney_u(a, b);
    auto f = [](double x) { return std::exp(x / 3.0); };
    std::vector<double> fa, fb;
    for (double x : a) fa.push_back(f(x));
    for (double x : b) fb.push_back(f(x));
    TestResult r2 = mann_whitney_u(fa, fb);
    CHECK(r1.statistic == r2.statistic);
    CHECK(r1.p_value == r2.p_value);
}

TEST_CASE("Mann-Whitney normal approximation on larger samples") {
    std::vector<double> a, b;
    for (int i = 0; i < 20; ++i) {
        a.push_back(i);
        b.push_back(i + 12.0);
    }
    TestResult r = mann_whitney_u(a, b);
    CHECK(r.method == "mann_whitney_u/normal");
    CHECK(r.p_value < 0.01);
    CHECK(r.p_value > 0.0);
}

TEST_CASE("Wilcoxon exact: d = [1,2,3] gives p = 0.25") {
    TestResult r = wilcoxon_signed_rank({1, 2, 3}, {0, 0, 0});
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == doctest::Approx(0.25));
    CHECK(r.method == "wilcoxon_signed_rank/exact");
}

TEST_CASE("Wilcoxon: sign symmetry") {
    TestResult pos = wilcoxon_signed_rank({1, 2, 3}, {0, 0, 0});
    TestResult neg = wilcoxon_signed_rank({0, 0, 0}, {1, 2, 3});
    CHECK(pos.statistic == neg.statistic);
    CHECK(pos.p_value == neg.p_value);
}

TEST_CASE("Wilcoxon: identical pairs are degenerate") {
    TestResult r = wilcoxon_signed_rank({1, 2, 3}, {1, 2, 3});
    CHECK(r.degenerate);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("Wilcoxon: zero differences are excluded, not counted") {
    // only one informative pair remains; exact with n=1
    TestResult r = wilcoxon_signed_rank({1, 2, 9}, {1, 2, 3});
    CHECK_FALSE(r.degenerate);
    CHECK(r.p_value == doctest::Approx(1.0));  // both sign patterns tie at W=0
}

TEST_CASE("permutation test: floor at zero exceedances is 1/5001") {
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back(i * 0.01);
        b.push_back(100.0 + i * 0.01);
    }
    Rng rng(1);
    TestResult r = permutation_test(a, b, kPermutationN, rng);
    CHECK(r.p_value == doctest::Approx(1.0 / 5001.0));
    CHECK(r.n_permutations == kPermutationN);
}

TEST_CASE("permutation test: identical samples give p = 1") {
    std::vector<double> a{1, 2, 3, 4}, b{1, 2, 3, 4};
    Rng rng(2);
    TestResult r = permutation_test(a, b, 1000, rng);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("permutation test: deterministic under a fixed seed") {
    std::vector<double> a{1, 5, 3, 8, 2}, b{4, 9, 2, 7, 7};
    Rng r1(42), r2(42);
    TestResult t1 = permutation_test(a, b, 2000, r1);
    TestResult t2 = permutation_test(a, b, 2000, r2);
    CHECK(t1.p_value == t2.p_value);
    CHECK(t1.statistic == t2.statistic);
}

TEST_CASE("parallel permutation kernels match their serial references") {
    Rng base(77);
    std::vector<double> a, b;
    for (int i = 0; i < 40; ++i) {
        a.push_back(base.normal());
        b.push_back(base.normal() + 0.4);
    }
    Rng r1(5), r2(5);
    CHECK(permutation_test(a, b, 4000, r1).p_value ==
          permutation_test_serial(a, b, 4000, r2).p_value);

    std::vector<DensityGrid> ga, gb;
    for (int i = 0; i < 5; ++i) {
        ga.push_back(grid_of({0.4, 0.3, 0.2, 0.1}));
        gb.push_back(grid_of({0.1, 0.2, 0.3, 0.4}));
        ga.back().mass[0] += 0.01 * i;
        ga.back().mass[1] -= 0.01 * i;
    }
    Rng r3(6), r4(6);
    CHECK(group_permutation(ga, gb, GridDistance::L1, 2000, r3).p_value ==
          group_permutation_serial(ga, gb, GridDistance::L1, 2000, r4).p_value);

    std::vector<std::vector<double>> deltas;
    for (int i = 0; i < 8; ++i) deltas.push_back({0.1, -0.05, 0.02 * i, -0.01});
    Rng r5(7), r6(7);
    CHECK(sign_flip_permutation(deltas, GridDistance::JSD, 2000, r5).p_value ==
          sign_flip_permutation_serial(deltas, GridDistance::JSD, 2000, r6).p_value);
}

TEST_CASE("group permutation: floor is 1/3001; identical groups give p = 1") {
    // Groups big enough that label shuffles essentially never reproduce the
    // exact observed split, so zero exceedances hit the pseudo-count floor.
    std::vector<DensityGrid> ga, gb;
    for (int i = 0; i < 15; ++i) {
        double e = 0.001 * i;
        ga.push_back(grid_of({1.0 - e, e, 0.0, 0.0}));
        gb.push_back(grid_of({0.0, 0.0, e, 1.0 - e}));
    }
    Rng rng(3);
    TestResult r = group_permutation(ga, gb, GridDistance::JSD, kGridPermutationN, rng);
    CHECK(r.p_value == doctest::Approx(1.0 / 3001.0));

    Rng rng2(3);
    TestResult same = group_permutation(ga, ga, GridDistance::JSD, 500, rng2);
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);
}

TEST_CASE("group permutation rejects mismatched grids") {
    std::vector<DensityGrid> ga{grid_of({0.5, 0.5, 0, 0}), grid_of({0.5, 0.5, 0, 0})};
    std::vector<DensityGrid> gb{grid_of({1.0}), grid_of({1.0})};
    Rng rng(4);
    CHECK_THROWS_AS(group_permutation(ga, gb, GridDistance::L1, 100, rng),
                    std::invalid_argument);
}

TEST_CASE("sign flip: all-zero deltas give statistic 0 and p = 1") {
    std::vector<std::vector<double>> deltas(4, std::vector<double>(9, 0.0));
    Rng rng(5);
    TestResult r = sign_flip_permutation(deltas, GridDistance::L1, 500, rng);
    CHECK(r.statistic == 0.0);
    CHECK(r.p_value == 1.0);
}

TEST_CASE("sign flip: global sign inversion leaves p unchanged") {
    std::vector<std::vector<double>> deltas;
    for (int i = 0; i < 10; ++i) deltas.push_back({0.05, -0.02, 0.01 + 0.005 * i, -0.04});
    std::vector<std::vector<double>> flipped = deltas;
    for (auto& d : flipped)
        for (double& v : d) v = -v;
    for (GridDistance dist : {GridDistance::JSD, GridDistance::L1}) {
        Rng r1(8), r2(8);
        TestResult a = sign_flip_permutation(deltas, dist, 1000, r1);
        TestResult b = sign_flip_permutation(flipped, dist, 1000, r2);
        CHECK(a.statistic == doctest::Approx(b.statistic));
        CHECK(a.p_value == b.p_value);
    }
}

TEST_CASE("Mantel: identical non-constant matrices give r = 1") {
    std::vector<std::vector<double>> d{{0, 1, 2}, {1, 0, 3}, {2, 3, 0}};
    Rng rng(9);
    TestResult r = mantel(d, d, 500, rng);
    CHECK(r.statistic == doctest::Approx(1.0));
    CHECK(r.p_value > 0.0);
}

TEST_CASE("Mantel: constant off-diagonal is an error") {
    std::vector<std::vector<double>> d{{0, 1, 2}, {1, 0, 3}, {2, 3, 0}};
    std::vector<std::vector<double>> c{{0, 5, 5}, {5, 0, 5}, {5, 5, 0}};
    Rng rng(10);
    CHECK_THROWS_AS(mantel(d, c, 100, rng), std::invalid_argument);
}

TEST_CASE("Spearman examples") {
    CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
    CHECK(spearman({1, 2, 3, 4}, {9, 7, 5, 3}) == doctest::Approx(-1.0));
    CHECK(spearman({1, 2, 3}, {1, 3, 2}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(spearman({1, 2, 3}, {5, 5, 5}), std::invalid_argument);
}

TEST_CASE("density distance: identity, disjoint supports, known JSD value") {
    DensityGrid p = grid_of({1.0, 0.0, 0.0, 0.0});
    DensityGrid q = grid_of({0.0, 0.0, 0.0, 1.0});
    CHECK(density_distance(p, p, GridDistance::JSD) == 0.0);
    CHECK(density_distance(p, p, GridDistance::L1) == 0.0);
    CHECK(density_distance(p, q, GridDistance::JSD) == doctest::Approx(1.0));
    CHECK(density_distance(p, q, GridDistance::L1) == doctest::Approx(2.0));

    // direct evaluation of the KL sums for P=(1,0), Q=(.5,.5)
    std::vector<double> a{1.0, 0.0}, b{0.5, 0.5};
    double jsd_sq = 0.5 * (1.0 * std::log2(1.0 / 0.75)) +
                    0.5 * (0.5 * std::log2(0.5 / 0.75) + 0.5 * std::log2(0.5 / 0.25));
    CHECK(density_distance(a, b, GridDistance::JSD) ==
          doctest::Approx(std::sqrt(jsd_sq)));
    CHECK(density_distance(a, b, GridDistance::JSD) == doctest::Approx(0.5579).epsilon(1e-3));
}

TEST_CASE("density distance: symmetry and JSD triangle inequality spot checks") {
    Rng rng(12);
    for (int t = 0; t < 100; ++t) {
        auto rand_dist = [&] {
            std::vector<double> v(8);
            double total = 0.0;
            for (double& x : v) {
                x = rng.u01();
                total += x;
            }
            for (double& x : v) x /= total;
            return v;
        };
        std::vector<double> p = rand_dist(), q = rand_dist(), r = rand_dist();
        for (GridDistance kind : {GridDistance::JSD, GridDistance::L1})
            CHECK(density_distance(p, q, kind) == doctest::Approx(density_distance(q, p, kind)));
        CHECK(density_distance(p, r, GridDistance::JSD) <=
              density_distance(p, q, GridDistance::JSD) +
                  density_distance(q, r, GridDistance::JSD) + 1e-12);
    }
}
