#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "escape4d/rng.hpp"
#include "escape4d/trajectory.hpp"

namespace escape4d {

inline constexpr int kPermutationN = 5000;
inline constexpr int kGridPermutationN = 3000;

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int n_permutations = 0;  // 0 for exact or analytic methods
    std::string method;
    bool two_sided = true;
    bool degenerate = false;  // no-evidence fallback (constant data, all-zero diffs)
};

enum class GridDistance { JSD, L1 };
const char* grid_distance_name(GridDistance d);

/// Rank-sum test, statistic = min(U1, U2). Exact enumeration for
/// n1 + n2 <= 12, otherwise normal approximation with tie correction.
TestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b);

/// Paired test on x - y, zeros excluded, W = min(W+, W-). Exact sign-pattern
/// enumeration for n <= 15 after zero removal, otherwise normal approximation.
TestResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sample permutation test on |mean(a) - mean(b)|,
/// p = (exceedances + 1) / (N + 1).
TestResult permutation_test(const std::vector<double>& a, const std::vector<double>& b,
                            int n_permutations, Rng& rng);
TestResult permutation_test_serial(const std::vector<double>& a, const std::vector<double>& b,
                                   int n_permutations, Rng& rng);

/// Group-label permutation on mean density grids, statistic =
/// distance(mean A, mean B).
TestResult group_permutation(const std::vector<DensityGrid>& group_a,
                             const std::vector<DensityGrid>& group_b, GridDistance dist,
                             int n_permutations, Rng& rng);
TestResult group_permutation_serial(const std::vector<DensityGrid>& group_a,
                                    const std::vector<DensityGrid>& group_b, GridDistance dist,
                                    int n_permutations, Rng& rng);

/// Paired sign-flip permutation over per-run grid deltas. The statistic is
/// the magnitude of the mean delta map: L1 = sum |mean delta_c|, JSD =
/// distance between the uniform-base reconstructions M +- mean delta / 2.
TestResult sign_flip_permutation(const std::vector<std::vector<double>>& deltas,
                                 GridDistance dist, int n_permutations, Rng& rng);
TestResult sign_flip_permutation_serial(const std::vector<std::vector<double>>& deltas,
                                        GridDistance dist, int n_permutations, Rng& rng);

enum class CorrelationKind { Pearson, Spearman };

/// Mantel matrix-correlation test; rows/columns of dx permuted jointly,
/// two-sided via |r_perm| >= |r_obs|. Throws on degenerate matrices.
TestResult mantel(const std::vector<std::vector<double>>& dx,
                  const std::vector<std::vector<double>>& dy, int n_permutations, Rng& rng,
                  CorrelationKind kind = CorrelationKind::Pearson);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

/// Pearson correlation of average ranks. Throws on zero rank variance.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Average ranks (1-based, ties share the mean rank).
std::vector<double> average_ranks(const std::vector<double>& v);

/// JSD distance sqrt(0.5 KL(P||M) + 0.5 KL(Q||M)) base 2, in [0,1];
/// or L1 = sum |p_c - q_c|, in [0,2]. Throws on size mismatch.
double density_distance(const DensityGrid& p, const DensityGrid& q, GridDistance kind);
double density_distance(const std::vector<double>& p, const std::vector<double>& q,
                        GridDistance kind);

}  // namespace escape4d
