// Benchmark: serial vs OpenMP permutation kernels. Both paths must agree
// bit-for-bit; the serial path is the reference the tests compare against.

#include <chrono>
#include <cstdio>

#include "escape4d/stats.hpp"

using namespace escape4d;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::vector<double> sample(Rng& rng, int n, double shift) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal() + shift;
    return v;
}

DensityGrid random_grid(Rng& rng, int b) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 200; ++i) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
    return density(pts, b, 10.0, 10.0);
}

}  // namespace

int main() {
    Rng rng(4242);
    std::vector<double> a = sample(rng, 200, 0.0), b = sample(rng, 200, 0.3);

    Rng r1(1), r2(1);
    auto t0 = Clock::now();
    TestResult serial = permutation_test_serial(a, b, 20000, r1);
    double serial_ms = ms_since(t0);
    t0 = Clock::now();
    TestResult parallel = permutation_test(a, b, 20000, r2);
    double parallel_ms = ms_since(t0);
    std::printf("permutation_test  N=20000  serial %.1f ms  parallel %.1f ms  speedup %.2fx  %s\n",
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                serial.p_value == parallel.p_value ? "match" : "MISMATCH");

    std::vector<DensityGrid> ga, gb;
    for (int i = 0; i < 15; ++i) ga.push_back(random_grid(rng, 16));
    for (int i = 0; i < 15; ++i) gb.push_back(random_grid(rng, 16));
    Rng r3(2), r4(2);
    t0 = Clock::now();
    serial = group_permutation_serial(ga, gb, GridDistance::JSD, 3000, r3);
    serial_ms = ms_since(t0);
    t0 = Clock::now();
    parallel = group_permutation(ga, gb, GridDistance::JSD, 3000, r4);
    parallel_ms = ms_since(t0);
    std::printf("group_permutation N=3000   serial %.1f ms  parallel %.1f ms  speedup %.2fx  %s\n",
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                serial.p_value == parallel.p_value ? "match" : "MISMATCH");

    std::vector<std::vector<double>> deltas;
    for (int i = 0; i < 30; ++i) {
        DensityGrid p = random_grid(rng, 16), q = random_grid(rng, 16);
        std::vector<double> d(p.mass.size());
        for (std::size_t c = 0; c < d.size(); ++c) d[c] = p.mass[c] - q.mass[c];
        deltas.push_back(std::move(d));
    }
    Rng r5(3), r6(3);
    t0 = Clock::now();
    serial = sign_flip_permutation_serial(deltas, GridDistance::L1, 3000, r5);
    serial_ms = ms_since(t0);
    t0 = Clock::now();
    parallel = sign_flip_permutation(deltas, GridDistance::L1, 3000, r6);
    parallel_ms = ms_since(t0);
    std::printf("sign_flip         N=3000   serial %.1f ms  parallel %.1f ms  speedup %.2fx  %s\n",
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                serial.p_value == parallel.p_value ? "match" : "MISMATCH");
    return 0;
}
