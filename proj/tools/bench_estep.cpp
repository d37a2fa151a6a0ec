// Apache License, Version 2.0, refer to LICENSE.txt
//
// Benchmark of the expectation-step kernels: the plain serial reference
// against the tuned loop at one and at all hardware threads. Also reports
// the largest responsibility discrepancy between the two formulations.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <thread>

#include "ifsem/em.hpp"
#include "ifsem/estep.hpp"
#include "ifsem/ifs_model.hpp"
#include "ifsem/rng.hpp"

using namespace ifsem;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n = 2000;
    int reps = 5;
    if (argc > 1) n = std::strtoull(argv[1], nullptr, 10);
    if (argc > 2) reps = std::atoi(argv[2]);

    Rng rng(7);
    const IfsModel model = init_random(3, 6, 2, rng);
    const CodeTable table = build_code_table(model, model.depth, true);
    const PointMatrix batch = sample(model, n, rng);
    const int hw = static_cast<int>(std::thread::hardware_concurrency());

    std::printf("e-step benchmark: n=%zu codes=%lld reps=%d\n", n,
                static_cast<long long>(table.size()), reps);

    Responsibilities ref, fast;
    const double t_ref = time_ms([&] { ref = e_step_serial_reference(table, batch); }, reps);
    const double t_one = time_ms([&] { fast = e_step(table, batch, 1); }, reps);
    const double t_all = time_ms([&] { fast = e_step(table, batch, hw); }, reps);

    double max_diff = 0.0;
    for (std::size_t i = 0; i < ref.values.size(); ++i)
        max_diff = std::max(max_diff, std::abs(ref.values[i] - fast.values[i]));

    std::printf("  serial reference : %9.3f ms\n", t_ref);
    std::printf("  kernel, 1 worker : %9.3f ms  (%.2fx vs reference)\n", t_one, t_ref / t_one);
    std::printf("  kernel, %2d worker: %9.3f ms  (%.2fx vs reference)\n", hw, t_all, t_ref / t_all);
    std::printf("  max |P_ref - P_kernel| = %.3e\n", max_diff);
    return max_diff < 1e-9 ? 0 : 1;
}
