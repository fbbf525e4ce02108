// Timing harness: parallel kernels against the serial reference, for one
// field expansion and for a full ensemble partition-sum sweep.
// Usage: cascadelab_bench [level] [replicates]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cascadelab/analysis.hpp"
#include "cascadelab/cascade.hpp"
#include "cascadelab/generator.hpp"

using namespace cascadelab;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Repeats fn until ~0.2 s elapsed and reports seconds per call.
template <typename Fn>
double time_per_call(Fn&& fn) {
    fn(); // warm-up
    int calls = 0;
    auto const start = std::chrono::steady_clock::now();
    double elapsed = 0.0;
    while (elapsed < 0.2) {
        fn();
        ++calls;
        elapsed = seconds_since(start);
    }
    return elapsed / calls;
}

} // namespace

int main(int argc, char** argv) {
    int const level = argc > 1 ? std::atoi(argv[1]) : 16;
    int const replicates = argc > 2 ? std::atoi(argv[2]) : 64;
#ifdef _OPENMP
    int const threads = omp_get_max_threads();
#else
    int const threads = 1;
#endif
    std::printf("level %d, replicates %d, threads %d\n\n", level, replicates, threads);

    Generator const gen = Generator::lognormal(2, 0.2);
    StreamKey const key{12345, 0};

    std::printf("%-34s %12s %12s %8s\n", "kernel", "serial s", "parallel s", "speedup");
    volatile double sink = 0.0;

    double const serial_field = time_per_call([&] {
        CascadeField const f = simulate_reference(gen, level, key);
        sink = sink + f.masses.back();
    });
    double const parallel_field = time_per_call([&] {
        CascadeField const f = simulate(gen, level, key);
        sink = sink + f.masses.back();
    });
    std::printf("%-34s %12.4f %12.4f %8.2f\n", "field expansion", serial_field, parallel_field,
                serial_field / parallel_field);

    Ensemble const ens(gen, level > 4 ? level - 4 : level, replicates, 777);
    std::vector<double> sums(static_cast<std::size_t>(replicates));
    auto sweep_body = [&](int k, CascadeField const& f) {
        sums[static_cast<std::size_t>(k)] = partition_function(f, 2.0);
    };
    double const serial_sweep = time_per_call([&] { ens.run_serial(sweep_body); });
    double const parallel_sweep = time_per_call([&] { ens.run(sweep_body); });
    std::printf("%-34s %12.4f %12.4f %8.2f\n", "ensemble partition sweep", serial_sweep,
                parallel_sweep, serial_sweep / parallel_sweep);

    return 0;
}
