// Times the serial reference against the OpenMP batch kernel on the same
// scenario set and checks that both produce identical outcomes.
//
//   bench_batch [scenarios=64] [duration_s=120] [repeats=3]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "safecase/batch.hpp"

namespace {

using namespace safecase;

std::vector<ScenarioSpec> make_specs(int count, std::int64_t duration_ms) {
    std::vector<ScenarioSpec> specs;
    for (int i = 0; i < count; ++i) {
        ScenarioSpec s;
        s.id = "BENCH-" + std::to_string(1000 + i);
        s.scenario_class = "SC-BENCH";
        s.seed = 0x5eed0000ULL + static_cast<std::uint64_t>(i);
        s.duration_ms = duration_ms;
        s.segments = {{Region::Urban, Surface::Dry, 2.0, 60.0, true},
                      {Region::Suburban, Surface::Wet, 1.5, 80.0, true},
                      {Region::Rural, Surface::Dry, 0.5, 70.0, false}};
        s.llp.noise = 0.03;
        s.llp.pos_noise_m = 0.2;
        s.injections = {{InjectionKind::GpsDriftRamp, duration_ms / 4, duration_ms / 4, 4.0, std::nullopt},
                        {InjectionKind::Weather, duration_ms / 2, duration_ms / 8, 0.5, std::nullopt}};
        specs.push_back(s);
    }
    return specs;
}

template <typename F>
double best_seconds(int repeats, F&& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    const int count = argc > 1 ? std::atoi(argv[1]) : 64;
    const std::int64_t duration_ms = (argc > 2 ? std::atoll(argv[2]) : 120) * 1000;
    const int repeats = argc > 3 ? std::atoi(argv[3]) : 3;
    if (count <= 0 || duration_ms <= 0 || repeats <= 0) {
        std::fprintf(stderr, "usage: bench_batch [scenarios] [duration_s] [repeats]\n");
        return 2;
    }
    const auto specs = make_specs(count, duration_ms);
    const MonitorConfig cfg;

    std::vector<ScenarioOutcome> serial, parallel;
    const double ts = best_seconds(repeats, [&] { serial = run_batch_serial(specs, cfg); });
    const double tp = best_seconds(repeats, [&] { parallel = run_batch(specs, cfg); });

    bool same = serial.size() == parallel.size();
    for (std::size_t i = 0; same && i < serial.size(); ++i)
        same = serial[i].run == parallel[i].run && serial[i].report == parallel[i].report;

    const double ticks = static_cast<double>(count) * static_cast<double>(duration_ms / 10);
    std::printf("scenarios %d x %lld s, threads %d\n", count, static_cast<long long>(duration_ms / 1000),
                omp_get_max_threads());
    std::printf("serial    %8.3f s  %10.3g ticks/s\n", ts, ticks / ts);
    std::printf("openmp    %8.3f s  %10.3g ticks/s  speedup %.2fx\n", tp, ticks / tp, ts / tp);
    std::printf("outcomes  %s\n", same ? "identical" : "DIFFER");
    return same ? 0 : 1;
}
