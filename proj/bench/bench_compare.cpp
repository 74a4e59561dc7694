// Compares the OpenMP kernels against their serial reference paths and
// checks that both produce bit-identical results. Not part of ctest; run
// manually: ./bench_compare [trials] [n]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "covert/channel.hpp"
#include "covert/lpd.hpp"
#include "covert/sim.hpp"

using namespace covert;

namespace {

template <typename F>
double timed(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

}  // namespace

int main(int argc, char** argv) {
    const int trials = argc > 1 ? std::atoi(argv[1]) : 2000;
    const long long n = argc > 2 ? std::atoll(argv[2]) : 5000;

    ReducedChannel rch = reduce(make_bsc(0.11));
    const LResult lres = solve_L(rch);
    const CovertInputSpec spec = build_covert_input(rch, lres, n, 1.0);

    SimConfig cfg;
    cfg.channel = rch;
    cfg.n = n;
    cfg.delta = 1.0;
    cfg.trials = trials;
    cfg.master_seed = 17;
    cfg.log_message_count = 0.8 * lres.L * std::sqrt(static_cast<double>(n));

    SimReport par, ser;
    cfg.parallel = true;
    const double t_par = timed([&] { par = run_dmc_trials(cfg, spec); });
    cfg.parallel = false;
    const double t_ser = timed([&] { ser = run_dmc_trials(cfg, spec); });

    std::printf("monte carlo   n=%lld trials=%d\n", n, trials);
    std::printf("  parallel %.3f s, serial %.3f s, speedup %.2fx\n", t_par, t_ser,
                t_ser / t_par);
    if (par.error_rate != ser.error_rate || par.error_rate_ci95 != ser.error_rate_ci95) {
        std::printf("  MISMATCH: parallel %.17g vs serial %.17g\n", par.error_rate,
                    ser.error_rate);
        return 1;
    }
    std::printf("  identical error rate %.6f\n", par.error_rate);

    ReducedChannel kary = reduce(make_kary_uniform_error(4, 0.2));
    double g_par = 0.0, g_ser = 0.0;
    const double t_gpar = timed([&] { g_par = grid_search_L(kary, 2e-3, 1e-6, true); });
    const double t_gser = timed([&] { g_ser = grid_search_L(kary, 2e-3, 1e-6, false); });
    std::printf("grid search   3-simplex at step 2e-3\n");
    std::printf("  parallel %.3f s, serial %.3f s, speedup %.2fx\n", t_gpar, t_gser,
                t_gser / t_gpar);
    if (g_par != g_ser) {
        std::printf("  MISMATCH: parallel %.17g vs serial %.17g\n", g_par, g_ser);
        return 1;
    }
    std::printf("  identical L %.9f\n", g_par);
    return 0;
}
