#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covert/channel.hpp"
#include "covert/infodiv.hpp"
#include "covert/lpd.hpp"
#include "covert/sim.hpp"

using namespace covert;

namespace {

SimConfig bsc_config(long long n, int trials, double log_m) {
    SimConfig cfg;
    cfg.channel = reduce(make_bsc(0.11));
    cfg.n = n;
    cfg.delta = 1.0;
    cfg.trials = trials;
    cfg.log_message_count = log_m;
    cfg.master_seed = 42;
    return cfg;
}

}  // namespace

TEST_CASE("trial seeds are stable and well spread") {
    CHECK(trial_seed(1, 0) == trial_seed(1, 0));
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
    CHECK(trial_seed(0, 0) != 0);
}

TEST_CASE("exact binary total variation") {
    CHECK(exact_binary_tv(0.3, 0.1, 1) == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(exact_binary_tv(0.3, 0.1, 2) == doctest::Approx(0.32).epsilon(1e-14));
    CHECK(exact_binary_tv(0.32, 0.18, 7) ==
          doctest::Approx(0.34364082729984008).epsilon(1e-13));
    CHECK(exact_binary_tv(0.25, 0.25, 50) == 0.0);
    const double tv = exact_binary_tv(0.14, 0.11, 400);
    CHECK(tv >= 0.0);
    CHECK(tv <= 1.0);
}

TEST_CASE("dmc trials: parallel and serial runs are identical") {
    ReducedChannel rch = reduce(make_bsc(0.11));
    LResult lres = solve_L(rch);
    SimConfig cfg = bsc_config(500, 50, 16.0);
    CovertInputSpec spec = build_covert_input(rch, lres, 500, 1.0);

    SimReport par = run_dmc_trials(cfg, spec);
    cfg.parallel = false;
    SimReport ser = run_dmc_trials(cfg, spec);
    CHECK(par.error_rate == ser.error_rate);
    CHECK(par.error_rate_ci95 == ser.error_rate_ci95);
    CHECK(par.tv_exact == ser.tv_exact);

    CHECK(par.kl_spent <= 1.0);
    REQUIRE(par.tv_exact.has_value());
    CHECK(*par.tv_exact <= pinsker_tv_bound(par.kl_spent) + 1e-12);
    CHECK(par.normalized_rate ==
          doctest::Approx(16.0 / std::sqrt(500.0)).epsilon(1e-12));
    CHECK(par.message_count == doctest::Approx(std::exp(16.0)).epsilon(1e-12));
    CHECK(par.error_rate >= 0.0);
    CHECK(par.error_rate <= 1.0);
    CHECK(par.trials == 50);

    // same seed, same result
    cfg.parallel = true;
    SimReport again = run_dmc_trials(cfg, spec);
    CHECK(again.error_rate == par.error_rate);
}

TEST_CASE("dmc trials validate their configuration") {
    ReducedChannel rch = reduce(make_bsc(0.11));
    LResult lres = solve_L(rch);
    CovertInputSpec spec = build_covert_input(rch, lres, 500, 1.0);

    SimConfig cfg = bsc_config(400, 10, 16.0);  // n mismatch
    CHECK_THROWS_AS(run_dmc_trials(cfg, spec), std::invalid_argument);
    cfg = bsc_config(500, 0, 16.0);
    CHECK_THROWS_AS(run_dmc_trials(cfg, spec), std::invalid_argument);
    cfg = bsc_config(500, 10, 0.5);  // fewer than two messages
    CHECK_THROWS_AS(run_dmc_trials(cfg, spec), std::invalid_argument);
}

TEST_CASE("literal decoding path for wider outputs") {
    Channel ter = parse_channel(R"({
        "off": 0,
        "matrix": [[0.37, 0.01, 0.62], [0.62, 0.37, 0.01], [0.01, 0.62, 0.37]]
    })");
    ReducedChannel rch = reduce(ter);
    LResult lres = solve_L(rch);

    SimConfig cfg;
    cfg.channel = rch;
    cfg.n = 60;
    cfg.delta = 1.0;
    cfg.trials = 30;
    cfg.log_message_count = std::log(4.0);
    cfg.master_seed = 9;
    CovertInputSpec spec = build_covert_input(rch, lres, 60, 1.0);

    SimReport par = run_dmc_trials(cfg, spec);
    CHECK_FALSE(par.tv_exact.has_value());
    CHECK(par.error_rate >= 0.0);
    CHECK(par.error_rate <= 1.0);
    cfg.parallel = false;
    CHECK(run_dmc_trials(cfg, spec).error_rate == par.error_rate);

    // the closed-form competitor tail does not cover 3-atom outputs,
    // and literal sampling refuses astronomically many messages
    cfg.parallel = true;
    cfg.log_message_count = 50.0;
    CHECK_THROWS_AS(run_dmc_trials(cfg, spec), std::invalid_argument);
}

TEST_CASE("awgn trials") {
    SimConfig cfg;
    cfg.channel = AwgnChannel{1.0};
    cfg.n = 1000;
    cfg.delta = 1.0;
    cfg.trials = 60;
    cfg.log_message_count = 0.8 * std::sqrt(1000.0);
    cfg.master_seed = 5;
    AwgnCodebookSpec spec = achievability_schedule(1000, 1.0, 1.0);

    SimReport par = run_awgn_trials(cfg, spec);
    CHECK(par.kl_spent <= 1.0);
    CHECK_FALSE(par.tv_exact.has_value());
    CHECK(par.error_rate >= 0.0);
    CHECK(par.error_rate <= 1.0);
    cfg.parallel = false;
    SimReport ser = run_awgn_trials(cfg, spec);
    CHECK(ser.error_rate == par.error_rate);

    SimConfig wrong = cfg;
    wrong.channel = reduce(make_bsc(0.2));
    CHECK_THROWS_AS(run_awgn_trials(wrong, spec), std::invalid_argument);
}

TEST_CASE("rate sweep bisects a reliable rate per blocklength") {
    SimConfig cfg;
    cfg.channel = reduce(make_bsc(0.11));
    cfg.delta = 1.0;
    cfg.trials = 100;
    cfg.master_seed = 11;
    // at blocklengths this short the codeword-weight randomness dominates the
    // info-density variance; a wider offset keeps the miss rate off the floor
    cfg.threshold_offset = 0.3;

    const std::vector<long long> ns = {300, 1200};
    auto rows = sqrt_law_sweep(cfg, ns, 0.3);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(r.error_rate <= 0.3 + 1e-12);
        CHECK(r.log_message_count >= std::log(2.0));
        CHECK(r.normalized_rate ==
              doctest::Approx(r.log_message_count /
                              std::sqrt(static_cast<double>(r.n)))
                  .epsilon(1e-12));
        CHECK_FALSE(r.at_floor);
    }
    // quadrupling n roughly doubles the bisected rate
    const double ratio = rows[1].log_message_count / rows[0].log_message_count;
    CHECK(ratio >= 1.1);
    CHECK(ratio <= 3.8);

    // bit-identical on repeat
    auto rows2 = sqrt_law_sweep(cfg, ns, 0.3);
    CHECK(rows2[0].log_message_count == rows[0].log_message_count);
    CHECK(rows2[1].log_message_count == rows[1].log_message_count);

    CHECK_THROWS_AS(sqrt_law_sweep(cfg, ns, 1.5), std::invalid_argument);

    // the literal path cannot rescale cached trials
    Channel ter = parse_channel(R"({
        "off": 0,
        "matrix": [[0.37, 0.01, 0.62], [0.62, 0.37, 0.01], [0.01, 0.62, 0.37]]
    })");
    SimConfig tcfg;
    tcfg.channel = reduce(ter);
    tcfg.delta = 1.0;
    tcfg.trials = 10;
    CHECK_THROWS_AS(sqrt_law_sweep(tcfg, {50}, 0.3), std::invalid_argument);
}
