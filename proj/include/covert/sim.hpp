#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "covert/awgn.hpp"
#include "covert/channel.hpp"
#include "covert/lpd.hpp"

namespace covert {

// Random-codebook threshold-decoder experiment. Codewords are i.i.d. from the
// covert input (DMC) or N(0, rho_n) (AWGN); the decoder declares the unique
// message whose information density sum_i log(W(y_i|x_i)/Q_n(y_i)) / sqrt(n)
// exceeds sqrt(n) * I(P_n, W) * (1 - threshold_offset).
//
// |M| is carried in log form: at the operating points of interest
// log|M| = rate_factor * L * sqrt(n delta) reaches hundreds of nats, so the
// per-trial confusion event is evaluated in closed conditional form,
// P(any competitor exceeds | y) = 1 - (1 - q(y))^(|M|-1), with q(y) computed
// exactly (binomial tails) for <=2-atom codebook supports and by saddlepoint
// for Gaussian codebooks. Literal competitor sampling is used for small |M|
// with wider supports.

struct SimConfig {
    std::variant<ReducedChannel, AwgnChannel> channel;
    long long n = 1;
    double delta = 1.0;
    double log_message_count = 0.0;  // log|M| in nats, |M| >= 2
    int trials = 100;
    std::uint64_t master_seed = 0;
    double threshold_offset = 0.15;
    bool parallel = true;            // OpenMP across trials; results identical either way
};

struct SimReport {
    double error_rate = 0.0;
    double error_rate_ci95 = 0.0;          // 95% half-width (normal; Wilson when errors < 10)
    double kl_spent = 0.0;                 // n * per-letter kl, exact product-measure value
    std::optional<double> tv_exact;        // binary-output DMC only
    double normalized_rate = 0.0;          // log|M| / sqrt(n delta)
    double log_message_count = 0.0;
    double message_count = 0.0;            // exp(log|M|), may be astronomically large
    int trials = 0;
};

// Exact total variation |Q_mu^n - Q0^n|_TV for binary-output channels via the
// binomial sufficient statistic, summed in log domain.
double exact_binary_tv(double q1_on, double q1_off, long long n);

// Per-trial RNG stream: splitmix64 keyed by (master_seed, trial); identical
// results for any thread count or schedule.
std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t trial);

SimReport run_dmc_trials(const SimConfig& cfg, const CovertInputSpec& spec);

SimReport run_awgn_trials(const SimConfig& cfg, const AwgnCodebookSpec& spec);

struct SweepRow {
    long long n = 0;
    double log_message_count = 0.0;  // largest log|M| with error <= target
    double error_rate = 0.0;
    double normalized_rate = 0.0;    // log|M*| / sqrt(n delta)
    double kl_spent = 0.0;
    bool at_floor = false;           // even |M| = 2 exceeded the target error
};

// For each n: bisects the largest log|M| whose estimated error rate stays
// below `target_error`. Trial draws are shared across candidate |M| (the
// cached per-trial miss flag and competitor tail make the error monotone in
// |M|), so the bisection is deterministic and cheap.
std::vector<SweepRow> sqrt_law_sweep(const SimConfig& cfg_template,
                                     const std::vector<long long>& n_values,
                                     double target_error = 0.05);

}  // namespace covert
