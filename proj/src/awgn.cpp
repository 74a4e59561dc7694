#include "covert/awgn.hpp"

#include <cmath>
#include <stdexcept>

namespace covert {

namespace {

// kl in terms of the snr u = rho/sigma2; keeping the search in u makes every
// schedule quantity an exact function of u alone, hence bit-identical
// across noise variances.
double kl_of_snr(double u) { return 0.5 * u - 0.5 * std::log1p(u); }

}  // namespace

double gaussian_kl(double rho, double sigma2) {
    if (sigma2 <= 0.0) throw std::invalid_argument("noise variance must be positive");
    if (rho < 0.0) throw std::invalid_argument("signal power must be nonnegative");
    return kl_of_snr(rho / sigma2);
}

double converse_power_bound(long long n, double delta, double sigma2) {
    if (n < 1) throw std::invalid_argument("blocklength must be positive");
    if (delta < 0.0) throw std::invalid_argument("divergence budget must be nonnegative");
    if (sigma2 <= 0.0) throw std::invalid_argument("noise variance must be positive");
    const double target = delta / static_cast<double>(n);
    if (target == 0.0) return 0.0;

    double hi = 1.0;
    while (kl_of_snr(hi) <= target) hi *= 2.0;
    double lo = 0.0;
    for (int b = 0; b < 200; ++b) {
        const double mid = 0.5 * (lo + hi);
        (kl_of_snr(mid) <= target ? lo : hi) = mid;
    }
    return lo * sigma2;  // feasible side: kl(lo * sigma2, sigma2) <= delta/n
}

AwgnCodebookSpec achievability_schedule(long long n, double delta, double sigma2) {
    if (n < 1) throw std::invalid_argument("blocklength must be positive");
    if (delta < 0.0) throw std::invalid_argument("divergence budget must be nonnegative");
    if (sigma2 <= 0.0) throw std::invalid_argument("noise variance must be positive");

    AwgnCodebookSpec spec;
    spec.n = n;
    spec.delta = delta;
    spec.sigma2 = sigma2;

    const double u = 2.0 * std::sqrt(delta / static_cast<double>(n));  // rho_n / sigma2
    spec.rho_n = u * sigma2;
    // log(1+a) >= a - a^2/2 gives n * kl <= n * u^2/4 = delta
    spec.per_letter_kl = kl_of_snr(u);
    spec.info_density_mean =
        std::sqrt(static_cast<double>(n)) * 0.5 * std::log1p(u);
    spec.info_density_var = u / (1.0 + u);  // = rho_n / (rho_n + sigma2)
    return spec;
}

double awgn_L() { return 1.0; }

}  // namespace covert
