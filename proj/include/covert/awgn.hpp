#pragma once

namespace covert {

struct AwgnChannel {
    double sigma2 = 1.0;  // noise variance, > 0
};

// kl(N(0, rho + sigma2) || N(0, sigma2)) = rho/(2 sigma2) - 0.5 log(1 + rho/sigma2).
double gaussian_kl(double rho, double sigma2);

// Largest per-letter power rho with gaussian_kl(rho, sigma2) <= delta/n
// (bisection; gaussian_kl is increasing in rho).
double converse_power_bound(long long n, double delta, double sigma2);

struct AwgnCodebookSpec {
    long long n = 0;
    double delta = 0.0;
    double sigma2 = 1.0;
    double rho_n = 0.0;              // per-letter power 2 sigma2 sqrt(delta/n)
    double per_letter_kl = 0.0;      // n * per_letter_kl <= delta by log(1+a) >= a - a^2/2
    double info_density_mean = 0.0;  // sqrt(n)/2 * log(1 + rho_n/sigma2), in sqrt(n)-normalized nats
    double info_density_var = 0.0;   // rho_n / (rho_n + sigma2)
};

// Gaussian random-codebook schedule achieving the sqrt-law with L = 1.
AwgnCodebookSpec achievability_schedule(long long n, double delta, double sigma2);

// Scaling constant of the AWGN channel (exactly 1, all sigma2).
double awgn_L();

}  // namespace covert
