#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covert/awgn.hpp"

using namespace covert;

TEST_CASE("gaussian divergence closed form") {
    // rho = sigma2: kl = 1/2 - (1/2) ln 2
    CHECK(gaussian_kl(1.0, 1.0) == doctest::Approx(0.15342640972002736).epsilon(1e-15));
    CHECK(gaussian_kl(3.0, 1.5) == doctest::Approx(gaussian_kl(2.0, 1.0)).epsilon(1e-15));
    CHECK(gaussian_kl(0.0, 2.0) == 0.0);
    CHECK(gaussian_kl(1e-9, 1.0) > 0.0);
    CHECK(gaussian_kl(2.0, 1.0) > gaussian_kl(1.0, 1.0));
    CHECK_THROWS_AS(gaussian_kl(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_kl(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("converse power bound brackets the budget") {
    const double rho = converse_power_bound(1000000, 1.0, 1.0);
    const double target = 1.0 / 1000000.0;
    CHECK(gaussian_kl(rho, 1.0) <= target);
    CHECK(gaussian_kl(rho * (1.0 + 1e-9), 1.0) > target);
    CHECK(converse_power_bound(100, 0.0, 1.0) == 0.0);

    // the bound in snr units does not depend on the noise power
    const double u1 = converse_power_bound(5000, 0.7, 1.0) / 1.0;
    const double u2 = converse_power_bound(5000, 0.7, 2.0) / 2.0;
    const double uh = converse_power_bound(5000, 0.7, 0.5) / 0.5;
    CHECK(u2 == doctest::Approx(u1).epsilon(1e-14));
    CHECK(uh == doctest::Approx(u1).epsilon(1e-14));
}

TEST_CASE("achievability schedule") {
    const long long n = 100000;
    AwgnCodebookSpec s = achievability_schedule(n, 1.0, 2.0);
    CHECK(s.rho_n == doctest::Approx(2.0 * 2.0 * std::sqrt(1.0 / n)).epsilon(1e-15));
    const double u = s.rho_n / 2.0;
    CHECK(s.per_letter_kl == doctest::Approx(0.5 * u - 0.5 * std::log1p(u)).epsilon(1e-13));
    // spends nearly, but never more than, the budget
    CHECK(n * s.per_letter_kl <= 1.0);
    CHECK(n * s.per_letter_kl >= 1.0 - u);
    CHECK(s.info_density_mean ==
          doctest::Approx(std::sqrt(double(n)) * 0.5 * std::log1p(u)).epsilon(1e-13));
    CHECK(s.info_density_var == doctest::Approx(u / (1.0 + u)).epsilon(1e-13));

    CHECK_THROWS_AS(achievability_schedule(0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(achievability_schedule(10, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("awgn scaling constant is one") { CHECK(awgn_L() == 1.0); }
