#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "covert/channel.hpp"
#include "covert/infodiv.hpp"

using namespace covert;

TEST_CASE("kl against frozen values and conventions") {
    CHECK(kl({0.75, 0.25}, {0.5, 0.5}) ==
          doctest::Approx(0.13081203594113697).epsilon(1e-14));
    CHECK(kl({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    CHECK(kl({0.0, 1.0}, {0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    // 0 log 0 = 0, support violation gives +inf
    CHECK(kl({1.0, 0.0}, {1.0, 0.0}) == 0.0);
    CHECK(std::isinf(kl({0.5, 0.5}, {1.0, 0.0})));
    CHECK(kl({0.3, 0.7}, {0.1, 0.9}) >= 0.0);
    CHECK_THROWS_AS(kl({0.5, 0.5}, {1.0}), std::invalid_argument);
}

TEST_CASE("chi2_half frozen values") {
    CHECK(chi2_half({0.75, 0.25}, {0.5, 0.5}) == doctest::Approx(0.125).epsilon(1e-15));
    // BSC(0.1) rows: 0.5 * 0.8^2 * (1/0.9 + 1/0.1) = 32/9
    CHECK(chi2_half({0.1, 0.9}, {0.9, 0.1}) ==
          doctest::Approx(32.0 / 9.0).epsilon(1e-14));
    CHECK(chi2_half({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    CHECK_THROWS_AS(chi2_half({0.5, 0.5}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("chi2_half is the local quadratic model of kl") {
    const std::vector<double> q = {0.6, 0.3, 0.1};
    const std::vector<double> r = {0.2, 0.3, 0.5};
    for (double t : {1e-2, 1e-3, 1e-4}) {
        std::vector<double> p(3);
        for (int y = 0; y < 3; ++y) p[y] = (1 - t) * q[y] + t * r[y];
        const double ratio = kl(p, q) / (t * t * chi2_half(r, q));
        CHECK(ratio == doctest::Approx(1.0).epsilon(20 * t));
    }
}

TEST_CASE("entropy") {
    CHECK(entropy({0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(entropy({1.0, 0.0}) == 0.0);
}

TEST_CASE("output marginal and mutual information") {
    Channel bsc = make_bsc(0.1);
    const std::vector<double> uniform = {0.5, 0.5};
    const auto q = output_marginal(uniform, bsc);
    CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mutual_information(uniform, bsc) ==
          doctest::Approx(0.36806420716849708).epsilon(1e-14));
    CHECK(mutual_information({1.0, 0.0}, bsc) == 0.0);
    CHECK_THROWS_AS(output_marginal({1.0}, bsc), std::invalid_argument);
}

TEST_CASE("llr variance frozen value") {
    CHECK(llr_variance({0.9, 0.1}, {0.5, 0.5}) ==
          doctest::Approx(0.43450162589252955).epsilon(1e-14));
    CHECK(llr_variance({0.5, 0.5}, {0.5, 0.5}) == 0.0);
    CHECK_THROWS_AS(llr_variance({0.5, 0.5}, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("pinsker bound") {
    CHECK(pinsker_tv_bound(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pinsker_tv_bound(0.0) == 0.0);
    CHECK_THROWS_AS(pinsker_tv_bound(-1e-3), std::invalid_argument);
}
