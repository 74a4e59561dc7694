#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covert/capacity.hpp"
#include "covert/channel.hpp"
#include "covert/infodiv.hpp"

using namespace covert;

TEST_CASE("blahut_arimoto matches closed forms") {
    CapacityResult bsc = blahut_arimoto(make_bsc(0.1));
    CHECK(bsc.capacity_nats == doctest::Approx(0.36806420716849708).epsilon(1e-9));
    CHECK(bsc.input_dist[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(bsc.output_dist[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(bsc.residual <= 1e-9);

    CapacityResult kary = blahut_arimoto(make_kary_uniform_error(3, 0.2));
    CHECK(kary.capacity_nats == doctest::Approx(0.45958042901793283).epsilon(1e-9));

    // Z-channel, capacity ln(1 + (1-a) a^(a/(1-a))) at a = 0.3
    Channel z = parse_channel(
        R"({"off": 0, "matrix": [[1.0, 0.0], [0.3, 0.7]]})");
    CapacityResult zr = blahut_arimoto(z, 1e-11);
    CHECK(zr.capacity_nats == doctest::Approx(0.3491326435657886).epsilon(1e-8));
    CHECK(zr.input_dist[1] == doctest::Approx(0.421000606629).epsilon(1e-4));
}

TEST_CASE("blahut_arimoto certificate is two-sided") {
    Channel ch = parse_channel(
        R"({"off": 0, "matrix": [[0.7, 0.2, 0.1], [0.1, 0.6, 0.3], [0.2, 0.1, 0.7]]})");
    CapacityResult r = blahut_arimoto(ch, 1e-10);
    // upper bound max_x kl(W_x, Q*) and lower bound I(P, W) straddle the answer
    double upper = 0.0;
    for (std::size_t x = 0; x < ch.num_inputs(); ++x)
        upper = std::max(upper, kl(ch.matrix[x], r.output_dist));
    const double lower = mutual_information(r.input_dist, ch);
    CHECK(upper - lower <= 1e-10);
    CHECK(r.capacity_nats >= lower - 1e-15);
    CHECK(r.capacity_nats <= upper + 1e-15);
    for (std::size_t x = 0; x < ch.num_inputs(); ++x)
        CHECK(r.kkt_slacks[x] >= -1e-10);
}

TEST_CASE("full-support condition") {
    CapacityResult bsc_cap = blahut_arimoto(make_bsc(0.1));
    FullSupportCondition c = check_condition_all_inputs(make_bsc(0.1), bsc_cap);
    CHECK(c.holds);
    CHECK(c.min_mass == doctest::Approx(0.5).epsilon(1e-6));

    Channel kary = make_kary_uniform_error(3, 0.2);
    c = check_condition_all_inputs(kary, blahut_arimoto(kary));
    CHECK(c.holds);
    CHECK(c.min_mass == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    // middle row is strictly inside: its KKT slack is large, condition fails
    Channel dom = parse_channel(
        R"({"off": 0, "matrix": [[0.9, 0.1], [0.1, 0.9], [0.5, 0.5]]})");
    c = check_condition_all_inputs(dom, blahut_arimoto(dom));
    CHECK_FALSE(c.holds);
}

TEST_CASE("constrained capacity with a redundant off symbol") {
    ReducedChannel idle = reduce(make_binary_with_idle(0.1));
    CapacityResult r = constrained_capacity_redundant(idle);
    CHECK(r.capacity_nats == doctest::Approx(0.36806420716849708).epsilon(1e-9));
    CHECK(r.input_dist[idle.off()] == 0.0);
    CHECK(r.input_dist[1] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.input_dist[2] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.output_dist[0] == doctest::Approx(0.5).epsilon(1e-9));

    // asymmetric instance: off = 0.5 a + 0.5 b is the unique fiber point
    Channel asym = parse_channel(R"({
        "off": 0,
        "matrix": [[0.6, 0.4], [0.9, 0.1], [0.3, 0.7]]
    })");
    r = constrained_capacity_redundant(reduce(asym));
    CHECK(r.capacity_nats == doctest::Approx(0.20503802928608553).epsilon(1e-9));
    CHECK(r.input_dist[1] == doctest::Approx(0.5).epsilon(1e-9));

    // a BSC has no representation of Q0 by the other row
    CHECK_THROWS_AS(constrained_capacity_redundant(reduce(make_bsc(0.1))),
                    reduction_error);
}
