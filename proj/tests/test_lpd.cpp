#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "covert/capacity.hpp"
#include "covert/channel.hpp"
#include "covert/infodiv.hpp"
#include "covert/lpd.hpp"

using namespace covert;

namespace {

Channel ternary_counterexample() {
    return parse_channel(R"({
        "off": 0,
        "matrix": [[0.37, 0.01, 0.62], [0.62, 0.37, 0.01], [0.01, 0.62, 0.37]]
    })");
}

}  // namespace

TEST_CASE("classify separates the two regimes") {
    CaseLabel bsc = classify(reduce(make_bsc(0.1)));
    CHECK(bsc.kind == OffCase::NonRedundantOff);
    // hull is the single point (0.1, 0.9); distance from (0.9, 0.1) is sqrt(1.28)
    CHECK(bsc.residual == doctest::Approx(std::sqrt(1.28)).epsilon(1e-9));

    CaseLabel idle = classify(reduce(make_binary_with_idle(0.1)));
    CHECK(idle.kind == OffCase::RedundantOff);
    CHECK(idle.residual <= 1e-7);
    REQUIRE(idle.mixture_witness.has_value());
    const auto& w = *idle.mixture_witness;
    CHECK(w[0] == 0.0);
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(w[2] == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("solve_L closed forms and frozen values") {
    LResult bsc = solve_L(reduce(make_bsc(0.11)));
    // sqrt(2 p (1-p)) * ln((1-p)/p)
    CHECK(bsc.L == doctest::Approx(0.92513817015462696).epsilon(1e-12));
    CHECK(bsc.maximizer[1] == 1.0);
    CHECK(bsc.solver_gap == 0.0);
    CHECK(bsc.oracle_checked);

    LResult ter = solve_L(reduce(ternary_counterexample()));
    CHECK(ter.L == doctest::Approx(0.61633817459709506).epsilon(1e-9));
    CHECK(ter.maximizer[1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(ter.induced_output[0] == doctest::Approx(0.62).epsilon(1e-6));
    CHECK(ter.solver_gap <= 1e-7);
    CHECK(ter.oracle_checked);

    CHECK_THROWS_AS(solve_L(reduce(make_binary_with_idle(0.1))), reduction_error);
}

TEST_CASE("variance bound and tangent certificate on the ternary channel") {
    ReducedChannel rch = reduce(ternary_counterexample());
    CapacityResult cap = blahut_arimoto(rch.ch, 1e-11);
    CHECK(variance_bound(rch, cap) ==
          doctest::Approx(0.65571298031188741).epsilon(1e-8));

    TangentCertificate cert = tangent_certificate(rch, cap);
    CHECK_FALSE(cert.tight);
    CHECK(cert.residual_linf == doctest::Approx(0.048283926793978).epsilon(1e-6));
    CHECK(cert.s[0] == doctest::Approx(0.105059662492).epsilon(1e-8));
    CHECK(cert.s[1] == doctest::Approx(0.0389486294641).epsilon(1e-8));
    CHECK(cert.s[2] == doctest::Approx(-0.144008291956).epsilon(1e-8));
    CHECK(cert.alpha[1] == doctest::Approx(0.22710294279198875).epsilon(1e-6));
    CHECK(cert.alpha[2] == 0.0);
}

TEST_CASE("tangent certificate is tight for the BSC") {
    ReducedChannel rch = reduce(make_bsc(0.1));
    CapacityResult cap = blahut_arimoto(rch.ch, 1e-11);
    TangentCertificate cert = tangent_certificate(rch, cap);
    CHECK(cert.tight);
    CHECK(cert.residual_linf <= 1e-7);
    CHECK(variance_bound(rch, cap) ==
          doctest::Approx(solve_L(rch).L).epsilon(1e-9));
}

TEST_CASE("geodesic points and hull membership") {
    ReducedChannel rch = reduce(ternary_counterexample());
    CapacityResult cap = blahut_arimoto(rch.ch, 1e-11);
    const std::vector<double>& q0 = rch.q0();
    const std::vector<double>& qs = cap.output_dist;

    auto at0 = geodesic_point(q0, qs, 0.0);
    auto at1 = geodesic_point(q0, qs, 1.0);
    for (int y = 0; y < 3; ++y) {
        CHECK(at0[y] == doctest::Approx(q0[y]).epsilon(1e-14));
        CHECK(at1[y] == doctest::Approx(qs[y]).epsilon(1e-14));
    }
    // log-linear interpolation of likelihood ratios
    auto mid = geodesic_point(q0, qs, 0.4);
    CHECK(std::log(mid[0] / mid[2]) ==
          doctest::Approx(0.6 * std::log(q0[0] / q0[2]) + 0.4 * std::log(qs[0] / qs[2]))
              .epsilon(1e-12));

    CHECK_THROWS_AS(geodesic_point(q0, qs, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(geodesic_point(q0, {0.5, 0.5}, 0.5), std::invalid_argument);

    CHECK(output_hull_distance(rch, q0) <= 1e-9);
    // the curve leaves the output polytope immediately (Fig. 4 phenomenon)
    auto near0 = geodesic_point(q0, qs, 1e-3);
    CHECK(output_hull_distance(rch, near0) ==
          doctest::Approx(6.46963434381e-05).epsilon(1e-3));
}

TEST_CASE("finite-n constrained capacity against the 1-D oracle") {
    ReducedChannel rch = reduce(make_bsc(0.11));
    FiniteNResult r = finite_n_constrained_capacity(rch, 0.01);
    CHECK(r.value_nats == doctest::Approx(0.0876583186562).epsilon(1e-6));
    CHECK(r.gap <= 1e-10);
    CHECK(r.input_dist[1] == doctest::Approx(0.05988449398).epsilon(1e-4));

    // slack budget: unconstrained capacity is reached
    FiniteNResult wide = finite_n_constrained_capacity(rch, 1.0);
    CapacityResult cap = blahut_arimoto(rch.ch, 1e-11);
    CHECK(wide.value_nats == doctest::Approx(cap.capacity_nats).epsilon(1e-8));

    FiniteNResult zero = finite_n_constrained_capacity(rch, 0.0);
    CHECK(zero.value_nats == 0.0);
    CHECK(zero.input_dist[rch.off()] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("covert input calibration spends the budget exactly") {
    ReducedChannel rch = reduce(make_bsc(0.11));
    LResult lres = solve_L(rch);
    CovertInputSpec spec = build_covert_input(rch, lres, 1000, 1.0);
    const double spent = 1000.0 * spec.exact_per_letter_kl;
    CHECK(spent <= 1.0);
    CHECK(spent >= 1.0 - 1e-9);
    CHECK_FALSE(spec.underspent);
    CHECK(spec.mu > 0.0);
    CHECK(spec.mu < 1.0);
    CHECK(spec.p_n[0] == doctest::Approx(1.0 - spec.mu).epsilon(1e-12));
    CHECK(spec.q_n[1] == doctest::Approx(0.11 + 0.78 * spec.mu).epsilon(1e-9));

    // one letter cannot spend a budget of 10 even at mu = 1
    CovertInputSpec tiny = build_covert_input(rch, lres, 1, 10.0);
    CHECK(tiny.underspent);
    CHECK(tiny.mu == 1.0);

    CovertInputSpec none = build_covert_input(rch, lres, 100, 0.0);
    CHECK(none.mu == 0.0);
    CHECK(none.exact_per_letter_kl == 0.0);
}

TEST_CASE("grid search oracle agrees with the solver") {
    ReducedChannel kary = reduce(make_kary_uniform_error(3, 0.2));
    const double solver = solve_L(kary).L;
    const double grid = grid_search_L(kary, 1e-2, 1e-5, true);
    CHECK(grid == doctest::Approx(solver).epsilon(1e-4));
    // deterministic under parallel evaluation
    CHECK(grid_search_L(kary, 1e-2, 1e-5, false) == grid);
}
