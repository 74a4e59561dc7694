#pragma once

#include <vector>

#include "covert/channel.hpp"

namespace covert {

struct CapacityResult {
    double capacity_nats = 0.0;
    std::vector<double> input_dist;
    std::vector<double> output_dist;   // marginal of input_dist through W
    std::vector<double> kkt_slacks;    // capacity_nats - kl(W(.|x), output_dist)
    int iterations = 0;
    double residual = 0.0;             // certified upper-lower bound gap
};

// Blahut-Arimoto from the uniform input. Stops when
// max_x kl(W(.|x), Q_k) - I(P_k, W) <= tol (certified two-sided bound).
CapacityResult blahut_arimoto(const Channel& ch, double tol = 1e-9,
                              int max_iter = 2000000);

struct FullSupportCondition {
    bool holds = false;
    std::vector<double> witness;  // capacity-achieving input with max-min mass (when holds)
    double min_mass = 0.0;
};

// Tests whether some capacity-achieving input uses every input symbol:
// maximize min_x P(x) over {P : PW = Q*, P(x) = 0 where the KKT slack > 1e-6}.
// Holds iff the optimum exceeds 1e-9.
FullSupportCondition check_condition_all_inputs(const Channel& ch,
                                                const CapacityResult& cap);

// Case-1 constrained capacity: maximize I(P,W) over {P : P(off) = 0, PW = Q0}.
// Pinning the output marginal makes I(P,W) = sum_x P(x) kl(W(.|x), Q0),
// linear in P, so this is a dense LP over the fiber polytope.
// Throws reduction_error when the feasible set is empty (Case 2 channel).
CapacityResult constrained_capacity_redundant(const ReducedChannel& rch,
                                              double tol = 1e-10);

}  // namespace covert
